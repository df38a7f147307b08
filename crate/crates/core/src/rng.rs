//! Keyed random streams.
//!
//! Every random decision in a simulation draws from a stream addressed by
//! `(seed, purpose, transaction digest, round, peer)`. Nothing is shared
//! between streams, so the order in which transactions or peers are
//! processed cannot change any outcome.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::types::{PeerId, TransactionId};

pub type Stream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[repr(u64)]
pub enum Purpose {
    /// Round-0 initialization jitter.
    Init = 1,
    /// Per-round sampling and Byzantine emission.
    Gossip = 2,
    /// Choice of the Byzantine peer set.
    Roles = 3,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn absorb(state: u64, word: u64) -> u64 {
    splitmix64(state ^ splitmix64(word))
}

/// Stream factory for one simulation seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamSeed(pub u64);

impl StreamSeed {
    pub fn stream(self, purpose: Purpose, tx_key: u64, round: u32, peer: PeerId) -> Stream {
        let mut k = absorb(self.0, purpose as u64);
        k = absorb(k, tx_key);
        k = absorb(k, u64::from(round));
        k = absorb(k, u64::from(peer.0));
        ChaCha8Rng::seed_from_u64(k)
    }

    pub fn tx_stream(self, purpose: Purpose, tx: &TransactionId, round: u32, peer: PeerId) -> Stream {
        self.stream(purpose, tx.stream_key(), round, peer)
    }

    /// Stream not tied to any transaction.
    pub fn global(self, purpose: Purpose) -> Stream {
        self.stream(purpose, 0, 0, PeerId(0))
    }
}
