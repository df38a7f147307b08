//! Identifiers and the scalar order coordinate shared by every layer.

use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Dense peer index in `0..n_peers`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PeerId(pub u32);

impl PeerId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for PeerId {
    fn from(i: usize) -> Self {
        PeerId(u32::try_from(i).expect("peer index exceeds u32"))
    }
}

impl fmt::Display for PeerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}", self.0)
    }
}

/// A transaction (or package of transactions) to be placed on the order axis.
///
/// The `index` identifies the transaction inside one simulation. The
/// `digest` is its content identity: it fixes the anchor `c(tx)` and keys
/// every random stream used on the transaction's behalf, so two
/// transactions with equal digests evolve identically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TransactionId {
    pub index: u64,
    #[serde(with = "hex_bytes")]
    pub digest: Vec<u8>,
}

impl TransactionId {
    pub fn new(index: u64, digest: impl Into<Vec<u8>>) -> Self {
        TransactionId {
            index,
            digest: digest.into(),
        }
    }

    /// Transaction whose digest is the SHA-256 of `content`.
    pub fn from_content(index: u64, content: &[u8]) -> Self {
        TransactionId::new(index, Sha256::digest(content).to_vec())
    }

    /// Transaction whose digest encodes `anchor` directly, so that
    /// [`TransactionId::anchor`] returns it (up to 2^-64).
    pub fn with_anchor(index: u64, anchor: f64) -> Self {
        let a = anchor.clamp(0.0, 1.0);
        // 2^64 · a saturates to u64::MAX at a = 1.
        let raw = (a * 18_446_744_073_709_551_616.0) as u64;
        TransactionId::new(index, raw.to_be_bytes().to_vec())
    }

    /// `c(tx)`: the first 8 digest bytes, big-endian, divided by 2^64.
    /// Short digests are zero-padded on the right.
    pub fn anchor(&self) -> f64 {
        let mut head = [0u8; 8];
        let n = self.digest.len().min(8);
        head[..n].copy_from_slice(&self.digest[..n]);
        u64::from_be_bytes(head) as f64 / 18_446_744_073_709_551_616.0
    }

    /// 64-bit stream key derived from the digest only.
    pub fn stream_key(&self) -> u64 {
        let h = Sha256::digest(&self.digest);
        u64::from_le_bytes(h[..8].try_into().unwrap())
    }

    pub fn digest_hex(&self) -> String {
        hex::encode(&self.digest)
    }
}

impl fmt::Display for TransactionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tx{}", self.index)
    }
}

mod hex_bytes {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(bytes: &[u8], s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&hex::encode(bytes))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<u8>, D::Error> {
        let s = String::deserialize(d)?;
        hex::decode(s).map_err(serde::de::Error::custom)
    }
}

/// One peer's belief about a transaction's position, a point of `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
#[serde(transparent)]
#[repr(transparent)]
pub struct OrderEstimate(f64);

impl OrderEstimate {
    pub const MIN: OrderEstimate = OrderEstimate(0.0);
    pub const MAX: OrderEstimate = OrderEstimate(1.0);

    /// Returns `None` outside `[0, 1]` (and for NaN).
    pub fn new(value: f64) -> Option<Self> {
        (0.0..=1.0).contains(&value).then_some(OrderEstimate(value))
    }

    /// Clamps into `[0, 1]`; NaN maps to 0.
    pub fn clamped(value: f64) -> Self {
        if value.is_nan() {
            OrderEstimate(0.0)
        } else {
            OrderEstimate(value.clamp(0.0, 1.0))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl From<OrderEstimate> for f64 {
    fn from(e: OrderEstimate) -> f64 {
        e.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Honest,
    Byzantine,
}
