//! Per-round distribution statistics and their CSV artifacts.
//!
//! Three files come out of one history, all sharing a stem:
//!
//! * `<stem>.csv` with `round,tx,mean,std,min,max,spread,converged`
//! * `<stem>.hist.csv` with `round,tx,bin_index,count`
//! * `<stem>.byz.csv` with `round,tx,value`, only when Byzantine values
//!   were captured
//!
//! Rows are ordered by transaction index, then round. Reals carry 9
//! significant digits.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{EdaError, Result};
use crate::sim::{check_convergence, Instance, SimConfig};
use crate::types::TransactionId;

pub const MAIN_HEADER: &str = "round,tx,mean,std,min,max,spread,converged";
pub const HIST_HEADER: &str = "round,tx,bin_index,count";
pub const BYZ_HEADER: &str = "round,tx,value";

#[derive(Debug, Clone, PartialEq)]
pub struct RoundStats {
    pub round: u32,
    pub tx: TransactionId,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// Honest estimate counts over equal-width bins of `[0, 1]`.
    pub histogram: Vec<u64>,
    pub byzantine_values: Option<Vec<f64>>,
    pub converged: bool,
}

/// Statistics over the honest peers of `instance`.
pub fn collect(instance: &Instance, round: u32, config: &SimConfig) -> RoundStats {
    let values = instance.honest_values();
    let n = values.len() as f64;
    let bins = config.histogram_bins.max(1);

    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);

    let mut histogram = vec![0u64; bins];
    for v in &values {
        histogram[bin_of(*v, bins)] += 1;
    }

    RoundStats {
        round,
        tx: instance.tx.clone(),
        mean,
        std: var.sqrt(),
        min,
        max,
        spread: max - min,
        histogram,
        byzantine_values: None,
        converged: check_convergence(instance, config.epsilon),
    }
}

/// Bin of `v ∈ [0, 1]`; `1.0` lands in the last bin.
pub fn bin_of(v: f64, bins: usize) -> usize {
    ((v * bins as f64) as usize).min(bins - 1)
}

/// Formats like C's `%.9g`.
pub fn fmt_sig(x: f64) -> String {
    const DIGITS: i32 = 9;
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    // Exponent after rounding to DIGITS significant digits.
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        let m = trim_zeros(mantissa.to_string());
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn sibling(destination: &Path, suffix: &str) -> PathBuf {
    let name = destination
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let stem = name.strip_suffix(".csv").unwrap_or(&name);
    destination.with_file_name(format!("{stem}.{suffix}.csv"))
}

/// Paths `emit_csv` writes for `destination`: main, histogram, Byzantine.
pub fn artifact_paths(destination: &Path) -> (PathBuf, PathBuf, PathBuf) {
    (
        destination.to_path_buf(),
        sibling(destination, "hist"),
        sibling(destination, "byz"),
    )
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| EdaError::io(path, e))
}

pub fn emit_csv(history: &[RoundStats], destination: &Path) -> Result<()> {
    if history.is_empty() {
        return Err(EdaError::EmptyHistory);
    }
    let mut rows: Vec<&RoundStats> = history.iter().collect();
    rows.sort_by(|a, b| a.tx.index.cmp(&b.tx.index).then(a.round.cmp(&b.round)));

    let (main_path, hist_path, byz_path) = artifact_paths(destination);

    write_file(&main_path, |w| {
        writeln!(w, "{MAIN_HEADER}")?;
        for s in &rows {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                s.round,
                s.tx.index,
                fmt_sig(s.mean),
                fmt_sig(s.std),
                fmt_sig(s.min),
                fmt_sig(s.max),
                fmt_sig(s.spread),
                s.converged
            )?;
        }
        Ok(())
    })?;

    write_file(&hist_path, |w| {
        writeln!(w, "{HIST_HEADER}")?;
        for s in &rows {
            for (bin, count) in s.histogram.iter().enumerate() {
                writeln!(w, "{},{},{},{}", s.round, s.tx.index, bin, count)?;
            }
        }
        Ok(())
    })?;

    if rows.iter().any(|s| s.byzantine_values.is_some()) {
        write_file(&byz_path, |w| {
            writeln!(w, "{BYZ_HEADER}")?;
            for s in &rows {
                for v in s.byzantine_values.iter().flatten() {
                    writeln!(w, "{},{},{}", s.round, s.tx.index, fmt_sig(*v))?;
                }
            }
            Ok(())
        })?;
    }
    Ok(())
}

fn write_file(
    path: &Path,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<()> {
    let mut w = create(path)?;
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| EdaError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{OrderEstimate, Role};
    use proptest::prelude::*;

    fn instance(vals: &[f64], roles: &[Role]) -> Instance {
        let est: Vec<_> = vals.iter().map(|&v| OrderEstimate::new(v).unwrap()).collect();
        Instance::from_estimates(TransactionId::with_anchor(0, 0.5), roles, &est)
    }

    fn stats(round: u32, tx: u64) -> RoundStats {
        RoundStats {
            round,
            tx: TransactionId::with_anchor(tx, 0.5),
            mean: 0.5,
            std: 0.1,
            min: 0.25,
            max: 0.75,
            spread: 0.5,
            histogram: vec![1, 0, 1],
            byzantine_values: None,
            converged: false,
        }
    }

    #[test]
    fn degenerate_distribution() {
        let s = collect(&instance(&[0.5; 10], &[Role::Honest; 10]), 0, &SimConfig::default());
        assert_eq!((s.mean, s.std, s.spread), (0.5, 0.0, 0.0));
        assert_eq!(s.histogram.len(), 100);
        assert_eq!(s.histogram[50], 10);
        assert_eq!(s.histogram.iter().sum::<u64>(), 10);
        assert!(s.converged);
    }

    #[test]
    fn two_point_distribution() {
        let s = collect(&instance(&[0.0, 1.0], &[Role::Honest; 2]), 3, &SimConfig::default());
        assert_eq!((s.mean, s.spread, s.round), (0.5, 1.0, 3));
        assert_eq!((s.histogram[0], s.histogram[99]), (1, 1));
        assert!(!s.converged);
    }

    #[test]
    fn byzantine_peers_excluded() {
        let roles = [Role::Honest, Role::Byzantine, Role::Honest];
        let s = collect(&instance(&[0.2, 1.0, 0.4], &roles), 0, &SimConfig::default());
        assert!((s.mean - 0.3).abs() < 1e-15);
        assert_eq!(s.max, 0.4);
        assert_eq!(s.histogram.iter().sum::<u64>(), 2);
    }

    #[test]
    fn sig_formatting() {
        assert_eq!(fmt_sig(0.0), "0");
        assert_eq!(fmt_sig(0.5), "0.5");
        assert_eq!(fmt_sig(1.0), "1");
        assert_eq!(fmt_sig(1.0 / 3.0), "0.333333333");
        assert_eq!(fmt_sig(2.0 / 3.0), "0.666666667");
        assert_eq!(fmt_sig(0.288675134594813), "0.288675135");
        assert_eq!(fmt_sig(1.23456789e-7), "1.23456789e-07");
        assert_eq!(fmt_sig(0.0001), "0.0001");
        assert_eq!(fmt_sig(0.00001), "1e-05");
        assert_eq!(fmt_sig(123456789.0), "123456789");
        assert_eq!(fmt_sig(1234567890.0), "1.23456789e+09");
        assert_eq!(fmt_sig(-0.25), "-0.25");
        assert_eq!(fmt_sig(0.9999999999), "1");
    }

    #[test]
    fn csv_cardinality() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("one.csv");
        emit_csv(&[stats(0, 0)], &dest).unwrap();
        let main = std::fs::read_to_string(&dest).unwrap();
        assert_eq!(main.lines().count(), 2);
        assert_eq!(main.lines().next().unwrap(), MAIN_HEADER);
        assert_eq!(main.lines().nth(1).unwrap(), "0,0,0.5,0.1,0.25,0.75,0.5,false");
        let hist = std::fs::read_to_string(dir.path().join("one.hist.csv")).unwrap();
        assert_eq!(hist.lines().count(), 4);
        assert!(!dir.path().join("one.byz.csv").exists());

        let history: Vec<_> = (0..2).flat_map(|tx| (0..10).map(move |r| stats(r, tx))).rev().collect();
        let dest = dir.path().join("many.csv");
        emit_csv(&history, &dest).unwrap();
        let main = std::fs::read_to_string(&dest).unwrap();
        let lines: Vec<_> = main.lines().collect();
        assert_eq!(lines.len(), 21);
        assert!(lines[1].starts_with("0,0,") && lines[10].starts_with("9,0,") && lines[11].starts_with("0,1,"));
    }

    #[test]
    fn byzantine_sidecar() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = stats(1, 0);
        s.byzantine_values = Some(vec![0.125, 1.0]);
        emit_csv(&[stats(0, 0), s], &dir.path().join("f.csv")).unwrap();
        let byz = std::fs::read_to_string(dir.path().join("f.byz.csv")).unwrap();
        assert_eq!(byz, "round,tx,value\n1,0,0.125\n1,0,1\n");
    }

    #[test]
    fn empty_history_rejected() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(emit_csv(&[], &dir.path().join("x.csv")), Err(EdaError::EmptyHistory)));
    }

    #[test]
    fn io_error_names_path() {
        let dir = tempfile::tempdir().unwrap();
        let dest = dir.path().join("missing").join("x.csv");
        let err = emit_csv(&[stats(0, 0)], &dest).unwrap_err();
        assert!(err.to_string().contains("missing"), "{err}");
    }

    proptest! {
        #[test]
        fn sig_round_trips_to_nine_digits(x in -1e12f64..1e12) {
            let back: f64 = fmt_sig(x).parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-9 * x.abs());
        }

        #[test]
        fn sig_round_trips_small(x in 0.0f64..1.0) {
            let back: f64 = fmt_sig(x).parse().unwrap();
            prop_assert!((back - x).abs() <= 5e-9 * x.abs());
        }
    }
}
