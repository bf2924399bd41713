//! Root counts of `G_+-` per pole interval.
//!
//! The counts are expected to lie in `{0, 1, 2}`, with no two adjacent
//! intervals both holding two roots and no two adjacent empty intervals.
//! This is an open conjecture, so departures are reported, not rejected.
//!
//! Where a pole is lifted (a Judd point, `K_m(m) = 0`) the degenerate level
//! sits on the integer and is not a zero of `G`, so the two intervals on
//! either side may both be empty. Such violations carry the lifted pole.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{scan_interval, Diagnostic, ScanConfig};
use crate::error::{Error, Result};
use crate::params::{Parity, RabiParams};
use crate::recurrence::judd_coefficient_scaled;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    /// More than two roots in one interval.
    CountAboveTwo,
    /// Two adjacent intervals with two roots each.
    AdjacentTwos,
    /// Two adjacent empty intervals.
    AdjacentEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusViolation {
    pub kind: ViolationKind,
    /// First interval `(n, n + 1)` involved.
    pub interval: u64,
    /// The integer between the two intervals, when its pole is lifted.
    pub lifted_pole: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroCensus {
    pub g: f64,
    pub delta: f64,
    pub parity: Parity,
    /// `counts[n]` = number of roots in `(n, n + 1)`.
    pub counts: Vec<usize>,
    /// Roots below the first pole (`x < 0`).
    pub below_zero: usize,
    /// Intervals with uncertified samples or a suspected double root.
    pub indeterminate_intervals: Vec<u64>,
    /// Integers `m >= 1` in range where `|K_m(m)|` vanishes within rounding.
    pub lifted_poles: Vec<u64>,
    pub violations: Vec<CensusViolation>,
}

impl ZeroCensus {
    pub fn intervals(&self) -> usize {
        self.counts.len()
    }
}

/// Relative threshold on `K_m(m)` for a lifted pole.
const LIFTED_TOL: f64 = 1e-10;

fn violations(counts: &[usize], lifted: &[u64]) -> Vec<CensusViolation> {
    let mut out = Vec::new();
    for (n, &c) in counts.iter().enumerate() {
        if c > 2 {
            out.push(CensusViolation { kind: ViolationKind::CountAboveTwo, interval: n as u64, lifted_pole: None });
        }
    }
    for (n, w) in counts.windows(2).enumerate() {
        let boundary = n as u64 + 1;
        let lifted_pole = lifted.contains(&boundary).then_some(boundary);
        if w[0] == 2 && w[1] == 2 {
            out.push(CensusViolation { kind: ViolationKind::AdjacentTwos, interval: n as u64, lifted_pole });
        }
        if w[0] == 0 && w[1] == 0 {
            out.push(CensusViolation { kind: ViolationKind::AdjacentEmpty, interval: n as u64, lifted_pole });
        }
    }
    out
}

fn census_one(g: f64, delta: f64, parity: Parity, x_max: f64, cfg: &ScanConfig) -> Result<ZeroCensus> {
    let p = RabiParams::new(g, delta, parity)?;
    if g <= 0.0 || delta <= 0.0 {
        return Err(Error::InvalidParameter(format!("census needs g > 0 and delta > 0, got ({g}, {delta})")));
    }
    let last = x_max.ceil().max(1.0) as i64;
    let mut counts = Vec::with_capacity(last as usize);
    let mut indeterminate = Vec::new();
    let below = scan_interval(-1, &p, cfg)?.brackets.len();
    for n in 0..last {
        let s = scan_interval(n, &p, cfg)?;
        let doubtful = s.indeterminate_samples > 0
            || s.diagnostics.iter().any(|d| matches!(d, Diagnostic::SuspectedDoubleRoot { .. }));
        if doubtful {
            indeterminate.push(n as u64);
        }
        counts.push(s.brackets.len());
    }
    let mut lifted = Vec::new();
    for m in 1..last as u64 {
        let (k, scale) = judd_coefficient_scaled(m, &p)?;
        if k.abs() < LIFTED_TOL * scale {
            lifted.push(m);
        }
    }
    let violations = violations(&counts, &lifted);
    Ok(ZeroCensus {
        g,
        delta,
        parity,
        counts,
        below_zero: below,
        indeterminate_intervals: indeterminate,
        lifted_poles: lifted,
        violations,
    })
}

/// Census over a grid of `(g, delta)` pairs, both parities, intervals up
/// to `x_max`. Output is ordered as the grid, even before odd.
pub fn zero_census(grid: &[(f64, f64)], x_max: f64, cfg: &ScanConfig) -> Result<Vec<ZeroCensus>> {
    if !(x_max > 0.0) {
        return Err(Error::InvalidParameter(format!("x_max must be > 0, got {x_max}")));
    }
    let tasks: Vec<(f64, f64, Parity)> =
        grid.iter().flat_map(|&(g, d)| Parity::BOTH.into_iter().map(move |p| (g, d, p))).collect();
    tasks.par_iter().map(|&(g, d, p)| census_one(g, d, p, x_max, cfg)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn adjacency_rules() {
        let v = violations(&[1, 2, 2, 0, 0, 3], &[]);
        let kinds: Vec<_> = v.iter().map(|c| (c.kind, c.interval)).collect();
        assert!(kinds.contains(&(ViolationKind::AdjacentTwos, 1)));
        assert!(kinds.contains(&(ViolationKind::AdjacentEmpty, 3)));
        assert!(kinds.contains(&(ViolationKind::CountAboveTwo, 5)));
        assert!(violations(&[1, 2, 1, 0, 1, 2, 0, 2], &[]).is_empty());
        assert_eq!(violations(&[0, 0, 1], &[1])[0].lifted_pole, Some(1));
    }

    #[test]
    fn empty_pair_around_a_lifted_pole() {
        // 4 g^2 + delta^2 = 1: the pole at x = 1 is lifted in both chains
        let c = zero_census(&[(0.3, 0.8)], 3.0, &ScanConfig::default()).unwrap();
        let odd = c.iter().find(|z| z.parity == Parity::Odd).unwrap();
        assert_eq!(odd.lifted_poles, vec![1]);
        assert_eq!(&odd.counts[..2], &[0, 0]);
        assert_eq!(odd.violations[0].lifted_pole, Some(1));
    }

    #[test]
    fn single_interval() {
        let c = zero_census(&[(0.7, 0.5)], 1.0, &ScanConfig::default()).unwrap();
        assert_eq!(c.len(), 2);
        assert!(c.iter().all(|z| z.intervals() == 1));
    }
}
