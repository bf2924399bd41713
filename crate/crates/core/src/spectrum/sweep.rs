//! Level curves over a coupling grid.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{full_spectrum, Spectrum, SpectrumConfig};
use crate::error::{Error, Result};
use crate::params::{Parity, RabiParams};
use crate::recurrence::judd_coefficient;
use crate::rootfind::brent;

/// The `index`-th level of one parity chain followed along the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCurve {
    pub parity: Parity,
    pub index: usize,
    pub points: Vec<(f64, f64)>,
}

/// Intersection of an even and an odd curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub g: f64,
    pub energy: f64,
    pub even_index: usize,
    pub odd_index: usize,
    /// Judd index `m` with `E = m - g^2` when the crossing was refined on
    /// the Judd condition.
    pub judd_m: Option<u64>,
    /// `|K_m(m)|` at the refined coupling.
    pub judd_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackingAmbiguity {
    pub parity: Parity,
    pub index: usize,
    pub g: f64,
    /// Previous-grid levels inside the match window (should be exactly one).
    pub candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub g_grid: Vec<f64>,
    pub spectra: Vec<Spectrum>,
    pub curves: Vec<LevelCurve>,
    pub crossings: Vec<Crossing>,
    pub ambiguities: Vec<TrackingAmbiguity>,
    /// Smallest gap between neighbouring levels of the same parity, per
    /// grid point.
    pub min_same_parity_gap: Vec<f64>,
}

fn check_grid(g_grid: &[f64]) -> Result<()> {
    if g_grid.is_empty() {
        return Err(Error::InvalidParameter("empty coupling grid".into()));
    }
    let inc = g_grid.windows(2).all(|w| w[1] > w[0]);
    let dec = g_grid.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::InvalidParameter("coupling grid must be strictly monotone".into()));
    }
    Ok(())
}

/// Slope bound `|dE/dg| <= 2 sqrt(x_max) + 4 g` from Hellmann-Feynman.
pub fn slope_bound(x_max: f64, g: f64) -> f64 {
    2.0 * x_max.max(0.0).sqrt() + 4.0 * g.abs()
}

/// Full spectra on every grid point, tracked into level curves, with
/// crossings of opposite-parity curves refined on the Judd condition.
pub fn sweep_coupling(base: &RabiParams, g_grid: &[f64], x_max: f64, cfg: &SpectrumConfig) -> Result<Sweep> {
    check_grid(g_grid)?;
    base.validate()?;
    let spectra: Vec<Spectrum> = g_grid
        .par_iter()
        .map(|&g| full_spectrum(&base.with_g(g), x_max, cfg))
        .collect::<Result<_>>()?;
    let omega = base.omega;

    let levels: Vec<[Vec<f64>; 2]> = spectra
        .iter()
        .map(|s| [s.energies(Parity::Even), s.energies(Parity::Odd)])
        .collect();

    let mut curves = Vec::new();
    let mut ambiguities = Vec::new();
    for (pi, parity) in Parity::BOTH.into_iter().enumerate() {
        let max_levels = levels.iter().map(|l| l[pi].len()).max().unwrap_or(0);
        for index in 0..max_levels {
            let mut points = Vec::new();
            for (k, l) in levels.iter().enumerate() {
                if let Some(&e) = l[pi].get(index) {
                    points.push((g_grid[k], e));
                    if k > 0 {
                        let dg = (g_grid[k] - g_grid[k - 1]).abs();
                        let window = slope_bound(x_max, g_grid[k].max(g_grid[k - 1]) / omega) * dg + 1e-9;
                        let candidates = levels[k - 1][pi].iter().filter(|&&p| (p - e).abs() <= window).count();
                        if candidates != 1 && levels[k - 1][pi].len() > index {
                            ambiguities.push(TrackingAmbiguity { parity, index, g: g_grid[k], candidates });
                        }
                    }
                }
            }
            curves.push(LevelCurve { parity, index, points });
        }
    }

    let mut crossings = Vec::new();
    for k in 1..g_grid.len() {
        let (ga, gb) = (g_grid[k - 1], g_grid[k]);
        let (ea, oa) = (&levels[k - 1][0], &levels[k - 1][1]);
        let (eb, ob) = (&levels[k][0], &levels[k][1]);
        for i in 0..ea.len().min(eb.len()) {
            for j in 0..oa.len().min(ob.len()) {
                let da = ea[i] - oa[j];
                let db = eb[i] - ob[j];
                // a crossing sitting exactly on a grid point is counted
                // in the interval that ends there
                let touches = db == 0.0 && da != 0.0;
                if !(da * db < 0.0 || touches) {
                    continue;
                }
                crossings.push(refine_crossing(base, ga, gb, da, db, (ea[i], eb[i]), i, j)?);
            }
        }
    }
    // ExceptionalD lines at the first grid point are crossings too
    if let Some(first) = spectra.first() {
        for l in first.lines.iter().filter(|l| l.degeneracy == 2) {
            let i = levels[0][0].iter().position(|&e| e == l.energy).unwrap_or(0);
            let j = levels[0][1].iter().position(|&e| e == l.energy).unwrap_or(0);
            let m = l.x.round() as u64;
            crossings.push(Crossing {
                g: g_grid[0],
                energy: l.energy,
                even_index: i,
                odd_index: j,
                judd_m: Some(m),
                judd_residual: l.residual,
            });
        }
    }
    crossings.sort_by(|a, b| a.g.total_cmp(&b.g).then(a.energy.total_cmp(&b.energy)));

    let min_same_parity_gap = levels
        .iter()
        .map(|l| {
            l.iter()
                .flat_map(|v| v.windows(2).map(|w| w[1] - w[0]))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();

    Ok(Sweep { g_grid: g_grid.to_vec(), spectra, curves, crossings, ambiguities, min_same_parity_gap })
}

#[allow(clippy::too_many_arguments)]
fn refine_crossing(
    base: &RabiParams,
    ga: f64,
    gb: f64,
    da: f64,
    db: f64,
    even: (f64, f64),
    i: usize,
    j: usize,
) -> Result<Crossing> {
    let omega = base.omega;
    let t = if da == db { 1.0 } else { da / (da - db) };
    let g_est = ga + t * (gb - ga);
    let e_est = even.0 + t * (even.1 - even.0);
    // work at unit mode frequency
    let p = base.rescaled();
    let (ga_r, gb_r, g_r) = (ga / omega, gb / omega, g_est / omega);
    let x_est = e_est / omega + g_r * g_r;
    let m = x_est.round().max(1.0) as u64;
    let judd = |g: f64| judd_coefficient(m, &p.with_g(g));
    let (lo, hi) = if ga_r < gb_r { (ga_r, gb_r) } else { (gb_r, ga_r) };
    let (ka, kb) = (judd(lo.max(1e-12))?, judd(hi)?);
    if ka * kb <= 0.0 {
        let root = brent(|g| judd(g), lo.max(1e-12), hi, 1e-14, 200)?;
        let g = root.x;
        return Ok(Crossing {
            g: g * omega,
            energy: (m as f64 - g * g) * omega,
            even_index: i,
            odd_index: j,
            judd_m: Some(m),
            judd_residual: judd(g)?.abs(),
        });
    }
    Ok(Crossing {
        g: g_est,
        energy: e_est,
        even_index: i,
        odd_index: j,
        judd_m: None,
        judd_residual: judd(g_r.max(1e-12))?.abs(),
    })
}
