//! Parameter-space searches for exceptional eigenvalues.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfunction::g_exceptional_nd;
use crate::params::{Parity, RabiParams};
use crate::recurrence::{judd_coefficient, SeriesConfig};
use crate::rootfind::brent_with_values;

/// Coupling at which `E = m - g^2` is doubly degenerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JuddPoint {
    pub m: u64,
    pub g: f64,
    pub delta: f64,
    pub energy: f64,
    /// `|K_m(m)|` at the refined coupling.
    pub residual: f64,
}

/// Parameters where `G^(m)` of one parity vanishes: a non-degenerate
/// eigenvalue `E = m - g^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalNdPoint {
    pub m: u64,
    pub parity: Parity,
    pub g: f64,
    pub delta: f64,
    pub energy: f64,
    pub residual: f64,
}

fn sign_changes<F>(grid: &[f64], mut f: F, xtol: f64) -> Result<Vec<(f64, f64)>>
where
    F: FnMut(f64) -> Result<f64>,
{
    let vals: Vec<f64> = grid.iter().map(|&g| f(g)).collect::<Result<_>>()?;
    let mut roots = Vec::new();
    for k in 1..grid.len() {
        let (fa, fb) = (vals[k - 1], vals[k]);
        if fa == 0.0 {
            roots.push((grid[k - 1], 0.0));
        } else if fa * fb < 0.0 {
            let r = brent_with_values(&mut f, grid[k - 1], grid[k], fa, fb, xtol, 200)?;
            roots.push((r.x, r.fx));
        }
    }
    Ok(roots)
}

fn uniform(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    (0..=samples).map(|i| lo + (hi - lo) * i as f64 / samples as f64).collect()
}

/// Judd points with `m = 1..=m_max` at fixed `delta`, found along
/// `g in (0, g_max]` on `samples` subintervals per `m`.
pub fn judd_points(m_max: u64, delta: f64, g_max: f64, samples: usize) -> Result<Vec<JuddPoint>> {
    if !(g_max > 0.0) || samples < 2 || m_max == 0 {
        return Err(Error::InvalidParameter(format!(
            "need m_max >= 1, g_max > 0 and samples >= 2, got ({m_max}, {g_max}, {samples})"
        )));
    }
    let base = RabiParams::new(g_max, delta, Parity::Even)?;
    let grid = uniform(g_max * 1e-6, g_max, samples);
    let per_m: Vec<Vec<JuddPoint>> = (1..=m_max)
        .into_par_iter()
        .map(|m| {
            let f = |g: f64| judd_coefficient(m, &base.with_g(g));
            let roots = sign_changes(&grid, f, 1e-15)?;
            roots
                .into_iter()
                .map(|(g, _)| {
                    Ok(JuddPoint { m, g, delta, energy: m as f64 - g * g, residual: f(g)?.abs() })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(per_m.into_iter().flatten().collect())
}

/// Zeros of `G^(m)` for one parity over a `(g, delta)` grid: each `delta`
/// row is scanned along `g` and sign changes are refined by Brent.
pub fn exceptional_nd_scan(
    m: u64,
    parity: Parity,
    g_grid: &[f64],
    delta_grid: &[f64],
    cfg: &SeriesConfig,
) -> Result<Vec<ExceptionalNdPoint>> {
    if g_grid.len() < 2 || delta_grid.is_empty() {
        return Err(Error::InvalidParameter("scan needs at least two couplings and one delta".into()));
    }
    if g_grid.iter().chain(delta_grid).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter("scan grids must be positive".into()));
    }
    let rows: Vec<Vec<ExceptionalNdPoint>> = delta_grid
        .par_iter()
        .map(|&delta| {
            let base = RabiParams::new(g_grid[0], delta, parity)?;
            let f = |g: f64| g_exceptional_nd(m, &base.with_g(g), cfg).map(|e| e.value);
            let roots = sign_changes(g_grid, f, 1e-14)?;
            Ok(roots
                .into_iter()
                .map(|(g, fx)| ExceptionalNdPoint {
                    m,
                    parity,
                    g,
                    delta,
                    energy: m as f64 - g * g,
                    residual: fx.abs(),
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}
