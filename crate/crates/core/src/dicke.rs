//! Two- and three-qubit Dicke models: quasi-exact conditions for the
//! asymmetric two-qubit model at equal couplings, the one-photon exceptional
//! state, and oracle-driven coupling sweeps.
//!
//! Physical states of the two-qubit model use the basis
//! `|n> (x) |s1> (x) |s2>` with `|e> = (1, 0)`, index `4n + 2 s1 + s2`.
//! The reduced sector basis (see [`crate::oracle::build_dicke2`]) holds the
//! amplitudes of `|n, ++>` and `|n, +->` in the `sigma_x` eigenbasis; the
//! `|n, -->` and `|n, -+>` amplitudes follow from parity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::fullspace::dicke2_full;
use crate::oracle::{certify_cutoff, inverse_iteration, SectorModel, DEFAULT_MAX_CUTOFF};
use crate::params::{Dicke2Params, Dicke3Params, Parity};

/// Threshold on condition polynomials. They are evaluated directly, so only
/// rounding enters.
pub const TOL_Q: f64 = 1e-12;

/// Which factor of a quasi-exact condition vanished.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VanishingFactor {
    /// The `g`-dependent bracket (for `N = 1` it does not depend on `g`).
    Bracket,
    /// The linear factor in the qubit splittings; this is the
    /// permutation-symmetric singlet branch.
    Singlet,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiExactCondition {
    pub photon_number: u32,
    pub parity: Parity,
    /// Value tested against [`TOL_Q`]: the bracket for `N = 1`, the full
    /// product for `N = 2`.
    pub residual: f64,
    pub satisfied: bool,
    pub bracket: f64,
    pub linear_factor: f64,
    pub vanished: Option<VanishingFactor>,
    /// The linear factor vanished (symmetric singlet branch).
    pub singlet_branch: bool,
}

fn equal_couplings(p: &Dicke2Params) -> Result<Dicke2Params> {
    p.validate()?;
    let p = p.rescaled();
    if (p.g1 - p.g2).abs() > 1e-12 * p.g1.abs().max(p.g2.abs()).max(1.0) {
        return Err(Error::PreconditionViolated(format!(
            "quasi-exact conditions need g1 = g2, got ({}, {})",
            p.g1, p.g2
        )));
    }
    Ok(p)
}

fn vanished(bracket: f64, linear: f64) -> Option<VanishingFactor> {
    match (bracket.abs() < TOL_Q, linear.abs() < TOL_Q) {
        (true, true) => Some(VanishingFactor::Both),
        (true, false) => Some(VanishingFactor::Bracket),
        (false, true) => Some(VanishingFactor::Singlet),
        (false, false) => None,
    }
}

/// One-photon condition `(+-d1 - d2) [1 - (d2 +- d1)^2] = 0`, upper sign for
/// even parity. Only the bracket decides `satisfied`; the linear factor is
/// reported as the singlet branch.
pub fn n1_condition(params: &Dicke2Params) -> Result<QuasiExactCondition> {
    let p = equal_couplings(params)?;
    let s = p.parity.sign();
    let linear = s * p.delta1 - p.delta2;
    let sum = p.delta2 + s * p.delta1;
    let bracket = 1.0 - sum * sum;
    Ok(QuasiExactCondition {
        photon_number: 1,
        parity: p.parity,
        residual: bracket,
        satisfied: bracket.abs() < TOL_Q,
        bracket,
        linear_factor: linear,
        vanished: vanished(bracket, linear),
        singlet_branch: linear.abs() < TOL_Q,
    })
}

/// Two-photon condition
/// `[(2 - (d2 +- d1)^2 / 2)(1 - (d2 -+ d1)^2) - g^2] (-+d1 - d2) = 0` with
/// `g = g1 + g2`, upper sign for even parity.
pub fn n2_condition(params: &Dicke2Params) -> Result<QuasiExactCondition> {
    let p = equal_couplings(params)?;
    let s = p.parity.sign();
    let g = p.g_sum();
    let a = p.delta2 + s * p.delta1;
    let b = p.delta2 - s * p.delta1;
    let bracket = (2.0 - a * a / 2.0) * (1.0 - b * b) - g * g;
    let linear = -s * p.delta1 - p.delta2;
    let product = bracket * linear;
    Ok(QuasiExactCondition {
        photon_number: 2,
        parity: p.parity,
        residual: product,
        satisfied: product.abs() < TOL_Q,
        bracket,
        linear_factor: linear,
        vanished: vanished(bracket, linear),
        singlet_branch: linear.abs() < TOL_Q,
    })
}

/// Total coupling `g = g1 + g2` at which the two-photon bracket vanishes,
/// if the right-hand side is positive.
pub fn n2_bracket_coupling(delta1: f64, delta2: f64, parity: Parity) -> Option<f64> {
    let s = parity.sign();
    let a = delta2 + s * delta1;
    let b = delta2 - s * delta1;
    let g2 = (2.0 - a * a / 2.0) * (1.0 - b * b);
    (g2 > 0.0).then(|| g2.sqrt())
}

/// Physical-basis indices of `|0,e,e>`, `|1,e,g>`, `|1,g,e>`.
pub const EXCEPTIONAL_BASIS: [usize; 3] = [0, 5, 6];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalState {
    /// Amplitudes on `|0,e,e>`, `|1,e,g>`, `|1,g,e>`.
    pub components: [f64; 3],
    /// Energy in units of the mode frequency.
    pub energy: f64,
    /// `||(H - E) psi||` with the full two-qubit Hamiltonian.
    pub residual: f64,
}

impl ExceptionalState {
    /// The state embedded in the physical basis with `cutoff` photon levels.
    pub fn physical(&self, cutoff: usize) -> Vec<f64> {
        let mut v = vec![0.0; 4 * cutoff];
        for (&i, &c) in EXCEPTIONAL_BASIS.iter().zip(&self.components) {
            v[i] = c;
        }
        v
    }
}

/// The even one-photon state with `E = 1`,
/// `(2 (d1 - d2) / g |0,e,e> - |1,e,g> + |1,g,e>) / N`, `g = g1 + g2`.
pub fn exceptional_state_n1(params: &Dicke2Params) -> Result<ExceptionalState> {
    let even = params.with_parity(Parity::Even);
    let cond = n1_condition(&even)?;
    if !cond.satisfied {
        return Err(Error::PreconditionViolated(format!(
            "even one-photon condition not met: 1 - (d1 + d2)^2 = {:e}",
            cond.bracket
        )));
    }
    let p = even.rescaled();
    let g = p.g_sum();
    if g <= 0.0 {
        return Err(Error::PreconditionViolated("exceptional state needs g > 0".into()));
    }
    let c0 = 2.0 * (p.delta1 - p.delta2) / g;
    let norm = (c0 * c0 + 2.0).sqrt();
    let components = [c0 / norm, -1.0 / norm, 1.0 / norm];
    // H maps n <= 1 into n <= 2, so three photon levels are exact
    let h = dicke2_full(p.g1, p.g2, p.delta1, p.delta2, 3);
    let mut state = ExceptionalState { components, energy: 1.0, residual: 0.0 };
    let v = nalgebra::DVector::from_vec(state.physical(3));
    state.residual = (&h * &v - &v * state.energy).norm();
    Ok(state)
}

/// Maps a reduced-sector eigenvector (length `2 * cutoff`) of the two-qubit
/// model to the physical basis (length `4 * cutoff`), preserving the norm.
pub fn reduced_to_physical(v: &[f64], parity: Parity) -> Vec<f64> {
    let cutoff = v.len() / 2;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = vec![0.0; 4 * cutoff];
    for n in 0..cutoff {
        let s = parity.sign() * if n % 2 == 0 { 1.0 } else { -1.0 };
        // sigma_x eigenbasis amplitudes
        let pp = v[2 * n] * h;
        let pm = v[2 * n + 1] * h;
        let mm = s * pp;
        let mp = s * pm;
        // <e|+> = <e|-> = <g|+> = 1/sqrt2, <g|-> = -1/sqrt2
        out[4 * n] = 0.5 * (pp + pm + mp + mm);
        out[4 * n + 1] = 0.5 * (pp - pm + mp - mm);
        out[4 * n + 2] = 0.5 * (pp + pm - mp - mm);
        out[4 * n + 3] = 0.5 * (pp - pm - mp + mm);
    }
    out
}

/// Certified lowest eigenvalues of a sector model, enough of them to pass
/// `e_max`; returns the cutoff used as well.
pub fn levels_reaching<M: SectorModel>(model: &M, e_max: f64, rtol: f64) -> Result<(usize, Vec<f64>)> {
    let mut k = 8;
    loop {
        let c = certify_cutoff(model, k, rtol, DEFAULT_MAX_CUTOFF)?;
        if c.eigenvalues.last().is_some_and(|&e| e > e_max) {
            return Ok((c.cutoff, c.eigenvalues));
        }
        k *= 2;
    }
}

/// Oracle view of the level pinned at `E = N` in one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PinnedLevel {
    pub g: f64,
    /// Nearest sector eigenvalue to the target.
    pub energy: f64,
    pub deviation: f64,
    pub cutoff: usize,
    /// `|<psi_exc|v>|^2` against the one-photon state, when it applies.
    pub overlap: Option<f64>,
    /// Squared amplitude of the eigenvector beyond Fock level `N`.
    pub photon_tail: f64,
}

/// Follows the sector eigenvalue closest to `target` over a grid of total
/// couplings `g1 + g2` (the split of `base` is kept).
pub fn pinned_level(base: &Dicke2Params, target: u32, g_grid: &[f64], rtol: f64) -> Result<Vec<PinnedLevel>> {
    base.validate()?;
    let base = base.rescaled();
    g_grid
        .par_iter()
        .map(|&g| {
            let p = base.with_total_coupling(g);
            let (cutoff, vals) = levels_reaching(&p, target as f64 + 1.0, rtol)?;
            let t = target as f64;
            let energy = vals.iter().copied().min_by(|a, b| (a - t).abs().total_cmp(&(b - t).abs())).unwrap_or(f64::NAN);
            let m = p.build(cutoff)?;
            let v = inverse_iteration(&m, energy)?;
            let phys = reduced_to_physical(&v, p.parity);
            let photon_tail = phys[4 * (target as usize + 1).min(cutoff)..].iter().map(|a| a * a).sum();
            let overlap = if target == 1 && p.parity == Parity::Even {
                exceptional_state_n1(&p).ok().map(|s| {
                    let dot: f64 = EXCEPTIONAL_BASIS.iter().zip(&s.components).map(|(&i, c)| phys[i] * c).sum();
                    dot * dot
                })
            } else {
                None
            };
            Ok(PinnedLevel { g, energy, deviation: (energy - t).abs(), cutoff, overlap, photon_tail })
        })
        .collect()
}

/// Models that can be swept over a single coupling parameter.
pub trait CouplingFamily: SectorModel + Copy + Send {
    fn at_coupling(&self, g: f64) -> Self;
    fn with_parity(&self, parity: Parity) -> Self;
}

impl CouplingFamily for Dicke2Params {
    /// `g` is the total coupling `g1 + g2`.
    fn at_coupling(&self, g: f64) -> Self {
        self.with_total_coupling(g)
    }
    fn with_parity(&self, parity: Parity) -> Self {
        Dicke2Params::with_parity(self, parity)
    }
}

impl CouplingFamily for Dicke3Params {
    fn at_coupling(&self, g: f64) -> Self {
        Dicke3Params { g, ..*self }
    }
    fn with_parity(&self, parity: Parity) -> Self {
        Dicke3Params::with_parity(self, parity)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleCurve {
    pub parity: Parity,
    pub index: usize,
    /// `(g, E)` pairs.
    pub points: Vec<(f64, f64)>,
}

/// Even and odd levels swapping order between two grid points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCrossing {
    /// Linear estimate of the crossing coupling.
    pub g: f64,
    pub energy: f64,
    pub even_index: usize,
    pub odd_index: usize,
}

/// Local minimum along the grid of the gap between neighbouring levels of
/// one parity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvoidedCrossing {
    pub parity: Parity,
    /// The lower of the two levels.
    pub lower_index: usize,
    pub g: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DickeSweep {
    pub g_grid: Vec<f64>,
    /// Certified cutoff per grid point and parity (even, odd).
    pub cutoffs: Vec<[usize; 2]>,
    pub curves: Vec<OracleCurve>,
    pub crossings: Vec<LevelCrossing>,
    pub avoided: Vec<AvoidedCrossing>,
    /// Smallest same-parity level gap per grid point.
    pub min_same_parity_gap: Vec<f64>,
    /// Parity of the ground state per grid point.
    pub ground_parity: Vec<Parity>,
}

impl DickeSweep {
    /// Levels of `parity` at grid point `k`.
    pub fn levels(&self, k: usize, parity: Parity) -> Vec<f64> {
        self.curves.iter().filter(|c| c.parity == parity).map(|c| c.points[k].1).collect()
    }
}

/// Lowest `k_levels` eigenvalues per parity on every grid point, certified
/// against the photon cutoff, with crossing and avoided-crossing records.
pub fn dicke_sweep<M: CouplingFamily>(base: &M, g_grid: &[f64], k_levels: usize, rtol: f64) -> Result<DickeSweep> {
    if g_grid.is_empty() {
        return Err(Error::InvalidParameter("empty coupling grid".into()));
    }
    let inc = g_grid.windows(2).all(|w| w[1] > w[0]);
    let dec = g_grid.windows(2).all(|w| w[1] < w[0]);
    if !(inc || dec) {
        return Err(Error::InvalidParameter("coupling grid must be strictly monotone".into()));
    }
    if k_levels == 0 {
        return Err(Error::InvalidParameter("k_levels must be >= 1".into()));
    }
    let omega = base.omega();
    let per_point: Vec<[(usize, Vec<f64>); 2]> = g_grid
        .par_iter()
        .map(|&g| -> Result<[(usize, Vec<f64>); 2]> {
            let model = base.at_coupling(g);
            let run = |parity| -> Result<(usize, Vec<f64>)> {
                let c = certify_cutoff(&model.with_parity(parity), k_levels, rtol, DEFAULT_MAX_CUTOFF)?;
                Ok((c.cutoff, c.eigenvalues.iter().map(|e| e * omega).collect()))
            };
            Ok([run(Parity::Even)?, run(Parity::Odd)?])
        })
        .collect::<Result<_>>()?;

    let mut curves = Vec::new();
    for (pi, parity) in Parity::BOTH.into_iter().enumerate() {
        for index in 0..k_levels {
            let points = g_grid.iter().zip(&per_point).map(|(&g, pp)| (g, pp[pi].1[index])).collect();
            curves.push(OracleCurve { parity, index, points });
        }
    }

    let mut crossings = Vec::new();
    for k in 1..g_grid.len() {
        let (a, b) = (&per_point[k - 1], &per_point[k]);
        for i in 0..k_levels {
            for j in 0..k_levels {
                let da = a[0].1[i] - a[1].1[j];
                let db = b[0].1[i] - b[1].1[j];
                if da * db < 0.0 || (db == 0.0 && da != 0.0) {
                    let t = da / (da - db);
                    let g = g_grid[k - 1] + t * (g_grid[k] - g_grid[k - 1]);
                    let energy = a[0].1[i] + t * (b[0].1[i] - a[0].1[i]);
                    crossings.push(LevelCrossing { g, energy, even_index: i, odd_index: j });
                }
            }
        }
    }
    crossings.sort_by(|x, y| x.g.total_cmp(&y.g).then(x.energy.total_cmp(&y.energy)));

    let mut avoided = Vec::new();
    for (pi, parity) in Parity::BOTH.into_iter().enumerate() {
        for i in 0..k_levels.saturating_sub(1) {
            let gaps: Vec<f64> = per_point.iter().map(|pp| pp[pi].1[i + 1] - pp[pi].1[i]).collect();
            for k in 1..gaps.len().saturating_sub(1) {
                if gaps[k] < gaps[k - 1] && gaps[k] < gaps[k + 1] {
                    avoided.push(AvoidedCrossing { parity, lower_index: i, g: g_grid[k], gap: gaps[k] });
                }
            }
        }
    }

    let min_same_parity_gap = per_point
        .iter()
        .map(|pp| pp.iter().flat_map(|(_, v)| v.windows(2).map(|w| w[1] - w[0])).fold(f64::INFINITY, f64::min))
        .collect();
    let ground_parity = per_point
        .iter()
        .map(|pp| if pp[0].1[0] <= pp[1].1[0] { Parity::Even } else { Parity::Odd })
        .collect();
    let cutoffs = per_point.iter().map(|pp| [pp[0].0, pp[1].0]).collect();

    Ok(DickeSweep { g_grid: g_grid.to_vec(), cutoffs, curves, crossings, avoided, min_same_parity_gap, ground_parity })
}
