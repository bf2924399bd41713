//! Truncated Fock-space diagonalization of the parity-reduced Hamiltonians.
//!
//! Each sector Hamiltonian is written in a number basis cut at `cutoff`
//! photons, with spin components interleaved inside each photon level so
//! the matrix stays banded (bandwidth 1 for the Rabi model, 2 for the Dicke
//! models). Truncations are nested, so eigenvalues decrease monotonically
//! as the cutoff grows.

mod eigen;
pub mod fullspace;

pub use eigen::{eigenvalues, eigenvalues_dense, inverse_iteration, tridiagonalize, Tridiagonal};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Dicke2Params, Dicke3Params, RabiParams};

/// Largest dimension for which the dense path is considered cheap.
pub const DENSE_LIMIT: usize = 256;

/// Default upper bound for [`certify_cutoff`].
pub const DEFAULT_MAX_CUTOFF: usize = 16384;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelTag {
    Rabi,
    Dicke2,
    Dicke3,
    Generic,
}

/// Real symmetric matrix stored by diagonals: `diagonals[k][i] = A[i][i + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSymmetricMatrix {
    pub dimension: usize,
    pub bandwidth: usize,
    pub diagonals: Vec<Vec<f64>>,
    pub model_tag: ModelTag,
}

impl BandedSymmetricMatrix {
    pub fn new(dimension: usize, diagonals: Vec<Vec<f64>>, model_tag: ModelTag) -> Result<Self> {
        if dimension == 0 || diagonals.is_empty() {
            return Err(Error::PreconditionViolated("empty matrix".into()));
        }
        for (k, d) in diagonals.iter().enumerate() {
            if d.len() != dimension.saturating_sub(k) {
                return Err(Error::PreconditionViolated(format!(
                    "diagonal {k} has length {} (expected {})",
                    d.len(),
                    dimension.saturating_sub(k)
                )));
            }
        }
        Ok(BandedSymmetricMatrix { dimension, bandwidth: diagonals.len() - 1, diagonals, model_tag })
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let k = hi - lo;
        if k > self.bandwidth {
            0.0
        } else {
            self.diagonals[k][lo]
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dimension;
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        let n = self.dimension;
        let mut out = vec![0.0; n];
        for (k, d) in self.diagonals.iter().enumerate() {
            for (i, &a) in d.iter().enumerate() {
                out[i] += a * v[i + k];
                if k > 0 {
                    out[i + k] += a * v[i];
                }
            }
        }
        out
    }

    pub fn norm_inf(&self) -> f64 {
        let n = self.dimension;
        let mut rows = vec![0.0f64; n];
        for (k, d) in self.diagonals.iter().enumerate() {
            for (i, &a) in d.iter().enumerate() {
                rows[i] += a.abs();
                if k > 0 {
                    rows[i + k] += a.abs();
                }
            }
        }
        rows.into_iter().fold(0.0, f64::max)
    }
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(Error::PreconditionViolated(format!("cutoff must be >= 2, got {cutoff}")));
    }
    Ok(())
}

fn alternating(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `H_+- = n + g(a + a') +- delta (-1)^n`, tridiagonal.
pub fn build_rabi(params: &RabiParams, cutoff: usize) -> Result<BandedSymmetricMatrix> {
    params.validate()?;
    check_cutoff(cutoff)?;
    let p = params.rescaled();
    let d = p.signed_delta();
    let diag = (0..cutoff).map(|n| n as f64 + d * alternating(n)).collect();
    let off = (0..cutoff - 1).map(|n| p.g * ((n + 1) as f64).sqrt()).collect();
    BandedSymmetricMatrix::new(cutoff, vec![diag, off], ModelTag::Rabi)
}

/// Index of `|n, s>` in the two-component sector bases (`s = 0, 1`).
pub fn two_component_index(n: usize, s: usize) -> usize {
    2 * n + s
}

/// Reduced two-qubit sector Hamiltonian. Channel `s = +1` (index 0) has
/// boson hopping `(g1 + g2) sqrt(n+1)`, channel `s = -1` (index 1) hopping
/// `(g1 - g2) sqrt(n+1)`; the channels are coupled by
/// `delta2 +- delta1 (-1)^n` at equal `n`.
pub fn build_dicke2(params: &Dicke2Params, cutoff: usize) -> Result<BandedSymmetricMatrix> {
    params.validate()?;
    check_cutoff(cutoff)?;
    let p = params.rescaled();
    let dim = 2 * cutoff;
    let sign = p.parity.sign();
    let diag = (0..dim).map(|i| (i / 2) as f64).collect();
    let mut d1 = vec![0.0; dim - 1];
    for n in 0..cutoff {
        d1[two_component_index(n, 0)] = p.delta2 + sign * p.delta1 * alternating(n);
    }
    let mut d2 = vec![0.0; dim - 2];
    for n in 0..cutoff - 1 {
        let h = ((n + 1) as f64).sqrt();
        d2[two_component_index(n, 0)] = p.g_sum() * h;
        d2[two_component_index(n, 1)] = p.g_diff() * h;
    }
    BandedSymmetricMatrix::new(dim, vec![diag, d1, d2], ModelTag::Dicke2)
}

/// Spin-3/2 sector of the three-qubit model in one parity chain. Component
/// 0 hops with `-3g sqrt(n+1)`, component 1 with `-g sqrt(n+1)` and carries
/// `+-2 delta (-1)^n` on its diagonal; they couple through `sqrt(3) delta`.
pub fn build_dicke3(params: &Dicke3Params, cutoff: usize) -> Result<BandedSymmetricMatrix> {
    params.validate()?;
    check_cutoff(cutoff)?;
    let p = params.rescaled();
    let dim = 2 * cutoff;
    let sign = p.parity.sign();
    let mut diag = vec![0.0; dim];
    let mut d1 = vec![0.0; dim - 1];
    let mut d2 = vec![0.0; dim - 2];
    let s3 = 3f64.sqrt();
    for n in 0..cutoff {
        diag[two_component_index(n, 0)] = n as f64;
        diag[two_component_index(n, 1)] = n as f64 + sign * 2.0 * p.delta * alternating(n);
        d1[two_component_index(n, 0)] = s3 * p.delta;
    }
    for n in 0..cutoff - 1 {
        let h = ((n + 1) as f64).sqrt();
        d2[two_component_index(n, 0)] = -3.0 * p.g * h;
        d2[two_component_index(n, 1)] = -p.g * h;
    }
    BandedSymmetricMatrix::new(dim, vec![diag, d1, d2], ModelTag::Dicke3)
}

/// A parity-sector model that can be written down at any cutoff.
pub trait SectorModel: Sync {
    fn build(&self, cutoff: usize) -> Result<BandedSymmetricMatrix>;
    /// Basis states per photon level.
    fn components(&self) -> usize;
    fn omega(&self) -> f64;
}

impl SectorModel for RabiParams {
    fn build(&self, cutoff: usize) -> Result<BandedSymmetricMatrix> {
        build_rabi(self, cutoff)
    }
    fn components(&self) -> usize {
        1
    }
    fn omega(&self) -> f64 {
        self.omega
    }
}

impl SectorModel for Dicke2Params {
    fn build(&self, cutoff: usize) -> Result<BandedSymmetricMatrix> {
        build_dicke2(self, cutoff)
    }
    fn components(&self) -> usize {
        2
    }
    fn omega(&self) -> f64 {
        self.omega
    }
}

impl SectorModel for Dicke3Params {
    fn build(&self, cutoff: usize) -> Result<BandedSymmetricMatrix> {
        build_dicke3(self, cutoff)
    }
    fn components(&self) -> usize {
        2
    }
    fn omega(&self) -> f64 {
        self.omega
    }
}

/// Eigenvalues stable under enlargement of the photon cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifiedSpectrum {
    pub cutoff: usize,
    /// Lowest `k` eigenvalues in units of `omega = 1`.
    pub eigenvalues: Vec<f64>,
    /// Every cutoff tried, with its eigenvalues.
    pub history: Vec<(usize, Vec<f64>)>,
}

fn next_cutoff(current: usize) -> usize {
    let mut c = 64;
    while c <= current {
        c *= 2;
    }
    c
}

/// Increases the cutoff (first `k + 1`, then 64, 128, ...) until the `k`
/// lowest eigenvalues move by less than `rtol * max(1, |E|)` between two
/// consecutive cutoffs; returns the smaller cutoff of the stable pair.
pub fn certify_cutoff<M: SectorModel + ?Sized>(
    model: &M,
    k: usize,
    rtol: f64,
    max_cutoff: usize,
) -> Result<CertifiedSpectrum> {
    if k == 0 {
        return Err(Error::PreconditionViolated("k must be >= 1".into()));
    }
    let comps = model.components();
    let mut cutoff = (k / comps + 1).max(2);
    let mut history: Vec<(usize, Vec<f64>)> = Vec::new();
    loop {
        if cutoff > max_cutoff {
            return Err(Error::CutoffExplosion { max_cutoff, k });
        }
        let m = model.build(cutoff)?;
        let vals = eigenvalues(&m, k)?;
        if let Some((prev_cut, prev)) = history.last() {
            let stable = prev
                .iter()
                .zip(&vals)
                .all(|(a, b)| (a - b).abs() <= rtol * a.abs().max(1.0));
            if stable {
                let (cutoff, eigenvalues) = (*prev_cut, prev.clone());
                history.push((m.dimension / comps, vals));
                return Ok(CertifiedSpectrum { cutoff, eigenvalues, history });
            }
        }
        history.push((cutoff, vals));
        cutoff = next_cutoff(cutoff);
    }
}
