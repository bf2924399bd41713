//! Symmetric banded eigensolvers.
//!
//! Bandwidth one goes straight to Sturm-sequence bisection. Wider bands are
//! first reduced to tridiagonal form by Givens rotations with bulge chasing
//! (Schwarz's algorithm), working entirely in band storage.

use nalgebra::{DMatrix, SymmetricEigen};

use super::BandedSymmetricMatrix;
use crate::error::{Error, Result};

/// Symmetric tridiagonal matrix: diagonal `d`, off-diagonal `e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub d: Vec<f64>,
    pub e: Vec<f64>,
}

impl Tridiagonal {
    pub fn dimension(&self) -> usize {
        self.d.len()
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r = if i > 0 { self.e[i - 1].abs() } else { 0.0 } + if i + 1 < n { self.e[i].abs() } else { 0.0 };
            lo = lo.min(self.d[i] - r);
            hi = hi.max(self.d[i] + r);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `lambda` (Sylvester inertia of
    /// the `LDL^T` factorization of `T - lambda I`).
    pub fn count_below(&self, lambda: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.d[0] - lambda;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.d.len() {
            q = self.d[i] - lambda - self.e[i - 1] * self.e[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `k` lowest eigenvalues by bisection, ascending.
    pub fn lowest_eigenvalues(&self, k: usize) -> Vec<f64> {
        let n = self.d.len();
        let k = k.min(n);
        if k == 0 {
            return Vec::new();
        }
        let (glo, ghi) = self.gershgorin();
        let norm = glo.abs().max(ghi.abs()).max(f64::MIN_POSITIVE);
        let emax = self.e.iter().fold(0.0f64, |a, &b| a.max(b * b));
        let pivmin = f64::MIN_POSITIVE.max(emax * f64::MIN_POSITIVE) * 4.0;
        let pad = 2.0 * f64::EPSILON * norm * n as f64 + 2.0 * pivmin;
        let (glo, ghi) = (glo - pad, ghi + pad);

        // bisect each index, reusing bounds found for earlier indices
        let mut out = Vec::with_capacity(k);
        let abs_floor = 1e-3 * f64::EPSILON * norm + pivmin;
        let mut lower = glo;
        for i in 0..k {
            let mut lo = lower;
            let mut hi = ghi;
            loop {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if hi - lo <= abs_floor {
                    break;
                }
                if self.count_below(mid, pivmin) > i {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            // the count treats an exact zero pivot as negative, so the
            // eigenvalue lies in (lo, hi]
            out.push(hi);
            lower = lo;
        }
        out
    }
}

/// Band storage of the lower triangle with room for one bulge diagonal:
/// `low[k][j] = A[j + k][j]`.
struct WorkBand {
    n: usize,
    width: usize,
    low: Vec<Vec<f64>>,
}

impl WorkBand {
    fn from_matrix(m: &BandedSymmetricMatrix) -> Self {
        let width = m.bandwidth + 1;
        let mut low = Vec::with_capacity(width + 1);
        for k in 0..=width {
            if k < m.diagonals.len() {
                low.push(m.diagonals[k].clone());
            } else {
                low.push(vec![0.0; m.dimension.saturating_sub(k)]);
            }
        }
        WorkBand { n: m.dimension, width, low }
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k > self.width {
            0.0
        } else {
            self.low[k][c]
        }
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        let k = r - c;
        if k <= self.width {
            self.low[k][c] = v;
        }
    }

    /// Similarity transform by a rotation in the plane `(p, p + 1)`:
    /// rows become `(c r_p + s r_q, -s r_p + c r_q)`, same for columns.
    fn rotate(&mut self, p: usize, c: f64, s: f64) {
        let q = p + 1;
        let lo = p.saturating_sub(self.width);
        let hi = (q + self.width).min(self.n - 1);
        for j in lo..=hi {
            if j == p || j == q {
                continue;
            }
            let apj = self.get(p, j);
            let aqj = self.get(q, j);
            self.set(p, j, c * apj + s * aqj);
            self.set(q, j, -s * apj + c * aqj);
        }
        let app = self.get(p, p);
        let aqq = self.get(q, q);
        let apq = self.get(p, q);
        let new_pp = c * c * app + 2.0 * c * s * apq + s * s * aqq;
        let new_qq = s * s * app - 2.0 * c * s * apq + c * c * aqq;
        let new_pq = (c * c - s * s) * apq + c * s * (aqq - app);
        self.set(p, p, new_pp);
        self.set(q, q, new_qq);
        self.set(p, q, new_pq);
    }

    /// Rotates rows `(r - 1, r)` so that `A[r][col]` becomes zero.
    fn annihilate(&mut self, r: usize, col: usize) {
        let y = self.get(r, col);
        if y == 0.0 {
            return;
        }
        let x = self.get(r - 1, col);
        let h = x.hypot(y);
        let (c, s) = (x / h, y / h);
        self.rotate(r - 1, c, s);
        self.set(r, col, 0.0);
    }
}

/// Reduces a symmetric banded matrix to tridiagonal form by orthogonal
/// similarity transforms.
pub fn tridiagonalize(m: &BandedSymmetricMatrix) -> Tridiagonal {
    let n = m.dimension;
    if m.bandwidth <= 1 || n < 3 {
        let d = m.diagonals[0].clone();
        let e = if m.diagonals.len() > 1 { m.diagonals[1].clone() } else { vec![0.0; n.saturating_sub(1)] };
        return Tridiagonal { d, e };
    }
    let mut w = WorkBand::from_matrix(m);
    let mut band = m.bandwidth;
    while band > 1 {
        for k in 0..n {
            let mut r = k + band;
            if r >= n {
                break;
            }
            w.annihilate(r, k);
            // chase the bulge created at (r + band, r - 1)
            loop {
                let br = r + band;
                if br >= n {
                    break;
                }
                w.annihilate(br, r - 1);
                r = br;
            }
        }
        band -= 1;
    }
    let d = (0..n).map(|i| w.get(i, i)).collect();
    let e = (0..n - 1).map(|i| w.get(i + 1, i)).collect();
    Tridiagonal { d, e }
}

/// The `k` lowest eigenvalues, ascending.
pub fn eigenvalues(m: &BandedSymmetricMatrix, k: usize) -> Result<Vec<f64>> {
    if k > m.dimension {
        return Err(Error::PreconditionViolated(format!(
            "requested {k} eigenvalues of a {}-dimensional matrix",
            m.dimension
        )));
    }
    let t = tridiagonalize(m);
    let vals = t.lowest_eigenvalues(k);
    if vals.iter().any(|v| !v.is_finite()) {
        return Err(Error::ConvergenceFailure("non-finite eigenvalue from bisection".into()));
    }
    Ok(vals)
}

/// Dense reference path through nalgebra's symmetric QR iteration.
pub fn eigenvalues_dense(m: &BandedSymmetricMatrix, k: usize) -> Result<Vec<f64>> {
    if k > m.dimension {
        return Err(Error::PreconditionViolated(format!(
            "requested {k} eigenvalues of a {}-dimensional matrix",
            m.dimension
        )));
    }
    dense_lowest(m.to_dense(), k)
}

pub(crate) fn dense_lowest(a: DMatrix<f64>, k: usize) -> Result<Vec<f64>> {
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 0)
        .ok_or_else(|| Error::ConvergenceFailure("dense symmetric eigensolver did not converge".into()))?;
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals.truncate(k);
    Ok(vals)
}

/// Eigenvector for an (accurately known) eigenvalue by inverse iteration
/// with a banded LU factorization. Normalized, largest component positive.
pub fn inverse_iteration(m: &BandedSymmetricMatrix, lambda: f64) -> Result<Vec<f64>> {
    let n = m.dimension;
    let b = m.bandwidth;
    let norm = m.norm_inf().max(1.0);
    // LU with partial pivoting; U has upper bandwidth up to 2b
    let lw = b;
    let uw = 2 * b;
    let cols = lw + uw + 1;
    let mut lu = vec![0.0; n * cols];
    let idx = |i: usize, j: usize| i * cols + (j + lw - i);
    for i in 0..n {
        for j in i.saturating_sub(b)..=(i + b).min(n - 1) {
            let mut v = m.get(i, j);
            if i == j {
                v -= lambda;
            }
            lu[idx(i, j)] = v;
        }
    }
    let mut piv = vec![0usize; n];
    let mut lmult = vec![0.0; n * lw.max(1)];
    for kcol in 0..n {
        let last = (kcol + b).min(n - 1);
        let mut p = kcol;
        let mut best = lu[idx(kcol, kcol)].abs();
        for i in kcol + 1..=last {
            let v = lu[idx(i, kcol)].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        piv[kcol] = p;
        let jmax = (kcol + uw).min(n - 1);
        if p != kcol {
            for j in kcol..=jmax {
                if j + lw >= p && j <= p + uw {
                    let a = lu[idx(kcol, j)];
                    let c = lu[idx(p, j)];
                    lu[idx(kcol, j)] = c;
                    lu[idx(p, j)] = a;
                }
            }
        }
        if lu[idx(kcol, kcol)].abs() < f64::EPSILON * norm {
            lu[idx(kcol, kcol)] = f64::EPSILON * norm;
        }
        let pivot = lu[idx(kcol, kcol)];
        for i in kcol + 1..=last {
            let f = lu[idx(i, kcol)] / pivot;
            lmult[kcol * lw.max(1) + (i - kcol - 1)] = f;
            lu[idx(i, kcol)] = 0.0;
            if f != 0.0 {
                for j in kcol + 1..=jmax {
                    if j <= i + uw {
                        lu[idx(i, j)] -= f * lu[idx(kcol, j)];
                    }
                }
            }
        }
    }
    let solve = |rhs: &mut [f64]| {
        for kcol in 0..n {
            let p = piv[kcol];
            if p != kcol {
                rhs.swap(kcol, p);
            }
            let last = (kcol + b).min(n - 1);
            for i in kcol + 1..=last {
                rhs[i] -= lmult[kcol * lw.max(1) + (i - kcol - 1)] * rhs[kcol];
            }
        }
        for i in (0..n).rev() {
            let mut s = rhs[i];
            for j in i + 1..=(i + uw).min(n - 1) {
                s -= lu[idx(i, j)] * rhs[j];
            }
            rhs[i] = s / lu[idx(i, i)];
        }
    };
    // deterministic start vector with no special symmetry
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + ((i * 7919) % 13) as f64 / 13.0).collect();
    for _ in 0..4 {
        solve(&mut v);
        let s = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::ConvergenceFailure("inverse iteration diverged".into()));
        }
        v.iter_mut().for_each(|a| *a /= s);
    }
    let imax = (0..n).max_by(|&i, &j| v[i].abs().total_cmp(&v[j].abs())).unwrap_or(0);
    if v[imax] < 0.0 {
        v.iter_mut().for_each(|a| *a = -*a);
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::ModelTag;

    fn banded(n: usize, diags: Vec<Vec<f64>>) -> BandedSymmetricMatrix {
        BandedSymmetricMatrix::new(n, diags, ModelTag::Generic).unwrap()
    }

    #[test]
    fn two_by_two_closed_form() {
        let (a, b, c) = (1.3, 0.7, -0.4);
        let m = banded(2, vec![vec![a, c], vec![b]]);
        let vals = eigenvalues(&m, 2).unwrap();
        let mean = 0.5 * (a + c);
        let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
        assert!((vals[0] - (mean - r)).abs() < 1e-15);
        assert!((vals[1] - (mean + r)).abs() < 1e-15);
    }

    #[test]
    fn diagonal_matrix_sorted() {
        let m = banded(4, vec![vec![3.0, -1.0, 2.0, 0.5], vec![0.0; 3], vec![0.0; 2]]);
        assert_eq!(eigenvalues(&m, 4).unwrap(), vec![-1.0, 0.5, 2.0, 3.0]);
    }

    #[test]
    fn band_reduction_matches_dense() {
        let n = 60;
        let d0: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() * 3.0 + i as f64 * 0.1).collect();
        let d1: Vec<f64> = (0..n - 1).map(|i| (i as f64 * 1.1).cos()).collect();
        let d2: Vec<f64> = (0..n - 2).map(|i| 0.5 * (i as f64 * 0.7).sin()).collect();
        let d3: Vec<f64> = (0..n - 3).map(|i| 0.3 * (i as f64 * 0.3).cos()).collect();
        let m = banded(n, vec![d0, d1, d2, d3]);
        let a = eigenvalues(&m, n).unwrap();
        let b = eigenvalues_dense(&m, n).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn inverse_iteration_recovers_eigenvector() {
        let n = 40;
        let d0: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let d1: Vec<f64> = (0..n - 1).map(|i| 0.3 * ((i + 1) as f64).sqrt()).collect();
        let d2: Vec<f64> = (0..n - 2).map(|i| 0.1 * (i as f64).cos()).collect();
        let m = banded(n, vec![d0, d1, d2]);
        let lam = eigenvalues(&m, 3).unwrap()[2];
        let v = inverse_iteration(&m, lam).unwrap();
        let av = m.mul_vec(&v);
        let res: f64 = av.iter().zip(&v).map(|(a, b)| (a - lam * b).powi(2)).sum::<f64>().sqrt();
        assert!(res < 1e-12, "{res}");
    }
}
