//! Dense Hamiltonians on the full (unreduced) spin-boson space, used to
//! validate the parity reduction at small cutoffs.

use nalgebra::DMatrix;

use super::eigen::dense_lowest;
use crate::error::Result;

/// Annihilation-operator matrix element `<n-1| a |n> = sqrt(n)` folded into
/// `x = a + a'` on `cutoff` levels.
fn quadrature(cutoff: usize) -> DMatrix<f64> {
    DMatrix::from_fn(cutoff, cutoff, |i, j| {
        if i + 1 == j {
            (j as f64).sqrt()
        } else if j + 1 == i {
            (i as f64).sqrt()
        } else {
            0.0
        }
    })
}

fn number(cutoff: usize) -> DMatrix<f64> {
    DMatrix::from_fn(cutoff, cutoff, |i, j| if i == j { i as f64 } else { 0.0 })
}

fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

fn pauli_x() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])
}

fn pauli_z() -> DMatrix<f64> {
    DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])
}

/// `a'a + g (a + a') sigma_x + delta sigma_z`, basis `|n> (x) |spin>`.
pub fn rabi_full(g: f64, delta: f64, cutoff: usize) -> DMatrix<f64> {
    let id2 = DMatrix::identity(2, 2);
    kron(&number(cutoff), &id2) + kron(&quadrature(cutoff), &pauli_x()) * g + kron(&DMatrix::identity(cutoff, cutoff), &pauli_z()) * delta
}

/// `a'a + (g1 s1x + g2 s2x)(a + a') + delta1 s1z + delta2 s2z`, basis
/// `|n> (x) |s1> (x) |s2>` with `|e> = (1, 0)`.
pub fn dicke2_full(g1: f64, g2: f64, delta1: f64, delta2: f64, cutoff: usize) -> DMatrix<f64> {
    let id2 = DMatrix::identity(2, 2);
    let idc = DMatrix::identity(cutoff, cutoff);
    let sx1 = kron(&pauli_x(), &id2);
    let sx2 = kron(&id2, &pauli_x());
    let sz1 = kron(&pauli_z(), &id2);
    let sz2 = kron(&id2, &pauli_z());
    let id4 = DMatrix::identity(4, 4);
    kron(&number(cutoff), &id4)
        + kron(&quadrature(cutoff), &(sx1 * g1 + sx2 * g2))
        + kron(&idc, &(sz1 * delta1 + sz2 * delta2))
}

/// Spin-3/2 operators `(J_x, J_z)` in the basis `m = 3/2, 1/2, -1/2, -3/2`.
fn spin_three_halves() -> (DMatrix<f64>, DMatrix<f64>) {
    let ms: [f64; 4] = [1.5, 0.5, -0.5, -1.5];
    let j = 1.5f64;
    let jz = DMatrix::from_fn(4, 4, |a, b| if a == b { ms[a] } else { 0.0 });
    // <m+1| J+ |m> = sqrt(j(j+1) - m(m+1))
    let jx = DMatrix::from_fn(4, 4, |a, b| {
        let (ma, mb) = (ms[a], ms[b]);
        if (ma - mb - 1.0).abs() < 1e-12 {
            0.5 * (j * (j + 1.0) - mb * (mb + 1.0)).sqrt()
        } else if (mb - ma - 1.0).abs() < 1e-12 {
            0.5 * (j * (j + 1.0) - ma * (ma + 1.0)).sqrt()
        } else {
            0.0
        }
    });
    (jx, jz)
}

/// `a'a + 2 delta J_z + 2 g (a + a') J_x` on the spin-3/2 multiplet.
pub fn dicke3_full(g: f64, delta: f64, cutoff: usize) -> DMatrix<f64> {
    let (jx, jz) = spin_three_halves();
    let id4 = DMatrix::identity(4, 4);
    let idc = DMatrix::identity(cutoff, cutoff);
    kron(&number(cutoff), &id4) + kron(&quadrature(cutoff), &jx) * (2.0 * g) + kron(&idc, &jz) * (2.0 * delta)
}

/// Lowest `k` eigenvalues of a dense symmetric matrix.
pub fn lowest(a: DMatrix<f64>, k: usize) -> Result<Vec<f64>> {
    dense_lowest(a, k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{build_dicke2, build_dicke3, build_rabi, eigenvalues};
    use crate::params::{Dicke2Params, Dicke3Params, Parity, RabiParams};

    fn union_of_sectors(mut a: Vec<f64>, b: Vec<f64>) -> Vec<f64> {
        a.extend(b);
        a.sort_by(f64::total_cmp);
        a
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() < tol, "{x} vs {y}");
        }
    }

    #[test]
    fn rabi_sectors_reassemble_full_space() {
        let (g, d, c) = (0.9, 0.35, 40);
        let full = lowest(rabi_full(g, d, c), 2 * c).unwrap();
        let e = eigenvalues(&build_rabi(&RabiParams::new(g, d, Parity::Even).unwrap(), c).unwrap(), c).unwrap();
        let o = eigenvalues(&build_rabi(&RabiParams::new(g, d, Parity::Odd).unwrap(), c).unwrap(), c).unwrap();
        assert_close(&full, &union_of_sectors(e, o), 1e-10);
    }

    #[test]
    fn dicke2_sectors_reassemble_full_space() {
        let c = 24;
        let base = Dicke2Params::new(0.5, 0.2, 0.6, 0.25, Parity::Even).unwrap();
        let full = lowest(dicke2_full(0.5, 0.2, 0.6, 0.25, c), 4 * c).unwrap();
        let e = eigenvalues(&build_dicke2(&base, c).unwrap(), 2 * c).unwrap();
        let o = eigenvalues(&build_dicke2(&base.with_parity(Parity::Odd), c).unwrap(), 2 * c).unwrap();
        assert_close(&full, &union_of_sectors(e, o), 1e-10);
    }

    #[test]
    fn dicke3_sectors_reassemble_full_space() {
        let c = 24;
        let base = Dicke3Params::new(0.3, 0.7, Parity::Even).unwrap();
        let full = lowest(dicke3_full(0.3, 0.7, c), 4 * c).unwrap();
        let e = eigenvalues(&build_dicke3(&base, c).unwrap(), 2 * c).unwrap();
        let o = eigenvalues(&build_dicke3(&base.with_parity(Parity::Odd), c).unwrap(), 2 * c).unwrap();
        assert_close(&full, &union_of_sectors(e, o), 1e-10);
    }
}
