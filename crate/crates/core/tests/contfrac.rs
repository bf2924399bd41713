//! Continued-fraction condition against the oracle and the G-functions.

use rabi_spectra::contfrac::{contfrac_roots, f_spectral, f_spectral_bits, minimal_ratio, ContFracConfig};
use rabi_spectra::spectrum::{exceptional_nd_scan, oracle_levels};
use rabi_spectra::{Parity, RabiParams, SeriesConfig};

fn params(g: f64, delta: f64) -> RabiParams {
    RabiParams::new(g, delta, Parity::Even).unwrap()
}

/// Both parity spectra in `x = E + g^2`, merged and sorted.
fn oracle_union(p: &RabiParams, x_max: f64) -> Vec<f64> {
    let mut xs = Vec::new();
    for parity in [Parity::Even, Parity::Odd] {
        let e = oracle_levels(&p.with_parity(parity), x_max, 1e-13).unwrap();
        xs.extend(e.into_iter().map(|e| e + p.g * p.g));
    }
    xs.sort_by(f64::total_cmp);
    xs
}

#[test]
fn roots_are_the_union_of_both_parities() {
    let p = params(1.0, 0.4);
    let roots = contfrac_roots(&p, 8.0, &ContFracConfig::default()).unwrap();
    let oracle = oracle_union(&p, 8.0);
    assert_eq!(roots.len(), oracle.len(), "{roots:?} vs {oracle:?}");
    for (r, o) in roots.iter().zip(&oracle) {
        assert!((r.x - o).abs() < 1e-8, "{} vs {o}", r.x);
    }
}

#[test]
fn zero_delta_roots_sit_on_integers() {
    let p = params(0.7, 0.0);
    let roots = contfrac_roots(&p, 6.5, &ContFracConfig::default()).unwrap();
    let xs: Vec<f64> = roots.iter().map(|r| r.x).collect();
    assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    assert!(roots.iter().all(|r| r.at_integer));
}

#[test]
fn non_degenerate_exceptional_level_is_invisible() {
    let g_grid: Vec<f64> = (1..=60).map(|i| 0.05 * i as f64).collect();
    let pts = exceptional_nd_scan(0, Parity::Even, &g_grid, &[0.5], &SeriesConfig::default()).unwrap();
    let pt = pts.first().expect("G^(0) should vanish somewhere on the grid");
    let p = params(pt.g, pt.delta);

    // the oracle has E = -g^2 in the even chain only
    let even = oracle_levels(&p, 1.0, 1e-13).unwrap();
    assert!(even.iter().any(|e| (e - pt.energy).abs() < 1e-9), "{even:?} vs {}", pt.energy);

    let roots = contfrac_roots(&p, 1.5, &ContFracConfig::default()).unwrap();
    assert!(roots.iter().all(|r| r.x.abs() > 1e-6), "{roots:?}");
    // F diverges at x = 0 instead of vanishing
    let depth = minimal_ratio(1.0, &p, 0, 1e-13).unwrap().depth_used * 2;
    for h in [1e-4, 1e-6] {
        assert!(f_spectral_bits(h, &p, depth, 53).unwrap().abs() > 1.0 / (8.0 * p.g * h));
    }
}

#[test]
fn degenerate_level_is_counted_once() {
    // 4 g^2 + delta^2 = 1: x = 1 in both parity chains
    let p = params(0.4, 0.6);
    let oracle = oracle_union(&p, 1.5);
    assert_eq!(oracle.iter().filter(|x| (*x - 1.0).abs() < 1e-9).count(), 2, "{oracle:?}");
    let roots = contfrac_roots(&p, 1.5, &ContFracConfig::default()).unwrap();
    let near: Vec<_> = roots.iter().filter(|r| (r.x - 1.0).abs() < 1e-6).collect();
    assert_eq!(near.len(), 1, "{roots:?}");
}

#[test]
fn double_precision_agrees_with_extended_precision() {
    let p = params(0.8, 0.7);
    let mut worst = 0.0f64;
    for i in 0..20 {
        let x = -0.6 + 0.37 * i as f64 + 0.013;
        let lo = f_spectral(x, &p, 1e-14).unwrap();
        assert!(lo.converged);
        let hi = f_spectral_bits(x, &p, lo.depth_used * 2, 212).unwrap();
        let rel = (lo.f_value - hi).abs() / hi.abs().max(1.0);
        worst = worst.max(rel);
    }
    assert!(worst < 1e-10, "worst relative difference {worst:e}");
}

#[test]
fn forward_series_is_minimal_on_the_spectrum() {
    // at an eigenvalue the regular solution is the minimal one, so its
    // first ratio f_0 matches the backward continued fraction
    let p = params(1.0, 0.4);
    for x in oracle_union(&p, 5.0) {
        let f = f_spectral(x, &p, 1e-14).unwrap().f_value;
        assert!(f.abs() < 1e-6, "F({x}) = {f}");
    }
}
