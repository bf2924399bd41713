//! Property checks shared by the proptest suite and the acceptance target.
//! Each check returns `Err` with a description on violation.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rabi_spectra::contfrac::minimal_ratio;
use rabi_spectra::oracle::{build_rabi, eigenvalues};
use rabi_spectra::precision::unit_roundoff;
use rabi_spectra::recurrence::f_coefficient;
use rabi_spectra::{g_regular, regular_series, Parity, RabiParams, SeriesConfig, SpectralParameter};

pub const CASES: u32 = 200;

/// Non-integer spectral parameter at least 1e-3 away from every pole.
pub fn off_pole(lo: f64, hi: f64) -> impl Strategy<Value = f64> {
    (lo..hi).prop_filter("too close to a pole", |x: &f64| (x - x.round()).abs() > 1e-3)
}

pub fn rabi(g: f64, delta: f64, parity: Parity) -> RabiParams {
    RabiParams::new(g, delta, parity).unwrap()
}

/// `max_n |n K_n - f_{n-1} K_{n-1} + K_{n-2}| / max(1, |n K_n|)` stays
/// within 10 ulp at the working precision.
pub fn recurrence_residual(x: f64, g: f64, delta: f64) -> Result<(), String> {
    let p = rabi(g, delta, Parity::Even);
    let s = regular_series(SpectralParameter(x), &p, &SeriesConfig::default()).map_err(|e| e.to_string())?;
    let bound = 10.0 * unit_roundoff(s.precision_bits);
    if s.recurrence_residual <= bound {
        Ok(())
    } else {
        Err(format!("residual {:e} > {bound:e} at x={x}, g={g}, delta={delta}", s.recurrence_residual))
    }
}

/// `|K_n / K_{n-1}|` approaches `1 / (2g)`; tested where the leading
/// correction `-(1 + x) / n` is below 2.5%.
pub fn ratio_test(x: f64, g: f64, delta: f64) -> Result<(), String> {
    let p = rabi(g, delta, Parity::Even);
    let s = regular_series(SpectralParameter(x), &p, &SeriesConfig::default()).map_err(|e| e.to_string())?;
    let n0 = 51usize.max((40.0 * (1.0 + x.abs())).ceil() as usize);
    let s = s.extended(&p, n0 + 5);
    let target = 1.0 / (2.0 * g);
    for n in n0..=n0 + 5 {
        let r = (s.coeffs[n] / s.coeffs[n - 1]).abs();
        if (r - target).abs() > 0.05 * target {
            return Err(format!("ratio {r} vs {target} at n={n}, x={x}, g={g}, delta={delta}"));
        }
    }
    Ok(())
}

/// The odd chain is the even chain with `delta -> -delta`: identical
/// coefficients, and `G_-` equals the `G_+` sum with the sign of `delta`
/// flipped.
pub fn parity_flip(x: f64, g: f64, delta: f64) -> Result<(), String> {
    let cfg = SeriesConfig::default();
    let even = rabi(g, delta, Parity::Even);
    let odd = rabi(g, delta, Parity::Odd);
    let se = regular_series(SpectralParameter(x), &even, &cfg).map_err(|e| e.to_string())?;
    let so = regular_series(SpectralParameter(x), &odd, &cfg).map_err(|e| e.to_string())?;
    if se.coeffs != so.coeffs {
        return Err(format!("coefficients differ at x={x}, g={g}, delta={delta}"));
    }
    let g_odd = g_regular(x, &odd, &cfg).map_err(|e| e.to_string())?;
    let mut sum = 0.0;
    let mut scale = 0.0;
    let mut gn = 1.0;
    for (n, k) in se.coeffs.iter().enumerate() {
        let t = k * (1.0 + delta / (x - n as f64)) * gn;
        sum += t;
        scale += t.abs();
        gn *= g;
    }
    let tol = 1e-12 * scale.max(1.0) + 4.0 * g_odd.truncation_error;
    if (g_odd.value - sum).abs() <= tol {
        Ok(())
    } else {
        Err(format!("G_- {} vs flipped sum {sum} at x={x}, g={g}, delta={delta}", g_odd.value))
    }
}

/// `G` changes sign across each pole and `eps |G(n +- eps)|` tends to a
/// finite non-zero residue (Richardson-consistent over three scales).
///
/// Near a Judd curve the residue is small and the pole only dominates for
/// `eps` below the residue, so the scales `1e-3, 1e-4, 1e-5` are multiplied
/// by `min(1, |R|)`, `R` being a residue estimate taken at `eps = 1e-10`.
/// The residue shrinks roughly like `g^n`, so draws should keep `g` away
/// from zero for the pole to be resolvable in double precision.
pub fn simple_pole(n: u64, g: f64, delta: f64, parity: Parity) -> Result<(), String> {
    let p = rabi(g, delta, parity);
    let cfg = SeriesConfig { pole_guard: 1e-14, ..SeriesConfig::default() };
    let at = |x: f64| g_regular(x, &p, &cfg).map(|e| e.value).map_err(|e| e.to_string());
    let residue = |eps: f64| -> Result<(f64, f64, f64), String> {
        let (xl, xh) = (n as f64 - eps, n as f64 + eps);
        let (lo, hi) = (at(xl)?, at(xh)?);
        // the actual offsets, exact by Sterbenz
        Ok((lo, hi, 0.5 * ((xh - n as f64) * hi - (n as f64 - xl) * lo)))
    };
    let scale = residue(1e-10)?.2.abs().min(1.0);
    if scale < 1e-8 {
        return Err(format!("residue {scale:e} too small to resolve at n={n}, g={g}, delta={delta}"));
    }
    let mut c = Vec::new();
    for eps in [1e-3, 1e-4, 1e-5] {
        let eps = eps * scale;
        let (lo, hi, r) = residue(eps)?;
        if lo * hi >= 0.0 {
            return Err(format!("no sign change across {n} at eps={eps}: {lo}, {hi}"));
        }
        c.push(r);
    }
    let d1 = (c[0] - c[1]).abs();
    let d2 = (c[1] - c[2]).abs();
    // evaluation noise floor: eps * G loses digits to the regular part
    if d2 <= 0.2 * d1 + 1e-7 * c[2].abs() {
        Ok(())
    } else {
        Err(format!("residue estimates {c:?} not converging at n={n}, g={g}, delta={delta}"))
    }
}

/// Each of the lowest `k` eigenvalues is non-increasing under cutoff
/// doubling.
pub fn variational_monotonicity(g: f64, delta: f64, parity: Parity) -> Result<(), String> {
    let p = rabi(g, delta, parity);
    let k = 6;
    let mut prev: Option<Vec<f64>> = None;
    for cutoff in [8usize, 16, 32, 64, 128] {
        let m = build_rabi(&p, cutoff).map_err(|e| e.to_string())?;
        let vals = eigenvalues(&m, k).map_err(|e| e.to_string())?;
        if let Some(pv) = &prev {
            for (i, (a, b)) in pv.iter().zip(&vals).enumerate() {
                if *b > *a + 1e-12 * a.abs().max(1.0) {
                    return Err(format!("level {i} rose from {a} to {b} at cutoff {cutoff}"));
                }
            }
        }
        prev = Some(vals);
    }
    Ok(())
}

/// The minimal solution started from `(1, r_1)` and propagated forward
/// decays relative to the regular (dominant) one started from `(1, f_0)`.
pub fn minimality(x: f64, g: f64, delta: f64) -> Result<(), String> {
    let p = rabi(g, delta, Parity::Even);
    let r = minimal_ratio(x, &p, 0, 1e-13).map_err(|e| e.to_string())?;
    if !r.converged {
        return Err(format!("backward recurrence did not converge at x={x}"));
    }
    let f = |n: u64| f_coefficient(n, SpectralParameter(x), &p, 1e-12).map_err(|e| e.to_string());
    let (mut a0, mut a1) = (1.0, r.ratio);
    let (mut b0, mut b1) = (1.0, f(0)?);
    let start = (a1 / b1).abs().max(1.0);
    // the asymptotic regime starts past n ~ x + 4 g^2
    let steps = 60 + (4.0 * (x.abs() + 8.0 * g * g)).ceil() as usize;
    for n in 2..=steps {
        let fn1 = f(n as u64 - 1)?;
        let a2 = (fn1 * a1 - a0) / n as f64;
        let b2 = (fn1 * b1 - b0) / n as f64;
        (a0, a1) = (a1, a2);
        (b0, b1) = (b1, b2);
    }
    let end = (a1 / b1).abs();
    // the regular solution is itself minimal only on the spectrum
    if b1.abs() < 1e-300 {
        return Ok(());
    }
    if end < 1e-6 * start {
        Ok(())
    } else {
        Err(format!("minimal/regular ratio {end:e} after {steps} steps (start {start:e}) at x={x}, g={g}, delta={delta}"))
    }
}

pub fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}

/// Runs one property over `CASES` draws with a fixed seed; returns the
/// number of draws and the first failure.
pub fn run<S, F>(strategy: S, check: F) -> Result<u32, String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), String>,
{
    let mut runner = TestRunner::new_with_rng(
        Config { cases: CASES, failure_persistence: None, ..Config::default() },
        proptest::test_runner::TestRng::deterministic_rng(proptest::test_runner::RngAlgorithm::ChaCha),
    );
    runner
        .run(&strategy, |v| check(v).map_err(TestCaseError::fail))
        .map(|_| CASES)
        .map_err(|e| e.to_string())
}
