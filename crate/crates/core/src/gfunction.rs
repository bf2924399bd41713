//! Spectral conditions built from the coefficient series.
//!
//! * `G_+(x) = sum K_n(x) [1 - delta/(x - n)] g^n` vanishes at the regular
//!   eigenvalues of the even chain and has simple poles at `x = 0, 1, 2, ...`.
//! * `G^(m)_+(g, delta) = -2(m+1)/delta + sum_{n>m} K_n (1 + delta/(n-m)) g^(n-m-1)`
//!   vanishes when `x = m` is a non-degenerate exceptional eigenvalue.
//! * `K_m(m; g, delta) = 0` marks a doubly degenerate eigenvalue `E = m - g^2`.
//!
//! Odd-parity versions follow from `delta -> -delta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Parity, RabiParams};
use crate::precision::{dispatch_precision, escalate, unit_roundoff, Real};
use crate::recurrence::{judd_coefficient, SeriesConfig, SeriesPlan, SeriesVariant};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GEvaluation {
    pub x: f64,
    pub value: f64,
    pub parity: Parity,
    pub nearest_pole: u64,
    pub pole_distance: f64,
    /// Bound on rounding plus truncation error of `value`.
    pub truncation_error: f64,
    pub precision_bits: u32,
    /// `|value| <= 3 * truncation_error`: the sign is not certified.
    pub indeterminate: bool,
}

impl GEvaluation {
    /// Certified sign, or `None` if indeterminate.
    pub fn sign(&self) -> Option<f64> {
        if self.indeterminate {
            None
        } else {
            Some(self.value.signum())
        }
    }
}

fn nearest_pole(x: f64) -> (u64, f64) {
    let n = x.round().max(0.0);
    (n as u64, (x - n).abs())
}

struct SumResult {
    value: f64,
    error: f64,
}

/// Sums the G-function series at working precision `T` with a running
/// error bound.
fn sum_series<T: Real>(plan: &SeriesPlan, bits: u32, cfg: &SeriesConfig) -> Result<SumResult> {
    let u = unit_roundoff(bits);
    let tol = cfg.tol * (u / f64::EPSILON).min(1.0);
    let cfg_b = SeriesConfig { tol, ..*cfg };
    let raw = plan.generate::<T>(bits, &cfg_b, 0)?;
    let x = T::from_f64_bits(plan.x, bits);
    let g = x.lift(plan.g);
    let d = x.lift(plan.delta);
    let one = x.lift(1.0);

    let mut total = x.lift(0.0);
    let mut abs_sum = 0.0f64;
    let mut err = 0.0f64;
    let mut last_abs = 0.0f64;
    let n_terms = raw.coeffs.len();
    match plan.variant {
        SeriesVariant::Regular => {
            let mut gp = one.clone();
            for (n, k) in raw.coeffs.iter().enumerate() {
                let bracket = one.clone() - d.clone() / (x.clone() - x.lift(n as f64));
                let term = k.clone() * bracket * gp.clone();
                let a = term.abs().to_f64();
                err += a * (raw.rel_err[n] + 6.0 * u);
                abs_sum += a;
                last_abs = a;
                total = total + term;
                gp = gp * g.clone();
            }
        }
        SeriesVariant::ExceptionalNd { m } | SeriesVariant::ExceptionalD { m } => {
            let m = m as usize;
            let lead = -(x.lift(2.0 * (m as f64 + 1.0)) / d.clone());
            abs_sum += lead.abs().to_f64();
            total = total + lead;
            let mut gp = one.clone();
            for (n, k) in raw.coeffs.iter().enumerate().skip(m + 1) {
                let bracket = one.clone() + d.clone() / x.lift((n - m) as f64);
                let term = k.clone() * bracket * gp.clone();
                let a = term.abs().to_f64();
                err += a * (raw.rel_err[n] + 6.0 * u);
                abs_sum += a;
                last_abs = a;
                total = total + term;
                gp = gp * g.clone();
            }
        }
    }
    // summation rounding plus a geometric tail (ratio about 1/2)
    err += u * n_terms as f64 * abs_sum + 2.0 * last_abs;
    let value = total.to_f64();
    if !value.is_finite() {
        return Err(Error::NoConvergence { max_order: n_terms, last_term: value });
    }
    Ok(SumResult { value, error: err })
}

fn evaluate_with_escalation(plan: &SeriesPlan, parity: Parity, cfg: &SeriesConfig) -> Result<GEvaluation> {
    let (pole, dist) = nearest_pole(plan.x);
    let mut bits = cfg.base_bits;
    loop {
        let s = dispatch_precision!(bits, |T| sum_series::<T>(plan, bits, cfg))?;
        let indeterminate = !(s.value.abs() > 3.0 * s.error);
        let eval = GEvaluation {
            x: plan.x,
            value: s.value,
            parity,
            nearest_pole: pole,
            pole_distance: dist,
            truncation_error: s.error,
            precision_bits: bits,
            indeterminate,
        };
        if !indeterminate {
            return Ok(eval);
        }
        match escalate(bits, cfg.max_bits) {
            Some(next) => bits = next,
            None => return Err(Error::IndeterminateSign(Box::new(eval))),
        }
    }
}

fn require_coupled(params: &RabiParams) -> Result<()> {
    params.validate()?;
    if params.g <= 0.0 {
        return Err(Error::InvalidParameter("G-functions require g > 0".into()));
    }
    Ok(())
}

/// `G_+(x)` (or `G_-(x)` for odd parity), escalating precision until the
/// sign is certified.
///
/// Returns [`Error::IndeterminateSign`] carrying the last evaluation if the
/// sign stays uncertain at `cfg.max_bits`.
pub fn g_regular(x: f64, params: &RabiParams, cfg: &SeriesConfig) -> Result<GEvaluation> {
    require_coupled(params)?;
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("x must be finite, got {x}")));
    }
    let (pole, dist) = nearest_pole(x);
    if x > -0.5 && dist <= cfg.pole_guard {
        return Err(Error::PoleAtInteger { x, pole, guard: cfg.pole_guard });
    }
    let plan = SeriesPlan {
        x,
        g: params.g,
        delta: params.signed_delta(),
        variant: SeriesVariant::Regular,
        d_constant: 0.0,
    };
    evaluate_with_escalation(&plan, params.parity, cfg)
}

/// Like [`g_regular`] but returns the best available evaluation (flagged
/// indeterminate) instead of an error when the sign cannot be certified.
pub fn g_regular_lenient(x: f64, params: &RabiParams, cfg: &SeriesConfig) -> Result<GEvaluation> {
    match g_regular(x, params, cfg) {
        Err(Error::IndeterminateSign(e)) => Ok(*e),
        other => other,
    }
}

/// `G^(m)_+(g, delta)` for even parity, `G^(m)_+(g, -delta)` for odd.
pub fn g_exceptional_nd(m: u64, params: &RabiParams, cfg: &SeriesConfig) -> Result<GEvaluation> {
    require_coupled(params)?;
    if params.delta <= 0.0 {
        return Err(Error::InvalidParameter("the exceptional G-function requires delta > 0".into()));
    }
    let plan = SeriesPlan {
        x: m as f64,
        g: params.g,
        delta: params.signed_delta(),
        variant: SeriesVariant::ExceptionalNd { m },
        d_constant: 0.0,
    };
    match evaluate_with_escalation(&plan, params.parity, cfg) {
        Err(Error::IndeterminateSign(e)) => Ok(*e),
        other => other,
    }
}

/// `K_m(m; g, delta)`; zero iff `E = m - g^2` is doubly degenerate.
pub fn judd_condition(m: u64, params: &RabiParams) -> Result<f64> {
    judd_coefficient(m, params)
}

/// Poles of `G_+-`: `0, 1, ..., floor(x_max)`.
pub fn pole_set(x_max: f64) -> Vec<u64> {
    if !(x_max >= 0.0) {
        return Vec::new();
    }
    (0..=x_max.floor() as u64).collect()
}
