//! Frobenius coefficients of the reduced Rabi Hamiltonian.
//!
//! Around the regular singular point `z = -g` the analytic solution of the
//! even-parity chain is `sum K_n(x) y^n` with `y = z + g`, where the
//! coefficients obey the three-term recurrence
//!
//! ```text
//! n K_n = f_{n-1}(x) K_{n-1} - K_{n-2},
//! f_n(x) = 2g + (n - x + delta^2 / (x - n)) / (2g).
//! ```
//!
//! The odd chain is the even one with `delta -> -delta`; the recurrence
//! itself depends on `delta^2` only, so the sign enters through the series
//! consumers (G-functions, wavefunctions, seeds of the exceptional series).

use num_complex::Complex64;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{RabiParams, SpectralParameter};
use crate::precision::{dispatch_precision, escalate, unit_roundoff, Real, DOUBLE_BITS, MAX_BITS};

/// Knobs shared by every series-based evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesConfig {
    /// Absolute cut on the weighted terms `|K_n g^n|` (scaled by the peak
    /// weighted term when that exceeds one).
    pub tol: f64,
    /// Minimum distance from `x` to an integer for the regular path.
    pub pole_guard: f64,
    pub max_order: usize,
    pub base_bits: u32,
    pub max_bits: u32,
    /// Escalate precision when the estimated relative error of any
    /// coefficient exceeds this.
    pub cancellation_limit: f64,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            tol: 1e-14,
            pole_guard: 1e-9,
            max_order: 4000,
            base_bits: DOUBLE_BITS,
            max_bits: MAX_BITS,
            cancellation_limit: 1e-6,
        }
    }
}

impl SeriesConfig {
    pub fn with_bits(self, bits: u32) -> Self {
        SeriesConfig { base_bits: bits, max_bits: self.max_bits.max(bits), ..self }
    }
}

/// Which solution of the recurrence a series represents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesVariant {
    /// `K_0 = 1`, `K_1 = f_0(x)`.
    Regular,
    /// `x = m`, `K_0 .. K_m = 0`, `K_{m+1} = 1`.
    ExceptionalNd { m: u64 },
    /// `x = m`, `K_0 = 1` up to `K_{m-1}`, `K_m = 0` imposed, free constant
    /// `c` entering `K_{m+1}`.
    ExceptionalD { m: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSeries {
    pub x: SpectralParameter,
    /// `K_0 ..= K_N`, rounded to double precision.
    pub coeffs: Vec<f64>,
    pub variant: SeriesVariant,
    pub truncation_order: usize,
    pub precision_bits: u32,
    /// Largest estimated relative error of any coefficient (running error
    /// analysis at the working precision).
    pub relative_error: f64,
    /// Largest `|n K_n - f_{n-1} K_{n-1} + K_{n-2}| / max(1, |n K_n|)`
    /// observed while generating the series, at the working precision.
    pub recurrence_residual: f64,
    /// Constant `c` multiplying `y^m` in the companion component
    /// (`2(m+1)g/delta` for the non-degenerate exceptional series).
    pub companion_constant: f64,
}

/// `f_n(x)`.
pub fn f_coefficient(n: u64, x: SpectralParameter, params: &RabiParams, pole_guard: f64) -> Result<f64> {
    require_positive_g(params)?;
    let dist = x.0 - n as f64;
    if dist.abs() < pole_guard {
        return Err(Error::PoleAtInteger { x: x.0, pole: n, guard: pole_guard });
    }
    let g = params.g;
    let d = params.signed_delta();
    Ok(2.0 * g + (n as f64 - x.0 + d * d / dist) / (2.0 * g))
}

pub(crate) fn f_generic<T: Real>(n: u64, x: &T, g: &T, delta_sq: &T) -> T {
    let nn = x.lift(n as f64);
    let two_g = g.clone() + g.clone();
    if delta_sq.is_zero() {
        return two_g.clone() + (nn - x.clone()) / two_g;
    }
    let dist = x.clone() - nn.clone();
    two_g.clone() + (nn - x.clone() + delta_sq.clone() / dist) / two_g
}

/// Error bound on the computed `f_n`, relative to `|f_n|`.
fn f_relative_error(n: u64, x: f64, g: f64, delta: f64, u: f64) -> f64 {
    let dist = (x - n as f64).abs();
    let scale = 2.0 * g + (n as f64 + x.abs() + delta * delta / dist) / (2.0 * g);
    let f = 2.0 * g + (n as f64 - x + delta * delta / (x - n as f64)) / (2.0 * g);
    6.0 * u * scale / f.abs().max(f64::MIN_POSITIVE)
}

fn require_positive_g(params: &RabiParams) -> Result<()> {
    params.validate()?;
    if params.g <= 0.0 {
        return Err(Error::InvalidParameter("the series solution requires g > 0".into()));
    }
    Ok(())
}

fn check_regular_x(x: f64, cfg: &SeriesConfig) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("x must be finite, got {x}")));
    }
    if x > -0.5 {
        let n = x.round().max(0.0);
        if (x - n).abs() < cfg.pole_guard {
            return Err(Error::PoleAtInteger { x, pole: n as u64, guard: cfg.pole_guard });
        }
    }
    Ok(())
}

/// Coefficients in the working precision together with their running error
/// bounds.
#[derive(Debug, Clone)]
pub(crate) struct RawSeries<T> {
    pub coeffs: Vec<T>,
    /// Estimated relative error per coefficient.
    pub rel_err: Vec<f64>,
    pub residual: f64,
}

/// Seeds plus stopping rule for one series variant.
pub(crate) struct SeriesPlan {
    pub x: f64,
    pub g: f64,
    pub delta: f64,
    pub variant: SeriesVariant,
    /// Constant `c` of the degenerate exceptional series.
    pub d_constant: f64,
}

impl SeriesPlan {
    /// Weight multiplying `|K_n|` in the truncation test.
    fn weight(&self, n: usize) -> f64 {
        let g = self.g;
        match self.variant {
            SeriesVariant::Regular => {
                let dist = (self.x - self.x.round().max(0.0)).abs().max(f64::MIN_POSITIVE);
                let bracket = (self.delta.abs() / dist).max(1.0);
                g.powi(n as i32) * bracket
            }
            SeriesVariant::ExceptionalNd { m } | SeriesVariant::ExceptionalD { m } => {
                let k = n as i64 - m as i64 - 1;
                g.powi(k as i32) * (1.0 + self.delta.abs())
            }
        }
    }

    fn first_free_index(&self) -> usize {
        match self.variant {
            SeriesVariant::Regular => 2,
            SeriesVariant::ExceptionalNd { m } | SeriesVariant::ExceptionalD { m } => m as usize + 2,
        }
    }

    /// Builds the series in precision `T`, stopping by the weighted-tail
    /// rule or at `min_order` (whichever comes later).
    pub fn generate<T: Real>(&self, bits: u32, cfg: &SeriesConfig, min_order: usize) -> Result<RawSeries<T>> {
        let u = unit_roundoff(bits);
        let x = T::from_f64_bits(self.x, bits);
        let g = x.lift(self.g);
        let dsq = x.lift(self.delta) * x.lift(self.delta);
        let zero = x.lift(0.0);
        let one = x.lift(1.0);

        let mut coeffs: Vec<T> = Vec::new();
        let mut rel_err: Vec<f64> = Vec::new();
        match self.variant {
            SeriesVariant::Regular => {
                coeffs.push(one.clone());
                coeffs.push(f_generic(0, &x, &g, &dsq));
                rel_err.push(0.0);
                rel_err.push(f_relative_error(0, self.x, self.g, self.delta, u));
            }
            SeriesVariant::ExceptionalNd { m } => {
                for _ in 0..=m {
                    coeffs.push(zero.clone());
                    rel_err.push(0.0);
                }
                coeffs.push(one.clone());
                rel_err.push(0.0);
            }
            SeriesVariant::ExceptionalD { m } => {
                if m == 0 {
                    return Err(Error::PreconditionViolated(
                        "the degenerate exceptional series needs m >= 1".into(),
                    ));
                }
                coeffs.push(one.clone());
                rel_err.push(0.0);
                if m >= 2 {
                    coeffs.push(f_generic(0, &x, &g, &dsq));
                    rel_err.push(f_relative_error(0, self.x, self.g, self.delta, u));
                }
                for n in 2..m as usize {
                    let (k, e) = step(n, &x, &g, &dsq, &coeffs, &rel_err, self, u);
                    coeffs.push(k);
                    rel_err.push(e);
                }
                // K_m = 0 imposed; K_{m+1} = (c delta / (2g) - K_{m-1}) / (m + 1).
                let m1 = m as usize;
                let km1 = coeffs[m1 - 1].clone();
                coeffs.push(zero.clone());
                rel_err.push(0.0);
                let c = x.lift(self.d_constant);
                let d = x.lift(self.delta);
                let two_g = g.clone() + g.clone();
                let next = (c * d / two_g - km1) / x.lift((m1 + 1) as f64);
                coeffs.push(next);
                rel_err.push(3.0 * u + rel_err[m1 - 1]);
            }
        }

        let start = self.first_free_index();
        let mut residual: f64 = 0.0;
        let mut peak: f64 = 0.0;
        let mut small_run = 0usize;
        let x_floor = self.x.max(0.0).ceil() as usize + 1;
        for (n, k) in coeffs.iter().enumerate() {
            peak = peak.max(k.abs().to_f64() * self.weight(n));
        }
        let mut n = coeffs.len();
        loop {
            if n > cfg.max_order {
                let last = coeffs.last().map(|k| k.abs().to_f64() * self.weight(n - 1)).unwrap_or(f64::NAN);
                return Err(Error::NoConvergence { max_order: cfg.max_order, last_term: last });
            }
            debug_assert!(n >= start);
            let (k, e) = step(n, &x, &g, &dsq, &coeffs, &rel_err, self, u);
            // residual of the freshly computed coefficient, at working precision
            let f = f_generic((n - 1) as u64, &x, &g, &dsq);
            let nk = x.lift(n as f64) * k.clone();
            let r = nk.clone() - (f * coeffs[n - 1].clone() - coeffs[n - 2].clone());
            let scale = nk.abs().to_f64().max(1.0);
            residual = residual.max(r.abs().to_f64() / scale);

            let w = k.abs().to_f64() * self.weight(n);
            if !w.is_finite() || !k.is_finite() {
                return Err(Error::NoConvergence { max_order: n, last_term: w });
            }
            peak = peak.max(w);
            coeffs.push(k);
            rel_err.push(e);
            if w < cfg.tol * peak.max(1.0) {
                small_run += 1;
            } else {
                small_run = 0;
            }
            n += 1;
            if small_run >= 3 && n > x_floor && n > min_order {
                break;
            }
        }
        Ok(RawSeries { coeffs, rel_err, residual })
    }
}

/// One step of the recurrence with running relative error propagation.
#[allow(clippy::too_many_arguments)]
fn step<T: Real>(
    n: usize,
    x: &T,
    g: &T,
    dsq: &T,
    coeffs: &[T],
    rel_err: &[f64],
    plan: &SeriesPlan,
    u: f64,
) -> (T, f64) {
    let f = f_generic((n - 1) as u64, x, g, dsq);
    let fk = f.clone() * coeffs[n - 1].clone();
    let diff = fk.clone() - coeffs[n - 2].clone();
    let k = diff.clone() / x.lift(n as f64);
    let denom = diff.abs().to_f64();
    let e = if denom == 0.0 {
        if fk.is_zero() && coeffs[n - 2].is_zero() {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        let a = fk.abs().to_f64() / denom;
        let b = coeffs[n - 2].abs().to_f64() / denom;
        let df = f_relative_error((n - 1) as u64, plan.x, plan.g, plan.delta, u);
        a * (rel_err[n - 1] + df) + b * rel_err[n - 2] + u * (2.0 * a + b + 2.0)
    };
    (k, e)
}

fn finish<T: Real>(raw: RawSeries<T>, x: f64, variant: SeriesVariant, bits: u32, c: f64) -> CoefficientSeries {
    let truncation_order = raw.coeffs.len() - 1;
    let relative_error = raw.rel_err.iter().copied().fold(0.0, f64::max);
    CoefficientSeries {
        x: SpectralParameter(x),
        coeffs: raw.coeffs.iter().map(|k| k.to_f64()).collect(),
        variant,
        truncation_order,
        precision_bits: bits,
        relative_error,
        recurrence_residual: raw.residual,
        companion_constant: c,
    }
}

/// Generates the series, doubling the precision while the running error
/// analysis reports more than `cancellation_limit` relative error.
fn build_with_escalation(plan: &SeriesPlan, cfg: &SeriesConfig, c: f64) -> Result<CoefficientSeries> {
    let mut bits = cfg.base_bits;
    loop {
        let series = dispatch_precision!(bits, |T| {
            let raw = plan.generate::<T>(bits, cfg, 0)?;
            finish(raw, plan.x, plan.variant, bits, c)
        });
        if series.relative_error <= cfg.cancellation_limit {
            return Ok(series);
        }
        match escalate(bits, cfg.max_bits) {
            Some(next) => bits = next,
            None => return Ok(series),
        }
    }
}

/// Regular-variant series `K_0 = 1, K_1 = f_0(x)`.
pub fn regular_series(x: SpectralParameter, params: &RabiParams, cfg: &SeriesConfig) -> Result<CoefficientSeries> {
    require_positive_g(params)?;
    check_regular_x(x.0, cfg)?;
    let plan = SeriesPlan {
        x: x.0,
        g: params.g,
        delta: params.signed_delta(),
        variant: SeriesVariant::Regular,
        d_constant: 0.0,
    };
    build_with_escalation(&plan, cfg, 0.0)
}

/// Non-degenerate exceptional series at `x = m`, seeded `K_m = 0`,
/// `K_{m+1} = 1`.
pub fn exceptional_nd_series(m: u64, params: &RabiParams, cfg: &SeriesConfig) -> Result<CoefficientSeries> {
    require_positive_g(params)?;
    let d = params.signed_delta();
    if d == 0.0 {
        return Err(Error::InvalidParameter("the exceptional series requires delta != 0".into()));
    }
    let plan = SeriesPlan {
        x: m as f64,
        g: params.g,
        delta: d,
        variant: SeriesVariant::ExceptionalNd { m },
        d_constant: 0.0,
    };
    let c = 2.0 * (m as f64 + 1.0) * params.g / d;
    build_with_escalation(&plan, cfg, c)
}

/// Degenerate exceptional series at `x = m >= 1` with the logarithmic term
/// removed (`K_m = 0` imposed) and companion constant `c`.
///
/// Only meaningful on the Judd locus, where the recurrence itself produces
/// `K_m(m) = 0`.
pub fn exceptional_d_series(m: u64, params: &RabiParams, c: f64, cfg: &SeriesConfig) -> Result<CoefficientSeries> {
    require_positive_g(params)?;
    if m == 0 {
        return Err(Error::PreconditionViolated("the degenerate exceptional series needs m >= 1".into()));
    }
    let plan = SeriesPlan {
        x: m as f64,
        g: params.g,
        delta: params.signed_delta(),
        variant: SeriesVariant::ExceptionalD { m },
        d_constant: c,
    };
    build_with_escalation(&plan, cfg, c)
}

/// `K_m(m; g, delta)` from `K_0 = 1, K_1 = f_0(m)`: a finite computation
/// whose zeros mark the doubly degenerate exceptional eigenvalue
/// `E = m - g^2`. Identical for both parities.
pub fn judd_coefficient(m: u64, params: &RabiParams) -> Result<f64> {
    judd_coefficient_with::<f64>(m, params, DOUBLE_BITS)
}

/// [`judd_coefficient`] at an arbitrary working precision.
pub fn judd_coefficient_bits(m: u64, params: &RabiParams, bits: u32) -> Result<f64> {
    dispatch_precision!(bits, |T| judd_coefficient_with::<T>(m, params, bits))
}

/// `K_m(m)` together with the largest intermediate magnitude of the
/// recurrence, the natural scale for deciding whether the value is zero
/// within rounding.
pub fn judd_coefficient_scaled(m: u64, params: &RabiParams) -> Result<(f64, f64)> {
    if m == 0 {
        return Err(Error::PreconditionViolated(
            "m = 0 admits a single analytic local solution and is never degenerate".into(),
        ));
    }
    require_positive_g(params)?;
    let x = m as f64;
    let dsq = params.delta * params.delta;
    let mut prev = 1.0f64;
    let mut cur = f_generic(0, &x, &params.g, &dsq);
    let mut scale = 1.0f64.max(cur.abs());
    for n in 2..=m {
        let f = f_generic(n - 1, &x, &params.g, &dsq);
        let fk = f * cur;
        scale = scale.max(fk.abs() / n as f64).max(prev.abs() / n as f64);
        let next = (fk - prev) / n as f64;
        prev = cur;
        cur = next;
    }
    Ok((cur, scale))
}

fn judd_coefficient_with<T: Real>(m: u64, params: &RabiParams, bits: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::PreconditionViolated(
            "m = 0 admits a single analytic local solution and is never degenerate".into(),
        ));
    }
    require_positive_g(params)?;
    let x = T::from_f64_bits(m as f64, bits);
    let g = x.lift(params.g);
    let dsq = x.lift(params.delta) * x.lift(params.delta);
    let mut prev = x.lift(1.0);
    let mut cur = f_generic(0, &x, &g, &dsq);
    for n in 2..=m {
        let f = f_generic(n - 1, &x, &g, &dsq);
        let next = (f * cur.clone() - prev) / x.lift(n as f64);
        prev = cur;
        cur = next;
    }
    Ok(cur.to_f64())
}

impl CoefficientSeries {
    /// Continues the recurrence in double precision until `K_order`.
    pub fn extended(&self, params: &RabiParams, order: usize) -> CoefficientSeries {
        let mut out = self.clone();
        if order <= self.truncation_order {
            return out;
        }
        let x = self.x.0;
        let g = params.g;
        let dsq = params.delta * params.delta;
        for n in self.coeffs.len()..=order {
            let f = f_generic((n - 1) as u64, &x, &g, &dsq);
            let k = (f * out.coeffs[n - 1] - out.coeffs[n - 2]) / n as f64;
            out.coeffs.push(k);
        }
        out.truncation_order = order;
        out
    }

    /// Order from which the recurrence applies (indices below are seeds).
    pub fn first_recurrence_index(&self) -> usize {
        match self.variant {
            SeriesVariant::Regular => 2,
            SeriesVariant::ExceptionalNd { m } => m as usize + 2,
            SeriesVariant::ExceptionalD { m } => {
                // K_{m+1} is seeded; everything else follows the recurrence.
                if m >= 1 {
                    2
                } else {
                    m as usize + 2
                }
            }
        }
    }
}

/// The two expansions of `psi(z)`: the one analytic at `z = +g`
/// (`e^{gz} sum K_n (g - z)^n`) and the one analytic at `z = -g`.
///
/// They coincide for every `z` in the overlap of the convergence disks iff
/// `x` is an eigenvalue.
pub fn wavefunction(
    series: &CoefficientSeries,
    params: &RabiParams,
    z: Complex64,
    cfg: &SeriesConfig,
) -> Result<(Complex64, Complex64)> {
    require_positive_g(params)?;
    let g = params.g;
    let d = params.signed_delta();
    let r_plus = (z - g).norm();
    let r_minus = (z + g).norm();
    let radius = 2.0 * g;
    if r_plus >= radius || r_minus >= radius {
        return Err(Error::OutsideDomain { z });
    }
    let rho = r_plus.max(r_minus);
    // terms decay like (rho / 2g)^n once n is past x
    let ratio = rho / radius;
    let extra = if ratio > 0.0 { (cfg.tol.ln() / ratio.ln()).ceil().max(0.0) as usize } else { 0 };
    let order = (series.x.0.max(0.0).ceil() as usize + 8 + extra).max(series.truncation_order);
    if order > cfg.max_order {
        return Err(Error::NoConvergence { max_order: cfg.max_order, last_term: ratio });
    }
    let s = series.extended(params, order);

    let y_plus = Complex64::new(g, 0.0) - z;
    let y_minus = z + g;
    let mut sum_plus = Complex64::new(0.0, 0.0);
    let mut sum_minus = Complex64::new(0.0, 0.0);
    let mut p_plus = Complex64::new(1.0, 0.0);
    let mut p_minus = Complex64::new(1.0, 0.0);
    let x = s.x.0;
    for (n, &k) in s.coeffs.iter().enumerate() {
        sum_plus += p_plus * k;
        match s.variant {
            SeriesVariant::Regular => {
                sum_minus += p_minus * (k * d / (x - n as f64));
            }
            SeriesVariant::ExceptionalNd { m } | SeriesVariant::ExceptionalD { m } => {
                if n as u64 == m {
                    sum_minus += p_minus * s.companion_constant;
                } else {
                    sum_minus -= p_minus * (d * k / (n as f64 - m as f64));
                }
            }
        }
        p_plus *= y_plus;
        p_minus *= y_minus;
    }
    let psi_plus = (z * g).exp() * sum_plus;
    let psi_minus = (-z * g).exp() * sum_minus;
    Ok((psi_plus, psi_minus))
}

/// `K_n` of the regular series at high precision, for callers that need
/// the coefficients beyond double range.
pub fn regular_series_mp(x: f64, params: &RabiParams, bits: u32, order: usize) -> Result<Vec<Float>> {
    require_positive_g(params)?;
    let plan = SeriesPlan {
        x,
        g: params.g,
        delta: params.signed_delta(),
        variant: SeriesVariant::Regular,
        d_constant: 0.0,
    };
    let cfg = SeriesConfig { max_order: order.max(SeriesConfig::default().max_order), ..Default::default() };
    let raw = plan.generate::<Float>(bits, &cfg, order)?;
    Ok(raw.coeffs)
}
