//! Continued-fraction spectral condition.
//!
//! The minimal solution of `n K_n = f_{n-1} K_{n-1} - K_{n-2}` is obtained
//! from the backward recurrence of ratios `r_n = K_n / K_{n-1}`,
//!
//! ```text
//! r_n = 1 / (f_n - (n + 1) r_{n+1}),   r_{N+1} = 0,
//! ```
//!
//! and `x` is an eigenvalue (of either parity) iff the regular solution is
//! minimal, i.e. `F(x) = r_1(x) - f_0(x) = 0`. `F` has a pole close to each
//! zero, so root searches use the sign-equivalent pole-free form
//! `N(x) = (u_1 - f_0 u_0) / max(|u_0|, |u_1|)` built from the unnormalized
//! backward solution `u_n`.

use rayon::prelude::*;
use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Parity, RabiParams};
use crate::precision::{dispatch_precision, unit_roundoff, Real, DOUBLE_BITS, MAX_BITS};
use crate::recurrence::f_generic;
use crate::rootfind::{brent_with_values, illinois};
use crate::spectrum::oracle_levels;

/// Largest backward depth tried before giving up.
pub const MAX_DEPTH: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinimalRatio {
    pub ratio: f64,
    pub depth_used: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContFracEval {
    pub x: f64,
    pub f_value: f64,
    pub depth_used: usize,
    pub converged: bool,
}

fn check(x: f64, params: &RabiParams) -> Result<()> {
    params.validate()?;
    if params.g <= 0.0 {
        return Err(Error::InvalidParameter("the continued fraction requires g > 0".into()));
    }
    if !x.is_finite() {
        return Err(Error::InvalidParameter(format!("x must be finite, got {x}")));
    }
    Ok(())
}

fn initial_depth(x: f64) -> usize {
    2 * x.max(0.0).ceil() as usize + 32
}

/// `r_1` from depth `depth` at the precision of `T`. At `x = n` exactly the
/// pole of `f_n` makes `r_n = 0` (no pole when `delta = 0`).
pub(crate) fn ratio_chain<T: Real>(x: &T, g: &T, dsq: &T, depth: usize) -> T {
    let zero = x.lift(0.0);
    let one = x.lift(1.0);
    let mut r = zero.clone();
    for n in (1..=depth).rev() {
        let nn = x.lift(n as f64);
        if (x.clone() - nn).is_zero() && !dsq.is_zero() {
            r = zero.clone();
            continue;
        }
        let f = f_generic(n as u64, x, g, dsq);
        r = one.clone() / (f - x.lift((n + 1) as f64) * r);
    }
    r
}

/// `(u_0, u_1)` of the backward solution seeded `u_{N+1} = 0, u_N = 1`,
/// rescaled by a positive factor.
pub(crate) fn backward_pair<T: Real>(x: &T, g: &T, dsq: &T, depth: usize) -> (T, T) {
    let mut next = x.lift(0.0); // u_{n+1}
    let mut cur = x.lift(1.0); // u_n
    for n in (1..=depth).rev() {
        let f = f_generic(n as u64, x, g, dsq);
        let prev = f * cur.clone() - x.lift((n + 1) as f64) * next;
        next = cur;
        cur = prev;
        let big = cur.abs().to_f64().max(next.abs().to_f64());
        if big > 1e100 {
            let s = x.lift(1.0 / big);
            cur = cur * s.clone();
            next = next * s;
        }
    }
    (cur, next)
}

fn f_value<T: Real>(x: &T, g: &T, dsq: &T, depth: usize) -> T {
    let r = ratio_chain(x, g, dsq, depth);
    if x.is_zero() && !dsq.is_zero() {
        // f_0 has its pole here
        return x.lift(f64::INFINITY);
    }
    r - f_generic(0, x, g, dsq)
}

fn n_value<T: Real>(x: &T, g: &T, dsq: &T, depth: usize) -> T {
    let (u0, u1) = backward_pair(x, g, dsq, depth);
    let f0 = f_generic(0, x, g, dsq);
    let scale = if u0.abs() > u1.abs() { u0.abs() } else { u1.abs() };
    (u1 - f0 * u0) / scale
}

/// Minimal-solution ratio `K_1 / K_0`, doubling the backward depth from
/// `depth` until two successive values differ by less than
/// `ftol * max(1, |r|)`.
pub fn minimal_ratio(x: f64, params: &RabiParams, depth: usize, ftol: f64) -> Result<MinimalRatio> {
    check(x, params)?;
    let (g, dsq) = (params.g, params.delta * params.delta);
    let mut n = depth.max(initial_depth(x)).max(4);
    let mut prev = ratio_chain(&x, &g, &dsq, n);
    loop {
        let m = 2 * n;
        if m > MAX_DEPTH {
            return Err(Error::NoConvergence { max_order: MAX_DEPTH, last_term: prev });
        }
        let r = ratio_chain(&x, &g, &dsq, m);
        if !r.is_finite() {
            return Err(Error::NoConvergence { max_order: m, last_term: r });
        }
        if (r - prev).abs() < ftol * r.abs().max(1.0) {
            return Ok(MinimalRatio { ratio: r, depth_used: m, converged: true });
        }
        prev = r;
        n = m;
    }
}

/// `F(x) = r_1(x) - f_0(x)`.
pub fn f_spectral(x: f64, params: &RabiParams, ftol: f64) -> Result<ContFracEval> {
    let r = minimal_ratio(x, params, 0, ftol)?;
    let f0 = f_generic(0, &x, &params.g, &(params.delta * params.delta));
    Ok(ContFracEval { x, f_value: r.ratio - f0, depth_used: r.depth_used, converged: r.converged })
}

/// `F(x)` at `bits` of working precision with a fixed depth.
pub fn f_spectral_bits(x: f64, params: &RabiParams, depth: usize, bits: u32) -> Result<f64> {
    check(x, params)?;
    Ok(dispatch_precision!(bits, |T| {
        let xx = T::from_f64_bits(x, bits);
        let g = xx.lift(params.g);
        let dsq = xx.lift(params.delta) * xx.lift(params.delta);
        f_value(&xx, &g, &dsq, depth).to_f64()
    }))
}

/// Pole-free sign-equivalent of `F` (see module docs).
pub fn n_spectral(x: f64, params: &RabiParams, depth: usize) -> Result<f64> {
    check(x, params)?;
    Ok(n_value(&x, &params.g, &(params.delta * params.delta), depth))
}

/// A zero of the continued-fraction condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContFracRoot {
    pub x: f64,
    pub f_value: f64,
    /// True when the root sits on an integer (where `G_+-` has a pole).
    pub at_integer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContFracConfig {
    pub ftol: f64,
    pub samples_per_unit: usize,
    pub pole_margin: f64,
    pub xtol: f64,
    /// `|F(m)|` below this at an integer counts as a root there.
    pub integer_tol: f64,
}

impl Default for ContFracConfig {
    fn default() -> Self {
        ContFracConfig { ftol: 1e-12, samples_per_unit: 256, pole_margin: 1e-7, xtol: 1e-12, integer_tol: 1e-10 }
    }
}

fn depth_for(x_max: f64, params: &RabiParams, ftol: f64) -> Result<usize> {
    Ok(minimal_ratio(x_max.max(0.5) + 0.5, params, 0, ftol)?.depth_used * 2)
}

/// All zeros of `F` with `x <= x_max` (union of both parities).
pub fn contfrac_roots(params: &RabiParams, x_max: f64, cfg: &ContFracConfig) -> Result<Vec<ContFracRoot>> {
    check(0.5, params)?;
    let depth = depth_for(x_max, params, cfg.ftol)?;
    let mut intervals = vec![(-params.delta - 1.0, -cfg.pole_margin)];
    let last = x_max.ceil() as i64;
    for n in 0..last {
        intervals.push((n as f64 + cfg.pole_margin, (n as f64 + 1.0 - cfg.pole_margin).min(x_max)));
    }
    let found: Vec<Vec<ContFracRoot>> = intervals
        .par_iter()
        .map(|&(a, b)| roots_in(a, b, params, depth, cfg))
        .collect::<Result<_>>()?;
    let mut roots: Vec<ContFracRoot> = found.into_iter().flatten().collect();
    // F is continuous at integers m >= 1 (and at 0 when delta = 0); check
    // them directly
    let first = if params.delta == 0.0 { 0 } else { 1 };
    for m in first..=x_max.floor() as u64 {
        let fm = f_spectral_bits(m as f64, params, depth, DOUBLE_BITS)?;
        if fm.abs() < cfg.integer_tol {
            roots.push(ContFracRoot { x: m as f64, f_value: fm, at_integer: true });
        }
    }
    roots.sort_by(|a, b| a.x.total_cmp(&b.x));
    Ok(roots)
}

fn roots_in(a: f64, b: f64, params: &RabiParams, depth: usize, cfg: &ContFracConfig) -> Result<Vec<ContFracRoot>> {
    if b <= a {
        return Ok(Vec::new());
    }
    let count = ((b - a) * cfg.samples_per_unit as f64).ceil().max(8.0) as usize;
    let xs: Vec<f64> = (0..=count).map(|i| a + (b - a) * i as f64 / count as f64).collect();
    let ns: Vec<f64> = xs.iter().map(|&x| n_spectral(x, params, depth)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    let dsq = params.delta * params.delta;
    let mut push_root = |lo: f64, hi: f64, flo: f64, fhi: f64| -> Result<()> {
        let r = brent_with_values(|x| n_spectral(x, params, depth), lo, hi, flo, fhi, cfg.xtol, 200)?;
        let f = ratio_chain(&r.x, &params.g, &dsq, depth) - f_generic(0, &r.x, &params.g, &dsq);
        out.push(ContFracRoot { x: r.x, f_value: f, at_integer: false });
        Ok(())
    };
    for i in 0..count {
        if ns[i] == 0.0 {
            push_root(xs[i], xs[i], 0.0, 0.0)?;
        } else if ns[i].signum() != ns[i + 1].signum() && ns[i + 1] != 0.0 {
            push_root(xs[i], xs[i + 1], ns[i], ns[i + 1])?;
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// breakdown study

/// Resolution data for one zero of `F`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownLevel {
    /// Position in the union of both parity spectra, ascending in `x`.
    pub index: usize,
    pub parity: Parity,
    pub x: f64,
    /// Nearest pole of `F` (zero of `u_0`).
    pub pole: f64,
    pub zero_pole_distance: f64,
    /// Smallest mantissa width at which `F` shows the correct sign on both
    /// sides of the zero, probed at half the distance to the nearest pole
    /// or neighbouring zero; `None` if more
    /// than the reference precision is needed.
    pub required_bits: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub g: f64,
    pub delta: f64,
    pub reference_bits: u32,
    pub levels: Vec<BreakdownLevel>,
}

impl BreakdownReport {
    /// Number of consecutive levels, starting at the lowest, resolved with
    /// `bits` of precision.
    pub fn resolved_count(&self, bits: u32) -> usize {
        self.levels.iter().take_while(|l| l.required_bits.is_some_and(|b| b <= bits)).count()
    }
}

struct RefCtx {
    g: Float,
    dsq: Float,
    depth: usize,
}

impl RefCtx {
    fn n(&self, x: &Float) -> Float {
        n_value(x, &self.g, &self.dsq, self.depth)
    }

    fn f(&self, x: &Float) -> Float {
        f_value(x, &self.g, &self.dsq, self.depth)
    }
}

/// Backward depth at which `r_1` is converged to the reference precision.
fn reference_depth(x: f64, params: &RabiParams, bits: u32) -> usize {
    let xx = Float::with_val(bits, x);
    let g = Float::with_val(bits, params.g);
    let dsq = Float::with_val(bits, params.delta * params.delta);
    let tol = unit_roundoff(bits) * 4.0;
    let mut n = initial_depth(x);
    let mut prev = ratio_chain(&xx, &g, &dsq, n);
    while n < MAX_DEPTH {
        let r = ratio_chain(&xx, &g, &dsq, 2 * n);
        let diff = Float::with_val(bits, &r - &prev).abs().to_f64();
        n *= 2;
        if diff <= tol * Real::abs(&r).to_f64().max(1.0) {
            break;
        }
        prev = r;
    }
    n
}

/// Zero of `N` near `x0` at reference precision.
fn reference_zero(ctx: &RefCtx, x0: f64) -> Option<Float> {
    let bits = ctx.g.prec();
    let mut h = 1e-9;
    while h < 1e-2 {
        let a = Float::with_val(bits, x0 - h);
        let b = Float::with_val(bits, x0 + h);
        let (na, nb) = (ctx.n(&a), ctx.n(&b));
        if na.signum_f64() != nb.signum_f64() {
            let xtol = Float::with_val(bits, unit_roundoff(bits) * 16.0 * x0.abs().max(1.0));
            let (lo, hi) = illinois(|x: &Float| ctx.n(x), a, b, &xtol, 2000).ok()?;
            return Some(Float::with_val(bits, &lo + &hi) / 2u32);
        }
        h *= 10.0;
    }
    None
}

/// Nearest pole of `F` on each side of the zero `z`, as a signed offset.
///
/// `reach[0]` and `reach[1]` are the distances to the neighbouring zeros
/// above and below. Between `z` and a neighbouring zero `F` has at most one
/// pole, so a sign change over the whole gap locates it by bisection (in
/// log scale first, since the pole may sit anywhere from the rounding
/// level up).
fn poles_beside(ctx: &RefCtx, z: &Float, reach: [f64; 2]) -> [Option<f64>; 2] {
    let bits = ctx.g.prec();
    let zf = z.to_f64();
    // a probe at offset `off` only needs enough bits to keep `z + off`
    // clear of `z`
    let sign = |off: f64| {
        let need = (zf.abs().max(1.0) / off.abs()).log2().ceil() as u32 + 48;
        let b = need.next_multiple_of(32).clamp(64, bits);
        let x = Float::with_val(b, z) + off;
        f_value(&x, &Float::with_val(b, &ctx.g), &Float::with_val(b, &ctx.dsq), ctx.depth).signum_f64()
    };
    [0, 1].map(|k| {
        let side = if k == 0 { 1.0 } else { -1.0 };
        let limit = reach[k] * (1.0 - 1e-9);
        let h = (unit_roundoff(bits) * zf.abs().max(1.0) * 4096.0).max(1e-300);
        if h >= limit {
            return None;
        }
        let s0 = sign(side * h);
        if sign(side * limit) == s0 {
            return None;
        }
        let (mut lo, mut hi) = (h, limit);
        while hi > 2.0 * lo {
            let mid = (lo * hi).sqrt();
            if sign(side * mid) == s0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        while hi - lo > 1e-5 * lo {
            let mid = 0.5 * (lo + hi);
            if sign(side * mid) == s0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Some(side * hi)
    })
}

fn resolved_at(ctx: &RefCtx, params: &RabiParams, a: &Float, c: &Float, sa: f64, sc: f64, bits: u32) -> bool {
    let at = |x: &Float| -> f64 {
        dispatch_precision!(bits, |T| {
            // the probe point itself is rounded to the working precision
            let xx = T::from_mpfr(x, bits);
            let g = xx.lift(params.g);
            let dsq = xx.lift(params.delta) * xx.lift(params.delta);
            f_value(&xx, &g, &dsq, ctx.depth).signum_f64()
        })
    };
    let (fa, fc) = (at(a), at(c));
    fa == sa && fc == sc && fa != fc
}

/// Zero-pole distances of `F` for the lowest `level_max` zeros and the
/// precision needed to resolve each one.
pub fn breakdown_study(params: &RabiParams, level_max: usize) -> Result<BreakdownReport> {
    check(0.5, params)?;
    let p = params.rescaled();
    let bits = MAX_BITS;
    // locate the zeros from the oracle, both parities merged
    let mut levels: Vec<(f64, Parity)> = Vec::new();
    let mut x_max = (level_max as f64 / 2.0 + 2.0).max(4.0);
    loop {
        levels.clear();
        for parity in Parity::BOTH {
            let pp = p.with_parity(parity);
            for e in oracle_levels(&pp, x_max, 1e-13)? {
                levels.push((e + p.g * p.g, parity));
            }
        }
        if levels.len() >= level_max {
            break;
        }
        x_max *= 1.5;
    }
    levels.sort_by(|a, b| a.0.total_cmp(&b.0));
    levels.truncate(level_max);

    let rows: Vec<BreakdownLevel> = levels
        .par_iter()
        .enumerate()
        .map(|(index, &(x0, parity))| {
            let depth = reference_depth(x0 + 1.0, &p, bits);
            let g = Float::with_val(bits, p.g);
            let d = Float::with_val(bits, p.delta);
            let ctx = RefCtx { dsq: Float::with_val(bits, &d * &d), g, depth };
            let fallback = BreakdownLevel {
                index,
                parity,
                x: x0,
                pole: f64::NAN,
                zero_pole_distance: f64::NAN,
                required_bits: None,
            };
            let Some(z) = reference_zero(&ctx, x0) else { return fallback };
            let reach = [
                levels.get(index + 1).map_or(1.5, |l| l.0 - x0),
                if index == 0 { 1.5 } else { x0 - levels[index - 1].0 },
            ];
            let sides = poles_beside(&ctx, &z, reach);
            let Some(off) = sides.iter().flatten().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())) else {
                return BreakdownLevel { x: z.to_f64(), ..fallback };
            };
            let delta = off.abs();
            // probes straddling the zero, inside the nearest pole or
            // neighbouring zero on either side
            let w = reach.iter().fold(delta, |m, &r| m.min(r)) / 2.0;
            let a = Float::with_val(bits, &z) - w;
            let c = Float::with_val(bits, &z) + w;
            let (sa, sc) = (ctx.f(&a).signum_f64(), ctx.f(&c).signum_f64());
            let required = if sa == sc || sa == 0.0 {
                None
            } else if resolved_at(&ctx, &p, &a, &c, sa, sc, DOUBLE_BITS) {
                Some(DOUBLE_BITS)
            } else if !resolved_at(&ctx, &p, &a, &c, sa, sc, bits) {
                None
            } else {
                let (mut lo, mut hi) = (DOUBLE_BITS, bits);
                while hi - lo > 1 {
                    let mid = (lo + hi) / 2;
                    if resolved_at(&ctx, &p, &a, &c, sa, sc, mid) {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Some(hi)
            };
            BreakdownLevel {
                index,
                parity,
                x: z.to_f64(),
                pole: z.to_f64() + off,
                zero_pole_distance: delta,
                required_bits: required,
            }
        })
        .collect();
    Ok(BreakdownReport { g: p.g, delta: p.delta, reference_bits: bits, levels: rows })
}
