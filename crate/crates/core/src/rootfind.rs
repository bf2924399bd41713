//! Bracketed scalar root finding.

use crate::error::{Error, Result};
use crate::precision::Real;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
    /// Final bracket; contains `x`.
    pub lo: f64,
    pub hi: f64,
}

/// Brent's method on `[a, b]`. `f` must change sign over the bracket; the
/// iterate never leaves it.
pub fn brent<F>(mut f: F, a: f64, b: f64, xtol: f64, max_iter: usize) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    let fa = f(a)?;
    let fb = f(b)?;
    brent_with_values(f, a, b, fa, fb, xtol, max_iter)
}

/// [`brent`] with the endpoint values already known.
pub fn brent_with_values<F>(
    mut f: F,
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
    xtol: f64,
    max_iter: usize,
) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if fa == 0.0 {
        return Ok(Root { x: a, fx: 0.0, iterations: 0, lo: a, hi: a });
    }
    if fb == 0.0 {
        return Ok(Root { x: b, fx: 0.0, iterations: 0, lo: b, hi: b });
    }
    if fa.signum() == fb.signum() || !fa.is_finite() || !fb.is_finite() {
        return Err(Error::LostBracket { a, b, fa, fb });
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;
    for iter in 1..=max_iter {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * xtol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            let (lo, hi) = if b < c { (b, c) } else { (c, b) };
            return Ok(Root { x: b, fx: fb, iterations: iter, lo, hi });
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::ConvergenceFailure(format!("Brent iteration did not reach xtol {xtol:e} in {max_iter} steps")))
}

/// Illinois-modified regula falsi at arbitrary precision. Returns the
/// bracket `(lo, hi)` once its width is below `xtol` (absolute).
pub fn illinois<T, F>(mut f: F, a: T, b: T, xtol: &T, max_iter: usize) -> Result<(T, T)>
where
    T: Real,
    F: FnMut(&T) -> T,
{
    let mut a = a;
    let mut b = b;
    let mut fa = f(&a);
    let mut fb = f(&b);
    if fa.is_zero() {
        return Ok((a.clone(), a));
    }
    if fb.is_zero() {
        return Ok((b.clone(), b));
    }
    if fa.signum_f64() == fb.signum_f64() {
        return Err(Error::LostBracket { a: a.to_f64(), b: b.to_f64(), fa: fa.to_f64(), fb: fb.to_f64() });
    }
    let mut side = 0i8;
    for _ in 0..max_iter {
        if (b.clone() - a.clone()).abs() <= *xtol {
            break;
        }
        let mut c = (a.clone() * fb.clone() - b.clone() * fa.clone()) / (fb.clone() - fa.clone());
        // fall back to bisection when the secant lands outside or on an end
        let lo_ok = if a < b { c > a && c < b } else { c > b && c < a };
        if !lo_ok {
            c = (a.clone() + b.clone()) / a.lift(2.0);
        }
        let fc = f(&c);
        if fc.is_zero() {
            return Ok((c.clone(), c));
        }
        if fc.signum_f64() == fb.signum_f64() {
            b = c;
            fb = fc;
            if side == -1 {
                fa = fa / a.lift(2.0);
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb = fb / b.lift(2.0);
            }
            side = 1;
        }
    }
    if a < b {
        Ok((a, b))
    } else {
        Ok((b, a))
    }
}

/// Plain bisection on a sign oracle; useful when only signs are reliable.
pub fn bisect_sign<F>(mut sign: F, a: f64, b: f64, xtol: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let (mut a, mut b) = (a, b);
    let sa = sign(a)?;
    let sb = sign(b)?;
    if sa == sb {
        return Err(Error::LostBracket { a, b, fa: sa, fb: sb });
    }
    while (b - a).abs() > xtol {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        if sign(m)? == sa {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((a.min(b), a.max(b)))
}
