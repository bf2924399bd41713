//! Eigenvalue lists from the spectral conditions.
//!
//! Regular eigenvalues are the zeros of `G_+-` between consecutive poles;
//! each open interval `(n, n+1)` is scanned on a grid, sign changes are
//! refined by Brent's method and shallow minima of `|G|` are probed for
//! hidden root pairs. Exceptional eigenvalues come from the Judd condition
//! and from `G^(m)_+-`. Every line can be matched against the oracle.

mod census;
mod exceptional;
mod sweep;

pub use census::{zero_census, CensusViolation, ViolationKind, ZeroCensus};
pub use exceptional::{exceptional_nd_scan, judd_points, ExceptionalNdPoint, JuddPoint};
pub use sweep::{sweep_coupling, Crossing, LevelCurve, Sweep, TrackingAmbiguity};

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfunction::{g_exceptional_nd, g_regular, g_regular_lenient, GEvaluation};
use crate::oracle::{certify_cutoff, DEFAULT_MAX_CUTOFF};
use crate::params::{Parity, RabiParams};
use crate::recurrence::{judd_coefficient_scaled, SeriesConfig};
use crate::rootfind::brent_with_values;

/// Parity label of a line; doubly degenerate exceptional lines belong to
/// both chains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sector {
    Even,
    Odd,
    Both,
}

impl Sector {
    pub fn contains(self, parity: Parity) -> bool {
        matches!(
            (self, parity),
            (Sector::Both, _) | (Sector::Even, Parity::Even) | (Sector::Odd, Parity::Odd)
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Sector::Even => "even",
            Sector::Odd => "odd",
            Sector::Both => "both",
        }
    }
}

impl From<Parity> for Sector {
    fn from(p: Parity) -> Self {
        match p {
            Parity::Even => Sector::Even,
            Parity::Odd => Sector::Odd,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LineClass {
    Regular,
    ExceptionalNd,
    ExceptionalD,
}

impl LineClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LineClass::Regular => "regular",
            LineClass::ExceptionalNd => "exceptional-nd",
            LineClass::ExceptionalD => "exceptional-d",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    GFunction,
    Oracle,
    ContFrac,
    /// Exact decoupled spectrum at zero coupling.
    ClosedForm,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::GFunction => "g-function",
            Method::Oracle => "oracle",
            Method::ContFrac => "contfrac",
            Method::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralLine {
    /// Energy in units of the mode frequency passed in.
    pub energy: f64,
    /// `x = E + g^2` at unit mode frequency.
    pub x: f64,
    pub sector: Sector,
    pub class: LineClass,
    pub degeneracy: u8,
    /// `|G|` at the root, `|K_m(m)|`, `|G^(m)|`, or the oracle gap.
    pub residual: f64,
    pub method: Method,
    /// Distance to the nearest oracle eigenvalue of the same parity, if the
    /// cross-check ran.
    pub oracle_gap: Option<f64>,
}

/// Sign-change bracket of `G` inside one pole interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub parity: Parity,
    pub lo: f64,
    pub hi: f64,
    pub f_lo: f64,
    pub f_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Diagnostic {
    /// `|G|` has a minimum below ten times its error bound without a sign
    /// change: possibly a double root.
    SuspectedDoubleRoot { parity: Parity, x: f64, value: f64, error: f64 },
    /// Samples whose sign could not be certified at the highest precision.
    IndeterminateSamples { parity: Parity, interval: i64, count: usize },
    LostBracket { parity: Parity, lo: f64, hi: f64 },
    /// An oracle eigenvalue below `x_max` with no G-function line.
    MissingLine { parity: Parity, energy: f64 },
    /// A G-function line with no oracle eigenvalue within the match tolerance.
    UnmatchedLine { sector: Sector, energy: f64, gap: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanResult {
    pub parity: Parity,
    /// `-1` denotes the region below the first pole.
    pub interval: i64,
    pub brackets: Vec<Bracket>,
    pub diagnostics: Vec<Diagnostic>,
    pub indeterminate_samples: usize,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanConfig {
    /// Samples per interval before the doubling pass.
    pub samples: usize,
    /// Distance kept from the poles at the interval ends.
    pub pole_margin: f64,
    pub xtol: f64,
    pub series: SeriesConfig,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { samples: 64, pole_margin: 1e-7, xtol: 1e-12, series: SeriesConfig::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumConfig {
    pub scan: ScanConfig,
    /// Threshold on the scalar exceptional conditions.
    pub tol_j: f64,
    /// Oracle matching window.
    pub match_tol: f64,
    pub oracle_rtol: f64,
    pub cross_check: bool,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        SpectrumConfig {
            scan: ScanConfig::default(),
            tol_j: 1e-10,
            match_tol: 1e-7,
            oracle_rtol: 1e-11,
            cross_check: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub g: f64,
    pub delta: f64,
    pub omega: f64,
    pub x_max: f64,
    /// Sorted by energy, then sector.
    pub lines: Vec<SpectralLine>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Spectrum {
    /// Energies of one parity chain, counting `Both` lines once per chain.
    pub fn energies(&self, parity: Parity) -> Vec<f64> {
        self.lines.iter().filter(|l| l.sector.contains(parity)).map(|l| l.energy).collect()
    }

    /// Whether every line matched the oracle and no oracle level was missed.
    pub fn fully_matched(&self) -> bool {
        !self
            .diagnostics
            .iter()
            .any(|d| matches!(d, Diagnostic::MissingLine { .. } | Diagnostic::UnmatchedLine { .. }))
    }
}

/// Lower end of the region scanned below the first pole. The spectrum is
/// bounded below by `-g^2 - delta`, so `x >= -delta`.
fn lower_limit(params: &RabiParams) -> f64 {
    -params.delta - 1.0
}

fn interval_bounds(n: i64, params: &RabiParams, margin: f64) -> (f64, f64) {
    if n < 0 {
        (lower_limit(params), -margin)
    } else {
        (n as f64 + margin, n as f64 + 1.0 - margin)
    }
}

fn evaluate(x: f64, params: &RabiParams, cfg: &SeriesConfig) -> Result<GEvaluation> {
    g_regular_lenient(x, params, cfg)
}

/// Minimizes `s * G` on `[a, b]` by golden-section search (`s` the common
/// sign of the samples), looking for a hidden pair of roots.
fn probe_minimum(
    params: &RabiParams,
    cfg: &SeriesConfig,
    a: f64,
    b: f64,
    s: f64,
    evals: &mut usize,
) -> Result<GEvaluation> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let (mut a, mut b) = (a, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = evaluate(c, params, cfg)?;
    let mut fd = evaluate(d, params, cfg)?;
    *evals += 2;
    for _ in 0..60 {
        if s * fc.value < 0.0 {
            return Ok(fc);
        }
        if s * fd.value < 0.0 {
            return Ok(fd);
        }
        if (b - a).abs() < 1e-11 * (1.0 + a.abs()) {
            break;
        }
        if s * fc.value < s * fd.value {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = evaluate(c, params, cfg)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = evaluate(d, params, cfg)?;
        }
        *evals += 1;
    }
    Ok(if s * fc.value < s * fd.value { fc } else { fd })
}

/// Sign-change brackets of `G` for `params.parity` in the pole interval
/// `(n, n + 1)` (or below the first pole for `n = -1`), using `samples`
/// points plus one doubling pass.
pub fn scan_interval(n: i64, params: &RabiParams, cfg: &ScanConfig) -> Result<ScanResult> {
    if cfg.samples < 8 {
        return Err(Error::InvalidParameter(format!("need at least 8 samples, got {}", cfg.samples)));
    }
    params.validate()?;
    let (a, b) = interval_bounds(n, params, cfg.pole_margin);
    let count = 2 * cfg.samples;
    let xs: Vec<f64> = (0..=count).map(|i| a + (b - a) * i as f64 / count as f64).collect();
    let mut vals = Vec::with_capacity(xs.len());
    for &x in &xs {
        vals.push(evaluate(x, params, &cfg.series)?);
    }
    let mut evals = vals.len();
    let indeterminate = vals.iter().filter(|v| v.indeterminate).count();

    // sign changes between consecutive certified samples
    let certified: Vec<usize> = (0..vals.len()).filter(|&i| !vals[i].indeterminate).collect();
    let mut brackets = Vec::new();
    let mut diagnostics = Vec::new();
    for w in certified.windows(2) {
        let (i, j) = (w[0], w[1]);
        if vals[i].value.signum() != vals[j].value.signum() {
            brackets.push(Bracket {
                parity: params.parity,
                lo: xs[i],
                hi: xs[j],
                f_lo: vals[i].value,
                f_hi: vals[j].value,
            });
        }
    }

    // shallow minima of |G| between same-sign neighbours
    for k in 1..vals.len() - 1 {
        let (l, c, r) = (&vals[k - 1], &vals[k], &vals[k + 1]);
        if l.indeterminate || c.indeterminate || r.indeterminate {
            continue;
        }
        let s = c.value.signum();
        if l.value.signum() != s || r.value.signum() != s {
            continue;
        }
        if !(c.value.abs() < l.value.abs() && c.value.abs() < r.value.abs()) {
            continue;
        }
        let m = probe_minimum(params, &cfg.series, xs[k - 1], xs[k + 1], s, &mut evals)?;
        if s * m.value < 0.0 && !m.indeterminate {
            brackets.push(Bracket { parity: params.parity, lo: xs[k - 1], hi: m.x, f_lo: l.value, f_hi: m.value });
            brackets.push(Bracket { parity: params.parity, lo: m.x, hi: xs[k + 1], f_lo: m.value, f_hi: r.value });
        } else if m.value.abs() < 10.0 * m.truncation_error || m.indeterminate {
            diagnostics.push(Diagnostic::SuspectedDoubleRoot {
                parity: params.parity,
                x: m.x,
                value: m.value,
                error: m.truncation_error,
            });
        }
    }
    brackets.sort_by(|p, q| p.lo.total_cmp(&q.lo));
    if indeterminate > 0 {
        diagnostics.push(Diagnostic::IndeterminateSamples { parity: params.parity, interval: n, count: indeterminate });
    }
    Ok(ScanResult {
        parity: params.parity,
        interval: n,
        brackets,
        diagnostics,
        indeterminate_samples: indeterminate,
        evaluations: evals,
    })
}

/// Refines a bracket to `|dx| < xtol` with Brent's method.
pub fn refine_root(bracket: &Bracket, params: &RabiParams, cfg: &ScanConfig) -> Result<SpectralLine> {
    let p = params.with_parity(bracket.parity);
    let series = cfg.series;
    let lo = g_regular_lenient(bracket.lo, &p, &series)?;
    let hi = g_regular_lenient(bracket.hi, &p, &series)?;
    if lo.value.signum() == hi.value.signum() {
        return Err(Error::LostBracket { a: bracket.lo, b: bracket.hi, fa: lo.value, fb: hi.value });
    }
    let root = brent_with_values(
        |x| match g_regular(x, &p, &series) {
            Ok(e) => Ok(e.value),
            Err(Error::IndeterminateSign(e)) => Ok(e.value),
            Err(e) => Err(e),
        },
        bracket.lo,
        bracket.hi,
        lo.value,
        hi.value,
        cfg.xtol,
        200,
    )?;
    Ok(SpectralLine {
        energy: p.energy(crate::params::SpectralParameter(root.x)),
        x: root.x,
        sector: bracket.parity.into(),
        class: LineClass::Regular,
        degeneracy: 1,
        residual: root.fx.abs(),
        method: Method::GFunction,
        oracle_gap: None,
    })
}

fn closed_form_uncoupled(p: &RabiParams, x_max: f64) -> Vec<SpectralLine> {
    let mut lines = Vec::new();
    for parity in Parity::BOTH {
        let d = p.with_parity(parity).signed_delta();
        let mut n = 0u64;
        loop {
            let e = n as f64 + d * if n % 2 == 0 { 1.0 } else { -1.0 };
            if e > x_max {
                if n as f64 > x_max + p.delta + 1.0 {
                    break;
                }
                n += 1;
                continue;
            }
            let integral = (e - e.round()).abs() < 1e-12 && e >= -0.5;
            lines.push(SpectralLine {
                energy: e,
                x: e,
                sector: parity.into(),
                class: if integral { LineClass::ExceptionalNd } else { LineClass::Regular },
                degeneracy: 1,
                residual: 0.0,
                method: Method::ClosedForm,
                oracle_gap: None,
            });
            n += 1;
        }
    }
    lines
}

fn sort_lines(lines: &mut [SpectralLine]) {
    lines.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.sector.cmp(&b.sector)));
}

/// All eigenvalues of both parity chains with `x = E + g^2 <= x_max`.
///
/// Requires `delta > 0` when `g > 0`: with the spin decoupled every level
/// sits on a pole and the G-function machinery does not apply (the oracle
/// does).
pub fn full_spectrum(params: &RabiParams, x_max: f64, cfg: &SpectrumConfig) -> Result<Spectrum> {
    params.validate()?;
    if !(x_max > 0.0) {
        return Err(Error::InvalidParameter(format!("x_max must be > 0, got {x_max}")));
    }
    let omega = params.omega;
    let p = params.rescaled();
    let mut spectrum = Spectrum { g: p.g, delta: p.delta, omega, x_max, lines: Vec::new(), diagnostics: Vec::new() };
    if p.g == 0.0 {
        spectrum.lines = closed_form_uncoupled(&p, x_max);
    } else {
        if p.delta == 0.0 {
            return Err(Error::InvalidParameter(
                "delta = 0 decouples the spin; every level is exceptional (E = n - g^2) and the G-functions do not exist"
                    .into(),
            ));
        }
        let (lines, diagnostics) = g_function_lines(&p, x_max, cfg)?;
        spectrum.lines = lines;
        spectrum.diagnostics = diagnostics;
        if cfg.cross_check {
            cross_check(&p, &mut spectrum, cfg)?;
        }
    }
    sort_lines(&mut spectrum.lines);
    for l in &mut spectrum.lines {
        l.energy *= omega;
    }
    Ok(spectrum)
}

fn g_function_lines(p: &RabiParams, x_max: f64, cfg: &SpectrumConfig) -> Result<(Vec<SpectralLine>, Vec<Diagnostic>)> {
    let last = x_max.ceil() as i64;
    let tasks: Vec<(Parity, i64)> =
        Parity::BOTH.iter().flat_map(|&par| (-1..last).map(move |n| (par, n))).collect();
    let scans: Vec<Result<ScanResult>> =
        tasks.par_iter().map(|&(par, n)| scan_interval(n, &p.with_parity(par), &cfg.scan)).collect();

    let mut diagnostics = Vec::new();
    let mut brackets = Vec::new();
    for s in scans {
        let s = s?;
        diagnostics.extend(s.diagnostics);
        brackets.extend(s.brackets);
    }
    let refined: Vec<(Bracket, Result<SpectralLine>)> =
        brackets.par_iter().map(|b| (*b, refine_root(b, p, &cfg.scan))).collect();
    let mut lines = Vec::new();
    for (b, r) in refined {
        match r {
            Ok(line) if line.x <= x_max => lines.push(line),
            Ok(_) => {}
            Err(Error::LostBracket { .. }) => {
                diagnostics.push(Diagnostic::LostBracket { parity: b.parity, lo: b.lo, hi: b.hi })
            }
            Err(e) => return Err(e),
        }
    }

    // doubly degenerate exceptional lines
    let m_max = x_max.floor() as u64;
    for m in 1..=m_max {
        let (k, scale) = judd_coefficient_scaled(m, p)?;
        if k.abs() < cfg.tol_j * scale {
            let x = m as f64;
            // a regular root converging onto x = m is the same level
            lines.retain(|l| (l.x - x).abs() > cfg.match_tol);
            lines.push(SpectralLine {
                energy: x - p.g * p.g,
                x,
                sector: Sector::Both,
                class: LineClass::ExceptionalD,
                degeneracy: 2,
                residual: k.abs(),
                method: Method::GFunction,
                oracle_gap: None,
            });
        }
    }
    // non-degenerate exceptional lines
    for parity in Parity::BOTH {
        let pp = p.with_parity(parity);
        for m in 0..=m_max {
            let e = g_exceptional_nd(m, &pp, &cfg.scan.series)?;
            if e.value.abs() < cfg.tol_j {
                let x = m as f64;
                lines.retain(|l| !(l.sector == Sector::from(parity) && (l.x - x).abs() <= cfg.match_tol));
                lines.push(SpectralLine {
                    energy: x - p.g * p.g,
                    x,
                    sector: parity.into(),
                    class: LineClass::ExceptionalNd,
                    degeneracy: 1,
                    residual: e.value.abs(),
                    method: Method::GFunction,
                    oracle_gap: None,
                });
            }
        }
    }
    Ok((lines, diagnostics))
}

/// Certified oracle eigenvalues of one chain covering `x <= x_max`.
pub fn oracle_levels(p: &RabiParams, x_max: f64, rtol: f64) -> Result<Vec<f64>> {
    let e_max = x_max - p.g * p.g;
    let mut k = (x_max + p.delta).ceil().max(1.0) as usize + 3;
    loop {
        let c = certify_cutoff(p, k, rtol, DEFAULT_MAX_CUTOFF)?;
        if c.eigenvalues.last().is_some_and(|&e| e > e_max) {
            return Ok(c.eigenvalues.into_iter().filter(|&e| e <= e_max).collect());
        }
        k *= 2;
    }
}

fn cross_check(p: &RabiParams, spectrum: &mut Spectrum, cfg: &SpectrumConfig) -> Result<()> {
    let x_max = spectrum.x_max;
    for parity in Parity::BOTH {
        let pp = p.with_parity(parity);
        // pad the window so lines just below x_max find their partner
        let levels = oracle_levels(&pp, x_max + 0.5, cfg.oracle_rtol)?;
        let mut used = vec![false; levels.len()];
        for line in spectrum.lines.iter_mut().filter(|l| l.sector.contains(parity)) {
            let nearest = levels
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - line.energy).abs().total_cmp(&(b.1 - line.energy).abs()));
            if let Some((i, &e)) = nearest {
                let gap = (e - line.energy).abs();
                line.oracle_gap = Some(line.oracle_gap.map_or(gap, |g: f64| g.max(gap)));
                if gap <= cfg.match_tol {
                    used[i] = true;
                }
            }
        }
        let e_max = x_max - p.g * p.g;
        for (i, &e) in levels.iter().enumerate() {
            if !used[i] && e <= e_max - cfg.match_tol {
                spectrum.diagnostics.push(Diagnostic::MissingLine { parity, energy: e });
            }
        }
    }
    for line in &spectrum.lines {
        if let Some(gap) = line.oracle_gap {
            if gap > cfg.match_tol {
                spectrum.diagnostics.push(Diagnostic::UnmatchedLine { sector: line.sector, energy: line.energy, gap });
            }
        }
    }
    Ok(())
}
