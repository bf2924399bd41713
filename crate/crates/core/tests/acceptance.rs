//! Acceptance checks. Each criterion prints one PASS/FAIL line with the
//! measured quantities; the process exits non-zero if any criterion fails.

mod common;

use std::time::Instant;

use common::*;
use rabi_spectra::contfrac::{breakdown_study, contfrac_roots, ContFracConfig};
use rabi_spectra::dicke::{dicke_sweep, levels_reaching, pinned_level};
use rabi_spectra::spectrum::{
    exceptional_nd_scan, full_spectrum, oracle_levels, zero_census, ScanConfig, SpectrumConfig,
};
use rabi_spectra::{judd_condition, Dicke2Params, Dicke3Params, Parity, RabiParams, SeriesConfig};

type Outcome = Result<String, String>;

fn grid(start: f64, step: f64, count: usize) -> Vec<f64> {
    (0..count).map(|i| start + step * i as f64).collect()
}

fn nearest(values: &[f64], target: f64) -> f64 {
    values.iter().copied().min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs())).unwrap_or(f64::NAN)
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// G-function roots, oracle and continued fraction at g = 1, delta = 0.4.
fn three_way_agreement() -> Outcome {
    let start = Instant::now();
    let p = RabiParams::new(1.0, 0.4, Parity::Even).map_err(err)?;
    let x_max = 12.0;
    let cfg = SpectrumConfig { cross_check: false, ..SpectrumConfig::default() };
    let spectrum = full_spectrum(&p, x_max, &cfg).map_err(err)?;
    let mut worst_oracle = 0.0f64;
    let mut union = Vec::new();
    for parity in Parity::BOTH {
        let g_levels = spectrum.energies(parity);
        let oracle = oracle_levels(&p.with_parity(parity), x_max, 1e-11).map_err(err)?;
        if g_levels.len() < 10 || oracle.len() < 10 {
            return Err(format!("{parity:?}: {} G-function and {} oracle levels", g_levels.len(), oracle.len()));
        }
        for (a, b) in g_levels.iter().zip(&oracle).take(10) {
            worst_oracle = worst_oracle.max((a - b).abs());
        }
        union.extend(g_levels.into_iter().take(10));
    }
    union.sort_by(f64::total_cmp);
    let roots = contfrac_roots(&p, 4.0, &ContFracConfig::default()).map_err(err)?;
    let mut worst_cf = 0.0f64;
    for (r, e) in roots.iter().zip(&union).take(6) {
        worst_cf = worst_cf.max((r.x - 1.0 - e).abs());
    }
    let elapsed = start.elapsed().as_secs_f64();
    let detail = format!(
        "max |G - oracle| = {worst_oracle:.1e} (tol 1e-8), max |contfrac - G| = {worst_cf:.1e} over {} levels (tol 1e-6), {elapsed:.2} s (limit 10 s)",
        roots.len().min(6)
    );
    if worst_oracle < 1e-8 && worst_cf < 1e-6 && roots.len() >= 6 && elapsed < 10.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn decoupled_limits() -> Outcome {
    let delta = 0.4;
    let p = RabiParams::new(0.0, delta, Parity::Even).map_err(err)?;
    let s = full_spectrum(&p, 10.0, &SpectrumConfig::default()).map_err(err)?;
    let mut worst_g0 = 0.0f64;
    for parity in Parity::BOTH {
        let mut expect: Vec<f64> =
            (0..12).map(|n| n as f64 + parity.sign() * delta * if n % 2 == 0 { 1.0 } else { -1.0 }).collect();
        expect.retain(|&e| e <= 10.0);
        expect.sort_by(f64::total_cmp);
        let got = s.energies(parity);
        if got.len() != expect.len() {
            return Err(format!("g = 0 {parity:?}: {} levels, expected {}", got.len(), expect.len()));
        }
        for (a, b) in got.iter().zip(&expect) {
            worst_g0 = worst_g0.max((a - b).abs() / b.abs().max(1.0));
        }
    }
    let g = 0.8;
    let mut worst_d0 = 0.0f64;
    for parity in Parity::BOTH {
        let q = RabiParams::new(g, 0.0, parity).map_err(err)?;
        let levels = oracle_levels(&q, 10.0, 1e-11).map_err(err)?;
        for (n, e) in levels.iter().enumerate() {
            worst_d0 = worst_d0.max((e - (n as f64 - g * g)).abs());
        }
    }
    let detail = format!("g = 0 max rel error {worst_g0:.1e} (tol 4 ulp), delta = 0 max |E - (n - g^2)| = {worst_d0:.1e} (tol 1e-9)");
    if worst_g0 <= 4.0 * f64::EPSILON && worst_d0 < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Nearest even and odd oracle eigenvalues to `target`.
fn pair_at(p: &RabiParams, target: f64, x_max: f64) -> Result<(f64, f64), String> {
    let even = oracle_levels(&p.with_parity(Parity::Even), x_max, 1e-13).map_err(err)?;
    let odd = oracle_levels(&p.with_parity(Parity::Odd), x_max, 1e-13).map_err(err)?;
    Ok((nearest(&even, target), nearest(&odd, target)))
}

fn judd_degeneracy() -> Outcome {
    let (mut worst_gap, mut worst_res, mut worst_off, mut min_open) = (0.0f64, 0.0f64, 0.0f64, f64::INFINITY);
    for g in grid(0.1, 0.0875, 5) {
        let delta = (1.0 - 4.0 * g * g).sqrt();
        let p = RabiParams::new(g, delta, Parity::Even).map_err(err)?;
        let target = 1.0 - g * g;
        let (e, o) = pair_at(&p, target, 2.0)?;
        worst_gap = worst_gap.max((e - o).abs());
        worst_off = worst_off.max((e - target).abs());
        worst_res = worst_res.max(judd_condition(1, &p).map_err(err)?.abs());
        let (e, o) = pair_at(&RabiParams::new(g, delta + 1e-3, Parity::Even).map_err(err)?, target, 2.0)?;
        min_open = min_open.min((e - o).abs());
    }
    let detail = format!(
        "max gap {worst_gap:.1e} (tol 1e-10), max |E - (1 - g^2)| {worst_off:.1e}, max |K_1(1)| {worst_res:.1e} (tol 1e-12), min gap off-locus {min_open:.1e} (need > 1e-5)"
    );
    if worst_gap < 1e-10 && worst_off < 1e-10 && worst_res < 1e-12 && min_open > 1e-5 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn exceptional_nd_detection() -> Outcome {
    let g_grid = grid(0.02, 0.02, 50);
    let d_grid = grid(0.1, 0.1, 10);
    let pts = exceptional_nd_scan(0, Parity::Even, &g_grid, &d_grid, &SeriesConfig::default()).map_err(err)?;
    let Some(pt) = pts.first() else {
        return Err("no zero of G^(0)_+ on g in (0, 1], delta in (0, 1]".into());
    };
    let p = RabiParams::new(pt.g, pt.delta, Parity::Even).map_err(err)?;
    let (e, o) = pair_at(&p, pt.energy, 1.0)?;
    let detail = format!(
        "{} zeros found; at g = {:.6}, delta = {:.1}: |E_even + g^2| = {:.1e} (tol 1e-9), odd distance {:.1e} (need > 1e-6)",
        pts.len(),
        pt.g,
        pt.delta,
        (e - pt.energy).abs(),
        (o - pt.energy).abs()
    );
    if (e - pt.energy).abs() < 1e-9 && (o - pt.energy).abs() > 1e-6 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn census() -> Outcome {
    let mut pairs = Vec::new();
    for g in grid(0.1, 0.1, 20) {
        for d in grid(0.1, 0.1, 15) {
            pairs.push((g, d));
        }
    }
    let report = zero_census(&pairs, 20.0, &ScanConfig::default()).map_err(err)?;
    let total: usize = report.iter().map(|c| c.intervals()).sum();
    let indeterminate: usize = report.iter().map(|c| c.indeterminate_intervals.len()).sum();
    let mut findings = Vec::new();
    for c in &report {
        for v in &c.violations {
            let cause = match v.lifted_pole {
                Some(m) => format!(", pole at x={m} lifted"),
                None => String::new(),
            };
            findings.push(format!(
                "{:?} at interval {} (g={:.1}, delta={:.1}, {:?}{cause}, counts {:?})",
                v.kind, v.interval, c.g, c.delta, c.parity, c.counts
            ));
        }
    }
    let frac = indeterminate as f64 / total as f64;
    let detail = format!(
        "{} censuses, {total} intervals, {} violations, {indeterminate} indeterminate ({:.2}%, limit 1%){}",
        report.len(),
        findings.len(),
        100.0 * frac,
        if findings.is_empty() { String::new() } else { format!("; findings: {}", findings.join("; ")) }
    );
    if findings.is_empty() && frac < 0.01 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn breakdown() -> Outcome {
    let p = RabiParams::new(1.0, 0.4, Parity::Even).map_err(err)?;
    // enough levels to see the 212-bit count reach twice the 53-bit count
    let report = breakdown_study(&p, 122).map_err(err)?;
    let (c53, c212) = (report.resolved_count(53), report.resolved_count(212));
    let detail = format!("resolved at 53 bits: {c53} (limit 12), at 212 bits: {c212} (need >= {})", 2 * c53);
    if c53 <= 12 && c212 >= 2 * c53 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn quasi_exact_line() -> Outcome {
    let base = Dicke2Params::new(0.5, 0.5, 0.6, 0.4, Parity::Even).map_err(err)?;
    let levels = pinned_level(&base, 1, &grid(0.1, 0.1, 25), 1e-12).map_err(err)?;
    let worst_dev = levels.iter().map(|l| l.deviation).fold(0.0, f64::max);
    let worst_overlap = levels.iter().map(|l| l.overlap.unwrap_or(0.0)).fold(1.0, f64::min);
    let detail =
        format!("{} couplings, max |E - 1| = {worst_dev:.1e} (tol 1e-8), min overlap = 1 - {:.1e} (tol 1e-10)", levels.len(), 1.0 - worst_overlap);
    if worst_dev < 1e-8 && 1.0 - worst_overlap < 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn singlet_decoupling() -> Outcome {
    let mut worst = 0.0f64;
    let couplings = grid(0.2, 0.2, 10);
    for &g in &couplings {
        let mut all = Vec::new();
        for parity in Parity::BOTH {
            let p = Dicke2Params::new(g / 2.0, g / 2.0, 0.5, 0.5, parity).map_err(err)?;
            all.extend(levels_reaching(&p, 3.5, 1e-12).map_err(err)?.1);
        }
        for n in 0..=3 {
            worst = worst.max((nearest(&all, n as f64) - n as f64).abs());
        }
    }
    let detail = format!("max distance of nearest level to 0, 1, 2, 3 over g1 + g2 in 0.2..2.0: {worst:.1e} (tol 1e-9)");
    if worst < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn adm3_checks() -> Outcome {
    let base = Dicke3Params::new(0.05, 0.7, Parity::Even).map_err(err)?;
    let g_grid = grid(0.05, 0.05, 24);
    let sweep = dicke_sweep(&base, &g_grid, 8, 1e-11).map_err(err)?;
    let odd_ground = sweep.ground_parity.iter().all(|&p| p == Parity::Odd);
    let min_gap = sweep.min_same_parity_gap.iter().copied().fold(f64::INFINITY, f64::min);

    let g = 1.5;
    let mut all = Vec::new();
    for parity in Parity::BOTH {
        let p = Dicke3Params::new(g, 0.7, parity).map_err(err)?;
        all.extend(levels_reaching(&p, -9.0 * g * g + 8.0, 1e-11).map_err(err)?.1);
    }
    all.sort_by(f64::total_cmp);
    let worst = all.iter().take(8).map(|e| e + 9.0 * g * g).map(|s| (s - s.round()).abs()).fold(0.0, f64::max);
    let detail = format!(
        "odd ground state on g in 0.05..1.2: {odd_ground}; max distance of E + 9g^2 from an integer at g = 1.5: {worst:.3} (tol 0.15); min same-parity gap {min_gap:.2e} (need > 0)"
    );
    if odd_ground && worst < 0.15 && min_gap > 0.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn property_suites() -> Outcome {
    let suites: Vec<(&str, Result<u32, String>)> = vec![
        (
            "recurrence-residual",
            run((off_pole(-1.5, 15.0), 0.1f64..2.0, 0.0f64..1.5), |(x, g, d)| recurrence_residual(x.max(-d + 1e-3), g, d)),
        ),
        ("variational-monotonicity", run((0.0f64..2.0, 0.0f64..1.5, parity()), |(g, d, p)| variational_monotonicity(g, d, p))),
        ("parity-flip", run((off_pole(-0.5, 12.0), 0.1f64..2.0, 0.05f64..1.5), |(x, g, d)| parity_flip(x, g, d))),
        ("simple-pole", run((0u64..8, 0.3f64..1.5, 0.1f64..1.5, parity()), |(n, g, d, p)| simple_pole(n, g, d, p))),
        ("minimality", run((off_pole(0.0, 10.0), 0.1f64..1.5, 0.0f64..1.5), |(x, g, d)| minimality(x, g, d))),
    ];
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, r) in suites {
        match r {
            Ok(n) => parts.push(format!("{name} {n}/{n}")),
            Err(e) => {
                ok = false;
                parts.push(format!("{name} failed: {e}"));
            }
        }
    }
    let detail = parts.join(", ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("three-way spectral agreement", three_way_agreement),
        ("decoupled limits", decoupled_limits),
        ("judd degeneracy", judd_degeneracy),
        ("exceptional non-degenerate detection", exceptional_nd_detection),
        ("zero census", census),
        ("continued-fraction breakdown", breakdown),
        ("two-qubit quasi-exact line", quasi_exact_line),
        ("two-qubit singlet decoupling", singlet_decoupling),
        ("three-qubit qualitative checks", adm3_checks),
        ("property suites", property_suites),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {:>2} PASS  {name}: {d} [{secs:.1} s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {d} [{secs:.1} s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
