//! Subcommands. Each builds a [`Table`]; parameters are rescaled to unit
//! mode frequency on input and energies and couplings back on output.

use clap::{Args, Subcommand, ValueEnum};
use rabi_spectra::contfrac::{contfrac_roots, ContFracConfig};
use rabi_spectra::dicke::{dicke_sweep, levels_reaching, n1_condition, n2_condition, DickeSweep};
use rabi_spectra::gfunction::g_regular_lenient;
use rabi_spectra::spectrum::{
    exceptional_nd_scan, full_spectrum, judd_points, oracle_levels, sweep_coupling, zero_census, ScanConfig,
    SpectrumConfig, ViolationKind,
};
use rabi_spectra::{Dicke2Params, Dicke3Params, Parity, RabiParams, SeriesConfig};

use crate::grid::Grid;
use crate::table::{Cell, Table};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ParityArg {
    Even,
    Odd,
}

impl From<ParityArg> for Parity {
    fn from(p: ParityArg) -> Self {
        match p {
            ParityArg::Even => Parity::Even,
            ParityArg::Odd => Parity::Odd,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct RabiArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub g: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub delta: f64,
    /// Mode frequency.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub omega: f64,
}

#[derive(Debug, Clone, Args)]
pub struct Tolerances {
    /// Relative tolerance for certified oracle eigenvalues.
    #[arg(long, allow_negative_numbers = true, default_value_t = 1e-11)]
    pub rtol: f64,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Regular and exceptional spectrum from the G-functions, cross-checked
    /// against diagonalization.
    RabiSpectrum {
        #[command(flatten)]
        model: RabiArgs,
        /// Largest `x = E/omega + (g/omega)^2`.
        #[arg(long, allow_negative_numbers = true)]
        xmax: f64,
        #[arg(long)]
        no_cross_check: bool,
    },
    /// Level curves over a coupling grid.
    RabiSweep {
        #[arg(long, allow_negative_numbers = true)]
        g: Grid,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, allow_negative_numbers = true)]
        xmax: f64,
    },
    /// `G_+(x)` and `G_-(x)` on a uniform grid.
    GfunctionTrace {
        #[command(flatten)]
        model: RabiArgs,
        #[arg(long, allow_negative_numbers = true)]
        xmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        xmax: f64,
        #[arg(long, default_value_t = 600)]
        samples: usize,
    },
    /// Couplings with a doubly degenerate level `E = m - g^2`.
    JuddPoints {
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 5)]
        m_max: u64,
        #[arg(long, allow_negative_numbers = true)]
        g_max: f64,
        #[arg(long, default_value_t = 400)]
        samples: usize,
    },
    /// Zeros of `G^(m)` of one parity over a `(g, delta)` grid.
    ExceptionalScan {
        #[arg(long, default_value_t = 0)]
        m: u64,
        #[arg(long, value_enum, default_value_t = ParityArg::Even)]
        parity: ParityArg,
        #[arg(long, allow_negative_numbers = true)]
        g: Grid,
        #[arg(long, allow_negative_numbers = true)]
        delta: Grid,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        omega: f64,
    },
    /// Continued-fraction zeros next to the G-function spectrum.
    ContfracCompare {
        #[command(flatten)]
        model: RabiArgs,
        #[arg(long, allow_negative_numbers = true)]
        xmax: f64,
    },
    /// Two-qubit spectrum per parity, with the quasi-exact conditions.
    Dicke2Spectrum {
        #[command(flatten)]
        model: Dicke2Args,
        #[arg(long, allow_negative_numbers = true)]
        emax: f64,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Two-qubit levels over a grid of total coupling `g1 + g2`.
    Dicke2Sweep {
        /// Total coupling grid.
        #[arg(long, allow_negative_numbers = true)]
        g: Grid,
        /// Ratio `g1 / g2`.
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        ratio: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta1: f64,
        #[arg(long, allow_negative_numbers = true)]
        delta2: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Three-qubit levels over a coupling grid.
    Dicke3Sweep {
        #[arg(long, allow_negative_numbers = true)]
        g: Grid,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, default_value_t = 8)]
        levels: usize,
        #[command(flatten)]
        tol: Tolerances,
    },
    /// Root counts of `G_+-` per pole interval.
    Census {
        #[arg(long, allow_negative_numbers = true)]
        g: Grid,
        #[arg(long, allow_negative_numbers = true)]
        delta: Grid,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
        omega: f64,
        #[arg(long, allow_negative_numbers = true)]
        xmax: f64,
    },
    /// G-function roots against diagonalization and the continued fraction.
    Verify {
        #[command(flatten)]
        model: RabiArgs,
        /// Levels compared per parity.
        #[arg(long, default_value_t = 10)]
        levels: usize,
        /// Lowest levels compared with the continued fraction.
        #[arg(long, default_value_t = 6)]
        contfrac_levels: usize,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, allow_negative_numbers = true, default_value_t = 1e-6)]
        contfrac_tol: f64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Dicke2Args {
    #[arg(long, allow_negative_numbers = true)]
    pub g1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub g2: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub delta1: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub delta2: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1.0)]
    pub omega: f64,
}

/// What a command produced, and whether its own checks passed.
pub struct Report {
    pub table: Table,
    pub passed: bool,
}

impl From<Table> for Report {
    fn from(table: Table) -> Self {
        Report { table, passed: true }
    }
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(format!("--{name} must be > 0, got {v}")))
    }
}

fn monotone(name: &str, grid: &Grid) -> Result<Vec<f64>, CliError> {
    let p = grid.points();
    let inc = p.windows(2).all(|w| w[1] > w[0]);
    let dec = p.windows(2).all(|w| w[1] < w[0]);
    if p.is_empty() || !(inc || dec) {
        return Err(invalid(format!("--{name} grid must be non-empty and monotone")));
    }
    Ok(p)
}

/// Unit-frequency Rabi parameters.
fn rabi(g: f64, delta: f64, omega: f64, parity: Parity) -> Result<RabiParams, CliError> {
    positive("omega", omega)?;
    Ok(RabiParams::new(g / omega, delta / omega, parity)?)
}

fn spectrum_config(series: SeriesConfig) -> SpectrumConfig {
    SpectrumConfig { scan: ScanConfig { series, ..ScanConfig::default() }, ..SpectrumConfig::default() }
}

fn kind(k: ViolationKind) -> &'static str {
    match k {
        ViolationKind::CountAboveTwo => "count-above-two",
        ViolationKind::AdjacentTwos => "adjacent-twos",
        ViolationKind::AdjacentEmpty => "adjacent-empty",
    }
}

fn sweep_table(sweep: &DickeSweep, omega: f64) -> Table {
    let mut t = Table::new(&["g", "parity", "index", "E"]);
    for (k, &g) in sweep.g_grid.iter().enumerate() {
        for parity in Parity::BOTH {
            for (i, e) in sweep.levels(k, parity).into_iter().enumerate() {
                t.push(vec![(g * omega).into(), parity.as_str().into(), i.into(), (e * omega).into()]);
            }
        }
    }
    t
}

pub fn run(cmd: &Command, series: SeriesConfig) -> Result<Report, CliError> {
    match cmd {
        Command::RabiSpectrum { model, xmax, no_cross_check } => {
            positive("xmax", *xmax)?;
            let p = rabi(model.g, model.delta, model.omega, Parity::Even)?;
            let cfg = SpectrumConfig { cross_check: !no_cross_check, ..spectrum_config(series) };
            let s = full_spectrum(&p, *xmax, &cfg)?;
            let mut t = Table::new(&["x", "E", "parity", "class", "degeneracy", "residual", "method"]);
            for l in &s.lines {
                t.push(vec![
                    l.x.into(),
                    (l.energy * model.omega).into(),
                    l.sector.as_str().into(),
                    l.class.as_str().into(),
                    (l.degeneracy as usize).into(),
                    l.residual.into(),
                    l.method.as_str().into(),
                ]);
            }
            Ok(t.into())
        }
        Command::RabiSweep { g, delta, omega, xmax } => {
            positive("xmax", *xmax)?;
            let grid: Vec<f64> = monotone("g", g)?.iter().map(|v| v / omega).collect();
            let base = rabi(grid[0] * omega, *delta, *omega, Parity::Even)?;
            let s = sweep_coupling(&base, &grid, *xmax, &spectrum_config(series))?;
            let mut t = Table::new(&["g", "parity", "index", "E"]);
            for c in &s.curves {
                for &(g, e) in &c.points {
                    t.push(vec![(g * omega).into(), c.parity.as_str().into(), c.index.into(), (e * omega).into()]);
                }
            }
            Ok(t.into())
        }
        Command::GfunctionTrace { model, xmin, xmax, samples } => {
            if !(xmax > xmin) || *samples < 2 {
                return Err(invalid("need --xmax > --xmin and --samples >= 2"));
            }
            let even = rabi(model.g, model.delta, model.omega, Parity::Even)?;
            let odd = even.with_parity(Parity::Odd);
            let mut t = Table::new(&["x", "G_plus", "G_minus"]);
            for i in 0..=*samples {
                let x = xmin + (xmax - xmin) * i as f64 / *samples as f64;
                // poles and non-convergent points are left empty
                let at = |p: &RabiParams| g_regular_lenient(x, p, &series).ok().map(|e| e.value);
                t.push(vec![x.into(), at(&even).into(), at(&odd).into()]);
            }
            Ok(t.into())
        }
        Command::JuddPoints { delta, omega, m_max, g_max, samples } => {
            positive("g-max", *g_max)?;
            positive("omega", *omega)?;
            let pts = judd_points(*m_max, delta / omega, g_max / omega, *samples)?;
            let mut t = Table::new(&["m", "g", "delta", "E", "residual"]);
            for p in pts {
                t.push(vec![p.m.into(), (p.g * omega).into(), (p.delta * omega).into(), (p.energy * omega).into(), p.residual.into()]);
            }
            Ok(t.into())
        }
        Command::ExceptionalScan { m, parity, g, delta, omega } => {
            positive("omega", *omega)?;
            let gs: Vec<f64> = monotone("g", g)?.iter().map(|v| v / omega).collect();
            let ds: Vec<f64> = monotone("delta", delta)?.iter().map(|v| v / omega).collect();
            let pts = exceptional_nd_scan(*m, (*parity).into(), &gs, &ds, &series)?;
            let mut t = Table::new(&["m", "parity", "g", "delta", "E", "residual"]);
            for p in pts {
                t.push(vec![
                    p.m.into(),
                    p.parity.as_str().into(),
                    (p.g * omega).into(),
                    (p.delta * omega).into(),
                    (p.energy * omega).into(),
                    p.residual.into(),
                ]);
            }
            Ok(t.into())
        }
        Command::ContfracCompare { model, xmax } => {
            positive("xmax", *xmax)?;
            let p = rabi(model.g, model.delta, model.omega, Parity::Even)?;
            let roots = contfrac_roots(&p, *xmax, &ContFracConfig::default())?;
            let cfg = SpectrumConfig { cross_check: false, ..spectrum_config(series) };
            let s = full_spectrum(&p, *xmax, &cfg)?;
            // F is parity-blind and misses non-degenerate exceptional levels;
            // pair each root with the nearest G-function line
            let mut t = Table::new(&["x_contfrac", "x_gfunction", "parity", "difference"]);
            for r in roots {
                let near = s.lines.iter().min_by(|a, b| (a.x - r.x).abs().total_cmp(&(b.x - r.x).abs()));
                let (x, parity) = near.map_or((None, None), |l| (Some(l.x), Some(l.sector.as_str())));
                t.push(vec![r.x.into(), x.into(), parity.into(), x.map(|x| (r.x - x).abs()).into()]);
            }
            Ok(t.into())
        }
        Command::Dicke2Spectrum { model, emax, tol } => {
            positive("omega", model.omega)?;
            positive("rtol", tol.rtol)?;
            let w = model.omega;
            let mut t = Table::new(&["parity", "index", "E", "n1_condition", "n2_condition"]);
            for parity in Parity::BOTH {
                let p = Dicke2Params::new(model.g1 / w, model.g2 / w, model.delta1 / w, model.delta2 / w, parity)?;
                // the quasi-exact conditions need equal couplings
                let n1 = n1_condition(&p).ok().map(|c| c.residual);
                let n2 = n2_condition(&p).ok().map(|c| c.residual);
                let (_, levels) = levels_reaching(&p, emax / w, tol.rtol)?;
                for (i, e) in levels.into_iter().filter(|&e| e <= emax / w).enumerate() {
                    t.push(vec![parity.as_str().into(), i.into(), (e * w).into(), n1.into(), n2.into()]);
                }
            }
            Ok(t.into())
        }
        Command::Dicke2Sweep { g, ratio, delta1, delta2, omega, levels, tol } => {
            positive("omega", *omega)?;
            positive("ratio", *ratio)?;
            positive("rtol", tol.rtol)?;
            let grid: Vec<f64> = monotone("g", g)?.iter().map(|v| v / omega).collect();
            let share = ratio / (1.0 + ratio);
            let base = Dicke2Params::new(share, 1.0 - share, delta1 / omega, delta2 / omega, Parity::Even)?;
            let s = dicke_sweep(&base, &grid, *levels, tol.rtol)?;
            Ok(sweep_table(&s, *omega).into())
        }
        Command::Dicke3Sweep { g, delta, omega, levels, tol } => {
            positive("omega", *omega)?;
            positive("rtol", tol.rtol)?;
            let grid: Vec<f64> = monotone("g", g)?.iter().map(|v| v / omega).collect();
            let base = Dicke3Params::new(grid[0], delta / omega, Parity::Even)?;
            let s = dicke_sweep(&base, &grid, *levels, tol.rtol)?;
            Ok(sweep_table(&s, *omega).into())
        }
        Command::Census { g, delta, omega, xmax } => {
            positive("omega", *omega)?;
            positive("xmax", *xmax)?;
            let mut pairs = Vec::new();
            for gv in monotone("g", g)? {
                for dv in monotone("delta", delta)? {
                    pairs.push((gv / omega, dv / omega));
                }
            }
            let cfg = ScanConfig { series, ..ScanConfig::default() };
            let report = zero_census(&pairs, *xmax, &cfg)?;
            let mut t =
                Table::new(&["g", "delta", "parity", "interval", "count", "indeterminate", "violation", "lifted_pole"]);
            for c in &report {
                for (n, &count) in c.counts.iter().enumerate() {
                    let n = n as u64;
                    let v = c.violations.iter().find(|v| v.interval == n);
                    t.push(vec![
                        (c.g * omega).into(),
                        (c.delta * omega).into(),
                        c.parity.as_str().into(),
                        n.into(),
                        count.into(),
                        (c.indeterminate_intervals.contains(&n) as usize).into(),
                        v.map(|v| kind(v.kind)).into(),
                        v.and_then(|v| v.lifted_pole).into(),
                    ]);
                }
            }
            Ok(t.into())
        }
        Command::Verify { model, levels, contfrac_levels, tol, contfrac_tol } => {
            positive("tol", *tol)?;
            positive("contfrac-tol", *contfrac_tol)?;
            if *levels == 0 {
                return Err(invalid("--levels must be >= 1"));
            }
            verify(model, *levels, *contfrac_levels, *tol, *contfrac_tol, series)
        }
    }
}

fn verify(model: &RabiArgs, levels: usize, cf_levels: usize, tol: f64, cf_tol: f64, series: SeriesConfig) -> Result<Report, CliError> {
    let p = rabi(model.g, model.delta, model.omega, Parity::Even)?;
    let cfg = SpectrumConfig { cross_check: false, ..spectrum_config(series) };
    // grow the window until every parity has enough G-function levels
    let mut x_max = levels as f64 + 2.0;
    let s = loop {
        let s = full_spectrum(&p, x_max, &cfg)?;
        if Parity::BOTH.iter().all(|&q| s.energies(q).len() >= levels) {
            break s;
        }
        x_max *= 1.5;
    };
    let mut t = Table::new(&["check", "parity", "levels", "max_deviation", "tolerance", "status"]);
    let mut passed = true;
    let mut union = Vec::new();
    for parity in Parity::BOTH {
        let g_levels: Vec<f64> = s.energies(parity).into_iter().take(levels).collect();
        let oracle = oracle_levels(&p.with_parity(parity), x_max, 1e-11)?;
        let dev = g_levels.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let ok = oracle.len() >= levels && dev < tol;
        passed &= ok;
        t.push(vec![
            "gfunction-vs-oracle".into(),
            parity.as_str().into(),
            g_levels.len().into(),
            (dev * model.omega).into(),
            (tol * model.omega).into(),
            if ok { "pass" } else { "fail" }.into(),
        ]);
        union.extend(g_levels);
    }
    union.sort_by(f64::total_cmp);
    let g2 = p.g * p.g;
    let cf_xmax = union.get(cf_levels.saturating_sub(1)).map_or(1.0, |e| e + g2 + 0.5);
    let roots = contfrac_roots(&p, cf_xmax, &ContFracConfig::default())?;
    let n = cf_levels.min(roots.len()).min(union.len());
    let dev = roots.iter().zip(&union).take(n).map(|(r, e)| (r.x - g2 - e).abs()).fold(0.0, f64::max);
    let ok = n == cf_levels && dev < cf_tol;
    passed &= ok;
    t.push(vec![
        "contfrac-vs-gfunction".into(),
        Cell::from("both"),
        n.into(),
        (dev * model.omega).into(),
        (cf_tol * model.omega).into(),
        if ok { "pass" } else { "fail" }.into(),
    ]);
    Ok(Report { table: t, passed })
}
