//! Command implementations behind the `cascade-lcr` binary.

pub mod output;
pub mod scenario;

use std::path::Path;

use cascade_lcr::analytic::rayleigh_lcr;
use cascade_lcr::exact::exact_lcr_dualhop;
use cascade_lcr::figures::{run_figure, FigureScenario, FIGURE_TAPS};
use cascade_lcr::specialfn::bessel_k1;
use cascade_lcr::{
    cascade_trace, cdf_product_rayleigh, compute_curve, estimate_lcr_afd, exact_lcr, gen_f2m_trace,
    laplace_lcr, product_exp_cdf, CascadeSpec, CdfEvalOptions, CurveOptions, Method,
    QuadratureSpec, SecondOrderCurve, SimulationSettings, ThresholdGrid, TraceSpec,
    MAX_EXACT_HOPS,
};
use rayon::prelude::*;
use thiserror::Error;

pub use scenario::{GridSection, MethodChoice, ScenarioFile};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}{}{message}", file.as_ref().map(|f| format!("{f}: ")).unwrap_or_default(), line.map(|l| format!("line {l}: ")).unwrap_or_default())]
    Parse {
        file: Option<String>,
        line: Option<usize>,
        message: String,
    },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] cascade_lcr::Error),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    /// Attaches the scenario file name to a parse error.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            CliError::Parse { line, message, .. } => CliError::Parse {
                file: Some(path.display().to_string()),
                line,
                message,
            },
            other => other,
        }
    }
}

/// Overrides taken from the command line.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub method: Option<MethodChoice>,
    pub seed: Option<u64>,
    pub grid: Option<GridSection>,
}

fn simulation(s: &ScenarioFile, o: &Overrides) -> SimulationSettings {
    let mut sim = s.simulation.settings();
    if let Some(seed) = o.seed {
        sim.seed = seed;
    }
    sim
}

/// Curves for every requested method. With `all`, the exact method is
/// skipped beyond its hop limit; asked for by name it is an error there.
pub fn run_curves(
    s: &ScenarioFile,
    o: &Overrides,
) -> Result<(ThresholdGrid, Vec<SecondOrderCurve>), CliError> {
    let cascade = s.cascade()?;
    let grid = s.grid(o.grid)?;
    let mut methods = s.methods(o.method);
    if o.method == Some(MethodChoice::All) && cascade.n_hops() > MAX_EXACT_HOPS {
        log::warn!(
            "skipping the exact method: it is limited to N <= {MAX_EXACT_HOPS} hops (N = {})",
            cascade.n_hops()
        );
        methods.retain(|&m| m != Method::Exact);
    }
    let opts = CurveOptions {
        quadrature: QuadratureSpec::default(),
        simulation: simulation(s, o),
    };
    let curves = methods
        .par_iter()
        .map(|&m| compute_curve(&cascade, &grid, m, &opts))
        .collect::<cascade_lcr::Result<Vec<_>>>()?;
    Ok((grid, curves))
}

pub fn cmd_curve(s: &ScenarioFile, o: &Overrides) -> Result<String, CliError> {
    let (grid, curves) = run_curves(s, o)?;
    Ok(output::curve_csv(&grid, s.fm_ref()?, &curves))
}

pub fn cmd_cdf(s: &ScenarioFile, o: &Overrides) -> Result<String, CliError> {
    let cascade = s.cascade()?;
    let grid = s.grid(o.grid)?;
    let cdf = grid
        .values()
        .iter()
        .map(|&y| cdf_product_rayleigh(y, &cascade))
        .collect::<cascade_lcr::Result<Vec<_>>>()?;
    Ok(output::cdf_csv(&grid, &cdf))
}

/// The product envelope of the scenario as `t_seconds,amplitude` CSV.
pub fn cmd_simulate(s: &ScenarioFile, o: &Overrides) -> Result<String, CliError> {
    let cascade = s.cascade()?;
    let spec = simulation(s, o).trace_spec(&cascade)?;
    let trace = cascade_trace(&cascade, &spec)?;
    let mut buf = Vec::new();
    trace.write_csv(&mut buf).map_err(|e| CliError::Io {
        path: "<memory>".into(),
        source: e,
    })?;
    Ok(String::from_utf8(buf).expect("CSV output is ASCII"))
}

#[derive(Debug, Clone, Copy)]
pub struct FigureOptions {
    pub fm: f64,
    pub grid: GridSection,
    /// Simulation settings; `None` emits the Laplace curves only.
    pub simulation: Option<SimulationSettings>,
}

impl Default for FigureOptions {
    fn default() -> Self {
        FigureOptions {
            fm: cascade_lcr::figures::DEFAULT_FM,
            grid: GridSection::default(),
            simulation: Some(SimulationSettings::default()),
        }
    }
}

/// File name and contents of each tap of figure `id`.
pub fn cmd_figure(id: u8, opts: &FigureOptions) -> Result<Vec<(String, String)>, CliError> {
    let scenario = FigureScenario::new(id)?.with_fm(opts.fm);
    let grid = ThresholdGrid::from_db(opts.grid.lo_db, opts.grid.hi_db, opts.grid.step_db, scenario.omega_hat)?;
    let taps = run_figure(&scenario, &grid, opts.simulation.as_ref())?;
    debug_assert_eq!(taps.len(), FIGURE_TAPS.len());
    Ok(taps
        .iter()
        .map(|t| {
            let mut curves = vec![&t.laplace];
            curves.extend(t.simulated.as_ref());
            let name = format!("fig{id}_{}_N{}.csv", scenario.metric.as_str(), t.n_hops);
            (name, output::figure_csv(&grid, opts.fm, scenario.metric, &curves))
        })
        .collect())
}

/// Writes each `(name, contents)` into `dir` atomically.
pub fn write_files(dir: &Path, files: &[(String, String)]) -> Result<(), CliError> {
    for (name, body) in files {
        let p = output::write_atomic(dir, name, body.as_bytes())?;
        log::info!("wrote {}", p.display());
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Quick consistency checks of an installation.
pub fn cmd_selftest() -> Result<Vec<Check>, CliError> {
    let mut checks = Vec::new();

    let one = CascadeSpec::unity_gain(&[1.0], &[1.0])?;
    let v = laplace_lcr(&one, 1.0)?;
    let want = (2.0 * std::f64::consts::PI).sqrt() * (-1.0f64).exp();
    checks.push(Check {
        name: "single-hop LCR at 0 dB",
        pass: rel(v, want) < 1e-12 && rel(v, rayleigh_lcr(1.0, 1.0, 1.0)?) < 1e-12,
        detail: format!("{v:.6} (expected {want:.6})"),
    });

    let opts = CdfEvalOptions::default();
    let z: f64 = 0.7;
    let s = 2.0 * z.sqrt();
    let a = product_exp_cdf(z, 2, &opts)?;
    let b = 1.0 - s * bessel_k1(s)?;
    checks.push(Check {
        name: "dual product CDF closed form",
        pass: rel(a, b) < 1e-8,
        detail: format!("relative deviation {:.1e}", rel(a, b)),
    });

    let two = CascadeSpec::unity_gain(&[1.0, 0.5], &[2.0, 3.0])?;
    let q = QuadratureSpec::default().with_rel_tol(1e-9);
    let (a, b) = (exact_lcr(&two, 0.4, &q)?, exact_lcr_dualhop(&two, 0.4, &q)?);
    checks.push(Check {
        name: "dual-hop exact routes",
        pass: rel(a, b) < 1e-6,
        detail: format!("relative deviation {:.1e}", rel(a, b)),
    });

    let grid = ThresholdGrid::from_db(-10.0, 0.0, 5.0, 1.0)?;
    let spec = TraceSpec::new(1280.0, 300.0, 1);
    let est = estimate_lcr_afd(&gen_f2m_trace(1.0, 10.0, &spec)?, &grid)?;
    let worst = est
        .points
        .iter()
        .map(|p| rayleigh_lcr(1.0, 10.0, p.threshold).map(|r| rel(p.lcr, r)))
        .collect::<cascade_lcr::Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    checks.push(Check {
        name: "simulator calibration",
        pass: worst < 0.05,
        detail: format!("largest LCR deviation {:.1}%", 100.0 * worst),
    });
    Ok(checks)
}
