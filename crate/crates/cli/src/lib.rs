//! Scenario runner for the `bvphi` engine: builds the flux and initial data,
//! runs the tracker with every check, and writes CSV, JSON and SVG reports.

pub mod report;
pub mod scenario;

use anyhow::{bail, Context, Result};
use bvphi::phi::{build_phi, phi_pipeline, ConvexGauge, PhiPipeline};
use bvphi::riemann::{approx_flux, build_subdivision};
use bvphi::tracker::{init_tracker, quantize_initial};
use bvphi::verify::{convergence_study, run_suite, BoundCheck, ConvergenceTable, SuiteReport, DEFAULT_TOLERANCE};

pub use scenario::{DatumSpec, FluxSpec, Scenario};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Options {
    /// Overrides the scenario seed.
    pub seed: Option<u64>,
    pub tolerance: f64,
}

impl Default for Options {
    fn default() -> Self {
        Options { seed: None, tolerance: DEFAULT_TOLERANCE }
    }
}

/// Everything one run produces.
pub struct Bundle {
    pub scenario: Scenario,
    pub seed: u64,
    pub cells: usize,
    pub gauge: ConvexGauge<f64>,
    pub report: SuiteReport<f64>,
}

impl Bundle {
    pub fn failures(&self) -> Vec<&BoundCheck> {
        self.report.failures().collect()
    }
}

pub fn run_scenario(sc: &Scenario, opts: &Options) -> Result<Bundle> {
    let ctx = || format!("scenario `{}`", sc.name);
    sc.validate().with_context(ctx)?;
    let seed = opts.seed.or(sc.seed).unwrap_or(0);
    let flux = sc.build_flux().with_context(ctx)?;
    let gauge = build_phi(&flux).with_context(ctx)?;
    let sub = build_subdivision(&flux, sc.eps).with_context(ctx)?;
    let cells = sc.cells();
    let steps = quantize_initial(&sc.initial_datum(seed)?, sc.support(), cells, &sub).with_context(ctx)?;
    let state = init_tracker(&steps, approx_flux(&flux, sub).with_context(ctx)?).with_context(ctx)?;
    let interval = sc.interval.map(|[a, b]| (a, b));
    let report = run_suite(&state, &gauge, &sc.times, interval, opts.tolerance).with_context(ctx)?;
    Ok(Bundle { scenario: sc.clone(), seed, cells, gauge, report })
}

/// Convergence along `eps_ladder` for Riemann data, at the last scenario time.
pub fn run_convergence(sc: &Scenario, eps_ladder: &[f64], radius: f64) -> Result<ConvergenceTable> {
    let DatumSpec::Riemann { left, right } = sc.datum else {
        bail!("scenario `{}`: convergence needs Riemann data, which have an exact reference solution", sc.name);
    };
    if let Some(e) = eps_ladder.iter().find(|e| !(**e > 0.0)) {
        bail!("invalid eps ladder entry {e}: must be positive");
    }
    let flux = sc.build_flux()?;
    let t = sc.times.iter().copied().fold(0.0, f64::max);
    convergence_study(&flux, left, right, t, radius, eps_ladder, sc.cells)
        .with_context(|| format!("scenario `{}`", sc.name))
}

/// The `ω`, `φ`, `Φ` pipeline of the scenario flux.
pub fn run_phi(sc: &Scenario) -> Result<PhiPipeline<f64>> {
    let flux = sc.build_flux()?;
    phi_pipeline(&flux).with_context(|| format!("scenario `{}`", sc.name))
}
