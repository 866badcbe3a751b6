use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use bvphi_cli::report::{write_bundle, write_convergence, write_phi, Format, ALL_FORMATS};
use bvphi_cli::scenario::BUILTINS;
use bvphi_cli::{run_convergence, run_phi, run_scenario, Bundle, Options, Scenario};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bvphi", version, about = "Front tracking for convex scalar conservation laws with BV^Φ checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output directory; defaults to the scenario `output` or `bvphi-out/<name>`.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for random initial data, overriding the scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Tolerance on the slack of asserted checks.
    #[arg(long, global = true, default_value_t = bvphi::verify::DEFAULT_TOLERANCE)]
    tolerance: f64,
    /// Output formats; repeat or separate by commas. Defaults to all.
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    format: Vec<Format>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write profiles, events, checks and plots.
    Run { config: PathBuf },
    /// Like `run`; exits with status 1 if an asserted check fails.
    Verify { config: PathBuf },
    /// L¹ error against the exact Riemann solution along an ε ladder.
    Convergence {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        eps_ladder: Vec<f64>,
        /// Half-width R of the error window [-R, R].
        #[arg(long, default_value_t = 5.0)]
        radius: f64,
    },
    /// Print the builtin fluxes.
    ListBuiltins,
    /// Write the ω, φ and Φ tables of the scenario flux.
    Phi { config: PathBuf },
}

impl Cli {
    fn formats(&self) -> Vec<Format> {
        if self.format.is_empty() {
            ALL_FORMATS.to_vec()
        } else {
            let mut f = self.format.clone();
            f.sort();
            f.dedup();
            f
        }
    }

    fn out_dir(&self, sc: &Scenario) -> PathBuf {
        self.out_dir
            .clone()
            .or_else(|| sc.output.clone())
            .unwrap_or_else(|| Path::new("bvphi-out").join(&sc.name))
    }
}

fn summarize(bundle: &Bundle) {
    let checks = &bundle.report.checks;
    let asserted = checks.iter().filter(|c| c.asserted).count();
    let failed = bundle.failures();
    println!(
        "scenario {}: {} fronts at t = {}, {} events, {} checks ({} asserted, {} failed)",
        bundle.scenario.name,
        bundle.report.final_state.fronts().len(),
        bundle.report.final_state.time(),
        bundle.report.final_state.events().len(),
        checks.len(),
        asserted,
        failed.len()
    );
    for c in failed {
        println!("FAIL {} at t = {:?}: value {} > bound {} (slack {})", c.name, c.time, c.value, c.bound, c.slack);
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let opts = Options { seed: cli.seed, tolerance: cli.tolerance };
    match &cli.command {
        Command::ListBuiltins => {
            for name in BUILTINS {
                println!("{name}");
            }
            Ok(true)
        }
        Command::Run { config } | Command::Verify { config } => {
            let sc = Scenario::load(config)?;
            let bundle = run_scenario(&sc, &opts)?;
            let dir = cli.out_dir(&sc);
            let files = write_bundle(&bundle, &dir, &cli.formats())?;
            summarize(&bundle);
            println!("wrote {} files to {}", files.len(), dir.display());
            let verify = matches!(cli.command, Command::Verify { .. });
            Ok(!verify || bundle.failures().is_empty())
        }
        Command::Convergence { config, eps_ladder, radius } => {
            let sc = Scenario::load(config)?;
            let table = run_convergence(&sc, eps_ladder, *radius)?;
            println!("{:>10} {:>6} {:>10} {:>8} {:>12}", "eps", "m", "m*eps", "fronts", "L1 error");
            for r in &table.rows {
                println!("{:>10} {:>6} {:>10.4} {:>8} {:>12.6}", r.eps, r.m, r.m_eps, r.fronts, r.l1_error);
            }
            println!("errors nonincreasing within 10%: {}", table.nonincreasing);
            let dir = cli.out_dir(&sc);
            write_convergence(&table, &dir, &cli.formats())?;
            Ok(true)
        }
        Command::Phi { config } => {
            let sc = Scenario::load(config)?;
            let p = run_phi(&sc)?;
            let dir = cli.out_dir(&sc);
            let files = write_phi(&p, &dir, &cli.formats())?;
            println!("Φ has {} knots; wrote {} files to {}", p.gauge.knots().len(), files.len(), dir.display());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).context("bvphi") {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
