//! Command-line front end for the reflected-Brownian-motion laboratory.
//!
//! Exit codes: 0 on success, 1 when a verification or comparison exceeds
//! its tolerance, 2 on usage or configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rbm_lab::harness::checks::run_verify;
use rbm_lab::harness::{
    emit_report, emit_text, run_compare, run_limit_cdf, run_simulate, ExperimentConfig, Mode,
};

#[derive(Parser)]
#[command(
    name = "rbm-lab",
    version,
    about = "Simulation and limit-law laboratory for stationary reflected Brownian motions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw rescaled samples of the particle system and print them as CSV.
    Simulate(RunArgs),
    /// Tabulate the limit CDF on the threshold grid.
    #[command(name = "limit-cdf")]
    LimitCdf(RunArgs),
    /// Simulate and compare the empirical CDF against the limit formula.
    Compare(RunArgs),
    /// Run the full self-verification suite.
    Verify(VerifyArgs),
}

/// Options shared by the experiment subcommands. Values given on the
/// command line override values from the config file.
#[derive(Args)]
struct RunArgs {
    /// Flat key=value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Observation time of the particle system.
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// Rescaled density offset (0 selects the stationary limit law).
    #[arg(long, allow_negative_numbers = true)]
    delta: Option<f64>,
    /// Spatial observation point; repeat for multi-point frames.
    #[arg(long, allow_negative_numbers = true)]
    r: Vec<f64>,
    /// Threshold value; repeat to build the threshold grid.
    #[arg(long, allow_negative_numbers = true)]
    s: Vec<f64>,
    /// Number of independent Monte Carlo trials.
    #[arg(long)]
    trials: Option<usize>,
    /// Quadrature nodes per panel of the Fredholm discretization.
    #[arg(long)]
    nodes: Option<usize>,
    /// Half-width of the quadrature window above the threshold.
    #[arg(long, allow_negative_numbers = true)]
    smax: Option<f64>,
    /// Master seed; all trial substreams derive from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Output format: csv or json.
    #[arg(long)]
    format: Option<String>,
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Master seed for the stochastic checks.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output file for the summary table (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl RunArgs {
    fn build(&self, mode: Mode) -> Result<ExperimentConfig, rbm_lab::Error> {
        let mut config = ExperimentConfig::new(mode);
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        config.mode = mode;
        if let Some(t) = self.t {
            config.t = t;
        }
        if let Some(delta) = self.delta {
            config.delta = delta;
        }
        if !self.r.is_empty() {
            config.r_list = self.r.clone();
        }
        if !self.s.is_empty() {
            config.s_list = self.s.clone();
        }
        if let Some(trials) = self.trials {
            config.trials = trials;
        }
        if let Some(nodes) = self.nodes {
            config.nodes = nodes;
        }
        if let Some(smax) = self.smax {
            config.s_span = smax;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(format) = &self.format {
            config.format = format.parse()?;
        }
        if let Some(out) = &self.out {
            config.out = Some(out.clone());
        }
        config.validate()?;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<ExitCode, rbm_lab::Error> {
    match cli.command {
        Command::Simulate(args) => {
            let config = args.build(Mode::Simulate)?;
            let csv = run_simulate(&config)?;
            emit_text(&csv, config.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::LimitCdf(args) => {
            let config = args.build(Mode::LimitCdf)?;
            let table = run_limit_cdf(&config)?;
            emit_text(&table, config.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Compare(args) => {
            let config = args.build(Mode::Compare)?;
            let report = run_compare(&config)?;
            emit_report(&report, config.format, config.out.as_deref())?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify(args) => {
            let summary = run_verify(args.seed)?;
            emit_text(&summary.render_table(), args.out.as_deref())?;
            if summary.passed {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn main() -> ExitCode {
    // clap itself exits with code 2 on usage errors.
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
