use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use zrp::config::RunConfig;
use zrp::harness::{execute, num, Experiment};

#[derive(Parser)]
#[command(name = "zrp", version, about = "Boundary-driven zero-range process experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: PathBuf,
    /// `section.key=value`, applied after the file is read.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Steady-state profiles, admissibility and sampler checks.
    SteadyCheck(RunArgs),
    /// Ergodic averages of the simulated dynamics against the steady state.
    Simulate(RunArgs),
    /// Static covariance, quadratic variation and lag covariance of the field.
    FluctVerify(RunArgs),
    /// Decay of the Boltzmann-Gibbs residual along an N ladder.
    BgCheck(RunArgs),
    /// Log-log slope of the boundary replacement statistic.
    BoundaryScaling(RunArgs),
    /// Sturm-Liouville closed forms, eigenvalue bounds and oscillation counts.
    Spectral(RunArgs),
    /// Relaxation of the hydrodynamic equation to its stationary profile.
    Hydro(RunArgs),
    /// Second moment of the boundary-corrected martingale.
    ExtendedMartingale(RunArgs),
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Command::SteadyCheck(a) => (Experiment::SteadyCheck, a),
            Command::Simulate(a) => (Experiment::Simulate, a),
            Command::FluctVerify(a) => (Experiment::FluctVerify, a),
            Command::BgCheck(a) => (Experiment::BgCheck, a),
            Command::BoundaryScaling(a) => (Experiment::BoundaryScaling, a),
            Command::Spectral(a) => (Experiment::Spectral, a),
            Command::Hydro(a) => (Experiment::Hydro, a),
            Command::ExtendedMartingale(a) => (Experiment::ExtendedMartingale, a),
        }
    }
}

fn main() -> ExitCode {
    let (experiment, args) = Cli::parse().command.split();
    let result = RunConfig::load(&args.config, &args.overrides).and_then(|cfg| execute(&cfg, experiment));
    match result {
        Ok((report, dir)) => {
            for (name, v) in &report.verdicts {
                println!("{} {name}: value {} target {}", if v.pass { "PASS" } else { "FAIL" }, num(v.value), num(v.target));
            }
            println!("wrote {}", dir.display());
            if report.all_pass() {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
