use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracbound::commands::{self, Outcome};
use fracbound::config::RunConfig;
use fracbound::output;

/// Numerical laboratory for distributed-order fractional diffusion on boxes.
#[derive(Parser)]
#[command(name = "fracbound", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, clap::Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed override for stochastic commands.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker thread cap (0 = auto).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the spectral series solution on a time/point lattice.
    SolveSpectral(Common),
    /// Monte Carlo estimate of the solution via time-changed Brownian motion.
    SolveMc(Common),
    /// Tabulate the time kernel h(t, lambda).
    EvalH(Common),
    /// Sample subordinator paths; summarize the empirical Laplace transform
    /// and the inverse-time density.
    SampleSubordinator(Common),
    /// Run the analytic verification battery (route agreement, derivative
    /// bound, PDE residual).
    Verify(Common),
    /// Check the killing/time-change commutation under grid refinement.
    VerifyCommutation(Common),
    /// Compare a CTRW ensemble against the diffusion limit.
    Ctrw(Common),
}

fn dispatch(cmd: &Command) -> anyhow::Result<Outcome> {
    let (common, runner): (&Common, fn(&RunConfig, &std::path::Path, Option<u64>, usize) -> anyhow::Result<Outcome>) =
        match cmd {
            Command::SolveSpectral(c) => (c, |cfg, out, _, _| commands::solve_spectral(cfg, out)),
            Command::SolveMc(c) => (c, commands::solve_mc),
            Command::EvalH(c) => (c, |cfg, out, _, _| commands::eval_h(cfg, out)),
            Command::SampleSubordinator(c) => (c, commands::sample_subordinator),
            Command::Verify(c) => (c, |cfg, out, _, _| commands::verify(cfg, out)),
            Command::VerifyCommutation(c) => (c, commands::verify_commutation),
            Command::Ctrw(c) => (c, commands::ctrw),
        };
    let cfg = RunConfig::from_file(&common.config)?;
    let out = output::out_dir(common.out.clone())?;
    runner(&cfg, &out, common.seed, common.threads)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not usage errors
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli.command) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::VerificationFailed) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
