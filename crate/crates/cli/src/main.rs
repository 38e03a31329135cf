//! `decoupled`: simulate decoupled random walks and their extremal limits,
//! and run the verification checks.
//!
//! Exit codes: 0 success or pass, 1 error, 2 verification failed, 3 aborted
//! (too many capped or censored replicates).

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{Flags, RunConfig};

#[derive(Parser)]
#[command(name = "decoupled", version, about = "Decoupled random walks and their extremal limit processes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a decoupled path (CSV + JSON), or an ensemble of normalized statistics with --statistic
    SampleWalk(Flags),
    /// Write a limit-process path and its atoms on --window
    SampleLimit(Flags),
    /// KS check of a limit marginal (X1..X4 or X1inv..X4inv) against path samples
    VerifyMarginal(Flags),
    /// KS of normalized pre-limit statistics against the limit law along --v-grid
    VerifyPrelimit(Flags),
    /// Large-deviation check of v P{S_[tv] > a(v) y} against t y^-alpha
    VerifyLd(Flags),
    /// KS of (X1inv(t))^2 against its exponential law
    VerifyTauExp(Flags),
    /// Print the normalizers a(v) (and m(v)) over --v-grid
    Normalize(Flags),
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    let (flags, cmd): (&Flags, fn(&RunConfig) -> anyhow::Result<i32>) = match &cli.command {
        Command::SampleWalk(f) => (f, commands::sample_walk),
        Command::SampleLimit(f) => (f, commands::sample_limit),
        Command::VerifyMarginal(f) => (f, commands::verify_marginal),
        Command::VerifyPrelimit(f) => (f, commands::verify_prelimit),
        Command::VerifyLd(f) => (f, commands::verify_ld),
        Command::VerifyTauExp(f) => (f, commands::verify_tau_exp),
        Command::Normalize(f) => (f, commands::normalize),
    };
    cmd(&RunConfig::load(flags)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
