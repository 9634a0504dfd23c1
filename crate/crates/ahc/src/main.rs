use clap::{Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

/// Surface-tension laboratory for phase-transition energies in random media.
#[derive(Parser)]
#[command(name = "ahc", version, about)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the experiment described by a config file.
    Run {
        /// TOML experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Worker threads for independent samples.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Summarize the outputs of a previous run.
    Report {
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.cmd {
        Cmd::Run { config, out, jobs } => ahc::cli::run(config, out, *jobs),
        Cmd::Report { out } => ahc::cli::report(out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
