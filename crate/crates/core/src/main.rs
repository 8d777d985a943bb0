use std::path::PathBuf;
use std::process::ExitCode;

use beam_attractor::cli;
use clap::error::ErrorKind;
use clap::Parser;

/// Spectral Galerkin simulator and attractor toolkit for the extensible beam
/// with fractional rotational inertia.
#[derive(Parser)]
#[command(name = "beam-attractor", version = version_text())]
struct Args {
    /// One of: simulate, hypotheses, decay, stability, alpha-scan, stationary,
    /// attractor, usc-scan, holder
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(cli::SUBCOMMAND_NAMES))]
    subcommand: String,
    /// Experiment file (`key = value` lines)
    #[arg(long)]
    config: PathBuf,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn version_text() -> &'static str {
    Box::leak(cli::version().into_boxed_str())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            let _ = e.print();
            eprintln!("{}", cli::error_line("-", "usage", &e.kind().to_string()));
            return ExitCode::from(1);
        }
    };
    if let Err(e) = cli::configure_threads() {
        eprintln!("{}", cli::error_line(&args.subcommand, e.kind(), &e.to_string()));
        return ExitCode::from(1);
    }
    ExitCode::from(cli::execute(&args.subcommand, &args.config, &args.out) as u8)
}
