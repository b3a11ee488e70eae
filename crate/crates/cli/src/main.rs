use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = stochrate_cli::Cli::parse();
    ExitCode::from(stochrate_cli::run(cli))
}
