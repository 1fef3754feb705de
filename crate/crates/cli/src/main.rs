use std::process::ExitCode;

use clap::Parser;
use dicke_qgt_cli::{run, Cli, EXIT_INVALID};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}
