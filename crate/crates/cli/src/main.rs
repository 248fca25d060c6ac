//! Command-line pipelines over the phasekit library.
//!
//! Exit codes: 0 success, 1 usage error, 2 data/format error. Diagnostics go
//! to stderr; results go to the files named on the command line, metrics as
//! single-line JSON on stdout.

mod commands;

use clap::error::ErrorKind;
use clap::Parser;
use commands::{Cli, CliError};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    std::process::exit(0);
                }
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };

    if let Err(e) = commands::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(match e {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        });
    }
}
