use std::process::ExitCode;

use clap::Parser;
use mrank_cli::{emit, execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok((report, code)) => match emit(&cli, &report) {
            Ok(()) => code,
            Err(e) => {
                eprintln!("error: {e}");
                e.exit_code()
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
