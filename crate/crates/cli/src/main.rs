mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use commands::Failure;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Precompute(a) => commands::precompute(a),
        Command::Search(a) => commands::search(a),
        Command::Bench(a) => commands::bench(a),
        Command::Oracle(a) => commands::oracle(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}
