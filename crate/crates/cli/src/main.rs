use clap::Parser;

mod cli;
mod commands;
mod config;
mod error;
mod output;

use cli::{Cli, Command};

fn main() {
    let parsed = Cli::parse();
    let result = match parsed.command {
        Command::Simulate(args) => commands::simulate(args),
        Command::Stability(args) => commands::stability(args),
        Command::Converge(args) => commands::converge(args),
        Command::Compare(args) => commands::compare(args),
        Command::Validate(args) => commands::validate(args),
    };
    if let Err(err) = result {
        eprintln!("fracstep: error: {:#}", err.source);
        std::process::exit(err.exit_code);
    }
}
