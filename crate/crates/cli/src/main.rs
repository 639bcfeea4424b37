mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: cannot start thread pool: {e}");
            return ExitCode::from(1);
        }
    }
    let seed = cli.seed;
    let outcome = match &cli.command {
        Command::Diff(a) => commands::diff(a, seed),
        Command::Select(a) => commands::select(a, seed),
        Command::Hist(a) => commands::hist(a, seed),
        Command::Baseline(a) => commands::baseline(a, seed),
        Command::Eval(a) => commands::eval(a, seed),
        Command::Pca(a) => commands::pca(a, seed),
        Command::Convert(a) => commands::convert(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
