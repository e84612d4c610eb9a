mod args;
mod commands;
mod config_file;
mod error;
mod output;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::error::CliError;

fn run(cli: &Cli) -> Result<i32, CliError> {
    if let Some(n) = cli.global.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    match &cli.command {
        Command::Bands(a) => commands::cmd_bands(cli, a),
        Command::Classify(a) => commands::cmd_classify(cli, a),
        Command::Cone(a) => commands::cmd_cone(cli, a),
        Command::Isospectral(a) => commands::cmd_isospectral(cli, a),
        Command::Puiseux(a) => commands::cmd_puiseux(cli, a),
    }
}

fn main() {
    let args = match config_file::expand_args(std::env::args_os().collect()) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    };
    // clap reports usage errors with exit code 2, matching EXIT_CONFIG
    let cli = Cli::parse_from(args);
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
