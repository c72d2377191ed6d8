mod args;
mod commands;
mod error;
mod fit;
mod svg;
mod write;

use clap::Parser;

use crate::args::{Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Cov(a) => commands::cov(a),
        Command::Youden(a) => commands::youden(a),
        Command::Mhd(a) => commands::mhd(a),
        Command::Pca(a) => commands::pca(a),
        Command::Impute(a) => commands::impute_cmd(a),
    };
    match result {
        Ok(out) => {
            for path in out.written() {
                eprintln!("wrote {}", path.display());
            }
        }
        Err(e) => {
            eprintln!("robcov: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
