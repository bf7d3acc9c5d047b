//! `geostat` — simulate Gaussian spatial fields, fit Matérn parameters by
//! maximum likelihood, krige unknown sites and cross-validate, all on the
//! tile runtime. Structured results go to JSON, bulk vectors to CSV; see
//! docs/formats.md for the file layouts.

mod commands;
mod config;

use clap::Parser;

#[derive(Parser)]
#[command(name = "geostat", version, about = "Tile-based geostatistics: Matérn MLE, simulation, kriging")]
struct Cli {
    #[command(subcommand)]
    command: commands::Command,
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = commands::run(cli.command) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
