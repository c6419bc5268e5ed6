//! `dirheat`: command-line front end for Dirichlet-series expansion and heat-equation
//! control.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 domain error (blocked mode
//! or ill-conditioned moment problem).

mod control_cmd;
mod output;
mod series_cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use control_cmd::ControlCommand;
use output::Sink;
use series_cmd::SeriesCommand;

#[derive(Parser, Debug)]
#[command(name = "dirheat", version, about, long_about = None)]
struct Cli {
    /// JSON document whose keys override the command's flags
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write results here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Omit the `#` provenance line from CSV output
    #[arg(long, global = true)]
    no_header: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exponential Dirichlet series
    #[command(subcommand)]
    Series(SeriesCommand),
    /// Heat-equation actuators and controls
    #[command(subcommand)]
    Control(ControlCommand),
}

pub struct Context {
    pub config: Option<PathBuf>,
    out: Option<PathBuf>,
    no_header: bool,
}

impl Context {
    /// Output sink whose provenance line records the command and its effective arguments.
    pub fn sink<A: Serialize>(&self, command: &str, args: &A) -> Sink {
        let header = (!self.no_header).then(|| {
            format!(
                "dirheat {} {command} {}",
                env!("CARGO_PKG_VERSION"),
                serde_json::to_string(args).expect("argument records serialize")
            )
        });
        Sink::new(self.out.clone(), header)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Context {
        config: cli.config,
        out: cli.out,
        no_header: cli.no_header,
    };
    let result = match cli.command {
        Command::Series(c) => series_cmd::run(c, &ctx),
        Command::Control(c) => control_cmd::run(c, &ctx),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
