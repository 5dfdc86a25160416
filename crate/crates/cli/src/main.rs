use std::process::ExitCode;

use clap::Parser;
use floquet_junction_cli::{run, Cli};

fn main() -> ExitCode {
    run(Cli::parse())
}
