use std::process::ExitCode;

use clap::Parser;
use mleach_sim::cli::{self, Args, RunRequest};

fn main() -> ExitCode {
    let req = RunRequest::from(Args::parse());
    match cli::run(&req) {
        Ok(report) => {
            print!("{}", cli::print_summary(&report));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
