use std::process::ExitCode;

use clap::Parser;
use sumgap_cli::runlog::Reproduction;
use sumgap_cli::{execute, Cli};

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(run) => {
            println!("{}: {}", run.record.command, run.message);
            let verdict = match run.record.reproduction {
                Reproduction::New => "new",
                Reproduction::Match => "reproduction match",
                Reproduction::Mismatch => "REPRODUCTION MISMATCH",
            };
            eprintln!("run log: {verdict} ({})", &run.record.config_hash[..12]);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("sumgap: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
