use std::process::ExitCode;

use clap::Parser;
use ramanujan_smooth::cli::{exit_code_for_error, run, write_error_manifest, Cli, RunConfig, EXIT_USAGE};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let config = RunConfig::from_cli(cli);
    match run(&config) {
        Ok(outcome) => {
            for line in &outcome.summary {
                println!("{line}");
            }
            for f in &outcome.failures {
                println!("FAIL {}: {}", f.check, f.detail);
            }
            for f in &outcome.undecided {
                println!("UNDECIDED {}: {}", f.check, f.detail);
            }
            let status = outcome.status();
            println!("status: {}", serde_json::to_string(&status).unwrap_or_default().trim_matches('"'));
            ExitCode::from(status.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let _ = write_error_manifest(&config, &e);
            ExitCode::from(exit_code_for_error(&e) as u8)
        }
    }
}
