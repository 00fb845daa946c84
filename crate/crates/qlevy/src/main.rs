use std::process::ExitCode;

use clap::Parser;
use qlevy::cli::Cli;
use qlevy::{error_exit, error_name, run};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: ConfigError: {e}");
            return ExitCode::from(1);
        }
    }
    match run(&cli) {
        Ok(exit) => ExitCode::from(exit as u8),
        Err(e) => {
            eprintln!("error: {}: {e:#}", error_name(&e));
            ExitCode::from(error_exit(&e) as u8)
        }
    }
}
