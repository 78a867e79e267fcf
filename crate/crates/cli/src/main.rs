use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use netdea_cli::{output_path, run, Cli, CliError};

fn emit(cli: &Cli, report: &str) -> Result<(), CliError> {
    match output_path(&cli.command) {
        Some(path) => {
            std::fs::write(path, report).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
        }
        None => std::io::stdout()
            .write_all(report.as_bytes())
            .map_err(|e| CliError::Output(e.to_string())),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli.command).and_then(|report| emit(&cli, &report)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("netdea: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
