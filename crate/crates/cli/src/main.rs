mod cli;
mod config;
mod report;
mod suites;

use std::process::ExitCode;

use clap::Parser;

use cli::{Cli, Command};
use config::ConfigError;
use report::Report;
use suites::Runner;

fn run(command: &Command) -> Result<Report, ConfigError> {
    let args = command.args();
    let prep = config::resolve(args, command.suite().map(|s| vec![s]))?;
    let runner = Runner::new(&prep, !args.omit_timing);
    let records = prep.scenario.checks.iter().flat_map(|&s| runner.run(s)).collect();
    let report = Report::new(command.name(), prep.scenario.clone(), records);
    if let Some(path) = &prep.scenario.output {
        report.write(path)?;
    }
    Ok(report)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok(report) => {
            if cli.command.args().json {
                print!("{}", report.to_json());
            } else {
                print!("{}", report.table());
            }
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
