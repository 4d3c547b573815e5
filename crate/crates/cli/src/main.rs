mod commands;
mod error;
mod options;

use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use vemstab::Execution;

use error::CliError;
use options::{Cli, Command, ConfigFile, Merge};

fn load_config(cli: &Cli) -> Result<ConfigFile, CliError> {
    let Some(path) = &cli.config else {
        return Ok(ConfigFile::default());
    };
    let text = fs::read_to_string(path).map_err(|e| CliError::from(e).context(path.display()))?;
    toml::from_str(&text).map_err(|e| CliError::new("config", format!("{}: {e}", path.display())))
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let file = load_config(&cli)?;
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match cli.command {
        Command::Element(o) => commands::element(o.merge(file.element), out),
        Command::Tau(o) => commands::tau(o.merge(file.tau), out),
        Command::Hourglass(o) => commands::hourglass(o.merge(file.hourglass), exec, out),
        Command::Mms(o) => commands::mms(o.merge(file.mms), exec, out),
        Command::Project(o) => commands::project(o.merge(file.project), out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = CliError::usage(e.to_string().trim().to_string());
            eprintln!("{}", err.to_json(None));
            return ExitCode::from(err.exit_code());
        }
    };
    let command = cli.command.name();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match run(cli, &mut out).and_then(|()| out.flush().map_err(CliError::from)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) if err.broken_pipe => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("{}", err.to_json(Some(command)));
            ExitCode::from(err.exit_code())
        }
    }
}
