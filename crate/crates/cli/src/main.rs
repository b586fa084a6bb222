mod args;
mod commands;
mod config;
mod error;
mod output;

use std::collections::BTreeSet;
use std::path::Path;
use std::process::ExitCode;

use clap::{CommandFactory, Parser};

use args::{Cli, Command};
use error::CliError;

fn known_env_names() -> BTreeSet<String> {
    fn walk(cmd: &clap::Command, out: &mut BTreeSet<String>) {
        for a in cmd.get_arguments() {
            if let Some(e) = a.get_env() {
                out.insert(e.to_string_lossy().into_owned());
            }
        }
        for s in cmd.get_subcommands() {
            walk(s, out);
        }
    }
    let mut out = BTreeSet::new();
    walk(&Cli::command(), &mut out);
    out
}

fn run() -> Result<(), CliError> {
    let argv: Vec<String> = std::env::args().collect();
    if let Some(path) = config::config_path(&argv) {
        config::apply(Path::new(&path), &known_env_names())?;
    }
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            let text = e.render().to_string();
            let text = text.strip_prefix("error: ").unwrap_or(&text);
            return Err(CliError::Usage(text.trim_end().to_string()));
        }
    };
    match &cli.command {
        Command::Spectrum(a) => commands::spectrum(a),
        Command::PhaseSweep(a) => commands::phase_sweep(a, cli.jobs),
        Command::Modes(a) => commands::modes(a),
        Command::Profile(a) => commands::profile(a),
        Command::PhaseMap(a) => commands::phase_map(a, cli.jobs),
        Command::Evolve(a) => commands::evolve(a),
        Command::Fit(a) => commands::fit(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("ptssh: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn env_names_cover_flags() {
        let names = known_env_names();
        assert!(names.contains("PTSSH_CELLS"));
        assert!(names.contains("PTSSH_ALPHA_MAG"));
        assert!(names.contains("PTSSH_JOBS"));
    }
}
