//! Command-line front end for the `softrange` library.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;
pub mod sri_text;

use std::ffi::OsString;

use clap::Parser;

pub use error::{exit, CliError, CliResult};

/// Parses `args` and runs one command.
pub fn run<I, T>(args: I) -> CliResult<()>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return Ok(());
        }
        Err(e) => {
            let text = e.render().to_string();
            return Err(CliError::Usage(text.trim_start_matches("error: ").to_string()));
        }
    };
    let file = config::FileConfig::load(cli.config.as_deref())?;
    let out_dir = config::output_dir(cli.out_dir.as_deref(), &file);
    let ctx = commands::Context { file, out_dir, force: cli.force };
    match &cli.command {
        args::Command::Synth(a) => commands::synth(&ctx, a),
        args::Command::Train(a) => commands::train(&ctx, a),
        args::Command::Eval(a) => commands::eval(&ctx, a),
        args::Command::Infer(a) => commands::infer(&ctx, a),
    }
}
