//! `graphvec` command-line tool. Results go to stdout (JSON or TSV), logs to
//! stderr under the level in `GRAPHVEC_LOG` (default `info`).

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;
use graphvec::Error;

use args::{Cli, Command};

fn exit_code(err: &anyhow::Error) -> u8 {
    let core = err.chain().find_map(|e| e.downcast_ref::<Error>());
    match core {
        Some(Error::Format { .. } | Error::Argument(_)) => 2,
        Some(Error::Vocabulary(_)) => 3,
        Some(Error::Numerical { .. }) => 4,
        Some(Error::Version(_)) => 5,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("GRAPHVEC_LOG", "info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Vocab(a) => commands::vocab(a),
        Command::Train(a) => commands::train(a),
        Command::Classify(a) => commands::classify(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Similar(a) => commands::similar(a),
        Command::Infer(a) => commands::infer(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
