//! `dialogos`: serve the protocol, replay logs, print reports, generate
//! corpora and check grammar configs.

mod commands;
mod parse;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};

use crate::parse::{parse_duration, parse_window, Window};

#[derive(Debug, Parser)]
#[command(name = "dialogos", version, about = "Structured educational conversations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Replay the log, then serve protocol v1 over TCP.
    Serve {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        log: PathBuf,
        #[arg(long, default_value = "127.0.0.1:7070")]
        listen: String,
        /// Bootstrap profiles and documents added on startup.
        #[arg(long)]
        directory: Option<PathBuf>,
    },
    /// Reports over an event log.
    Report {
        #[command(subcommand)]
        report: Report,
    },
    /// Write a seeded synthetic forum log to stdout.
    GenCorpus {
        #[arg(long)]
        users: usize,
        #[arg(long)]
        messages: usize,
        #[arg(long)]
        consecutive: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Load a grammar config and flag acts with no successor.
    CheckGrammar { file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum Report {
    /// Behaviour profiles as TSV.
    Profiles {
        #[arg(long)]
        log: PathBuf,
        /// Inclusive seq range `a..b`; either end may be omitted.
        #[arg(long, value_parser = parse_window)]
        window: Option<Window>,
    },
    /// Temporal sessions of one channel, or its session grid.
    Sessions {
        #[arg(long)]
        log: PathBuf,
        #[arg(long)]
        channel: String,
        /// `<int><s|m|h>`
        #[arg(long, value_parser = parse_duration, default_value = "60m")]
        delta: Duration,
        #[arg(long)]
        grid: bool,
        /// Grammar the log was written under; SPLACH when omitted.
        #[arg(long)]
        grammar: Option<PathBuf>,
        /// Course manifest for context events; the bundled one when omitted.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Contextual against global opens and sends.
    Usage {
        #[arg(long)]
        log: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("DIALOGOS_LOG_LEVEL", "warn"),
    )
    .init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Serve {
            grammar,
            manifest,
            log,
            listen,
            directory,
        } => commands::serve(&grammar, &manifest, &log, &listen, directory.as_deref()),
        Command::Report { report } => match report {
            Report::Profiles { log, window } => commands::report_profiles(&log, window),
            Report::Sessions {
                log,
                channel,
                delta,
                grid,
                grammar,
                manifest,
            } => commands::report_sessions(
                &log,
                &channel,
                delta,
                grid,
                grammar.as_deref(),
                manifest.as_deref(),
            ),
            Report::Usage { log } => commands::report_usage(&log),
        },
        Command::GenCorpus {
            users,
            messages,
            consecutive,
            seed,
        } => commands::gen_corpus(users, messages, consecutive, seed),
        Command::CheckGrammar { file } => commands::check_grammar(&file),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dialogos: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
