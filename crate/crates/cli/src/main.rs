//! `emoguard` command-line tool.

mod data;
mod io;
mod model;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};

use crate::io::Format;

#[derive(Debug, Parser)]
#[command(
    name = "emoguard",
    version,
    about = "Emoji-aware self-harm post analysis and LLM evaluation"
)]
struct Cli {
    /// Seed for every random choice (splits, exemplars, perturbation, mock).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// JSON config file (backend and pipeline settings).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value = "json")]
    format: Format,
    /// Treat warnings as errors.
    #[arg(long, global = true)]
    strict: bool,
    /// More log output; repeat for debug.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    #[command(subcommand)]
    Lexicon(data::LexiconCmd),
    #[command(subcommand)]
    Corpus(data::CorpusCmd),
    #[command(subcommand)]
    Prompt(model::PromptCmd),
    /// Send prompts to a backend and parse the completions.
    Run(model::RunArgs),
    #[command(subcommand)]
    Eval(model::EvalCmd),
    #[command(subcommand)]
    Agreement(data::AgreementCmd),
    /// Split, prompt, complete, parse and score in one go.
    Pipeline(pipeline::PipelineArgs),
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone)]
pub struct Globals {
    pub seed: u64,
    pub config: Option<PathBuf>,
    pub format: Format,
    pub strict: bool,
}

fn dispatch(command: Command, g: &Globals) -> Result<()> {
    match command {
        Command::Lexicon(c) => data::lexicon(c, g),
        Command::Corpus(c) => data::corpus(c, g),
        Command::Prompt(c) => model::prompt(c, g),
        Command::Run(a) => model::run(a, g),
        Command::Eval(c) => model::eval(c, g),
        Command::Agreement(c) => data::agreement(c, g),
        Command::Pipeline(a) => pipeline::pipeline(a, g),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let g = Globals {
        seed: cli.seed,
        config: cli.config,
        format: cli.format,
        strict: cli.strict,
    };
    match dispatch(cli.command, &g) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
