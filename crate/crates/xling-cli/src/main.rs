//! `xling`: command-line driver for the cross-lingual embedding pipeline.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 data/format error,
//! 3 numerical failure.

mod artifacts;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use artifacts::RunDir;
use commands::NnArgs;
use config::load_config;

#[derive(Debug)]
pub struct CliError {
    pub exit: u8,
    pub message: String,
}

impl CliError {
    fn config(message: impl Into<String>) -> Self {
        CliError {
            exit: 1,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        CliError {
            exit: 2,
            message: message.into(),
        }
    }
}

impl From<xling_core::Error> for CliError {
    fn from(e: xling_core::Error) -> Self {
        let exit = match e {
            xling_core::Error::Numerical(_) => 3,
            _ => 2,
        };
        CliError {
            exit,
            message: e.to_string(),
        }
    }
}

#[derive(Args, Debug)]
struct Common {
    /// Pipeline configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser, Debug)]
#[command(
    name = "xling",
    version,
    about = "Cross-lingual word embeddings for dictionary-only languages"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalize vocabularies and reduce all spaces to the target dimension.
    Reduce(Common),
    /// Align resource-rich spaces onto the anchor language.
    Align(Common),
    /// Project endangered-language lexemes as translation centroids.
    Project(Common),
    /// Fine-tune projected spaces on treebanks and re-align them.
    Finetune(Common),
    /// Query nearest neighbors across two spaces.
    Nn {
        #[command(flatten)]
        common: Common,
        /// Query lemma (looked up in the source space).
        #[arg(long)]
        query: String,
        #[arg(long)]
        source_lang: String,
        #[arg(long)]
        target_lang: String,
        #[arg(short, default_value_t = 3)]
        k: usize,
        /// cosine or csls
        #[arg(long, default_value = "cosine")]
        metric: String,
        /// Neighborhood size for the CSLS penalties.
        #[arg(long, default_value_t = 10)]
        csls_k: usize,
        /// Explicit source embeddings file (otherwise resolved from the run
        /// directory: final, aligned, then reduced).
        #[arg(long)]
        source_embeddings: Option<PathBuf>,
        /// Explicit target embeddings file.
        #[arg(long)]
        target_embeddings: Option<PathBuf>,
    },
    /// Train the sentiment classifier on the configured corpus.
    SentimentTrain(Common),
    /// Evaluate the persisted sentiment model.
    SentimentEval(Common),
}

fn run(cli: Cli) -> Result<(), CliError> {
    let common = match &cli.command {
        Command::Reduce(c)
        | Command::Align(c)
        | Command::Project(c)
        | Command::Finetune(c)
        | Command::SentimentTrain(c)
        | Command::SentimentEval(c) => c,
        Command::Nn { common, .. } => common,
    };
    let loaded = load_config(&common.config)?;
    let seed = common.seed.unwrap_or(loaded.config.rng_seed);
    let out_dir = common
        .out
        .clone()
        .unwrap_or_else(|| loaded.config.output_dir.clone());
    let run_dir = RunDir::new(out_dir);

    match &cli.command {
        Command::Reduce(_) => commands::cmd_reduce(&loaded, &run_dir, seed),
        Command::Align(_) => commands::cmd_align(&loaded, &run_dir, seed),
        Command::Project(_) => commands::cmd_project(&loaded, &run_dir, seed),
        Command::Finetune(_) => commands::cmd_finetune(&loaded, &run_dir, seed),
        Command::Nn {
            query,
            source_lang,
            target_lang,
            k,
            metric,
            csls_k,
            source_embeddings,
            target_embeddings,
            ..
        } => commands::cmd_nn(
            &loaded,
            &run_dir,
            &NnArgs {
                query: query.clone(),
                source_lang: source_lang.clone(),
                target_lang: target_lang.clone(),
                k: *k,
                metric: metric.clone(),
                csls_k: *csls_k,
                source_embeddings: source_embeddings.clone(),
                target_embeddings: target_embeddings.clone(),
            },
        ),
        Command::SentimentTrain(_) => commands::cmd_sentiment_train(&loaded, &run_dir, seed),
        Command::SentimentEval(_) => commands::cmd_sentiment_eval(&loaded, &run_dir, seed),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's own exit code conventions differ; usage problems are 1
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.exit)
        }
    }
}
