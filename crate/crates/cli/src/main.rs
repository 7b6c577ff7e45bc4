use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use ghcf_cli::commands;
use ghcf_cli::error::exit_code;
use ghcf_cli::{Overrides, Pipeline, PipelineConfig, Selection};
use ghcf_core::Error;

/// Gated hybrid collaborative filtering pipeline.
///
/// Settings come from built-in defaults, then the --config file, then the
/// GHCF_DATA_DIR / GHCF_SEED / GHCF_JOBS environment variables, then flags.
#[derive(Parser)]
#[command(name = "ghcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON pipeline config.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Global seed; overrides the model and evaluation seeds.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Data root for all artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Concurrent (variant, fold) jobs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct JobArgs {
    /// Fold id or `all`.
    #[arg(long, default_value = "all")]
    fold: String,
    /// Variant name (e.g. GHCF_Topic) or `all`.
    #[arg(long, default_value = "all")]
    variant: String,
}

impl JobArgs {
    fn selection(&self) -> anyhow::Result<Selection> {
        let fold = match self.fold.as_str() {
            "all" => None,
            f => Some(f.parse().map_err(|_| Error::Config(format!("--fold {f:?} is neither a fold id nor `all`")))?),
        };
        let variant = (self.variant != "all").then(|| self.variant.clone());
        Ok(Selection { fold, variant })
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate the planted-preference corpus and its review embeddings.
    Synth,
    /// Ingest, clean, filter and split into the canonical corpus.
    Prepare,
    /// Fit the topic model and write per-fold topic and text profiles.
    Topics,
    /// Train checkpoints for (variant, fold) jobs.
    Train(JobArgs),
    /// Evaluate checkpoints on the held-out test items into the results CSV.
    Eval(JobArgs),
    /// Friedman / Nemenyi comparison with ranks, heatmap and CD diagram.
    Compare,
    /// Markdown summary of results and statistics.
    Report,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let flags = Overrides {
        data_dir: cli.out,
        seed: cli.seed,
        jobs: cli.jobs,
    };
    let overrides = Overrides::from_env()?.then(flags);
    let cfg = PipelineConfig::load(cli.config.as_deref(), &overrides)?;
    let p = Pipeline::new(cfg);
    match cli.command {
        Command::Synth => commands::cmd_synth(&p).map(drop),
        Command::Prepare => commands::cmd_prepare(&p).map(drop),
        Command::Topics => commands::cmd_topics(&p).map(drop),
        Command::Train(a) => commands::cmd_train(&p, &a.selection()?).map(drop),
        Command::Eval(a) => commands::cmd_eval(&p, &a.selection()?).map(drop),
        Command::Compare => commands::cmd_compare(&p).map(drop),
        Command::Report => commands::cmd_report(&p).map(drop),
    }
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let code = match run(Cli::parse()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
