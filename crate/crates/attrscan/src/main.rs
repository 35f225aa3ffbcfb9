use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use attrscan::config::RunConfig;
use attrscan::pipeline::{self, StageOptions};

#[derive(Parser)]
#[command(
    name = "attrscan",
    version,
    about = "Trace culture-symbol associations in model generations back to a pretraining corpus"
)]
struct Cli {
    /// Run configuration file (.toml or .json)
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Output directory (overrides the config file)
    #[arg(long, global = true, value_name = "DIR")]
    out_dir: Option<PathBuf>,

    /// Worker thread count (overrides the config file)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Topic-model seed (overrides the config file)
    #[arg(long, global = true, value_name = "SEED")]
    seed: Option<u64>,

    /// Overwrite existing output files
    #[arg(long, global = true)]
    force: bool,

    /// Mirror every CSV output as JSON
    #[arg(long, global = true)]
    json: bool,

    /// Correlate per topic using keyword-filtered document counts
    #[arg(long, global = true)]
    topic_filter: bool,

    /// External n-gram count CSV overriding index-derived counts
    #[arg(long, global = true, value_name = "FILE")]
    external_counts: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the positional n-gram index over the corpus
    Index,
    /// Score generated symbols and detect memorized pairs
    Classify,
    /// Label generated pairs with association kinds
    Label,
    /// Aggregate per-culture label fractions into a dashboard
    Report,
    /// Correlate memorized-symbol counts with document counts
    Correlate,
    /// Extract topic keywords for cross-culture cases
    Topics {
        /// Include raw topic-word tables in the output
        #[arg(long)]
        dump_topics: bool,
    },
}

fn load_config(cli: &Cli) -> attrscan::Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path)?,
        None => RunConfig::default(),
    };
    if let Some(dir) = &cli.out_dir {
        cfg.output.dir = dir.clone();
    }
    if let Some(threads) = cli.threads {
        cfg.output.threads = Some(threads);
    }
    if let Some(seed) = cli.seed {
        cfg.output.seed = seed;
    }
    if let Some(path) = &cli.external_counts {
        cfg.paths.external_counts = Some(path.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> attrscan::Result<()> {
    let cfg = load_config(cli)?;
    let mut opts = StageOptions {
        force: cli.force,
        json_mirror: cli.json,
        topic_filter: cli.topic_filter,
        dump_topics: false,
    };
    match &cli.command {
        Command::Index => {
            pipeline::run_index(&cfg, &opts)?;
        }
        Command::Classify => {
            pipeline::run_classify(&cfg, &opts)?;
        }
        Command::Label => {
            pipeline::run_label(&cfg, &opts)?;
        }
        Command::Report => {
            pipeline::run_report(&cfg, &opts)?;
        }
        Command::Correlate => {
            pipeline::run_correlate(&cfg, &opts)?;
        }
        Command::Topics { dump_topics } => {
            opts.dump_topics = *dump_topics;
            pipeline::run_topics(&cfg, &opts)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
