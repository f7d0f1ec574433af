//! Command-line front end for the fieldscope pipeline.
//!
//! `ingest` -> `label` -> `trends` run as separate stages connected by files;
//! `eval` scores predictions against gold labels and `rank` orders
//! pre-aggregated per-field counts. Every command writes a manifest.

pub mod commands;
pub mod config;
pub mod manifest;

use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use fieldscope_core::labeler::ThresholdMode;
use fieldscope_core::trends::{GrowthFormula, LogBase, SplitRule};

pub use config::RunConfig;
pub use manifest::Manifest;

#[derive(Debug, Parser)]
#[command(name = "fieldscope", version, about = "Field-of-study labeling and research-trend analytics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and deduplicate a raw corpus (JSON lines or BibTeX).
    Ingest(IngestArgs),
    /// Weak-label an ingested corpus and filter out non-research records.
    Label(LabelArgs),
    /// Score predicted labels against gold labels.
    Eval(EvalArgs),
    /// Annual series, growth-share matrix, life-cycle positions and plots.
    Trends(TrendsArgs),
    /// Rank fields of a pre-aggregated counts file.
    Rank(RankArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// TOML run-config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Skip rejected entries instead of failing.
    #[arg(long)]
    pub allow_invalid: bool,
}

#[derive(Debug, Args)]
pub struct LabelArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Externally produced predictions to import (JSON lines with id and labels).
    #[arg(long)]
    pub predictions: Option<PathBuf>,
    /// Minimum keyword occurrences for a field.
    #[arg(long)]
    pub threshold: Option<u32>,
    /// Per-token edit-distance cap.
    #[arg(long)]
    pub max_distance: Option<u32>,
    #[arg(long, value_enum)]
    pub threshold_mode: Option<ThresholdModeArg>,
    /// Let keyword tokens match inside longer words.
    #[arg(long)]
    pub substring: bool,
    /// Store ancestor labels in the output.
    #[arg(long)]
    pub propagate: bool,
    /// Keep front matter, non-English and all-leaf records.
    #[arg(long)]
    pub no_filter: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub gold: Option<PathBuf>,
    #[arg(long)]
    pub predictions: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrendsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Labeled corpus.
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub taxonomy: Option<PathBuf>,
    /// Last year of the analysis window.
    #[arg(long)]
    pub end_year: Option<i32>,
    /// Window length in years.
    #[arg(long)]
    pub window: Option<u32>,
    /// First year of the observation period.
    #[arg(long)]
    pub observation_start: Option<i32>,
    #[arg(long, value_enum)]
    pub split: Option<SplitArg>,
    #[arg(long, value_enum)]
    pub growth: Option<GrowthArg>,
    #[arg(long, value_enum)]
    pub log_base: Option<LogBaseArg>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda_max: Option<f64>,
    /// Count records only toward their own labels, not their ancestors.
    #[arg(long)]
    pub no_propagate: bool,
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// CSV with `field_id,count` or `field_id,year,count` columns.
    #[arg(long)]
    pub counts: Option<PathBuf>,
    /// Keep only the first N rows.
    #[arg(long)]
    pub top: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ThresholdModeArg {
    PerField,
    PerKeyword,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SplitArg {
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GrowthArg {
    Relative,
    Cagr,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LogBaseArg {
    E,
    Ten,
    Two,
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn base_config(common: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = RunConfig::load(common.config.as_deref())?;
    set(&mut cfg.out_dir, common.out.clone());
    Ok(cfg)
}

/// Resolves the effective configuration for a command.
pub fn resolve(command: &Command) -> Result<RunConfig> {
    Ok(match command {
        Command::Ingest(a) => {
            let mut cfg = base_config(&a.common)?;
            cfg.corpus = a.corpus.clone().or(cfg.corpus);
            cfg.allow_invalid |= a.allow_invalid;
            cfg
        }
        Command::Label(a) => {
            let mut cfg = base_config(&a.common)?;
            cfg.corpus = a.corpus.clone().or(cfg.corpus);
            cfg.taxonomy = a.taxonomy.clone().or(cfg.taxonomy);
            cfg.predictions = a.predictions.clone().or(cfg.predictions);
            set(&mut cfg.matcher.occurrence_threshold, a.threshold);
            set(&mut cfg.matcher.fuzzy_max_distance, a.max_distance);
            set(
                &mut cfg.matcher.threshold_mode,
                a.threshold_mode.map(|m| match m {
                    ThresholdModeArg::PerField => ThresholdMode::PerField,
                    ThresholdModeArg::PerKeyword => ThresholdMode::PerKeyword,
                }),
            );
            if a.substring {
                cfg.matcher.token_boundary = false;
            }
            cfg.propagate_labels |= a.propagate;
            if a.no_filter {
                cfg.apply_filter = false;
            }
            cfg
        }
        Command::Eval(a) => {
            let mut cfg = base_config(&a.common)?;
            cfg.gold = a.gold.clone().or(cfg.gold);
            cfg.predictions = a.predictions.clone().or(cfg.predictions);
            cfg
        }
        Command::Trends(a) => {
            let mut cfg = base_config(&a.common)?;
            cfg.corpus = a.corpus.clone().or(cfg.corpus);
            cfg.taxonomy = a.taxonomy.clone().or(cfg.taxonomy);
            set(&mut cfg.window.end_year, a.end_year);
            set(&mut cfg.window.length, a.window);
            set(&mut cfg.window.observation_start, a.observation_start);
            set(
                &mut cfg.split,
                a.split.map(|s| match s {
                    SplitArg::Median => SplitRule::Median,
                    SplitArg::Mean => SplitRule::Mean,
                }),
            );
            set(
                &mut cfg.growth,
                a.growth.map(|g| match g {
                    GrowthArg::Relative => GrowthFormula::Relative,
                    GrowthArg::Cagr => GrowthFormula::Cagr,
                }),
            );
            set(
                &mut cfg.log_base,
                a.log_base.map(|b| match b {
                    LogBaseArg::E => LogBase::Natural,
                    LogBaseArg::Ten => LogBase::Ten,
                    LogBaseArg::Two => LogBase::Two,
                }),
            );
            set(&mut cfg.lambda_min, a.lambda_min);
            set(&mut cfg.lambda_max, a.lambda_max);
            if a.no_propagate {
                cfg.propagate_counts = false;
            }
            cfg
        }
        Command::Rank(a) => {
            let mut cfg = base_config(&a.common)?;
            cfg.counts = a.counts.clone().or(cfg.counts);
            cfg.top = a.top.or(cfg.top);
            cfg
        }
    })
}

pub fn run(cli: Cli) -> Result<()> {
    let cfg = resolve(&cli.command)?;
    match cli.command {
        Command::Ingest(_) => commands::ingest(&cfg),
        Command::Label(_) => commands::label(&cfg),
        Command::Eval(_) => commands::eval(&cfg),
        Command::Trends(_) => commands::trends(&cfg),
        Command::Rank(_) => {
            for (i, (id, count)) in commands::rank(&cfg)?.iter().enumerate() {
                println!("{}\t{id}\t{count}", i + 1);
            }
            Ok(())
        }
    }
}
