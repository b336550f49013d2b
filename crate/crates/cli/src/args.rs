use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "respire", version, about = "COVID-19 detection from cough and breath recordings")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Extract 477 hand-crafted features per manifest row into a table.
    Features(FeaturesArgs),
    /// Mean/std-pool a directory of EMB1 files into a table.
    Pool(PoolArgs),
    /// Nested cross-validation; writes report.json, summary.txt and hyperparams.log.
    Evaluate(Box<EvaluateArgs>),
    /// Parameter and byte counts from reports and/or named backbones.
    Footprint(FootprintArgs),
}

#[derive(Debug, Args)]
pub struct FeaturesArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output FeatureTable file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    /// Directory of `.emb1` files.
    #[arg(long)]
    pub emb_dir: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Approach {
    /// Shallow learners on features (PCA + LR/SVM/RF/AB).
    Fe,
    /// MLP head on pooled embeddings.
    Ft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CbMode {
    Concatenate,
    Union,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// C, B or CB.
    #[arg(long, default_value = "C")]
    pub modality: String,
    /// `handcrafted` or `emb:<BACKBONE>`.
    #[arg(long, default_value = "handcrafted")]
    pub features: String,
    #[arg(long, value_enum, default_value = "fe")]
    pub approach: Approach,
    /// Required; there is no default seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    /// Precomputed FeatureTable (skips extraction or pooling).
    #[arg(long)]
    pub table: Option<PathBuf>,
    /// EMB1 directory for `emb:` features.
    #[arg(long)]
    pub emb_dir: Option<PathBuf>,
    /// Comma-separated subset of LR,SVM,RF,AB.
    #[arg(long, default_value = "LR,SVM,RF,AB")]
    pub algorithms: String,
    /// Dataset label in the report (default: manifest file stem).
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long = "hyperband-R", default_value_t = 27)]
    pub hyperband_r: usize,
    #[arg(long, default_value_t = 3)]
    pub hyperband_eta: usize,
    /// Random-search trials when a grid is too large to enumerate.
    #[arg(long, default_value_t = respire_core::learn::RANDOM_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = respire_core::harness::DEFAULT_FOLDS)]
    pub folds: usize,
    /// Keep the class imbalance instead of under-sampling the majority.
    #[arg(long)]
    pub no_undersample: bool,
    #[arg(long, value_enum, default_value = "concatenate")]
    pub cb_mode: CbMode,
    /// Hidden-layer counts searched by Hyperband.
    #[arg(long, default_value = "1,2,3,4,5")]
    pub head_layers: String,
    #[arg(long, default_value = "128,512,1024,2048,6144")]
    pub head_units: String,
    #[arg(long, default_value = "0,0.1,0.2,0.3,0.4")]
    pub head_dropout: String,
}

#[derive(Debug, Args)]
pub struct FootprintArgs {
    /// report/1 JSON files.
    pub reports: Vec<PathBuf>,
    /// Backbone names to list (repeatable).
    #[arg(long)]
    pub backbone: Vec<String>,
    /// Also write the table here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}
