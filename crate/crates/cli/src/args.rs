use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cssm_core::{Mode, RerankDepth, RunConfig};

use crate::UsageError;

#[derive(Debug, Parser)]
#[command(name = "cssm", version, about = "Contextual-salience ranking over BM25 candidates")]
pub struct Cli {
    /// Cap on worker threads (default: all cores).
    #[arg(long, global = true, env = "CSSM_THREADS")]
    pub threads: Option<usize>,

    /// TOML run configuration; command-line flags take precedence.
    #[arg(long, global = true, env = "CSSM_CONFIG")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tokenize a JSONL corpus and persist its inverted index.
    BuildIndex(BuildIndexArgs),
    /// Rank documents for every query and write a TREC run file.
    Rank(RankArgs),
    /// Score a run file against qrels.
    Eval(EvalArgs),
    /// Print the per-position similarity profile of one document.
    Explain(ExplainArgs),
    /// Rank and evaluate across a range of one parameter.
    Sweep(SweepArgs),
}

#[derive(Debug, Args)]
pub struct BuildIndexArgs {
    #[arg(long, env = "CSSM_CORPUS")]
    pub corpus: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    #[value(name = "bm25", alias = "bm25-only")]
    Bm25,
    #[value(name = "cssm-lf")]
    CssmLf,
    #[value(name = "cssm-cw")]
    CssmCw,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Bm25 => Mode::Bm25,
            ModeArg::CssmLf => Mode::CssmLf,
            ModeArg::CssmCw => Mode::CssmCw,
        }
    }
}

/// Model parameters shared by `rank`, `explain` and `sweep`.
#[derive(Debug, Args, Default)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Weight of the top-K mean inside a window.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Weight of BM25 in the fused score.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Window width in tokens.
    #[arg(long)]
    pub window: Option<usize>,
    /// Override K (default: floor(ln window) + 1).
    #[arg(long)]
    pub top_k: Option<usize>,
    #[arg(long)]
    pub stride: Option<usize>,
    /// Constant C in ln(co + C).
    #[arg(long = "co-constant")]
    pub c: Option<f64>,
    #[arg(long)]
    pub k1: Option<f64>,
    #[arg(long)]
    pub b: Option<f64>,
    /// BM25 pool size to rescore, or `full`.
    #[arg(long, value_parser = parse_depth)]
    pub rerank_depth: Option<RerankDepth>,
}

fn parse_depth(s: &str) -> Result<RerankDepth, String> {
    s.parse().map_err(|e: cssm_core::Error| e.to_string())
}

impl ModelArgs {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.mode {
            cfg.aggregation.mode = m.into();
        }
        set(&mut cfg.salience.alpha, self.alpha);
        set(&mut cfg.aggregation.beta, self.beta);
        set(&mut cfg.salience.window, self.window);
        if self.top_k.is_some() {
            cfg.salience.top_k = self.top_k;
        }
        set(&mut cfg.salience.stride, self.stride);
        set(&mut cfg.aggregation.c, self.c);
        set(&mut cfg.aggregation.bm25.k1, self.k1);
        set(&mut cfg.aggregation.bm25.b, self.b);
        set(&mut cfg.aggregation.rerank_depth, self.rerank_depth);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[derive(Debug, Args)]
pub struct RankArgs {
    #[arg(long, env = "CSSM_INDEX")]
    pub index: Option<PathBuf>,
    #[arg(long, env = "CSSM_EMBEDDINGS")]
    pub embeddings: Option<PathBuf>,
    #[arg(long, env = "CSSM_QUERIES")]
    pub queries: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub tag: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long, env = "CSSM_QRELS")]
    pub qrels: Option<PathBuf>,
    #[arg(long)]
    pub run: PathBuf,
    /// Also write the report here.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[arg(long, env = "CSSM_INDEX")]
    pub index: Option<PathBuf>,
    #[arg(long, env = "CSSM_EMBEDDINGS")]
    pub embeddings: Option<PathBuf>,
    #[arg(long)]
    pub query_text: String,
    #[arg(long)]
    pub doc_id: String,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Write the TSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    Alpha,
    Beta,
    Window,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long, value_enum)]
    pub param: SweepParam,
    /// `start:stop:step` (inclusive) or a comma-separated list.
    #[arg(long)]
    pub values: String,
    #[arg(long, env = "CSSM_INDEX")]
    pub index: Option<PathBuf>,
    #[arg(long, env = "CSSM_EMBEDDINGS")]
    pub embeddings: Option<PathBuf>,
    #[arg(long, env = "CSSM_QUERIES")]
    pub queries: Option<PathBuf>,
    #[arg(long, env = "CSSM_QRELS")]
    pub qrels: Option<PathBuf>,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Write the TSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Returns the flag value, else the config value, else a usage error.
pub fn require(flag: &Option<PathBuf>, config: &Option<PathBuf>, name: &str) -> Result<PathBuf, UsageError> {
    flag.clone()
        .or_else(|| config.clone())
        .ok_or_else(|| UsageError(format!("missing required --{name} (flag, config file or environment)")))
}
