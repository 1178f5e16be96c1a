use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use codeprompt_core::harness::{Method, ReportFormat};

#[derive(Debug, Parser)]
#[command(
    name = "codeprompt",
    version,
    about = "Automated prompt generation experiments for code tasks"
)]
pub struct Cli {
    /// Experiment configuration (TOML); flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Scripted mock model (JSON) used instead of the configured provider.
    #[arg(long, global = true, value_name = "SCRIPT")]
    pub mock: Option<PathBuf>,

    /// Base seed; run i uses seed + i.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Parent directory for run directories.
    #[arg(long, global = true, value_name = "DIR", default_value = "runs")]
    pub out_dir: PathBuf,

    /// Evaluate samples one at a time instead of in parallel.
    #[arg(long, global = true)]
    pub sequential: bool,

    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check dataset files against the sample schema and invariants.
    Validate(ValidateArgs),
    /// Search for an instruction with APE or OPRO.
    Optimize(OptimizeArgs),
    /// Run repeated evaluations of one method and write reports.
    Evaluate(EvaluateArgs),
    /// Paired per-sample comparison of two evaluation run directories.
    Compare(CompareArgs),
    /// Re-aggregate run directories from their per-sample records into one report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct TaskArgs {
    /// api-rec, translation or summarization.
    #[arg(long)]
    pub task: Option<String>,

    /// Summarization language (default python).
    #[arg(long)]
    pub lang: Option<String>,

    /// Translation source language (default python).
    #[arg(long)]
    pub source_lang: Option<String>,

    /// Translation target language (default java).
    #[arg(long)]
    pub target_lang: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Directory holding train.jsonl, valid.jsonl and test.jsonl.
    #[arg(long, value_name = "DIR")]
    pub data_dir: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub train: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub valid: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub test: Option<PathBuf>,

    /// Use only the first N test samples.
    #[arg(long, value_name = "N")]
    pub sample_cap: Option<usize>,

    /// Match API names case-insensitively.
    #[arg(long)]
    pub case_insensitive_apis: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SearchArgs {
    /// APE: number of candidate instructions.
    #[arg(long)]
    pub n_candidates: Option<usize>,

    /// APE: validation samples used for log-probability scoring.
    #[arg(long)]
    pub scoring_set_size: Option<usize>,

    /// OPRO: optimization steps.
    #[arg(long)]
    pub max_steps: Option<u32>,

    /// OPRO: stop after this many steps without improvement.
    #[arg(long)]
    pub patience: Option<u32>,

    /// OPRO: new instructions requested per step.
    #[arg(long)]
    pub candidates_per_step: Option<usize>,

    /// OPRO: validation samples used by the evaluation metric.
    #[arg(long)]
    pub eval_set_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub task: TaskArgs,

    #[command(flatten)]
    pub data: DataArgs,

    /// Further dataset files to check.
    #[arg(value_name = "FILE")]
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// ape or opro.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,

    #[command(flatten)]
    pub task: TaskArgs,

    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub search: SearchArgs,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// basic, ape, opro, cot, autocot, selfplan or ape_cot.
    #[arg(long, value_parser = parse_method)]
    pub method: Option<Method>,

    #[command(flatten)]
    pub task: TaskArgs,

    #[command(flatten)]
    pub data: DataArgs,

    #[command(flatten)]
    pub search: SearchArgs,

    /// Number of seeded runs.
    #[arg(long)]
    pub repeats: Option<u32>,

    /// Fixed instruction; skips instruction search.
    #[arg(long, conflicts_with = "instruction_file")]
    pub instruction: Option<String>,

    /// Read the fixed instruction from a file, e.g. an optimize result.
    #[arg(long, value_name = "FILE")]
    pub instruction_file: Option<PathBuf>,

    /// AutoCoT: number of demonstration clusters.
    #[arg(long)]
    pub k: Option<usize>,

    /// Self-Plan: maximum plan steps.
    #[arg(long)]
    pub max_plan_steps: Option<usize>,

    /// Use the sample standard deviation instead of the population one.
    #[arg(long)]
    pub sample_std: bool,

    /// Embed AutoCoT questions with the provider instead of the built-in hashed embedder.
    #[arg(long)]
    pub provider_embeddings: bool,

    /// Format printed to stdout; all formats are written to the run directory.
    #[arg(long, default_value = "markdown", value_parser = parse_format)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Baseline run directory.
    pub run_a: PathBuf,

    /// Run directory compared against the baseline.
    pub run_b: PathBuf,

    #[arg(long, default_value = "markdown", value_parser = parse_format)]
    pub format: ReportFormat,

    /// Write the comparison here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directories; the first is the baseline of the token table.
    #[arg(required = true)]
    pub runs: Vec<PathBuf>,

    #[arg(long, default_value = "markdown", value_parser = parse_format)]
    pub format: ReportFormat,

    /// Add the average-instruction-token table.
    #[arg(long)]
    pub tokens: bool,

    /// Tokenizer for the token table: whitespace or word-punct.
    #[arg(long, default_value = "whitespace")]
    pub tokenizer: String,

    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub output: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: codeprompt_core::CoreError| e.to_string())
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: codeprompt_core::CoreError| e.to_string())
}
