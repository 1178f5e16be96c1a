//! Automated prompt generation for code models.
//!
//! * Domain model: [`TaskKind`], [`PromptSpec`] and its renderer, [`Sample`]/[`Dataset`],
//!   [`CandidateInstruction`].
//! * [`instructgen`]: APE and OPRO instruction search.
//! * [`reasoning`]: CoT, AutoCoT, Self-Plan and the APE-CoT composer.
//! * [`harness`]: repeated runs, statistics and reports.
//!
//! Batch work honours [`Execution`]; with the `parallel` feature disabled every strategy
//! runs sequentially and produces identical results.

pub mod candidate;
pub mod dataset;
mod error;
pub mod harness;
pub mod instructgen;
pub mod prompt;
pub mod reasoning;
pub mod task;
pub mod tokens;

pub use candidate::{CandidateInstruction, CandidateSource};
pub use codeprompt_metrics::Execution;
pub use dataset::{validate_dataset, Dataset, Sample, Split, Violation};
pub use error::{CoreError, Result};
pub use prompt::{instantiate_basic_prompt, render_prompt, Demonstration, PromptSpec, COT_DIRECTIVE};
pub use task::{TaskFamily, TaskKind};
pub use tokens::{count_instruction_tokens, Tokenizer};
