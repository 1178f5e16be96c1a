//! Evaluation metrics for code intelligence tasks.
//!
//! Covers the three task families the prompt-generation harness scores:
//!
//! * code summarization: [`bleu4`], [`rouge_l`], [`meteor_lite`] over natural-language tokens;
//! * code translation: [`codebleu`] with its four components ([`bleu4`] on lexer tokens,
//!   keyword-weighted n-gram match, [`syntax_match`], [`dataflow_match`]);
//! * API recommendation: [`extract_apis`], [`success_rate_at_k`], [`mrr`].
//!
//! Every metric is a pure function returning a value in `[0, 1]`.

pub mod api;
pub mod codebleu;
pub mod dataflow;
mod error;
pub mod exec;
pub mod lang;
pub mod meteor;
pub mod ngram;
pub mod retrieval;
pub mod rouge;
pub mod subtree;
pub mod syntax;
pub mod text;

pub use api::{extract_apis, normalize_api, ApiPrediction, DEFAULT_PREDICTION_CAP};
pub use codebleu::{codebleu, CodeBleuScore, CodeBleuWeights};
pub use dataflow::{dataflow_match, extract_dataflow, DataflowEdge, Position, Relation};
pub use error::MetricError;
pub use exec::Execution;
pub use lang::Language;
pub use meteor::meteor_lite;
pub use ngram::{bleu4, weighted_bleu4};
pub use retrieval::{first_relevant_rank, mrr, success_rate_at_k, MatchMode};
pub use rouge::rouge_l;
pub use subtree::syntax_match;
pub use syntax::{parse_code, NodeId, SyntaxNode, SyntaxTree};
pub use text::{code_tokens, nl_tokens, whitespace_tokens};

pub type Result<T, E = MetricError> = std::result::Result<T, E>;
