//! Language-model access for prompt optimization.
//!
//! [`LanguageModel`] is the single seam every optimizer talks through. Two backends ship:
//! [`OpenAiClient`] for any OpenAI-compatible server and [`MockModel`], a scripted,
//! bit-deterministic stand-in that makes every algorithm testable offline.

mod embed;
mod error;
mod gate;
pub mod mock;
mod model;
pub mod openai;
mod params;

pub use embed::{cosine, Embedder, HashedBagOfWords, DEFAULT_EMBEDDING_DIM};
pub use error::LlmError;
pub use gate::InFlightGate;
pub use mock::{prompt_hash, MockModel, MockRule, MockScript, ScriptedResponse};
pub use model::{ensure_prompt, LanguageModel, LogprobAggregation, ScoreExt};
pub use openai::{OpenAiClient, ProviderConfig};
pub use params::{Completion, FinishReason, SamplingParams, TokenLogprob};

pub type Result<T, E = LlmError> = std::result::Result<T, E>;
