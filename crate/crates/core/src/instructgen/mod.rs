//! Instruction optimizers: APE (propose, then rank by log-probability) and OPRO (iterative
//! meta-prompt search over a scored trajectory).

pub mod ape;
pub mod opro;
mod parse;

pub use ape::{
    ape_generate_candidates, ape_meta_prompt, ape_score, ape_select, run_ape, ApeConfig, ApeOutcome,
    ReferenceChoice,
};
pub use opro::{
    opro_meta_prompt, opro_optimize, opro_resume, OproAbort, OproBudget, OproConfig, OproStep, OproTrajectory,
};
pub use parse::parse_candidates;

use crate::task::TaskKind;

/// Human-readable task phrase used inside meta-prompts.
pub fn task_description(task: &TaskKind) -> String {
    match task {
        TaskKind::CodeSummarization { lang } => {
            format!(
                "code summarization task (write a natural-language summary of {} code)",
                lang.as_str()
            )
        }
        TaskKind::CodeTranslation {
            source_lang,
            target_lang,
        } => format!(
            "code translation task (translate {} code to {})",
            source_lang.as_str(),
            target_lang.as_str()
        ),
        TaskKind::ApiRecommendation => {
            "API recommendation task (list suitable APIs for a natural-language query)".to_string()
        }
    }
}
