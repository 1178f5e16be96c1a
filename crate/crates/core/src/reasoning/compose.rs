use crate::candidate::{CandidateInstruction, CandidateSource};
use crate::dataset::Sample;
use crate::prompt::PromptSpec;
use crate::reasoning::cot_augment;
use crate::task::TaskKind;
use crate::{CoreError, Result};

/// APE-selected instruction plus the CoT directive around one sample's input.
pub fn compose_ape_cot(
    task: &TaskKind,
    ape_result: &CandidateInstruction,
    sample: &Sample,
) -> Result<PromptSpec> {
    if ape_result.source != CandidateSource::Ape {
        return Err(CoreError::Precondition(format!(
            "APE-CoT needs an APE-selected instruction, got source {:?}",
            ape_result.source
        )));
    }
    if sample.task != *task {
        return Err(CoreError::Precondition(format!(
            "sample {} has task {}, expected {task}",
            sample.id, sample.task
        )));
    }
    Ok(cot_augment(&PromptSpec::new(&ape_result.text, &sample.input)))
}
