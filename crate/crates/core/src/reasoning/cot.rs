use crate::prompt::{PromptSpec, COT_DIRECTIVE};

/// Sets the reasoning directive to the zero-shot trigger; idempotent.
pub fn cot_augment(spec: &PromptSpec) -> PromptSpec {
    PromptSpec {
        reasoning_directive: Some(COT_DIRECTIVE.to_string()),
        ..spec.clone()
    }
}
