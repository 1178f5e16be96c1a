//! Structured prompts and their canonical text rendering.

use serde::{Deserialize, Serialize};

use crate::task::TaskKind;
use crate::{CoreError, Result};

/// Zero-shot reasoning trigger.
pub const COT_DIRECTIVE: &str = "Let's think step by step.";

pub const SUMMARIZATION_TEMPLATE: &str = "Generate comments for [LANG] code.";
pub const TRANSLATION_TEMPLATE: &str = "Translate the above [SOURCE] code to [TARGET].";
pub const API_RECOMMENDATION_TEMPLATE: &str = "Please recommend some suitable APIs for the given query.";

pub const SECTION_SEPARATOR: &str = "\n\n";

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Demonstration {
    pub question: String,
    pub reasoning: String,
    pub answer: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PromptSpec {
    pub instruction: String,
    pub input_payload: String,
    #[serde(default)]
    pub reasoning_directive: Option<String>,
    #[serde(default)]
    pub demonstrations: Vec<Demonstration>,
    #[serde(default)]
    pub plan: Option<String>,
}

impl PromptSpec {
    pub fn new(instruction: impl Into<String>, input_payload: impl Into<String>) -> Self {
        PromptSpec {
            instruction: instruction.into(),
            input_payload: input_payload.into(),
            ..Default::default()
        }
    }

    pub fn with_directive(mut self, directive: impl Into<String>) -> Self {
        self.reasoning_directive = Some(directive.into());
        self
    }

    pub fn with_demonstrations(mut self, demos: Vec<Demonstration>) -> Self {
        self.demonstrations = demos;
        self
    }

    pub fn with_plan(mut self, plan: impl Into<String>) -> Self {
        self.plan = Some(plan.into());
        self
    }

    pub fn render(&self) -> String {
        render_prompt(self)
    }
}

/// Trailing whitespace is stripped from every line and blank lines are dropped, so a
/// normalized section never contains [`SECTION_SEPARATOR`].
pub fn normalize_section(text: &str) -> String {
    text.lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join("\n")
}

fn render_demonstration(d: &Demonstration) -> String {
    let reasoning = d.reasoning.trim();
    let reasoning = reasoning
        .strip_prefix(COT_DIRECTIVE)
        .unwrap_or(reasoning)
        .trim_start();
    format!(
        "Q: {}\nA: {COT_DIRECTIVE} {}\nAnswer: {}",
        d.question.trim(),
        reasoning,
        d.answer.trim()
    )
}

/// Sections in order: instruction, demonstrations, input payload, plan, reasoning
/// directive. Empty sections are omitted; the rest are joined by one blank line.
pub fn render_prompt(spec: &PromptSpec) -> String {
    let mut sections = Vec::with_capacity(4 + spec.demonstrations.len());
    sections.push(normalize_section(&spec.instruction));
    sections.extend(
        spec.demonstrations
            .iter()
            .map(|d| normalize_section(&render_demonstration(d))),
    );
    sections.push(normalize_section(&spec.input_payload));
    sections.extend(spec.plan.as_deref().map(normalize_section));
    sections.extend(spec.reasoning_directive.as_deref().map(normalize_section));
    sections.retain(|s| !s.is_empty());
    sections.join(SECTION_SEPARATOR)
}

/// Substitutes `[SLOT]` markers; any marker left unfilled is an error.
pub fn fill_template(template: &str, slots: &[(&str, &str)]) -> Result<String> {
    let mut out = template.to_string();
    for (slot, value) in slots {
        out = out.replace(&format!("[{slot}]"), value);
    }
    if let Some(start) = out.find('[') {
        let marker: String = out[start..].chars().take_while(|c| *c != ']').collect();
        return Err(CoreError::InvalidInput(format!(
            "template slot {marker}] left unfilled"
        )));
    }
    Ok(out)
}

pub fn basic_template(task: &TaskKind) -> &'static str {
    match task {
        TaskKind::CodeSummarization { .. } => SUMMARIZATION_TEMPLATE,
        TaskKind::CodeTranslation { .. } => TRANSLATION_TEMPLATE,
        TaskKind::ApiRecommendation => API_RECOMMENDATION_TEMPLATE,
    }
}

pub fn instantiate_basic_prompt(task: &TaskKind) -> Result<String> {
    task.validate()?;
    let template = basic_template(task);
    match task {
        TaskKind::CodeSummarization { lang } => fill_template(template, &[("LANG", lang.as_str())]),
        TaskKind::CodeTranslation {
            source_lang,
            target_lang,
        } => fill_template(
            template,
            &[("SOURCE", source_lang.as_str()), ("TARGET", target_lang.as_str())],
        ),
        TaskKind::ApiRecommendation => fill_template(template, &[]),
    }
}

/// Template instantiation from raw language identifiers, as read from configs and flags.
pub fn instantiate_basic_prompt_named(
    family: &str,
    lang: Option<&str>,
    source_lang: Option<&str>,
    target_lang: Option<&str>,
) -> Result<String> {
    instantiate_basic_prompt(&TaskKind::from_parts(family, lang, source_lang, target_lang)?)
}
