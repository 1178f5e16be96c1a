//! Two-stage planning: elicit a numbered high-level plan, then generate the answer
//! conditioned on instruction, input and plan.

use codeprompt_llm::{LanguageModel, SamplingParams};
use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::prompt::{render_prompt, PromptSpec};
use crate::Result;

pub const DEFAULT_MAX_PLAN_STEPS: usize = 8;

pub const PLAN_REQUEST: &str = "Before answering, write a numbered high-level plan for the task above. \
Outline the overall structure only, without implementation details. Output only the plan, one step per line.";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<String>,
    pub source_sample_id: String,
    /// The stage-1 output had no numbered lines and became a single raw step.
    #[serde(default)]
    pub degraded: bool,
}

impl Plan {
    pub fn render(&self) -> String {
        let mut out = String::from("Plan:");
        for (i, s) in self.steps.iter().enumerate() {
            out.push_str(&format!("\n{}. {s}", i + 1));
        }
        out
    }
}

fn numbered_step(line: &str) -> Option<&str> {
    let t = line.trim_start();
    let digits = t.bytes().take_while(u8::is_ascii_digit).count();
    if digits == 0 {
        return None;
    }
    let rest = t[digits..].strip_prefix(['.', ')', ':'])?;
    let step = rest.trim();
    (!step.is_empty()).then_some(step)
}

/// Numbered lines become steps (at most `max_steps`); output without any becomes one
/// degraded step holding the trimmed raw text.
pub fn parse_plan(text: &str, sample_id: &str, max_steps: usize) -> Plan {
    let steps: Vec<String> = text
        .lines()
        .filter_map(numbered_step)
        .map(str::to_string)
        .collect();
    if steps.is_empty() {
        return Plan {
            steps: vec![text.trim().to_string()],
            source_sample_id: sample_id.to_string(),
            degraded: true,
        };
    }
    if steps.len() > max_steps {
        log::warn!(
            "plan for {sample_id} has {} steps; keeping the first {max_steps}",
            steps.len()
        );
    }
    Plan {
        steps: steps.into_iter().take(max_steps.max(1)).collect(),
        source_sample_id: sample_id.to_string(),
        degraded: false,
    }
}

pub fn stage_one_spec(sample: &Sample, instruction: &str) -> PromptSpec {
    PromptSpec::new(instruction, &sample.input).with_directive(PLAN_REQUEST)
}

pub fn stage_two_spec(sample: &Sample, instruction: &str, plan: &Plan) -> PromptSpec {
    PromptSpec::new(instruction, &sample.input).with_plan(plan.render())
}

/// Returns the plan, the final model output and the stage-2 prompt.
pub fn selfplan_run(
    llm: &dyn LanguageModel,
    sample: &Sample,
    instruction: &str,
    params: &SamplingParams,
    max_steps: usize,
) -> Result<(Plan, String, String)> {
    let stage_one = render_prompt(&stage_one_spec(sample, instruction));
    let plan_text = llm.complete(&stage_one, params)?.text;
    let plan = parse_plan(&plan_text, &sample.id, max_steps);
    let stage_two = render_prompt(&stage_two_spec(sample, instruction, &plan));
    let output = llm.complete(&stage_two, params)?.text;
    Ok((plan, output, stage_two))
}
