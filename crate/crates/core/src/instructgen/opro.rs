//! Optimization by prompting: the model sees its best (instruction, score) pairs so far,
//! worst first, and proposes new instructions; the loop stops at the step budget or when
//! the best score stagnates for `patience` consecutive steps.

use std::collections::HashSet;
use std::fmt;

use codeprompt_llm::{LanguageModel, SamplingParams};
use serde::{Deserialize, Serialize};

use super::{parse_candidates, task_description};
use crate::candidate::{normalize_whitespace, CandidateInstruction, CandidateSource};
use crate::task::TaskKind;
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OproBudget {
    pub max_steps: u32,
    pub candidates_per_step: usize,
    pub patience: u32,
}

impl Default for OproBudget {
    fn default() -> Self {
        OproBudget {
            max_steps: 10,
            candidates_per_step: 4,
            patience: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct OproConfig {
    #[serde(flatten)]
    pub budget: OproBudget,
    pub meta_prompt_top_k: usize,
    /// Input/output examples shown in the meta-prompt.
    pub n_exemplars: usize,
    /// Size of the validation subset the evaluation metric runs on.
    pub eval_set_size: usize,
}

impl Default for OproConfig {
    fn default() -> Self {
        OproConfig {
            budget: OproBudget::default(),
            meta_prompt_top_k: 8,
            n_exemplars: 3,
            eval_set_size: 50,
        }
    }
}

impl OproConfig {
    pub fn validate(&self) -> Result<()> {
        if self.budget.candidates_per_step == 0 || self.budget.patience == 0 || self.meta_prompt_top_k == 0 {
            return Err(CoreError::Config(
                "candidates_per_step, patience and meta_prompt_top_k must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One trajectory line. Step 0 is the seed instruction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OproStep {
    pub step: u32,
    pub instruction: String,
    /// `None` for discarded candidates and for steps that produced no candidate.
    pub score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OproTrajectory {
    pub steps: Vec<OproStep>,
    pub best_so_far: CandidateInstruction,
    pub meta_prompt_top_k: usize,
}

impl OproTrajectory {
    fn start(seed_instruction: &str, score: f64, top_k: usize) -> Result<Self> {
        let best = CandidateInstruction::manual(seed_instruction).scored(score)?;
        Ok(OproTrajectory {
            steps: vec![OproStep {
                step: 0,
                instruction: best.text.clone(),
                score: Some(score),
                warning: None,
            }],
            best_so_far: best,
            meta_prompt_top_k: top_k,
        })
    }

    pub fn steps_completed(&self) -> u32 {
        self.steps.iter().map(|s| s.step).max().unwrap_or(0)
    }

    /// Steps since `best_so_far` last improved.
    pub fn stagnant_steps(&self) -> u32 {
        self.steps_completed() - self.best_so_far.iteration
    }

    pub fn scored(&self) -> impl Iterator<Item = (&OproStep, f64)> {
        self.steps.iter().filter_map(|s| s.score.map(|v| (s, v)))
    }

    /// The `k` best scored pairs, rendered worst first.
    pub fn top_k(&self, k: usize) -> Vec<(&str, f64)> {
        let mut pairs: Vec<(&str, f64)> = self.scored().map(|(s, v)| (s.instruction.as_str(), v)).collect();
        // Stable sort keeps earlier steps ahead among equal scores.
        pairs.sort_by(|a, b| b.1.total_cmp(&a.1));
        pairs.truncate(k);
        pairs.reverse();
        pairs
    }

    fn record(&mut self, step: u32, instruction: String, score: f64) -> bool {
        self.steps.push(OproStep {
            step,
            instruction: instruction.clone(),
            score: Some(score),
            warning: None,
        });
        let improved = score > self.best_so_far.score.expect("best is scored");
        if improved {
            self.best_so_far = CandidateInstruction {
                text: instruction,
                score: Some(score),
                source: CandidateSource::Opro,
                iteration: step,
            };
        }
        improved
    }

    pub fn to_jsonl(&self) -> String {
        self.steps
            .iter()
            .map(|s| serde_json::to_string(s).expect("steps serialize") + "\n")
            .collect()
    }

    /// Rebuilds a trajectory from its step lines; the best is the earliest maximum.
    pub fn from_jsonl(text: &str, meta_prompt_top_k: usize) -> Result<Self> {
        let mut steps = Vec::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let step: OproStep = serde_json::from_str(line)
                .map_err(|e| CoreError::InvalidInput(format!("trajectory line {}: {e}", i + 1)))?;
            steps.push(step);
        }
        let seed = steps
            .iter()
            .find(|s| s.step == 0 && s.score.is_some())
            .ok_or_else(|| CoreError::InvalidInput("trajectory has no scored seed step".into()))?;
        let mut t =
            OproTrajectory::start(&seed.instruction, seed.score.expect("checked"), meta_prompt_top_k)?;
        for s in steps.into_iter().filter(|s| s.step > 0) {
            match s.score {
                Some(v) => {
                    t.record(s.step, s.instruction, v);
                }
                None => t.steps.push(s),
            }
        }
        Ok(t)
    }
}

pub fn opro_meta_prompt(
    task: &TaskKind,
    trajectory: &OproTrajectory,
    exemplars: &[(String, String)],
    n_new: usize,
) -> String {
    let mut out = format!(
        "Your task is to write an instruction for a {}. Below are earlier instructions with \
         their scores, ordered from lowest to highest score. Higher scores are better.",
        task_description(task)
    );
    for (text, score) in trajectory.top_k(trajectory.meta_prompt_top_k) {
        out.push_str(&format!("\n\nInstruction: <INS>{text}</INS>\nScore: {score:.4}"));
    }
    if !exemplars.is_empty() {
        out.push_str("\n\nExamples of the task:");
        for (input, output) in exemplars {
            out.push_str(&format!("\n\nInput:\n{input}\nOutput:\n{output}"));
        }
    }
    out.push_str(&format!(
        "\n\nWrite {n_new} new instructions that differ from every instruction above and aim \
         for a higher score. Put each on its own line, wrapped as <INS>instruction</INS>."
    ));
    out
}

/// Optimization stopped early; `trajectory` holds every step evaluated before the failure
/// (absent when the seed itself could not be scored).
#[derive(Debug)]
pub struct OproAbort {
    pub trajectory: Option<Box<OproTrajectory>>,
    pub error: CoreError,
}

impl fmt::Display for OproAbort {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.trajectory.as_ref().map_or(0, |t| t.steps.len());
        write!(f, "OPRO aborted after {n} trajectory entries: {}", self.error)
    }
}

impl std::error::Error for OproAbort {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<OproAbort> for CoreError {
    fn from(a: OproAbort) -> Self {
        a.error
    }
}

pub type EvalFn<'a> = dyn FnMut(&str) -> Result<f64> + 'a;

pub fn opro_optimize(
    llm: &dyn LanguageModel,
    task: &TaskKind,
    seed_instruction: &str,
    exemplars: &[(String, String)],
    eval_fn: &mut EvalFn<'_>,
    cfg: &OproConfig,
    params: &SamplingParams,
) -> std::result::Result<(CandidateInstruction, OproTrajectory), OproAbort> {
    let abort = |error| OproAbort {
        trajectory: None,
        error,
    };
    cfg.validate().map_err(abort)?;
    let seed_instruction = normalize_whitespace(seed_instruction);
    let score = eval_fn(&seed_instruction).map_err(abort)?;
    if !score.is_finite() {
        return Err(abort(CoreError::InvalidInput(format!(
            "seed instruction scored {score}"
        ))));
    }
    let trajectory = OproTrajectory::start(&seed_instruction, score, cfg.meta_prompt_top_k).map_err(abort)?;
    opro_resume(llm, task, trajectory, exemplars, eval_fn, cfg, params)
}

/// Continues a (possibly reloaded) trajectory under the same budget; steps already taken
/// count against `max_steps`, and trailing stagnant steps count against `patience`.
pub fn opro_resume(
    llm: &dyn LanguageModel,
    task: &TaskKind,
    mut trajectory: OproTrajectory,
    exemplars: &[(String, String)],
    eval_fn: &mut EvalFn<'_>,
    cfg: &OproConfig,
    params: &SamplingParams,
) -> std::result::Result<(CandidateInstruction, OproTrajectory), OproAbort> {
    if let Err(error) = cfg.validate() {
        return Err(OproAbort {
            trajectory: Some(Box::new(trajectory)),
            error,
        });
    }
    let budget = cfg.budget;
    let mut stagnant = trajectory.stagnant_steps();
    let mut step = trajectory.steps_completed();
    while step < budget.max_steps && stagnant < budget.patience {
        step += 1;
        let meta = opro_meta_prompt(task, &trajectory, exemplars, budget.candidates_per_step);
        let p = SamplingParams {
            seed: params.seed.map(|s| s.wrapping_add(u64::from(step))),
            ..*params
        };
        let response = match llm.complete(&meta, &p) {
            Ok(r) => r,
            Err(e) => {
                return Err(OproAbort {
                    trajectory: Some(Box::new(trajectory)),
                    error: e.into(),
                })
            }
        };
        let known: HashSet<String> = trajectory.steps.iter().map(|s| s.instruction.clone()).collect();
        let fresh: Vec<String> = parse_candidates(&response.text)
            .into_iter()
            .filter(|c| !known.contains(c))
            .take(budget.candidates_per_step)
            .collect();
        if fresh.is_empty() {
            log::warn!("OPRO step {step}: no new parsable instructions");
            trajectory.steps.push(OproStep {
                step,
                instruction: String::new(),
                score: None,
                warning: Some("no new parsable instructions".into()),
            });
        }
        let mut improved = false;
        for text in fresh {
            match eval_fn(&text) {
                Ok(score) if score.is_finite() => improved |= trajectory.record(step, text, score),
                Ok(score) => {
                    log::warn!("OPRO step {step}: discarding {text:?} with score {score}");
                    trajectory.steps.push(OproStep {
                        step,
                        instruction: text,
                        score: None,
                        warning: Some(format!("discarded non-finite score {score}")),
                    });
                }
                Err(error) => {
                    return Err(OproAbort {
                        trajectory: Some(Box::new(trajectory)),
                        error,
                    })
                }
            }
        }
        stagnant = if improved { 0 } else { stagnant + 1 };
    }
    Ok((trajectory.best_so_far.clone(), trajectory))
}
