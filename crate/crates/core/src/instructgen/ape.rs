//! Automatic prompt engineering: an LLM proposes instructions from input/output
//! demonstrations; each proposal is scored by the log-probability the target model assigns
//! to reference outputs when conditioned on that instruction.

use std::collections::HashSet;

use codeprompt_llm::{LanguageModel, LogprobAggregation, SamplingParams, ScoreExt};
use codeprompt_metrics::Execution;
use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{parse_candidates, task_description};
use crate::candidate::{CandidateInstruction, CandidateSource};
use crate::dataset::Sample;
use crate::prompt::{render_prompt, PromptSpec, SECTION_SEPARATOR};
use crate::task::TaskKind;
use crate::{CoreError, Result};

/// Which references an APE score conditions on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceChoice {
    #[default]
    First,
    /// Mean over every reference of the sample.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApeConfig {
    pub n_candidates: usize,
    pub n_demos: usize,
    pub scoring_set_size: usize,
    /// Upper bound on proposal calls made while collecting `n_candidates`.
    pub max_proposal_calls: usize,
    pub aggregation: LogprobAggregation,
    pub references: ReferenceChoice,
}

impl Default for ApeConfig {
    fn default() -> Self {
        ApeConfig {
            n_candidates: 20,
            n_demos: 5,
            scoring_set_size: 50,
            max_proposal_calls: 4,
            aggregation: LogprobAggregation::Mean,
            references: ReferenceChoice::First,
        }
    }
}

impl ApeConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_candidates == 0 || self.scoring_set_size == 0 || self.max_proposal_calls == 0 {
            return Err(CoreError::Config(
                "n_candidates, scoring_set_size and max_proposal_calls must be positive".into(),
            ));
        }
        Ok(())
    }
}

pub fn ape_meta_prompt(task: &TaskKind, demos: &[(String, String)], n: usize) -> String {
    let mut out = format!(
        "Below are input/output pairs from a {}. The same instruction produced every output from its input.",
        task_description(task)
    );
    for (input, output) in demos {
        out.push_str(&format!("\n\nInput:\n{input}\nOutput:\n{output}"));
    }
    out.push_str(&format!(
        "\n\nWrite {n} distinct instructions that would lead a code model to produce each output \
         from its input. Put every instruction on its own line, wrapped as <INS>instruction</INS>."
    ));
    out
}

/// Distinct proposals (whitespace-normalized), at most `cfg.n_candidates`, each tagged
/// `ape` at iteration 0.
pub fn ape_generate_candidates(
    llm: &dyn LanguageModel,
    task: &TaskKind,
    demos: &[(String, String)],
    cfg: &ApeConfig,
    params: &SamplingParams,
) -> Result<Vec<CandidateInstruction>> {
    cfg.validate()?;
    let prompt = ape_meta_prompt(task, demos, cfg.n_candidates);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut raw_responses = Vec::new();
    for call in 0..cfg.max_proposal_calls {
        let p = SamplingParams {
            seed: params.seed.map(|s| s.wrapping_add(call as u64)),
            ..*params
        };
        let response = llm.complete(&prompt, &p)?;
        let before = out.len();
        for text in parse_candidates(&response.text) {
            if out.len() < cfg.n_candidates && seen.insert(text.clone()) {
                out.push(CandidateInstruction::new(text, CandidateSource::Ape, 0));
            }
        }
        raw_responses.push(response.text);
        // A call that adds nothing new means the proposer has saturated.
        if out.len() >= cfg.n_candidates || out.len() == before {
            break;
        }
    }
    if out.is_empty() {
        return Err(CoreError::Optimization(format!(
            "no parsable instructions in proposal response {:?}",
            raw_responses.join("\n---\n")
        )));
    }
    Ok(out)
}

fn sample_score(llm: &dyn LanguageModel, instruction: &str, sample: &Sample, cfg: &ApeConfig) -> Result<f64> {
    let prompt = render_prompt(&PromptSpec::new(instruction, &sample.input)) + SECTION_SEPARATOR;
    let targets: Vec<String> = match (cfg.references, sample.task.family()) {
        (_, crate::task::TaskFamily::ApiRecommendation) | (ReferenceChoice::First, _) => {
            sample.primary_target().into_iter().collect()
        }
        (ReferenceChoice::All, _) => sample.references.clone(),
    };
    if targets.is_empty() {
        return Err(CoreError::Precondition(format!(
            "sample {} has no reference",
            sample.id
        )));
    }
    let mut total = 0.0;
    for t in &targets {
        total += llm.score_target_logprob(&prompt, t, cfg.aggregation)?;
    }
    Ok(total / targets.len() as f64)
}

/// Mean per-sample log-probability score of `candidate` over `scoring_set`.
pub fn ape_score(
    llm: &dyn LanguageModel,
    candidate: &CandidateInstruction,
    scoring_set: &[Sample],
    cfg: &ApeConfig,
    exec: Execution,
) -> Result<f64> {
    let Some(first) = scoring_set.first() else {
        return Err(CoreError::Precondition("APE scoring set is empty".into()));
    };
    if let Some(s) = scoring_set.iter().find(|s| s.task != first.task) {
        return Err(CoreError::Precondition(format!(
            "scoring sample {} has task {}, expected {}",
            s.id, s.task, first.task
        )));
    }
    let results = exec.map(scoring_set, |s| sample_score(llm, &candidate.text, s, cfg));
    let mut failed = Vec::new();
    let mut first_error = None;
    let mut total = 0.0;
    for (s, r) in scoring_set.iter().zip(results) {
        match r {
            Ok(v) => total += v,
            Err(e) => {
                failed.push(s.id.clone());
                first_error.get_or_insert(e.to_string());
            }
        }
    }
    if !failed.is_empty() {
        return Err(CoreError::Partial {
            failed,
            message: first_error.unwrap_or_default(),
        });
    }
    Ok(total / scoring_set.len() as f64)
}

/// Highest score wins; ties go to the lexicographically smallest text.
pub fn ape_select(candidates: &[CandidateInstruction]) -> Result<CandidateInstruction> {
    let mut best: Option<(&CandidateInstruction, f64)> = None;
    for c in candidates {
        let s = c
            .score
            .filter(|s| s.is_finite())
            .ok_or_else(|| CoreError::Precondition(format!("candidate {:?} has no finite score", c.text)))?;
        best = match best {
            Some((b, bs)) if bs > s || (bs == s && b.text <= c.text) => Some((b, bs)),
            _ => Some((c, s)),
        };
    }
    best.map(|(c, _)| c.clone())
        .ok_or_else(|| CoreError::Precondition("no candidates to select from".into()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApeOutcome {
    pub best: CandidateInstruction,
    /// Every proposal with its score, in proposal order.
    pub candidates: Vec<CandidateInstruction>,
    pub demo_ids: Vec<String>,
    pub scoring_ids: Vec<String>,
}

/// Full APE pass: seeded demo draw from `train`, proposal, scoring on the first
/// `scoring_set_size` samples of `valid`, selection. `params.seed` (default 0) seeds both the
/// demo draw and the proposal calls.
pub fn run_ape(
    llm: &dyn LanguageModel,
    task: &TaskKind,
    train: &[Sample],
    valid: &[Sample],
    cfg: &ApeConfig,
    params: &SamplingParams,
    exec: Execution,
) -> Result<ApeOutcome> {
    cfg.validate()?;
    let seed = params.seed.unwrap_or(0);
    let n_demos = cfg.n_demos.min(train.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks = sample_indices(&mut rng, train.len(), n_demos).into_vec();
    picks.sort_unstable();
    let demos: Vec<(String, String)> = picks
        .iter()
        .filter_map(|&i| Some((train[i].input.clone(), train[i].primary_target()?)))
        .collect();
    if valid.len() < cfg.scoring_set_size {
        log::warn!(
            "scoring set size {} exceeds the {} validation samples; using all of them",
            cfg.scoring_set_size,
            valid.len()
        );
    }
    let scoring = &valid[..cfg.scoring_set_size.min(valid.len())];
    let params = SamplingParams {
        seed: Some(seed),
        ..*params
    };
    let proposals = ape_generate_candidates(llm, task, &demos, cfg, &params)?;
    let mut candidates = Vec::with_capacity(proposals.len());
    for c in proposals {
        let score = ape_score(llm, &c, scoring, cfg, exec)?;
        candidates.push(c.scored(score)?);
    }
    Ok(ApeOutcome {
        best: ape_select(&candidates)?,
        candidates,
        demo_ids: picks.iter().map(|&i| train[i].id.clone()).collect(),
        scoring_ids: scoring.iter().map(|s| s.id.clone()).collect(),
    })
}
