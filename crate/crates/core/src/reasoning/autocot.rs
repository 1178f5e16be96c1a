//! Automatic chain-of-thought demonstrations: cluster the training questions, take the
//! question nearest each centroid, and let the model write its reasoning chain zero-shot.

use codeprompt_llm::{Embedder, LanguageModel, SamplingParams};
use codeprompt_metrics::Execution;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans, sq_dist};
use crate::dataset::Sample;
use crate::prompt::{render_prompt, Demonstration, PromptSpec, COT_DIRECTIVE};
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AutoCotConfig {
    pub k: usize,
    /// Representatives longer than this many whitespace tokens are skipped when possible.
    pub max_question_tokens: usize,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for AutoCotConfig {
    fn default() -> Self {
        AutoCotConfig {
            k: 8,
            max_question_tokens: 60,
            max_iterations: 100,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DemoExemplar {
    pub question: String,
    pub reasoning_chain: String,
    pub answer: String,
    pub cluster_id: usize,
}

impl From<&DemoExemplar> for Demonstration {
    fn from(d: &DemoExemplar) -> Self {
        Demonstration {
            question: d.question.clone(),
            reasoning: d.reasoning_chain.clone(),
            answer: d.answer.clone(),
        }
    }
}

/// A chosen representative: renumbered cluster id and the index of its question.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Representative {
    pub cluster_id: usize,
    pub index: usize,
    /// No member met the length limit; the nearest member was taken anyway.
    pub over_length: bool,
}

/// Clusters `embeddings` and picks one representative per non-empty cluster, in ascending
/// cluster order. Empty clusters are dropped and the rest renumbered densely.
pub fn select_representatives(
    embeddings: &[Vec<f64>],
    questions: &[&str],
    cfg: &AutoCotConfig,
) -> Result<(Vec<Representative>, Vec<usize>)> {
    let km = kmeans(embeddings, cfg.k, cfg.seed, cfg.max_iterations)?;
    let mut reps = Vec::with_capacity(cfg.k);
    for cluster in 0..cfg.k {
        let mut members = km.members(cluster);
        if members.is_empty() {
            log::warn!("k-means cluster {cluster} ended empty; continuing with fewer clusters");
            continue;
        }
        let centroid = &km.centroids[cluster];
        members.sort_by(|&a, &b| {
            sq_dist(&embeddings[a], centroid)
                .total_cmp(&sq_dist(&embeddings[b], centroid))
                .then(a.cmp(&b))
        });
        let fits = |&&i: &&usize| questions[i].split_whitespace().count() <= cfg.max_question_tokens;
        let (index, over_length) = match members.iter().find(fits) {
            Some(&i) => (i, false),
            None => {
                log::warn!("cluster {cluster} has no question within the length limit");
                (members[0], true)
            }
        };
        reps.push(Representative {
            cluster_id: reps.len(),
            index,
            over_length,
        });
    }
    Ok((reps, km.assignments))
}

/// Builds at most `cfg.k` exemplars from `train`. The exemplar answer is the sample's
/// reference output; the reasoning chain is the model's zero-shot CoT completion.
pub fn autocot_build(
    llm: &dyn LanguageModel,
    embedder: &dyn Embedder,
    instruction: &str,
    train: &[Sample],
    cfg: &AutoCotConfig,
    params: &SamplingParams,
    exec: Execution,
) -> Result<Vec<DemoExemplar>> {
    if cfg.k == 0 || train.len() < cfg.k {
        return Err(CoreError::Precondition(format!(
            "AutoCoT needs 1 <= k <= {} training questions, got k = {}",
            train.len(),
            cfg.k
        )));
    }
    let questions: Vec<String> = train.iter().map(|s| s.input.clone()).collect();
    let embeddings = embedder.embed(&questions)?;
    let refs: Vec<&str> = questions.iter().map(String::as_str).collect();
    let (reps, _) = select_representatives(&embeddings, &refs, cfg)?;

    let results = exec.map(&reps, |rep| -> Result<DemoExemplar> {
        let sample = &train[rep.index];
        let prompt =
            render_prompt(&PromptSpec::new(instruction, &sample.input).with_directive(COT_DIRECTIVE));
        let chain = llm.complete(&prompt, params)?.text.trim().to_string();
        if chain.is_empty() {
            return Err(CoreError::Optimization(format!(
                "empty reasoning chain for sample {}",
                sample.id
            )));
        }
        let answer = sample.primary_target().ok_or_else(|| {
            CoreError::Precondition(format!("sample {} has no reference answer", sample.id))
        })?;
        Ok(DemoExemplar {
            question: sample.input.clone(),
            reasoning_chain: chain,
            answer,
            cluster_id: rep.cluster_id,
        })
    });

    let mut done = Vec::new();
    let mut failed = Vec::new();
    let mut first_error = None;
    for (rep, r) in reps.iter().zip(results) {
        match r {
            Ok(e) => done.push(e),
            Err(e) => {
                failed.push(train[rep.index].id.clone());
                first_error.get_or_insert(e.to_string());
            }
        }
    }
    if !failed.is_empty() {
        let completed: Vec<String> = done.iter().map(|e| e.cluster_id.to_string()).collect();
        return Err(CoreError::Partial {
            failed,
            message: format!(
                "completed exemplars for clusters [{}]; first error: {}",
                completed.join(", "),
                first_error.unwrap_or_default()
            ),
        });
    }
    Ok(done)
}

/// Final AutoCoT prompt: instruction, demonstrations, input, then the CoT directive.
pub fn autocot_spec(instruction: &str, exemplars: &[DemoExemplar], input: &str) -> PromptSpec {
    PromptSpec::new(instruction, input)
        .with_demonstrations(exemplars.iter().map(Demonstration::from).collect())
        .with_directive(COT_DIRECTIVE)
}
