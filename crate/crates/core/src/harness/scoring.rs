//! Turning a model output into per-sample metric values.

use codeprompt_metrics::{
    bleu4, codebleu, extract_apis, first_relevant_rank, meteor_lite, nl_tokens, rouge_l, CodeBleuWeights,
    MatchMode,
};
use serde::{Deserialize, Serialize};

use crate::dataset::Sample;
use crate::task::{TaskFamily, TaskKind};
use crate::Result;

/// Report columns per task family, in table order.
pub fn metric_columns(family: TaskFamily) -> &'static [&'static str] {
    match family {
        TaskFamily::ApiRecommendation => &["SR@1", "SR@3", "SR@5", "MRR"],
        TaskFamily::CodeTranslation => &["CB", "SM", "DM", "BLEU"],
        TaskFamily::CodeSummarization => &["BLEU", "ROUGE-L", "METEOR"],
    }
}

/// The metric instruction search optimizes for each family.
pub fn headline_metric(family: TaskFamily) -> &'static str {
    match family {
        TaskFamily::CodeTranslation => "CB",
        TaskFamily::CodeSummarization => "ROUGE-L",
        TaskFamily::ApiRecommendation => "MRR",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricValue {
    pub metric: String,
    pub value: f64,
    #[serde(default)]
    pub degraded_flags: Vec<String>,
}

fn last_fenced_block(text: &str) -> Option<&str> {
    let mut last = None;
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        // Skip the info string (language tag) on the opening fence line.
        let body_start = after.find('\n').map_or(after.len(), |i| i + 1);
        let body = &after[body_start..];
        let Some(close) = body.find("```") else { break };
        last = Some(&body[..close]);
        rest = &body[close + 3..];
    }
    last
}

/// The part of a model output that gets scored: text after the last `Answer:` marker when
/// present, and for translation the last fenced code block when one exists.
pub fn extract_answer(task: &TaskKind, output: &str) -> String {
    let tail = output
        .rfind("Answer:")
        .map_or(output, |i| &output[i + "Answer:".len()..]);
    let tail = match task.family() {
        TaskFamily::CodeTranslation => last_fenced_block(tail).unwrap_or(tail),
        _ => tail,
    };
    tail.trim().to_string()
}

/// Metric values for one sample, in [`metric_columns`] order.
pub fn score_sample(sample: &Sample, answer: &str, case_insensitive_apis: bool) -> Result<Vec<MetricValue>> {
    let plain = |metric: &str, value: f64| MetricValue {
        metric: metric.to_string(),
        value,
        degraded_flags: Vec::new(),
    };
    Ok(match sample.task {
        TaskKind::ApiRecommendation => {
            let mode = if case_insensitive_apis {
                MatchMode::CaseInsensitive
            } else {
                MatchMode::Exact
            };
            let rank = first_relevant_rank(&extract_apis(answer), &sample.truth_apis, mode);
            let hit = |k: usize| if rank.is_some_and(|r| r <= k) { 1.0 } else { 0.0 };
            vec![
                plain("SR@1", hit(1)),
                plain("SR@3", hit(3)),
                plain("SR@5", hit(5)),
                plain("MRR", rank.map_or(0.0, |r| 1.0 / r as f64)),
            ]
        }
        TaskKind::CodeTranslation { target_lang, .. } => {
            // Best reference by CodeBLEU; the first wins ties.
            let mut best = None;
            for reference in &sample.references {
                let s = codebleu(answer, reference, target_lang, &CodeBleuWeights::default())?;
                if best
                    .as_ref()
                    .is_none_or(|b: &codeprompt_metrics::CodeBleuScore| s.score > b.score)
                {
                    best = Some(s);
                }
            }
            let s = best.ok_or_else(|| {
                crate::CoreError::Precondition(format!("sample {} has no reference", sample.id))
            })?;
            let with_flags = |metric: &str, value: f64| MetricValue {
                metric: metric.to_string(),
                value,
                degraded_flags: s.flags.clone(),
            };
            vec![
                with_flags("CB", s.score),
                with_flags("SM", s.components.syntax),
                with_flags("DM", s.dataflow_match),
                with_flags("BLEU", s.components.ngram),
            ]
        }
        TaskKind::CodeSummarization { .. } => {
            let cand = nl_tokens(answer);
            let refs: Vec<Vec<String>> = sample.references.iter().map(|r| nl_tokens(r)).collect();
            let best = |f: &dyn Fn(&[String], &[String]) -> f64| {
                refs.iter().map(|r| f(&cand, r)).fold(0.0, f64::max)
            };
            vec![
                plain("BLEU", bleu4(&cand, &refs)),
                plain("ROUGE-L", best(&|c, r| rouge_l(c, r))),
                plain("METEOR", best(&|c, r| meteor_lite(c, r))),
            ]
        }
    })
}
