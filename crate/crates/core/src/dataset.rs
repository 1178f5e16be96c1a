//! Task samples and JSON Lines datasets.

use std::collections::HashSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::task::{TaskFamily, TaskKind};
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SampleRecord", into = "SampleRecord")]
pub struct Sample {
    pub id: String,
    pub task: TaskKind,
    pub input: String,
    pub references: Vec<String>,
    pub truth_apis: Vec<String>,
}

/// On-disk shape of one JSONL line.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleRecord {
    id: String,
    task: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lang: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source_lang: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    target_lang: Option<String>,
    input: String,
    #[serde(default)]
    references: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    truth_apis: Vec<String>,
}

impl TryFrom<SampleRecord> for Sample {
    type Error = CoreError;

    fn try_from(r: SampleRecord) -> Result<Self> {
        let task = TaskKind::from_parts(
            &r.task,
            r.lang.as_deref(),
            r.source_lang.as_deref(),
            r.target_lang.as_deref(),
        )?;
        Ok(Sample {
            id: r.id,
            task,
            input: r.input,
            references: r.references,
            truth_apis: r.truth_apis,
        })
    }
}

impl From<Sample> for SampleRecord {
    fn from(s: Sample) -> Self {
        let (lang, source_lang, target_lang) = match s.task {
            TaskKind::CodeSummarization { lang } => (Some(lang), None, None),
            TaskKind::CodeTranslation {
                source_lang,
                target_lang,
            } => (None, Some(source_lang), Some(target_lang)),
            TaskKind::ApiRecommendation => (None, None, None),
        };
        let name = |l: Option<codeprompt_metrics::Language>| l.map(|l| l.as_str().to_string());
        SampleRecord {
            id: s.id,
            task: s.task.family().as_str().to_string(),
            lang: name(lang),
            source_lang: name(source_lang),
            target_lang: name(target_lang),
            input: s.input,
            references: s.references,
            truth_apis: s.truth_apis,
        }
    }
}

impl Sample {
    /// The text an optimizer treats as the desired output: the first reference, or the
    /// newline-joined truth APIs for API recommendation.
    pub fn primary_target(&self) -> Option<String> {
        match self.task.family() {
            TaskFamily::ApiRecommendation => {
                (!self.truth_apis.is_empty()).then(|| self.truth_apis.join("\n"))
            }
            _ => self.references.first().cloned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub split: Split,
    pub samples: Vec<Sample>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub sample_id: Option<String>,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.sample_id {
            Some(id) => write!(f, "sample {id:?}: {}", self.rule),
            None => write!(f, "dataset: {}", self.rule),
        }
    }
}

impl Dataset {
    pub fn new(split: Split, samples: Vec<Sample>) -> Self {
        Dataset { split, samples }
    }

    pub fn parse_jsonl(text: &str, split: Split) -> Result<Self> {
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let sample: Sample = serde_json::from_str(line)
                .map_err(|e| CoreError::InvalidInput(format!("line {}: {e}", i + 1)))?;
            samples.push(sample);
        }
        Ok(Dataset { split, samples })
    }

    pub fn load_jsonl(path: impl AsRef<Path>, split: Split) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        Self::parse_jsonl(&text, split).map_err(|e| match e {
            CoreError::InvalidInput(m) => CoreError::InvalidInput(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for s in &self.samples {
            out.push_str(&serde_json::to_string(s).expect("samples serialize"));
            out.push('\n');
        }
        out
    }

    /// SHA-256 of the canonical JSONL form; stable across key order and whitespace in the
    /// source file.
    pub fn content_hash(&self) -> String {
        Sha256::digest(self.to_jsonl().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn task(&self) -> Option<TaskKind> {
        self.samples.first().map(|s| s.task)
    }

    /// The first `n` samples in dataset order.
    pub fn capped(&self, cap: Option<usize>) -> Dataset {
        let n = cap.unwrap_or(self.samples.len()).min(self.samples.len());
        Dataset {
            split: self.split,
            samples: self.samples[..n].to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut push = |id: Option<&str>, rule: String| {
        out.push(Violation {
            sample_id: id.map(str::to_string),
            rule,
        })
    };
    if d.samples.is_empty() {
        push(None, "dataset has no samples".into());
    }
    let first_task = d.task();
    let mut seen = HashSet::new();
    for s in &d.samples {
        let id = Some(s.id.as_str());
        if s.id.trim().is_empty() {
            push(id, "id is empty".into());
        }
        if !seen.insert(s.id.as_str()) {
            push(id, "duplicate id".into());
        }
        if let Err(e) = s.task.validate() {
            push(id, e.to_string());
        }
        if Some(s.task) != first_task {
            push(
                id,
                format!(
                    "task {} differs from dataset task {}",
                    s.task,
                    first_task.expect("non-empty")
                ),
            );
        }
        if s.input.trim().is_empty() {
            push(id, "input is empty".into());
        }
        match s.task.family() {
            TaskFamily::ApiRecommendation => {
                if s.truth_apis.is_empty() {
                    push(id, "truth_apis is empty for API recommendation".into());
                }
                if s.truth_apis.iter().any(|a| a.trim().is_empty()) {
                    push(id, "truth_apis contains a blank entry".into());
                }
            }
            family => {
                if s.references.is_empty() {
                    push(id, format!("references is empty for {family}"));
                }
                if s.references.iter().any(|r| r.trim().is_empty()) {
                    push(id, "references contains a blank entry".into());
                }
            }
        }
    }
    out
}
