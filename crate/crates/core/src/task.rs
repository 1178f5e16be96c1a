use std::fmt;

use codeprompt_llm::SamplingParams;
use codeprompt_metrics::Language;
use serde::{Deserialize, Serialize};

use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TaskKind {
    CodeSummarization {
        lang: Language,
    },
    CodeTranslation {
        source_lang: Language,
        target_lang: Language,
    },
    ApiRecommendation,
}

/// Task identity without language parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskFamily {
    CodeTranslation,
    CodeSummarization,
    ApiRecommendation,
}

impl TaskFamily {
    pub const ALL: [TaskFamily; 3] = [
        TaskFamily::CodeTranslation,
        TaskFamily::CodeSummarization,
        TaskFamily::ApiRecommendation,
    ];

    /// Accepts the canonical names plus short aliases (`translation`, `summarization`,
    /// `api-rec`).
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "code_translation" | "translation" => Ok(TaskFamily::CodeTranslation),
            "code_summarization" | "summarization" => Ok(TaskFamily::CodeSummarization),
            "api_recommendation" | "api-rec" | "api_rec" | "api-recommendation" => {
                Ok(TaskFamily::ApiRecommendation)
            }
            other => Err(CoreError::InvalidInput(format!("unknown task {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TaskFamily::CodeTranslation => "code_translation",
            TaskFamily::CodeSummarization => "code_summarization",
            TaskFamily::ApiRecommendation => "api_recommendation",
        }
    }

    pub fn short_name(self) -> &'static str {
        match self {
            TaskFamily::CodeTranslation => "translation",
            TaskFamily::CodeSummarization => "summarization",
            TaskFamily::ApiRecommendation => "api-rec",
        }
    }

    pub fn default_max_tokens(self) -> u32 {
        match self {
            TaskFamily::CodeTranslation => 256,
            TaskFamily::CodeSummarization => 512,
            TaskFamily::ApiRecommendation => 128,
        }
    }

    pub fn sampling_params(self) -> SamplingParams {
        SamplingParams::default().with_max_tokens(self.default_max_tokens())
    }
}

impl fmt::Display for TaskFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn parse_language(id: &str) -> Result<Language> {
    id.parse()
        .map_err(|_| CoreError::InvalidInput(format!("unknown language identifier {id:?}")))
}

impl TaskKind {
    pub fn summarization(lang: Language) -> Self {
        TaskKind::CodeSummarization { lang }
    }

    pub fn translation(source_lang: Language, target_lang: Language) -> Result<Self> {
        if source_lang == target_lang {
            return Err(CoreError::InvalidInput(format!(
                "translation source and target are both {}",
                source_lang.as_str()
            )));
        }
        Ok(TaskKind::CodeTranslation {
            source_lang,
            target_lang,
        })
    }

    /// Builds a task from its textual parts; unused language arguments are ignored.
    pub fn from_parts(
        family: &str,
        lang: Option<&str>,
        source_lang: Option<&str>,
        target_lang: Option<&str>,
    ) -> Result<Self> {
        let need = |v: Option<&str>, key: &str| {
            v.ok_or_else(|| CoreError::InvalidInput(format!("{family} requires {key}")))
                .and_then(parse_language)
        };
        match TaskFamily::parse(family)? {
            TaskFamily::CodeSummarization => Ok(TaskKind::summarization(need(lang, "lang")?)),
            TaskFamily::CodeTranslation => TaskKind::translation(
                need(source_lang, "source_lang")?,
                need(target_lang, "target_lang")?,
            ),
            TaskFamily::ApiRecommendation => Ok(TaskKind::ApiRecommendation),
        }
    }

    pub fn family(&self) -> TaskFamily {
        match self {
            TaskKind::CodeSummarization { .. } => TaskFamily::CodeSummarization,
            TaskKind::CodeTranslation { .. } => TaskFamily::CodeTranslation,
            TaskKind::ApiRecommendation => TaskFamily::ApiRecommendation,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TaskKind::CodeTranslation {
                source_lang,
                target_lang,
            } => TaskKind::translation(*source_lang, *target_lang).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// Language of the code the model must produce, if any.
    pub fn output_language(&self) -> Option<Language> {
        match self {
            TaskKind::CodeTranslation { target_lang, .. } => Some(*target_lang),
            _ => None,
        }
    }

    pub fn sampling_params(&self) -> SamplingParams {
        self.family().sampling_params()
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TaskKind::CodeSummarization { lang } => write!(f, "code_summarization({})", lang.as_str()),
            TaskKind::CodeTranslation {
                source_lang,
                target_lang,
            } => write!(
                f,
                "code_translation({}->{})",
                source_lang.as_str(),
                target_lang.as_str()
            ),
            TaskKind::ApiRecommendation => f.write_str("api_recommendation"),
        }
    }
}
