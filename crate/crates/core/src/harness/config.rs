//! Experiment configuration, read from TOML.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use codeprompt_llm::{ProviderConfig, SamplingParams};
use serde::{Deserialize, Serialize};

use super::stats::StdKind;
use crate::instructgen::{ApeConfig, OproConfig};
use crate::reasoning::{AutoCotConfig, DEFAULT_MAX_PLAN_STEPS};
use crate::task::TaskKind;
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Basic,
    Ape,
    Opro,
    Cot,
    #[serde(rename = "autocot")]
    AutoCot,
    #[serde(rename = "selfplan")]
    SelfPlan,
    ApeCot,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::Basic,
        Method::Ape,
        Method::Opro,
        Method::Cot,
        Method::AutoCot,
        Method::SelfPlan,
        Method::ApeCot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Basic => "basic",
            Method::Ape => "ape",
            Method::Opro => "opro",
            Method::Cot => "cot",
            Method::AutoCot => "autocot",
            Method::SelfPlan => "selfplan",
            Method::ApeCot => "ape_cot",
        }
    }

    /// Whether the method searches for its instruction rather than using the basic one.
    pub fn optimizes_instruction(self) -> bool {
        matches!(self, Method::Ape | Method::Opro | Method::ApeCot)
    }
}

impl FromStr for Method {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let canonical = s.to_ascii_lowercase().replace('-', "_");
        Method::ALL
            .into_iter()
            .find(|m| {
                m.as_str() == canonical
                    || (canonical == "auto_cot" && *m == Method::AutoCot)
                    || (canonical == "self_plan" && *m == Method::SelfPlan)
            })
            .ok_or_else(|| {
                CoreError::Config(format!(
                    "unknown method {s:?}; expected one of {}",
                    Method::ALL.map(|m| m.as_str()).join(", ")
                ))
            })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetPaths {
    #[serde(default)]
    pub train: Option<PathBuf>,
    #[serde(default)]
    pub valid: Option<PathBuf>,
    pub test: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: TaskKind,
    pub method: Method,
    pub datasets: DatasetPaths,
    pub repeats: u32,
    pub sample_cap: Option<usize>,
    pub seed: u64,
    pub sampling: SamplingParams,
    pub provider: Option<ProviderConfig>,
    pub ape: ApeConfig,
    pub opro: OproConfig,
    pub autocot: AutoCotConfig,
    pub max_plan_steps: usize,
    /// Fixed instruction; skips instruction search for optimizing methods.
    pub instruction: Option<String>,
    pub case_insensitive_apis: bool,
    pub std_kind: StdKind,
}

impl ExperimentConfig {
    pub fn new(task: TaskKind, method: Method, test: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            task,
            method,
            datasets: DatasetPaths {
                train: None,
                valid: None,
                test: test.into(),
            },
            repeats: 5,
            sample_cap: None,
            seed: 0,
            sampling: task.sampling_params(),
            provider: None,
            ape: ApeConfig::default(),
            opro: OproConfig::default(),
            autocot: AutoCotConfig::default(),
            max_plan_steps: DEFAULT_MAX_PLAN_STEPS,
            instruction: None,
            case_insensitive_apis: false,
            std_kind: StdKind::Population,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.task.validate()?;
        if self.repeats == 0 {
            return Err(CoreError::Config("repeats must be at least 1".into()));
        }
        if self.sample_cap == Some(0) {
            return Err(CoreError::Config("sample_cap must be positive".into()));
        }
        self.sampling.validate()?;
        self.ape.validate()?;
        self.opro.validate()?;
        if self.max_plan_steps == 0 {
            return Err(CoreError::Config("max_plan_steps must be positive".into()));
        }
        let searches = self.method.optimizes_instruction() && self.instruction.is_none();
        if searches && (self.datasets.train.is_none() || self.datasets.valid.is_none()) {
            return Err(CoreError::Config(format!(
                "method {} needs train and valid datasets (or a fixed instruction)",
                self.method
            )));
        }
        if self.method == Method::AutoCot && self.datasets.train.is_none() {
            return Err(CoreError::Config("method autocot needs a train dataset".into()));
        }
        Ok(())
    }

    /// Seed for run `index`: base seed plus index.
    pub fn run_seed(&self, index: u32) -> u64 {
        self.seed.wrapping_add(u64::from(index))
    }

    pub fn from_toml_str(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CoreError::Config(format!("invalid config: {e}")))?;
        raw.resolve(base_dir)
    }

    pub fn from_toml_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base).map_err(|e| match e {
            CoreError::Config(m) => CoreError::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }
}

/// Sampling overrides; absent fields keep the task defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSampling {
    temperature: Option<f64>,
    top_p: Option<f64>,
    max_tokens: Option<u32>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSelfPlan {
    max_steps: Option<usize>,
}

/// File shape: flat task keys plus optional tables.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: String,
    lang: Option<String>,
    source_lang: Option<String>,
    target_lang: Option<String>,
    method: String,
    datasets: DatasetPaths,
    repeats: Option<u32>,
    sample_cap: Option<usize>,
    seed: Option<u64>,
    instruction: Option<String>,
    #[serde(default)]
    case_insensitive_apis: bool,
    std: Option<StdKind>,
    #[serde(default)]
    sampling: RawSampling,
    provider: Option<ProviderConfig>,
    #[serde(default)]
    ape: ApeConfig,
    #[serde(default)]
    opro: OproConfig,
    #[serde(default)]
    autocot: AutoCotConfig,
    #[serde(default)]
    selfplan: RawSelfPlan,
}

impl RawConfig {
    fn resolve(self, base_dir: &Path) -> Result<ExperimentConfig> {
        let task = TaskKind::from_parts(
            &self.task,
            self.lang.as_deref(),
            self.source_lang.as_deref(),
            self.target_lang.as_deref(),
        )?;
        let resolve = |p: PathBuf| if p.is_absolute() { p } else { base_dir.join(p) };
        let mut cfg = ExperimentConfig::new(task, self.method.parse()?, resolve(self.datasets.test));
        cfg.datasets.train = self.datasets.train.map(resolve);
        cfg.datasets.valid = self.datasets.valid.map(resolve);
        cfg.repeats = self.repeats.unwrap_or(cfg.repeats);
        cfg.sample_cap = self.sample_cap;
        cfg.seed = self.seed.unwrap_or(0);
        cfg.instruction = self.instruction;
        cfg.case_insensitive_apis = self.case_insensitive_apis;
        cfg.std_kind = self.std.unwrap_or_default();
        if let Some(t) = self.sampling.temperature {
            cfg.sampling.temperature = t;
        }
        if let Some(p) = self.sampling.top_p {
            cfg.sampling.top_p = p;
        }
        if let Some(m) = self.sampling.max_tokens {
            cfg.sampling.max_tokens = m;
        }
        cfg.provider = self.provider;
        cfg.ape = self.ape;
        cfg.opro = self.opro;
        cfg.autocot = self.autocot;
        cfg.max_plan_steps = self.selfplan.max_steps.unwrap_or(DEFAULT_MAX_PLAN_STEPS);
        cfg.validate()?;
        Ok(cfg)
    }
}
