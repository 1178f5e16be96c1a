//! Per-sample records, per-run reports, aggregation across runs and run-directory I/O.

use std::collections::BTreeSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use codeprompt_llm::FinishReason;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::scoring::metric_columns;
use super::stats::{summarize, StatSummary, StdKind};
use crate::reasoning::Plan;
use crate::task::TaskKind;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMetricRecord {
    pub run: u32,
    pub sample_id: String,
    pub metric: String,
    pub value: f64,
    #[serde(default)]
    pub degraded_flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawOutputRecord {
    pub run: u32,
    pub sample_id: String,
    pub prompt: String,
    pub output: String,
    pub answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finish_reason: Option<FinishReason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<Plan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAggregate {
    pub metric: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleFailure {
    pub sample_id: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub run_index: u32,
    pub seed: u64,
    pub task: TaskKind,
    pub method: Method,
    pub instruction: String,
    pub n_samples: usize,
    pub records: Vec<SampleMetricRecord>,
    pub aggregates: Vec<MetricAggregate>,
    pub partial: bool,
    #[serde(default)]
    pub failures: Vec<SampleFailure>,
}

impl MetricReport {
    pub fn aggregate(&self, metric: &str) -> Option<f64> {
        self.aggregates
            .iter()
            .find(|a| a.metric == metric)
            .map(|a| a.value)
    }
}

/// Per-metric mean over `records`, summed in record order, for each metric in `columns`.
/// Metrics with no records are omitted.
pub fn aggregate_records(records: &[SampleMetricRecord], columns: &[&str]) -> Vec<MetricAggregate> {
    columns
        .iter()
        .filter_map(|&metric| {
            let values: Vec<f64> = records
                .iter()
                .filter(|r| r.metric == metric)
                .map(|r| r.value)
                .collect();
            (!values.is_empty()).then(|| MetricAggregate {
                metric: metric.to_string(),
                value: values.iter().sum::<f64>() / values.len() as f64,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub metric: String,
    pub summary: StatSummary,
}

/// Mean, std and CV of each metric's run-level aggregate; independent of report order.
pub fn aggregate(reports: &[MetricReport], kind: StdKind) -> Result<Vec<MetricSummary>> {
    let first = reports
        .first()
        .ok_or_else(|| CoreError::Precondition("no reports to aggregate".into()))?;
    let names: Vec<&str> = first.aggregates.iter().map(|a| a.metric.as_str()).collect();
    let expected: BTreeSet<&str> = names.iter().copied().collect();
    for r in reports {
        let got: BTreeSet<&str> = r.aggregates.iter().map(|a| a.metric.as_str()).collect();
        if let Some(diff) = expected.symmetric_difference(&got).next() {
            return Err(CoreError::Precondition(format!(
                "run {} differs in metric {diff:?}",
                r.run_index
            )));
        }
    }
    names
        .into_iter()
        .map(|m| {
            let values: Vec<f64> = reports.iter().map(|r| r.aggregate(m).expect("checked")).collect();
            Ok(MetricSummary {
                metric: m.to_string(),
                summary: summarize(&values, kind)?,
            })
        })
        .collect()
}

pub const CONFIG_FILE: &str = "config.json";
pub const RAW_OUTPUTS_FILE: &str = "raw_outputs.jsonl";
pub const SAMPLE_METRICS_FILE: &str = "per_sample_metrics.jsonl";
pub const RUNS_FILE: &str = "runs.json";
pub const SUMMARY_FILE: &str = "summary.json";

/// Serialized writer for one run directory.
#[derive(Debug)]
pub struct RunWriter {
    dir: PathBuf,
}

impl RunWriter {
    /// Creates `dir`, truncating any JSONL logs from an earlier invocation.
    pub fn create(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| CoreError::io(&dir, e))?;
        for f in [RAW_OUTPUTS_FILE, SAMPLE_METRICS_FILE] {
            let p = dir.join(f);
            File::create(&p).map_err(|e| CoreError::io(&p, e))?;
        }
        Ok(RunWriter { dir })
    }

    /// Creates `dir` without touching any run logs.
    pub fn artifacts(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| CoreError::io(&dir, e))?;
        Ok(RunWriter { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write_json<T: Serialize + ?Sized>(&self, name: &str, value: &T) -> Result<PathBuf> {
        let path = self.dir.join(name);
        let json = serde_json::to_string_pretty(value).expect("artifacts serialize");
        std::fs::write(&path, json + "\n").map_err(|e| CoreError::io(&path, e))?;
        Ok(path)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.dir.join(name);
        std::fs::write(&path, text).map_err(|e| CoreError::io(&path, e))?;
        Ok(path)
    }

    pub fn append_jsonl<T: Serialize>(&self, name: &str, rows: &[T]) -> Result<()> {
        let path = self.dir.join(name);
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| CoreError::io(&path, e))?;
        let mut buf = String::new();
        for r in rows {
            buf.push_str(&serde_json::to_string(r).expect("records serialize"));
            buf.push('\n');
        }
        f.write_all(buf.as_bytes()).map_err(|e| CoreError::io(&path, e))
    }

    pub fn write_config(&self, cfg: &ExperimentConfig) -> Result<PathBuf> {
        self.write_json(CONFIG_FILE, cfg)
    }
}

pub fn read_jsonl<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<Vec<T>> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| CoreError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CoreError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(
            serde_json::from_str(&line)
                .map_err(|e| CoreError::InvalidInput(format!("{} line {}: {e}", path.display(), i + 1)))?,
        );
    }
    Ok(out)
}

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CoreError::InvalidInput(format!("{}: {e}", path.display())))
}

/// A finished run directory loaded back from disk.
#[derive(Debug, Clone)]
pub struct RunDirectory {
    pub dir: PathBuf,
    pub config: ExperimentConfig,
    pub reports: Vec<MetricReport>,
    pub records: Vec<SampleMetricRecord>,
}

impl RunDirectory {
    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        Ok(RunDirectory {
            dir: dir.to_path_buf(),
            config: read_json(dir.join(CONFIG_FILE))?,
            reports: read_json(dir.join(RUNS_FILE))?,
            records: read_jsonl(dir.join(SAMPLE_METRICS_FILE))?,
        })
    }

    /// Rebuilds each run's aggregates from the flat per-sample records alone.
    pub fn rebuilt_reports(&self) -> Vec<MetricReport> {
        let columns = metric_columns(self.config.task.family());
        self.reports
            .iter()
            .map(|r| {
                let records: Vec<SampleMetricRecord> = self
                    .records
                    .iter()
                    .filter(|x| x.run == r.run_index)
                    .cloned()
                    .collect();
                MetricReport {
                    aggregates: aggregate_records(&records, columns),
                    records,
                    ..r.clone()
                }
            })
            .collect()
    }

    /// Cross-run summary recomputed from the per-sample records.
    pub fn reaggregate(&self) -> Result<Vec<MetricSummary>> {
        aggregate(&self.rebuilt_reports(), self.config.std_kind)
    }
}
