//! Paired comparison of two evaluations over the same test set.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::records::SampleMetricRecord;
use super::stats::{paired_t_test, TTestResult};
use crate::task::TaskKind;
use crate::{CoreError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricComparison {
    pub metric: String,
    pub mean_a: f64,
    pub mean_b: f64,
    /// `mean_b - mean_a`.
    pub delta: f64,
    /// Test on `b - a`; a positive statistic favours B.
    pub ttest: TTestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub task: TaskKind,
    pub label_a: String,
    pub label_b: String,
    pub n_samples: usize,
    pub metrics: Vec<MetricComparison>,
}

/// Per-sample means over every run, keyed by metric then sample; sample order is first
/// appearance.
fn per_sample_means(records: &[SampleMetricRecord], metric: &str) -> (Vec<String>, HashMap<String, f64>) {
    let mut order = Vec::new();
    let mut acc: HashMap<String, (f64, usize)> = HashMap::new();
    for r in records.iter().filter(|r| r.metric == metric) {
        let e = acc.entry(r.sample_id.clone()).or_insert_with(|| {
            order.push(r.sample_id.clone());
            (0.0, 0)
        });
        e.0 += r.value;
        e.1 += 1;
    }
    let means = acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect();
    (order, means)
}

/// Compares B against A metric by metric; each sample's value is its mean across runs.
pub fn compare_records(
    a: &[SampleMetricRecord],
    b: &[SampleMetricRecord],
    columns: &[&str],
) -> Result<Vec<MetricComparison>> {
    let mut out = Vec::new();
    for &metric in columns {
        let (order_a, means_a) = per_sample_means(a, metric);
        let (order_b, means_b) = per_sample_means(b, metric);
        if order_a.is_empty() && order_b.is_empty() {
            continue;
        }
        let missing = order_a
            .iter()
            .find(|id| !means_b.contains_key(*id))
            .or_else(|| order_b.iter().find(|id| !means_a.contains_key(*id)));
        if let Some(id) = missing {
            return Err(CoreError::InvalidInput(format!(
                "test sets differ: sample {id:?} is not present in both runs ({metric})"
            )));
        }
        let va: Vec<f64> = order_a.iter().map(|id| means_a[id]).collect();
        let vb: Vec<f64> = order_a.iter().map(|id| means_b[id]).collect();
        let n = va.len() as f64;
        let mean_a = va.iter().sum::<f64>() / n;
        let mean_b = vb.iter().sum::<f64>() / n;
        out.push(MetricComparison {
            metric: metric.to_string(),
            mean_a,
            mean_b,
            delta: mean_b - mean_a,
            ttest: paired_t_test(&vb, &va)?,
        });
    }
    if out.is_empty() {
        return Err(CoreError::Precondition("no shared metrics to compare".into()));
    }
    Ok(out)
}
