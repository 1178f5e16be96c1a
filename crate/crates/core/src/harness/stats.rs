//! Run statistics: mean, standard deviation, coefficient of variation, paired t-test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::{CoreError, Result};

pub const SIGNIFICANCE_LEVEL: f64 = 0.05;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StdKind {
    /// Divides by n.
    #[default]
    Population,
    /// Divides by n - 1.
    Sample,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatSummary {
    pub mean: f64,
    pub std: f64,
    /// `std / mean`; `None` exactly when the mean is zero.
    pub cv: Option<f64>,
    pub cv_undefined: bool,
    pub n_runs: usize,
}

/// Sum in ascending order, so the result does not depend on input order.
fn ordered_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.into_iter().collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

pub fn summarize(values: &[f64], kind: StdKind) -> Result<StatSummary> {
    let n = values.len();
    if n == 0 {
        return Err(CoreError::Precondition("no values to summarize".into()));
    }
    if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
        return Err(CoreError::InvalidInput(format!("non-finite value {bad}")));
    }
    let mean = ordered_sum(values.iter().copied()) / n as f64;
    let ss = ordered_sum(values.iter().map(|v| (v - mean) * (v - mean)));
    let denom = match kind {
        StdKind::Population => n as f64,
        StdKind::Sample if n > 1 => (n - 1) as f64,
        StdKind::Sample => {
            return Err(CoreError::Precondition(
                "sample std needs at least 2 values".into(),
            ))
        }
    };
    let std = (ss / denom).sqrt();
    let cv = (mean != 0.0).then(|| std / mean);
    Ok(StatSummary {
        mean,
        std,
        cv,
        cv_undefined: cv.is_none(),
        n_runs: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub t_statistic: f64,
    pub p_value: f64,
    pub n_pairs: usize,
    pub significant_at_05: bool,
    /// Differences had zero variance but nonzero mean; `t` is reported as ±f64::MAX, p = 0.
    pub degenerate: bool,
}

/// Two-tailed paired t-test on `a[i] - b[i]` with n - 1 degrees of freedom.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Result<TTestResult> {
    if a.len() != b.len() {
        return Err(CoreError::Precondition(format!(
            "paired t-test needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let n = a.len();
    if n < 2 {
        return Err(CoreError::Precondition(
            "paired t-test needs at least 2 pairs".into(),
        ));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(CoreError::InvalidInput("non-finite value in t-test input".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n as f64;
    let ss: f64 = d.iter().map(|x| (x - mean) * (x - mean)).sum();
    let sd = (ss / (n - 1) as f64).sqrt();
    let result = |t: f64, p: f64, degenerate| TTestResult {
        t_statistic: t,
        p_value: p,
        n_pairs: n,
        significant_at_05: p < SIGNIFICANCE_LEVEL,
        degenerate,
    };
    if sd == 0.0 {
        return Ok(if mean == 0.0 {
            result(0.0, 1.0, false)
        } else {
            result(f64::MAX.copysign(mean), 0.0, true)
        });
    }
    let t = mean / (sd / (n as f64).sqrt());
    let dist = StudentsT::new(0.0, 1.0, (n - 1) as f64).expect("df >= 1");
    let p = (2.0 * dist.sf(t.abs())).clamp(0.0, 1.0);
    Ok(result(t, p, false))
}
