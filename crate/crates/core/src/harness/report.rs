//! Result tables in markdown, CSV or JSON.
//!
//! Metric tables have one row per method and the task family's columns in fixed order;
//! the best mean in each column is marked, and exact ties are all marked. Markdown and CSV
//! metric cells are percentages with two decimals; JSON keeps raw values in [0, 1].

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::compare::Comparison;
use super::records::MetricSummary;
use super::scoring::metric_columns;
use super::stats::StatSummary;
use crate::task::{TaskFamily, TaskKind};
use crate::{CoreError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(CoreError::Config(format!(
                "unknown report format {other:?}; expected markdown, csv or json"
            ))),
        }
    }
}

impl ReportFormat {
    pub fn extension(self) -> &'static str {
        match self {
            ReportFormat::Markdown => "md",
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodResult {
    pub task: TaskKind,
    pub method: String,
    pub metrics: Vec<MetricSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenUsage {
    pub task: TaskFamily,
    pub method: String,
    pub mean_tokens: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReportInput {
    pub results: Vec<MethodResult>,
    pub comparisons: Vec<Comparison>,
    pub tokens: Vec<TokenUsage>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub metric: String,
    pub summary: Option<StatSummary>,
    pub best: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub method: String,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub task: TaskKind,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenCell {
    pub task: TaskFamily,
    pub mean_tokens: Option<f64>,
    /// Difference from the baseline (first) method; absent on the baseline row.
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenRow {
    pub method: String,
    pub cells: Vec<TokenCell>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TokenTable {
    pub tasks: Vec<TaskFamily>,
    pub rows: Vec<TokenRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub tables: Vec<Table>,
    pub token_table: Option<TokenTable>,
    pub comparisons: Vec<Comparison>,
}

/// Table order: API recommendation, translation, summarization.
fn family_rank(f: TaskFamily) -> usize {
    match f {
        TaskFamily::ApiRecommendation => 0,
        TaskFamily::CodeTranslation => 1,
        TaskFamily::CodeSummarization => 2,
    }
}

pub fn build_tables(results: &[MethodResult]) -> Vec<Table> {
    let mut tasks: Vec<TaskKind> = Vec::new();
    for r in results {
        if !tasks.contains(&r.task) {
            tasks.push(r.task);
        }
    }
    tasks.sort_by_key(|t| family_rank(t.family()));
    tasks
        .into_iter()
        .map(|task| {
            let columns: Vec<String> = metric_columns(task.family())
                .iter()
                .map(|c| c.to_string())
                .collect();
            let mut rows: Vec<Row> = results
                .iter()
                .filter(|r| r.task == task)
                .map(|r| Row {
                    method: r.method.clone(),
                    cells: columns
                        .iter()
                        .map(|c| Cell {
                            metric: c.clone(),
                            summary: r.metrics.iter().find(|m| &m.metric == c).map(|m| m.summary),
                            best: false,
                        })
                        .collect(),
                })
                .collect();
            for j in 0..columns.len() {
                let best = rows
                    .iter()
                    .filter_map(|r| r.cells[j].summary.map(|s| s.mean))
                    .fold(f64::NEG_INFINITY, f64::max);
                for row in &mut rows {
                    row.cells[j].best = row.cells[j].summary.is_some_and(|s| s.mean == best);
                }
            }
            Table { task, columns, rows }
        })
        .collect()
}

pub fn build_token_table(tokens: &[TokenUsage]) -> Option<TokenTable> {
    if tokens.is_empty() {
        return None;
    }
    let mut tasks: Vec<TaskFamily> = Vec::new();
    let mut methods: Vec<String> = Vec::new();
    for t in tokens {
        if !tasks.contains(&t.task) {
            tasks.push(t.task);
        }
        if !methods.contains(&t.method) {
            methods.push(t.method.clone());
        }
    }
    tasks.sort_by_key(|f| family_rank(*f));
    let lookup = |m: &str, f: TaskFamily| {
        tokens
            .iter()
            .find(|t| t.method == m && t.task == f)
            .map(|t| t.mean_tokens)
    };
    let rows = methods
        .iter()
        .enumerate()
        .map(|(i, m)| TokenRow {
            method: m.clone(),
            cells: tasks
                .iter()
                .map(|&f| {
                    let v = lookup(m, f);
                    let base = lookup(&methods[0], f);
                    TokenCell {
                        task: f,
                        mean_tokens: v,
                        delta: match (i, v, base) {
                            (0, _, _) => None,
                            (_, Some(v), Some(b)) => Some(v - b),
                            _ => None,
                        },
                    }
                })
                .collect(),
        })
        .collect();
    Some(TokenTable { tasks, rows })
}

pub fn build_document(input: &ReportInput) -> Result<ReportDocument> {
    if input.results.is_empty() && input.tokens.is_empty() && input.comparisons.is_empty() {
        return Err(CoreError::Precondition("nothing to report".into()));
    }
    Ok(ReportDocument {
        tables: build_tables(&input.results),
        token_table: build_token_table(&input.tokens),
        comparisons: input.comparisons.clone(),
    })
}

fn family_title(f: TaskFamily) -> &'static str {
    match f {
        TaskFamily::ApiRecommendation => "API Recommendation",
        TaskFamily::CodeTranslation => "Code Translation",
        TaskFamily::CodeSummarization => "Code Summarization",
    }
}

fn task_title(t: &TaskKind) -> String {
    match t {
        TaskKind::ApiRecommendation => family_title(t.family()).to_string(),
        TaskKind::CodeSummarization { lang } => format!("{} ({})", family_title(t.family()), lang.as_str()),
        TaskKind::CodeTranslation {
            source_lang,
            target_lang,
        } => format!(
            "{} ({} -> {})",
            family_title(t.family()),
            source_lang.as_str(),
            target_lang.as_str()
        ),
    }
}

pub fn percent(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

fn markdown(doc: &ReportDocument) -> String {
    let mut out = String::new();
    for t in &doc.tables {
        let _ = writeln!(out, "## {}\n", task_title(&t.task));
        let _ = writeln!(out, "| Method | {} |", t.columns.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(t.columns.len()));
        for r in &t.rows {
            let cells: Vec<String> = r
                .cells
                .iter()
                .map(|c| match (c.summary, c.best) {
                    (Some(s), true) => format!("**{}**", percent(s.mean)),
                    (Some(s), false) => percent(s.mean),
                    (None, _) => "-".to_string(),
                })
                .collect();
            let _ = writeln!(out, "| {} | {} |", r.method, cells.join(" | "));
        }
        let _ = writeln!(out, "\nCoefficient of variation across runs:\n");
        let _ = writeln!(out, "| Method | {} |", t.columns.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(t.columns.len()));
        for r in &t.rows {
            let cells: Vec<String> = r
                .cells
                .iter()
                .map(|c| match c.summary {
                    Some(StatSummary { cv: Some(cv), .. }) => format!("{cv:.4}"),
                    Some(_) => "undefined".to_string(),
                    None => "-".to_string(),
                })
                .collect();
            let _ = writeln!(out, "| {} | {} |", r.method, cells.join(" | "));
        }
        out.push('\n');
    }
    if let Some(tt) = &doc.token_table {
        let _ = writeln!(out, "## Average instruction tokens\n");
        let titles: Vec<&str> = tt.tasks.iter().map(|f| family_title(*f)).collect();
        let _ = writeln!(out, "| Method | {} |", titles.join(" | "));
        let _ = writeln!(out, "|---|{}", "---|".repeat(tt.tasks.len()));
        for r in &tt.rows {
            let cells: Vec<String> = r
                .cells
                .iter()
                .map(|c| match (c.mean_tokens, c.delta) {
                    (Some(v), Some(d)) => format!("{v:.2} ({d:+.2})"),
                    (Some(v), None) => format!("{v:.2}"),
                    (None, _) => "-".to_string(),
                })
                .collect();
            let _ = writeln!(out, "| {} | {} |", r.method, cells.join(" | "));
        }
        out.push('\n');
    }
    for c in &doc.comparisons {
        let _ = writeln!(
            out,
            "## {} vs {} ({})\n",
            c.label_b,
            c.label_a,
            task_title(&c.task)
        );
        let _ = writeln!(
            out,
            "| Metric | {} | {} | Delta | t | p | p < 0.05 |",
            c.label_a, c.label_b
        );
        let _ = writeln!(out, "|---|---|---|---|---|---|---|");
        for m in &c.metrics {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {:+.2} | {:.4} | {:.4} | {} |",
                m.metric,
                percent(m.mean_a),
                percent(m.mean_b),
                m.delta * 100.0,
                m.ttest.t_statistic,
                m.ttest.p_value,
                if m.ttest.significant_at_05 { "yes" } else { "no" }
            );
        }
        out.push('\n');
    }
    out.trim_end().to_string() + "\n"
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv(doc: &ReportDocument) -> String {
    let mut out = String::from("section,task,method,metric,mean,std,cv,n,best,delta,t,p,significant\n");
    for t in &doc.tables {
        let task = t.task.to_string();
        for r in &t.rows {
            for c in &r.cells {
                let Some(s) = c.summary else { continue };
                let _ = writeln!(
                    out,
                    "metrics,{task},{},{},{},{},{},{},{},,,,",
                    r.method,
                    c.metric,
                    s.mean,
                    s.std,
                    opt(s.cv),
                    s.n_runs,
                    c.best
                );
            }
        }
    }
    if let Some(tt) = &doc.token_table {
        for r in &tt.rows {
            for c in &r.cells {
                let Some(v) = c.mean_tokens else { continue };
                let _ = writeln!(
                    out,
                    "tokens,{},{},instruction_tokens,{v},,,,,{},,,",
                    c.task.as_str(),
                    r.method,
                    opt(c.delta)
                );
            }
        }
    }
    for c in &doc.comparisons {
        for m in &c.metrics {
            let _ = writeln!(
                out,
                "comparison,{},{} vs {},{},{},,,{},,{},{},{},{}",
                c.task,
                c.label_b,
                c.label_a,
                m.metric,
                m.mean_b,
                m.ttest.n_pairs,
                m.delta,
                m.ttest.t_statistic,
                m.ttest.p_value,
                m.ttest.significant_at_05
            );
        }
    }
    out
}

pub fn emit_report(input: &ReportInput, format: ReportFormat) -> Result<String> {
    let doc = build_document(input)?;
    Ok(match format {
        ReportFormat::Markdown => markdown(&doc),
        ReportFormat::Csv => csv(&doc),
        ReportFormat::Json => serde_json::to_string_pretty(&doc).expect("report serializes") + "\n",
    })
}
