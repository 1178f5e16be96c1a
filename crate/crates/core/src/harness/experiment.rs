//! Repeated-run experiment orchestration.

use std::path::PathBuf;

use codeprompt_llm::{Embedder, FinishReason, LanguageModel, SamplingParams};
use codeprompt_metrics::Execution;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Method};
use super::records::{
    aggregate, aggregate_records, MetricReport, MetricSummary, RawOutputRecord, RunWriter, SampleFailure,
    SampleMetricRecord, RAW_OUTPUTS_FILE, RUNS_FILE, SAMPLE_METRICS_FILE, SUMMARY_FILE,
};
use super::scoring::{extract_answer, headline_metric, metric_columns, score_sample, MetricValue};
use crate::candidate::{CandidateInstruction, CandidateSource};
use crate::dataset::{validate_dataset, Dataset, Sample, Split};
use crate::instructgen::{opro_optimize, run_ape};
use crate::prompt::{instantiate_basic_prompt, render_prompt, PromptSpec};
use crate::reasoning::{
    autocot_build, autocot_spec, compose_ape_cot, cot_augment, selfplan_run, AutoCotConfig, DemoCache,
    DemoCacheKey, DemoExemplar,
};
use crate::task::TaskKind;
use crate::{CoreError, Result};

#[derive(Debug, Clone)]
pub struct ExperimentInputs {
    pub train: Option<Dataset>,
    pub valid: Option<Dataset>,
    pub test: Dataset,
}

fn checked(d: Dataset, task: &TaskKind, what: &str) -> Result<Dataset> {
    let violations = validate_dataset(&d);
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(CoreError::InvalidInput(format!(
            "{what} dataset: {}",
            list.join("; ")
        )));
    }
    if d.task() != Some(*task) {
        return Err(CoreError::InvalidInput(format!(
            "{what} dataset task {} does not match configured task {task}",
            d.task().map_or("none".to_string(), |t| t.to_string())
        )));
    }
    Ok(d)
}

impl ExperimentInputs {
    pub fn new(
        cfg: &ExperimentConfig,
        train: Option<Dataset>,
        valid: Option<Dataset>,
        test: Dataset,
    ) -> Result<Self> {
        Ok(ExperimentInputs {
            train: train.map(|d| checked(d, &cfg.task, "train")).transpose()?,
            valid: valid.map(|d| checked(d, &cfg.task, "valid")).transpose()?,
            test: checked(test, &cfg.task, "test")?,
        })
    }

    pub fn load(cfg: &ExperimentConfig) -> Result<Self> {
        let load = |p: &Option<PathBuf>, split| p.as_ref().map(|p| Dataset::load_jsonl(p, split)).transpose();
        let train = load(&cfg.datasets.train, Split::Train)?;
        let valid = load(&cfg.datasets.valid, Split::Valid)?;
        let test = Dataset::load_jsonl(&cfg.datasets.test, Split::Test)?;
        Self::new(cfg, train, valid, test)
    }

    /// Inputs for instruction search alone; the test split is left empty.
    pub fn for_search(cfg: &ExperimentConfig, train: Dataset, valid: Dataset) -> Result<Self> {
        Ok(ExperimentInputs {
            train: Some(checked(train, &cfg.task, "train")?),
            valid: Some(checked(valid, &cfg.task, "valid")?),
            test: Dataset::new(Split::Test, Vec::new()),
        })
    }

    fn require(&self, which: Split) -> Result<&[Sample]> {
        let d = match which {
            Split::Train => self.train.as_ref(),
            Split::Valid => self.valid.as_ref(),
            Split::Test => Some(&self.test),
        };
        d.map(|d| d.samples.as_slice())
            .ok_or_else(|| CoreError::Config(format!("{} dataset is required", which.as_str())))
    }
}

#[derive(Clone, Copy)]
pub struct Backends<'a> {
    pub llm: &'a dyn LanguageModel,
    pub embedder: &'a dyn Embedder,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub exec: Execution,
    /// Artifacts are written here when set.
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub reports: Vec<MetricReport>,
    pub summary: Vec<MetricSummary>,
    /// Every run finished every sample.
    pub complete: bool,
}

/// Mean headline metric of `instruction` on `samples` with the plain prompt.
pub fn instruction_score(
    llm: &dyn LanguageModel,
    instruction: &str,
    samples: &[Sample],
    params: &SamplingParams,
    case_insensitive_apis: bool,
    exec: Execution,
) -> Result<f64> {
    let first = samples
        .first()
        .ok_or_else(|| CoreError::Precondition("no samples to evaluate the instruction on".into()))?;
    let metric = headline_metric(first.task.family());
    let values = exec.map(samples, |s| -> Result<f64> {
        let prompt = render_prompt(&PromptSpec::new(instruction, &s.input));
        let out = llm.complete(&prompt, params)?;
        let scores = score_sample(s, &extract_answer(&s.task, &out.text), case_insensitive_apis)?;
        Ok(scores
            .iter()
            .find(|m| m.metric == metric)
            .expect("headline metric scored")
            .value)
    });
    let values = values.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

struct RunState<'a> {
    cfg: &'a ExperimentConfig,
    inputs: &'a ExperimentInputs,
    backends: Backends<'a>,
    opts: &'a RunOptions,
    writer: Option<&'a RunWriter>,
}

/// Instruction used by run `run`: the configured fixed text, an APE or OPRO search result
/// (its log written through `writer`), or the basic template.
pub fn prepare_instruction(
    cfg: &ExperimentConfig,
    inputs: &ExperimentInputs,
    llm: &dyn LanguageModel,
    exec: Execution,
    writer: Option<&RunWriter>,
    run: u32,
    params: &SamplingParams,
) -> Result<CandidateInstruction> {
    let source = match cfg.method {
        Method::Ape | Method::ApeCot => CandidateSource::Ape,
        Method::Opro => CandidateSource::Opro,
        _ => CandidateSource::Manual,
    };
    if let Some(text) = &cfg.instruction {
        return Ok(CandidateInstruction::new(text.clone(), source, 0));
    }
    let basic = instantiate_basic_prompt(&cfg.task)?;
    match cfg.method {
        Method::Ape | Method::ApeCot => {
            let train = inputs.require(Split::Train)?;
            let valid = inputs.require(Split::Valid)?;
            let outcome = run_ape(llm, &cfg.task, train, valid, &cfg.ape, params, exec)?;
            if let Some(w) = writer {
                w.write_json(&format!("ape_run{run}.json"), &outcome)?;
            }
            Ok(outcome.best)
        }
        Method::Opro => {
            let train = inputs.require(Split::Train)?;
            let valid = inputs.require(Split::Valid)?;
            let subset = &valid[..cfg.opro.eval_set_size.min(valid.len())];
            let exemplars: Vec<(String, String)> = train
                .iter()
                .filter_map(|s| Some((s.input.clone(), s.primary_target()?)))
                .take(cfg.opro.n_exemplars)
                .collect();
            let mut eval =
                |instr: &str| instruction_score(llm, instr, subset, params, cfg.case_insensitive_apis, exec);
            let result = opro_optimize(llm, &cfg.task, &basic, &exemplars, &mut eval, &cfg.opro, params);
            let trajectory = match &result {
                Ok((_, t)) => Some(t),
                Err(abort) => abort.trajectory.as_deref(),
            };
            if let (Some(w), Some(t)) = (writer, trajectory) {
                w.write_text(&format!("opro_trajectory_run{run}.jsonl"), &t.to_jsonl())?;
            }
            Ok(result?.0)
        }
        _ => Ok(CandidateInstruction::manual(basic)),
    }
}

impl RunState<'_> {
    fn demos(&self, instruction: &str, seed: u64, params: &SamplingParams) -> Result<Vec<DemoExemplar>> {
        let train = self
            .inputs
            .train
            .as_ref()
            .ok_or_else(|| CoreError::Config("train dataset is required".into()))?;
        let acfg = AutoCotConfig {
            seed,
            ..self.cfg.autocot
        };
        let build = || {
            autocot_build(
                self.backends.llm,
                self.backends.embedder,
                instruction,
                &train.samples,
                &acfg,
                params,
                self.opts.exec,
            )
        };
        match self.writer {
            Some(w) => {
                let key = DemoCacheKey {
                    dataset_hash: train.content_hash(),
                    k: acfg.k,
                    seed,
                    model: self.backends.llm.model_name().to_string(),
                };
                DemoCache::new(w.dir().join("cache")).get_or_build(&key, build)
            }
            None => build(),
        }
    }

    fn sample(
        &self,
        run: u32,
        sample: &Sample,
        instruction: &CandidateInstruction,
        demos: &[DemoExemplar],
        params: &SamplingParams,
    ) -> (RawOutputRecord, Result<Vec<MetricValue>>) {
        let mut raw = RawOutputRecord {
            run,
            sample_id: sample.id.clone(),
            prompt: String::new(),
            output: String::new(),
            answer: String::new(),
            finish_reason: None,
            plan: None,
            error: None,
        };
        let result = (|| -> Result<Vec<MetricValue>> {
            let llm = self.backends.llm;
            let text = &instruction.text;
            let mut extra_flags = Vec::new();
            if self.cfg.method == Method::SelfPlan {
                let (plan, output, prompt) =
                    selfplan_run(llm, sample, text, params, self.cfg.max_plan_steps)?;
                if plan.degraded {
                    extra_flags.push("plan_degraded".to_string());
                }
                raw.prompt = prompt;
                raw.output = output;
                raw.plan = Some(plan);
            } else {
                let spec = match self.cfg.method {
                    Method::Cot => cot_augment(&PromptSpec::new(text, &sample.input)),
                    Method::ApeCot => compose_ape_cot(&self.cfg.task, instruction, sample)?,
                    Method::AutoCot => autocot_spec(text, demos, &sample.input),
                    _ => PromptSpec::new(text, &sample.input),
                };
                raw.prompt = render_prompt(&spec);
                let out = llm.complete(&raw.prompt, params)?;
                if out.finish_reason == FinishReason::Length {
                    extra_flags.push("output_truncated".to_string());
                }
                raw.finish_reason = Some(out.finish_reason);
                raw.output = out.text;
            }
            raw.answer = extract_answer(&sample.task, &raw.output);
            let mut values = score_sample(sample, &raw.answer, self.cfg.case_insensitive_apis)?;
            for v in &mut values {
                v.degraded_flags.extend(extra_flags.iter().cloned());
            }
            Ok(values)
        })();
        if let Err(e) = &result {
            raw.error = Some(e.to_string());
        }
        (raw, result)
    }

    fn run(&self, run: u32) -> Result<MetricReport> {
        let cfg = self.cfg;
        let seed = cfg.run_seed(run);
        let params = SamplingParams {
            seed: Some(seed),
            ..cfg.sampling
        };
        let instruction = prepare_instruction(
            cfg,
            self.inputs,
            self.backends.llm,
            self.opts.exec,
            self.writer,
            run,
            &params,
        )?;
        let demos = if cfg.method == Method::AutoCot {
            self.demos(&instruction.text, seed, &params)?
        } else {
            Vec::new()
        };
        let test = self.inputs.test.capped(cfg.sample_cap);
        let results = self.opts.exec.map(&test.samples, |s| {
            self.sample(run, s, &instruction, &demos, &params)
        });

        let mut raws = Vec::with_capacity(results.len());
        let mut records = Vec::new();
        let mut failures = Vec::new();
        for (raw, result) in results {
            match result {
                Ok(values) => records.extend(values.into_iter().map(|v| SampleMetricRecord {
                    run,
                    sample_id: raw.sample_id.clone(),
                    metric: v.metric,
                    value: v.value,
                    degraded_flags: v.degraded_flags,
                })),
                Err(e) => failures.push(SampleFailure {
                    sample_id: raw.sample_id.clone(),
                    error: e.to_string(),
                }),
            }
            raws.push(raw);
        }
        if let Some(w) = self.writer {
            w.append_jsonl(RAW_OUTPUTS_FILE, &raws)?;
            w.append_jsonl(SAMPLE_METRICS_FILE, &records)?;
        }
        let aggregates = aggregate_records(&records, metric_columns(cfg.task.family()));
        Ok(MetricReport {
            run_index: run,
            seed,
            task: cfg.task,
            method: cfg.method,
            instruction: instruction.text,
            n_samples: test.len(),
            records,
            aggregates,
            partial: !failures.is_empty(),
            failures,
        })
    }
}

/// Runs `cfg.repeats` seeded runs in sequence; samples within a run fan out per
/// `opts.exec`. Artifacts go to `opts.out_dir` when set.
pub fn run_experiment(
    cfg: &ExperimentConfig,
    inputs: &ExperimentInputs,
    backends: Backends<'_>,
    opts: &RunOptions,
) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let writer = opts.out_dir.as_ref().map(RunWriter::create).transpose()?;
    if let Some(w) = &writer {
        w.write_config(cfg)?;
    }
    let state = RunState {
        cfg,
        inputs,
        backends,
        opts,
        writer: writer.as_ref(),
    };
    let mut reports = Vec::with_capacity(cfg.repeats as usize);
    for run in 0..cfg.repeats {
        let report = state.run(run)?;
        if report.partial {
            log::warn!("run {run}: {} sample(s) failed", report.failures.len());
        }
        reports.push(report);
        if let Some(w) = &writer {
            w.write_json(RUNS_FILE, &reports)?;
        }
    }
    let complete = reports.iter().all(|r| !r.partial);
    let summary = match aggregate(&reports, cfg.std_kind) {
        Ok(s) => s,
        // Failed samples can leave a run without some metrics; the partial flag reports it.
        Err(e) if !complete => {
            log::warn!("cannot summarize partial experiment: {e}");
            Vec::new()
        }
        Err(e) => return Err(e),
    };
    if let Some(w) = &writer {
        w.write_json(SUMMARY_FILE, &summary)?;
    }
    Ok(ExperimentOutcome {
        reports,
        summary,
        complete,
    })
}
