use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use codeprompt_core::harness::{
    compare_records, emit_report, metric_columns, prepare_instruction, run_experiment, Backends, Comparison,
    ExperimentConfig, ExperimentInputs, Method, MethodResult, ReportFormat, ReportInput, RunDirectory,
    RunOptions, RunWriter, StdKind, TokenUsage,
};
use codeprompt_core::{
    count_instruction_tokens, validate_dataset, CoreError, Dataset, Execution, Split, TaskFamily, TaskKind,
};
use codeprompt_llm::{
    Embedder, HashedBagOfWords, LanguageModel, LlmError, MockModel, OpenAiClient, SamplingParams,
    DEFAULT_EMBEDDING_DIM,
};

use crate::args::{
    Cli, Command, CompareArgs, DataArgs, EvaluateArgs, OptimizeArgs, ReportArgs, SearchArgs, TaskArgs,
    ValidateArgs,
};

/// Exit code 2 marks usage and configuration errors, 1 everything else.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = if matches!(e, CoreError::Config(_)) { 2 } else { 1 };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<LlmError> for Failure {
    fn from(e: LlmError) -> Self {
        CoreError::from(e).into()
    }
}

type Outcome = Result<ExitCode, Failure>;

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate(a) => validate(a),
        Command::Optimize(a) => optimize(cli, a),
        Command::Evaluate(a) => evaluate(cli, a),
        Command::Compare(a) => compare(a),
        Command::Report(a) => report(a),
    }
}

fn execution(cli: &Cli) -> Execution {
    if cli.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    }
}

fn resolve_task(args: &TaskArgs) -> Result<Option<TaskKind>, Failure> {
    let Some(name) = &args.task else { return Ok(None) };
    TaskKind::from_parts(
        name,
        Some(args.lang.as_deref().unwrap_or("python")),
        Some(args.source_lang.as_deref().unwrap_or("python")),
        Some(args.target_lang.as_deref().unwrap_or("java")),
    )
    .map(Some)
    .map_err(|e| Failure::usage(e.to_string()))
}

/// Explicit flag, else `<data_dir>/<split>.jsonl` when it exists or `required`.
fn split_path(flag: &Option<PathBuf>, data: &DataArgs, split: Split, required: bool) -> Option<PathBuf> {
    flag.clone().or_else(|| {
        let p = data.data_dir.as_ref()?.join(format!("{}.jsonl", split.as_str()));
        (required || p.exists()).then_some(p)
    })
}

/// Config file (if any) overridden by flags. `need_test` makes a test dataset mandatory.
fn build_config(
    cli: &Cli,
    task: &TaskArgs,
    data: &DataArgs,
    method: Option<Method>,
    need_test: bool,
) -> Result<ExperimentConfig, Failure> {
    let file = cli
        .config
        .as_ref()
        .map(ExperimentConfig::from_toml_file)
        .transpose()?;
    let task = match (resolve_task(task)?, &file) {
        (Some(t), _) => t,
        (None, Some(f)) => f.task,
        (None, None) => return Err(Failure::usage("--task is required (or --config)")),
    };
    let method = match (method, &file) {
        (Some(m), _) => m,
        (None, Some(f)) => f.method,
        (None, None) => return Err(Failure::usage("--method is required (or --config)")),
    };
    let searches = method.optimizes_instruction();
    let train = split_path(
        &data.train,
        data,
        Split::Train,
        searches || method == Method::AutoCot,
    );
    let valid = split_path(&data.valid, data, Split::Valid, searches);
    let test = split_path(&data.test, data, Split::Test, need_test);
    let mut cfg = match file {
        Some(f) => f,
        None => {
            let test = match &test {
                Some(p) => p.clone(),
                None if need_test => {
                    return Err(Failure::usage(
                        "a test dataset is required (--test or --data-dir)",
                    ))
                }
                None => PathBuf::new(),
            };
            ExperimentConfig::new(task, method, test)
        }
    };
    if cfg.task != task {
        cfg.sampling = task.sampling_params();
    }
    cfg.task = task;
    cfg.method = method;
    if let Some(p) = train {
        cfg.datasets.train = Some(p);
    }
    if let Some(p) = valid {
        cfg.datasets.valid = Some(p);
    }
    if let Some(p) = test {
        cfg.datasets.test = p;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if data.sample_cap.is_some() {
        cfg.sample_cap = data.sample_cap;
    }
    cfg.case_insensitive_apis |= data.case_insensitive_apis;
    Ok(cfg)
}

fn apply_search(cfg: &mut ExperimentConfig, s: &SearchArgs) {
    if let Some(v) = s.n_candidates {
        cfg.ape.n_candidates = v;
    }
    if let Some(v) = s.scoring_set_size {
        cfg.ape.scoring_set_size = v;
    }
    if let Some(v) = s.max_steps {
        cfg.opro.budget.max_steps = v;
    }
    if let Some(v) = s.patience {
        cfg.opro.budget.patience = v;
    }
    if let Some(v) = s.candidates_per_step {
        cfg.opro.budget.candidates_per_step = v;
    }
    if let Some(v) = s.eval_set_size {
        cfg.opro.eval_set_size = v;
    }
}

fn model(cli: &Cli, cfg: &ExperimentConfig) -> Result<Box<dyn LanguageModel>, Failure> {
    if let Some(path) = &cli.mock {
        return Ok(Box::new(MockModel::from_file(path)?));
    }
    match &cfg.provider {
        Some(p) => Ok(Box::new(OpenAiClient::new(p.clone())?)),
        None => Err(Failure::usage(
            "no model configured: pass --mock SCRIPT or add [provider] to the config",
        )),
    }
}

fn deliver(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| CoreError::io(p, e).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn guess_split(path: &Path) -> Split {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("")
        .to_ascii_lowercase();
    if stem.contains("train") {
        Split::Train
    } else if stem.contains("valid") || stem.contains("dev") {
        Split::Valid
    } else {
        Split::Test
    }
}

fn validate(a: &ValidateArgs) -> Outcome {
    let expected = resolve_task(&a.task)?;
    let mut files: Vec<(PathBuf, Split)> = Vec::new();
    for (flag, split) in [
        (&a.data.train, Split::Train),
        (&a.data.valid, Split::Valid),
        (&a.data.test, Split::Test),
    ] {
        if let Some(p) = split_path(flag, &a.data, split, false) {
            files.push((p, split));
        }
    }
    files.extend(a.files.iter().map(|p| (p.clone(), guess_split(p))));
    if files.is_empty() {
        return Err(Failure::usage("no dataset files given"));
    }
    let mut clean = true;
    for (path, split) in &files {
        let shown = path.display();
        let dataset = match Dataset::load_jsonl(path, *split) {
            Ok(d) => d,
            Err(e) => {
                println!("FAIL {shown}: {e}");
                clean = false;
                continue;
            }
        };
        let mut problems: Vec<String> = validate_dataset(&dataset)
            .iter()
            .map(ToString::to_string)
            .collect();
        if let (Some(want), Some(got)) = (expected, dataset.task()) {
            if want != got {
                problems.push(format!("task is {got}, expected {want}"));
            }
        }
        if problems.is_empty() {
            let task = dataset.task().map_or("-".to_string(), |t| t.to_string());
            println!("ok   {shown}: {} samples, {task}", dataset.len());
        } else {
            clean = false;
            println!("FAIL {shown}:");
            for p in problems {
                println!("  {p}");
            }
        }
    }
    Ok(if clean {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn optimize(cli: &Cli, a: &OptimizeArgs) -> Outcome {
    let method = match a.method {
        Some(m @ (Method::Ape | Method::Opro)) => Some(m),
        Some(m) => return Err(Failure::usage(format!("optimize supports ape and opro, not {m}"))),
        None => None,
    };
    let mut cfg = build_config(cli, &a.task, &a.data, method, false)?;
    if !matches!(cfg.method, Method::Ape | Method::Opro) {
        return Err(Failure::usage(format!(
            "optimize supports ape and opro, not {}",
            cfg.method
        )));
    }
    apply_search(&mut cfg, &a.search);
    cfg.instruction = None;
    cfg.validate()?;
    let (Some(train), Some(valid)) = (&cfg.datasets.train, &cfg.datasets.valid) else {
        return Err(Failure::usage("train and valid datasets are required"));
    };
    let inputs = ExperimentInputs::for_search(
        &cfg,
        Dataset::load_jsonl(train, Split::Train)?,
        Dataset::load_jsonl(valid, Split::Valid)?,
    )?;
    let llm = model(cli, &cfg)?;
    let dir = cli.out_dir.join(format!(
        "optimize-{}-{}-seed{}",
        cfg.task.family().short_name(),
        cfg.method,
        cfg.seed
    ));
    let writer = RunWriter::artifacts(&dir)?;
    writer.write_config(&cfg)?;
    let params = SamplingParams {
        seed: Some(cfg.run_seed(0)),
        ..cfg.sampling
    };
    let best = prepare_instruction(
        &cfg,
        &inputs,
        llm.as_ref(),
        execution(cli),
        Some(&writer),
        0,
        &params,
    )?;
    writer.write_text("best_instruction.txt", &format!("{}\n", best.text))?;
    if let Some(score) = best.score {
        log::info!("best score {score}");
    }
    eprintln!("artifacts: {}", dir.display());
    println!("{}", best.text);
    Ok(ExitCode::SUCCESS)
}

fn evaluate(cli: &Cli, a: &EvaluateArgs) -> Outcome {
    let mut cfg = build_config(cli, &a.task, &a.data, a.method, true)?;
    apply_search(&mut cfg, &a.search);
    if let Some(r) = a.repeats {
        cfg.repeats = r;
    }
    if let Some(text) = &a.instruction {
        cfg.instruction = Some(text.clone());
    }
    if let Some(p) = &a.instruction_file {
        let text = std::fs::read_to_string(p).map_err(|e| CoreError::io(p, e))?;
        cfg.instruction = Some(text.trim_end().to_string());
    }
    if let Some(k) = a.k {
        cfg.autocot.k = k;
    }
    if let Some(n) = a.max_plan_steps {
        cfg.max_plan_steps = n;
    }
    if a.sample_std {
        cfg.std_kind = StdKind::Sample;
    }
    cfg.validate()?;
    let inputs = ExperimentInputs::load(&cfg)?;
    let llm = model(cli, &cfg)?;
    let embedder: Box<dyn Embedder> = if a.provider_embeddings {
        let p = cfg
            .provider
            .clone()
            .ok_or_else(|| Failure::usage("--provider-embeddings needs [provider] in the config"))?;
        Box::new(OpenAiClient::new(p)?)
    } else {
        Box::new(HashedBagOfWords::new(DEFAULT_EMBEDDING_DIM))
    };
    let dir = cli.out_dir.join(format!(
        "{}-{}-seed{}",
        cfg.task.family().short_name(),
        cfg.method,
        cfg.seed
    ));
    let opts = RunOptions {
        exec: execution(cli),
        out_dir: Some(dir.clone()),
    };
    let backends = Backends {
        llm: llm.as_ref(),
        embedder: embedder.as_ref(),
    };
    let outcome = run_experiment(&cfg, &inputs, backends, &opts)?;
    let input = ReportInput {
        results: vec![MethodResult {
            task: cfg.task,
            method: cfg.method.to_string(),
            metrics: outcome.summary.clone(),
        }],
        ..ReportInput::default()
    };
    let writer = RunWriter::artifacts(&dir)?;
    for format in [ReportFormat::Markdown, ReportFormat::Csv, ReportFormat::Json] {
        writer.write_text(
            &format!("report.{}", format.extension()),
            &emit_report(&input, format)?,
        )?;
    }
    deliver(&emit_report(&input, a.format)?, None)?;
    eprintln!("run directory: {}", dir.display());
    if outcome.complete {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "error: some samples failed; see {}",
            dir.join("runs.json").display()
        );
        Ok(ExitCode::FAILURE)
    }
}

fn dir_label(d: &RunDirectory) -> String {
    d.dir.file_name().map_or_else(
        || d.dir.display().to_string(),
        |n| n.to_string_lossy().into_owned(),
    )
}

fn compare(a: &CompareArgs) -> Outcome {
    let run_a = RunDirectory::load(&a.run_a)?;
    let run_b = RunDirectory::load(&a.run_b)?;
    if run_a.config.task != run_b.config.task {
        return Err(CoreError::InvalidInput(format!(
            "runs are for different tasks: {} vs {}",
            run_a.config.task, run_b.config.task
        ))
        .into());
    }
    let columns = metric_columns(run_a.config.task.family());
    let metrics = compare_records(&run_a.records, &run_b.records, columns)?;
    let n_samples = run_a
        .records
        .iter()
        .map(|r| r.sample_id.as_str())
        .collect::<BTreeSet<_>>()
        .len();
    let input = ReportInput {
        comparisons: vec![Comparison {
            task: run_a.config.task,
            label_a: dir_label(&run_a),
            label_b: dir_label(&run_b),
            n_samples,
            metrics,
        }],
        ..ReportInput::default()
    };
    deliver(&emit_report(&input, a.format)?, a.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn report(a: &ReportArgs) -> Outcome {
    let mut input = ReportInput::default();
    let mut seen: BTreeSet<(TaskFamily, String)> = BTreeSet::new();
    for path in &a.runs {
        let run = RunDirectory::load(path)?;
        let family = run.config.task.family();
        let mut label = run.config.method.to_string();
        if !seen.insert((family, label.clone())) {
            label = format!("{label} ({})", dir_label(&run));
        }
        input.results.push(MethodResult {
            task: run.config.task,
            method: label.clone(),
            metrics: run.reaggregate()?,
        });
        if a.tokens {
            let instructions: Vec<&str> = run.reports.iter().map(|r| r.instruction.as_str()).collect();
            input.tokens.push(TokenUsage {
                task: family,
                method: label,
                mean_tokens: count_instruction_tokens(&instructions, &a.tokenizer)?,
            });
        }
    }
    deliver(&emit_report(&input, a.format)?, a.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
