//! Oracle-backed check suites shared by the integration tests and the acceptance gate.
//!
//! Each suite returns the number of checks it ran, or a message describing the first
//! mismatch. Expected values come from independent computations in this file or from
//! frozen external references, never from the code under test.
#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::BTreeSet;

use codeprompt_core::harness::report::{build_token_table, percent};
use codeprompt_core::harness::{
    emit_report, paired_t_test, summarize, ReportFormat, ReportInput, StdKind, TokenUsage,
};
use codeprompt_core::instructgen::{
    ape_select, opro_optimize, run_ape, ApeConfig, OproBudget, OproConfig, OproTrajectory,
};
use codeprompt_core::reasoning::{autocot_build, AutoCotConfig, DemoExemplar};
use codeprompt_core::{
    count_instruction_tokens, CandidateInstruction, CandidateSource, CoreError, Execution, Sample,
    TaskFamily, TaskKind,
};
use codeprompt_llm::{Embedder, HashedBagOfWords, MockModel, MockRule, MockScript, SamplingParams};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn close(actual: f64, expected: f64, tol: f64, what: &str) -> Result<(), String> {
    check((actual - expected).abs() <= tol, || {
        format!("{what}: got {actual}, expected {expected} (tolerance {tol})")
    })
}

pub fn api_sample(id: &str, query: &str, truth: &str) -> Sample {
    Sample {
        id: id.into(),
        task: TaskKind::ApiRecommendation,
        input: query.into(),
        references: vec![],
        truth_apis: vec![truth.into()],
    }
}

// ---------------------------------------------------------------- statistics

/// Paired t statistic by the textbook formula: mean difference over its standard error.
pub fn textbook_t(a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    mean / (var / n).sqrt()
}

pub const TTEST_A: [f64; 10] = [0.61, 0.72, 0.55, 0.80, 0.67, 0.59, 0.74, 0.70, 0.63, 0.77];
pub const TTEST_B: [f64; 10] = [0.58, 0.69, 0.57, 0.71, 0.60, 0.55, 0.70, 0.71, 0.57, 0.72];
/// `scipy.stats.ttest_rel(TTEST_A, TTEST_B)` with scipy 1.15.3.
pub const SCIPY_T: f64 = 3.576498089287506;
pub const SCIPY_P: f64 = 0.0059633173196744094;

pub fn stats_suite() -> Result<usize, String> {
    let mut checks = 0;
    for c in [0.5, 3.0, 42.0] {
        let s = summarize(&[c; 5], StdKind::Population).map_err(|e| e.to_string())?;
        check(s.cv == Some(0.0), || {
            format!("CV of constant {c} series is {:?}", s.cv)
        })?;
        checks += 1;
    }
    let s = summarize(&[1.0, 2.0, 3.0], StdKind::Population).map_err(|e| e.to_string())?;
    close(s.cv.unwrap_or(f64::NAN), 0.4082, 1e-4, "CV([1,2,3])")?;
    checks += 1;

    let r = paired_t_test(&TTEST_A, &TTEST_B).map_err(|e| e.to_string())?;
    close(
        r.t_statistic,
        textbook_t(&TTEST_A, &TTEST_B),
        1e-6,
        "t vs textbook formula",
    )?;
    close(r.t_statistic, SCIPY_T, 1e-6, "t vs scipy")?;
    close(r.p_value, SCIPY_P, 1e-6, "p vs scipy")?;
    check(r.significant_at_05 && r.n_pairs == 10, || format!("{r:?}"))?;
    checks += 3;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..100 {
        let n = rng.gen_range(2..40);
        let a: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
        let ab = paired_t_test(&a, &b).map_err(|e| e.to_string())?;
        let ba = paired_t_test(&b, &a).map_err(|e| e.to_string())?;
        check(
            ab.t_statistic == -ba.t_statistic && ab.p_value == ba.p_value,
            || format!("asymmetric t-test on random pair {i}: {ab:?} vs {ba:?}"),
        )?;
        close(
            ab.t_statistic,
            textbook_t(&a, &b),
            1e-9 * ab.t_statistic.abs().max(1.0),
            "random pair t",
        )?;
        checks += 1;
    }
    Ok(checks)
}

// ---------------------------------------------------------------- APE planted optimum

const APE_STYLES: [&str; 5] = [
    "Name the Java APIs that answer the query.",
    "List library methods solving the question.",
    "Suggest fully qualified API calls for this request.",
    "Recommend standard library functions relevant here.",
    "Return dotted API names that fit the task.",
];

fn ape_fixture() -> (Vec<Sample>, Vec<Sample>) {
    let train = (0..6)
        .map(|i| {
            api_sample(
                &format!("t{i}"),
                &format!("train query t{i}: split text"),
                "java.lang.String.split",
            )
        })
        .collect();
    let valid = (0..8)
        .map(|i| {
            api_sample(
                &format!("v{i}"),
                &format!("valid query v{i}: read lines"),
                "java.io.BufferedReader.readLine",
            )
        })
        .collect();
    (train, valid)
}

/// One seeded trial: every candidate gets random per-sample log-probabilities and the planted
/// one is strictly above all others on every sample. Returns (planted, selected).
pub fn ape_planted_trial(seed: u64) -> Result<(String, CandidateInstruction), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<&str> = APE_STYLES.to_vec();
    order.shuffle(&mut rng);
    let planted = order[rng.gen_range(0..order.len())];
    let (train, valid) = ape_fixture();

    let proposal: String = order.iter().map(|c| format!("<INS>{c}</INS>\n")).collect();
    let mut script = MockScript::strict().rule(MockRule {
        prompt_contains: vec!["wrapped as <INS>instruction</INS>".into()],
        text: Some(proposal),
        ..Default::default()
    });
    for s in &valid {
        let others: Vec<f64> = order.iter().map(|_| rng.gen_range(-6.0..-0.5)).collect();
        let top = others.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for (c, lp) in order.iter().zip(&others) {
            let lp = if *c == planted {
                top + rng.gen_range(0.01..0.5)
            } else {
                *lp
            };
            script = script.rule(MockRule {
                prompt_contains: vec![c.to_string(), s.input.clone()],
                target_logprob: Some(lp),
                ..Default::default()
            });
        }
    }
    let llm = MockModel::new(script).map_err(|e| e.to_string())?;
    let cfg = ApeConfig {
        n_candidates: 5,
        n_demos: 3,
        scoring_set_size: valid.len(),
        ..Default::default()
    };
    let params = SamplingParams::default().with_seed(seed);
    let outcome = run_ape(
        &llm,
        &TaskKind::ApiRecommendation,
        &train,
        &valid,
        &cfg,
        &params,
        Execution::default(),
    )
    .map_err(|e| format!("seed {seed}: {e}"))?;
    check(outcome.candidates.len() == 5, || {
        format!("seed {seed}: {} candidates", outcome.candidates.len())
    })?;
    Ok((planted.to_string(), outcome.best))
}

pub type Transform = Box<dyn Fn(f64) -> f64>;

/// Uniform strictly increasing transforms applied to every score.
pub fn monotone_transforms() -> Vec<(&'static str, Transform)> {
    vec![
        ("exp", Box::new(f64::exp)),
        ("affine", Box::new(|x| 3.0 * x + 7.0)),
        ("cube", Box::new(|x| x * x * x)),
        ("atan", Box::new(f64::atan)),
        ("logistic", Box::new(|x| 1.0 / (1.0 + (-x).exp()))),
    ]
}

pub fn argmax_invariant(candidates: &[CandidateInstruction]) -> Result<(), String> {
    let base = ape_select(candidates).map_err(|e| e.to_string())?;
    for (name, f) in monotone_transforms() {
        let mapped: Vec<CandidateInstruction> = candidates
            .iter()
            .map(|c| CandidateInstruction {
                score: c.score.map(&f),
                ..c.clone()
            })
            .collect();
        let sel = ape_select(&mapped).map_err(|e| e.to_string())?;
        check(sel.text == base.text, || {
            format!(
                "{name} transform changed the selection from {:?} to {:?}",
                base.text, sel.text
            )
        })?;
    }
    Ok(())
}

pub fn ape_planted_suite(trials: u64) -> Result<usize, String> {
    let mut recovered = 0;
    for seed in 0..trials {
        let (planted, best) = ape_planted_trial(seed)?;
        check(best.text == planted, || {
            format!("seed {seed}: selected {:?}, planted {planted:?}", best.text)
        })?;
        check(best.source == CandidateSource::Ape, || {
            format!("seed {seed}: source {:?}", best.source)
        })?;
        recovered += 1;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for _ in 0..trials {
        // Scores in (-1, 1) keep the cube and logistic maps strictly increasing in floats.
        let cands: Vec<CandidateInstruction> = APE_STYLES
            .iter()
            .map(|t| {
                CandidateInstruction::new(*t, CandidateSource::Ape, 0)
                    .scored(rng.gen_range(-1.0..1.0))
                    .unwrap()
            })
            .collect();
        argmax_invariant(&cands)?;
    }
    Ok(recovered)
}

// ---------------------------------------------------------------- OPRO traces

/// `(step, instruction, score)` for every scored trajectory entry.
pub type Trace = Vec<(u32, String, f64)>;

pub fn trace(t: &OproTrajectory) -> Trace {
    t.scored()
        .map(|(s, v)| (s.step, s.instruction.clone(), v))
        .collect()
}

/// Mock whose step-`i` proposal is `{prefix}-{i}`: the rule keyed on the newest instruction
/// wins because rules are tried highest first.
fn chain_mock(seed_instruction: &str, prefix: &str, len: u32) -> MockModel {
    let mut script = MockScript::strict();
    for i in (1..=len).rev() {
        let prev = if i == 1 {
            seed_instruction.to_string()
        } else {
            format!("{prefix}-{}", i - 1)
        };
        script = script.rule(MockRule {
            prompt_contains: vec![format!("<INS>{prev}</INS>")],
            text: Some(format!("<INS>{prefix}-{i}</INS>")),
            ..Default::default()
        });
    }
    MockModel::new(script).expect("valid script")
}

fn opro_cfg(max_steps: u32, patience: u32) -> OproConfig {
    OproConfig {
        budget: OproBudget {
            max_steps,
            candidates_per_step: 1,
            patience,
        },
        ..Default::default()
    }
}

const OPRO_SEED: &str = "Recommend APIs for the query.";

fn running_best_non_decreasing(t: &Trace) -> Result<(), String> {
    let mut best = f64::NEG_INFINITY;
    let mut per_step = Vec::new();
    for (step, _, v) in t {
        best = best.max(*v);
        per_step.push((*step, best));
    }
    check(per_step.windows(2).all(|w| w[1].1 >= w[0].1), || {
        format!("best_so_far decreased: {per_step:?}")
    })
}

pub fn opro_suite() -> Result<usize, String> {
    let task = TaskKind::ApiRecommendation;
    let params = SamplingParams::default().with_seed(3);
    let mut checks = 0;

    // Strictly increasing scripted scores: improves every step until max_steps.
    let llm = chain_mock(OPRO_SEED, "better", 12);
    let mut eval = |s: &str| -> codeprompt_core::Result<f64> {
        Ok(match s.strip_prefix("better-") {
            Some(i) => 0.1 + 0.05 * i.parse::<f64>().unwrap(),
            None => 0.1,
        })
    };
    let (best, t) = opro_optimize(&llm, &task, OPRO_SEED, &[], &mut eval, &opro_cfg(6, 3), &params)
        .map_err(|e| e.to_string())?;
    let expected: Trace = std::iter::once((0, OPRO_SEED.to_string(), 0.1))
        .chain((1..=6).map(|i| (i, format!("better-{i}"), 0.1 + 0.05 * f64::from(i))))
        .collect();
    check(trace(&t) == expected, || {
        format!("monotone trace {:?}", trace(&t))
    })?;
    check(best.text == "better-6" && best.iteration == 6, || {
        format!("best {best:?}")
    })?;
    check(llm.prompts().len() == 6, || {
        format!("{} meta-prompt calls", llm.prompts().len())
    })?;
    running_best_non_decreasing(&trace(&t))?;
    checks += 4;

    // Meta-prompts show at most top_k pairs, worst first.
    for prompt in llm.prompts() {
        let scores: Vec<f64> = prompt
            .lines()
            .filter_map(|l| l.strip_prefix("Score: "))
            .map(|s| s.parse().unwrap())
            .collect();
        check(
            scores.len() <= 8 && scores.windows(2).all(|w| w[0] <= w[1]),
            || format!("meta-prompt scores {scores:?}"),
        )?;
        checks += 1;
    }

    // Only worse candidates: stops after exactly `patience` stagnant steps with the seed.
    let llm = chain_mock(OPRO_SEED, "worse", 12);
    let mut eval = |s: &str| -> codeprompt_core::Result<f64> { Ok(if s == OPRO_SEED { 0.5 } else { 0.2 }) };
    let (best, t) = opro_optimize(&llm, &task, OPRO_SEED, &[], &mut eval, &opro_cfg(10, 3), &params)
        .map_err(|e| e.to_string())?;
    let expected: Trace = std::iter::once((0, OPRO_SEED.to_string(), 0.5))
        .chain((1..=3).map(|i| (i, format!("worse-{i}"), 0.2)))
        .collect();
    check(trace(&t) == expected, || {
        format!("stagnation trace {:?}", trace(&t))
    })?;
    check(
        best.text == OPRO_SEED && best.source == CandidateSource::Manual,
        || format!("best {best:?}"),
    )?;
    checks += 2;

    // Improvement resets patience: improve at step 2, then three stagnant steps.
    let llm = chain_mock(OPRO_SEED, "mixed", 12);
    let mut eval = |s: &str| -> codeprompt_core::Result<f64> {
        Ok(match s {
            "mixed-2" => 0.9,
            "mixed-1" => 0.4,
            _ if s == OPRO_SEED => 0.5,
            _ => 0.3,
        })
    };
    let (best, t) = opro_optimize(&llm, &task, OPRO_SEED, &[], &mut eval, &opro_cfg(10, 3), &params)
        .map_err(|e| e.to_string())?;
    check(t.steps_completed() == 5 && best.text == "mixed-2", || {
        format!("mixed trace {:?}", trace(&t))
    })?;
    running_best_non_decreasing(&trace(&t))?;
    checks += 1;

    // Zero budget: the seed alone, no model calls.
    let llm = MockModel::new(MockScript::strict()).map_err(|e| e.to_string())?;
    let mut eval = |_: &str| -> codeprompt_core::Result<f64> { Ok(0.25) };
    let (best, t) = opro_optimize(&llm, &task, OPRO_SEED, &[], &mut eval, &opro_cfg(0, 3), &params)
        .map_err(|e| e.to_string())?;
    check(
        t.steps.len() == 1 && best.text == OPRO_SEED && llm.prompts().is_empty(),
        || format!("zero budget trajectory {:?}", t.steps),
    )?;
    checks += 1;

    // Evaluation failure: abort with the partial trajectory.
    let llm = chain_mock(OPRO_SEED, "fail", 12);
    let calls = RefCell::new(0);
    let mut eval = |_: &str| -> codeprompt_core::Result<f64> {
        *calls.borrow_mut() += 1;
        if *calls.borrow() == 3 {
            Err(CoreError::Optimization("evaluator down".into()))
        } else {
            Ok(0.5)
        }
    };
    let abort = opro_optimize(&llm, &task, OPRO_SEED, &[], &mut eval, &opro_cfg(10, 5), &params)
        .err()
        .ok_or("evaluation failure did not abort")?;
    let kept = abort.trajectory.as_ref().map(|t| t.steps.len());
    check(kept == Some(2), || {
        format!("partial trajectory kept {kept:?} entries")
    })?;
    checks += 1;

    // Non-finite scores are discarded with a warning and never become best.
    let llm = chain_mock(OPRO_SEED, "nan", 12);
    let mut eval =
        |s: &str| -> codeprompt_core::Result<f64> { Ok(if s == OPRO_SEED { 0.1 } else { f64::NAN }) };
    let (best, t) = opro_optimize(&llm, &task, OPRO_SEED, &[], &mut eval, &opro_cfg(2, 5), &params)
        .map_err(|e| e.to_string())?;
    let warned = t
        .steps
        .iter()
        .filter(|s| s.score.is_none() && s.warning.is_some())
        .count();
    check(best.text == OPRO_SEED && warned == 2, || {
        format!("non-finite handling {:?}", t.steps)
    })?;
    checks += 1;
    Ok(checks)
}

// ---------------------------------------------------------------- AutoCoT clustering

const GROUP_A: [&str; 10] = [
    "sort integer array ascending order",
    "sort integer list descending order",
    "array sort ascending integer values",
    "order integer array elements ascending",
    "sort array integers order descending",
    "ascending sort of integer array",
    "sort list integer values ascending",
    "integer array order sort descending",
    "descending sort integer list values",
    "sort array values integer ascending order",
];

const GROUP_B: [&str; 10] = [
    "open file read lines text",
    "read text file lines buffer",
    "file read text content lines",
    "read lines from text file buffer",
    "open text file read content",
    "buffer file text read lines quickly",
    "read file content text buffer",
    "text file open read buffer lines",
    "lines read file text open now",
    "read buffer content file text lines",
];

/// Twenty questions interleaved from two groups with disjoint vocabularies.
pub fn bipartite_questions() -> Vec<Sample> {
    (0..20)
        .map(|i| {
            let q = if i % 2 == 0 {
                GROUP_A[i / 2]
            } else {
                GROUP_B[i / 2]
            };
            api_sample(
                &format!("q{i:02}"),
                q,
                if i % 2 == 0 {
                    "java.util.Arrays.sort"
                } else {
                    "java.nio.file.Files.readAllLines"
                },
            )
        })
        .collect()
}

/// Minimum-cost 2-partition by exhaustive search. Cost of a cluster is the sum of pairwise
/// cosine distances divided by its size, which for unit vectors equals its squared error to
/// the cluster mean. Returns the cluster containing item 0.
pub fn exhaustive_two_partition(vectors: &[Vec<f64>]) -> (BTreeSet<usize>, f64) {
    let n = vectors.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let norm = |a: &[f64]| dot(a, a).sqrt();
    let mut dist = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            dist[i][j] = 1.0 - dot(&vectors[i], &vectors[j]) / (norm(&vectors[i]) * norm(&vectors[j]));
        }
    }
    let cost = |members: &[usize]| -> f64 {
        if members.is_empty() {
            return f64::INFINITY;
        }
        let mut s = 0.0;
        for (x, &i) in members.iter().enumerate() {
            for &j in &members[x + 1..] {
                s += dist[i][j];
            }
        }
        s / members.len() as f64
    };
    let mut best = (BTreeSet::new(), f64::INFINITY);
    // Item 0 is fixed in the first cluster; the mask covers items 1..n.
    for mask in 0u32..(1 << (n - 1)) {
        let (mut a, mut b) = (vec![0], Vec::new());
        for i in 1..n {
            if mask >> (i - 1) & 1 == 0 {
                a.push(i);
            } else {
                b.push(i);
            }
        }
        let c = cost(&a) + cost(&b);
        if c < best.1 {
            best = (a.into_iter().collect(), c);
        }
    }
    best
}

fn chain_script() -> MockScript {
    MockScript::strict().rule(MockRule {
        prompt_contains: vec!["Let's think step by step.".into()],
        text: Some("The query names a standard task, so a core library call answers it.".into()),
        ..Default::default()
    })
}

pub fn autocot_run(seed: u64, k: usize, train: &[Sample]) -> Result<Vec<DemoExemplar>, String> {
    let llm = MockModel::new(chain_script()).map_err(|e| e.to_string())?;
    let cfg = AutoCotConfig {
        k,
        seed,
        ..Default::default()
    };
    autocot_build(
        &llm,
        &HashedBagOfWords::default(),
        "Recommend APIs for the query.",
        train,
        &cfg,
        &SamplingParams::default().with_seed(seed),
        Execution::default(),
    )
    .map_err(|e| e.to_string())
}

pub fn autocot_suite(seed: u64) -> Result<usize, String> {
    let train = bipartite_questions();
    let texts: Vec<String> = train.iter().map(|s| s.input.clone()).collect();
    let vectors = HashedBagOfWords::default()
        .embed(&texts)
        .map_err(|e| e.to_string())?;
    let (optimal, _) = exhaustive_two_partition(&vectors);
    let evens: BTreeSet<usize> = (0..20).step_by(2).collect();
    check(optimal == evens, || {
        format!("fixture is not bipartite under the embedder: {optimal:?}")
    })?;

    let km = codeprompt_core::reasoning::kmeans(&vectors, 2, seed, 100).map_err(|e| e.to_string())?;
    let found: BTreeSet<usize> = (0..20)
        .filter(|&i| km.assignments[i] == km.assignments[0])
        .collect();
    check(found == optimal, || {
        format!("k-means partition {found:?} differs from optimum {optimal:?}")
    })?;

    let first = autocot_run(seed, 2, &train)?;
    check(first.len() == 2, || format!("{} exemplars", first.len()))?;
    let groups: BTreeSet<bool> = first
        .iter()
        .map(|e| GROUP_A.contains(&e.question.as_str()))
        .collect();
    check(groups.len() == 2, || {
        format!("both exemplars from one group: {first:?}")
    })?;
    check(
        first.iter().map(|e| e.cluster_id).collect::<Vec<_>>() == vec![0, 1],
        || "cluster ids not ascending".into(),
    )?;
    for rerun in 1..5 {
        let again = autocot_run(seed, 2, &train)?;
        check(again == first, || {
            format!("rerun {rerun} produced a different exemplar set")
        })?;
    }

    let all = autocot_run(seed, train.len(), &train)?;
    let questions: BTreeSet<&str> = all.iter().map(|e| e.question.as_str()).collect();
    check(all.len() == 20 && questions.len() == 20, || {
        "k = n is not all singletons".into()
    })?;
    Ok(9)
}

// ---------------------------------------------------------------- token table

/// Average instruction tokens per method and task as reported for OPRO and APE.
pub const TABLE_TOKENS: [(&str, [f64; 3]); 2] =
    [("OPRO", [41.92, 36.78, 68.54]), ("APE", [35.16, 34.27, 56.16])];
pub const TABLE_APE_CELLS: [&str; 3] = ["35.16 (-6.76)", "34.27 (-2.51)", "56.16 (-12.38)"];

pub fn token_table_suite() -> Result<usize, String> {
    let words = |n: usize| vec!["tok"; n].join(" ");
    let mean = count_instruction_tokens(&[words(30), words(40)], "whitespace").map_err(|e| e.to_string())?;
    check(mean == 35.0, || format!("[30, 40] gave {mean}"))?;
    let single = count_instruction_tokens(&[words(17)], "whitespace").map_err(|e| e.to_string())?;
    check(single == 17.0, || format!("single instruction gave {single}"))?;
    check(
        matches!(
            count_instruction_tokens(&["a"], "sentencepiece"),
            Err(CoreError::Config(_))
        ),
        || "unknown tokenizer accepted".into(),
    )?;

    let families = [
        TaskFamily::ApiRecommendation,
        TaskFamily::CodeTranslation,
        TaskFamily::CodeSummarization,
    ];
    let tokens: Vec<TokenUsage> = TABLE_TOKENS
        .iter()
        .flat_map(|(m, vals)| {
            families.iter().zip(vals).map(|(f, v)| TokenUsage {
                task: *f,
                method: m.to_string(),
                mean_tokens: *v,
            })
        })
        .collect();
    let table = build_token_table(&tokens).ok_or("no token table")?;
    check(table.tasks == families, || {
        format!("column order {:?}", table.tasks)
    })?;
    check(table.rows[0].cells.iter().all(|c| c.delta.is_none()), || {
        "baseline row has deltas".into()
    })?;
    let md = emit_report(
        &ReportInput {
            tokens,
            ..Default::default()
        },
        ReportFormat::Markdown,
    )
    .map_err(|e| e.to_string())?;
    let ape_row = md
        .lines()
        .find(|l| l.starts_with("| APE |"))
        .ok_or("no APE row")?;
    let expected = format!("| APE | {} |", TABLE_APE_CELLS.join(" | "));
    check(ape_row == expected, || {
        format!("APE row {ape_row:?}, expected {expected:?}")
    })?;
    check(md.contains("| OPRO | 41.92 | 36.78 | 68.54 |"), || {
        "OPRO baseline row missing".into()
    })?;
    check(
        md.contains("| Method | API Recommendation | Code Translation | Code Summarization |"),
        || "token table header".into(),
    )?;
    check(percent(0.3516) == "35.16", || "percent formatting".into())?;
    Ok(9)
}
