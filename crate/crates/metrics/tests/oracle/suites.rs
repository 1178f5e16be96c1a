//! Fixture suites: each returns the number of fixtures checked, or a description of the
//! first disagreement with the oracle.

use codeprompt_metrics::meteor::align;
use codeprompt_metrics::subtree::syntax_match_counts;
use codeprompt_metrics::{
    bleu4, codebleu, dataflow_match, extract_dataflow, meteor_lite, parse_code, rouge_l, syntax_match,
    weighted_bleu4, CodeBleuWeights, DataflowEdge, Language, Relation,
};

use super::DefUse;

pub const TOL: f64 = 1e-9;

fn ws(s: &str) -> Vec<&str> {
    s.split_whitespace().collect()
}

fn close(what: &str, got: f64, want: f64) -> Result<(), String> {
    if (got - want).abs() <= TOL && (0.0..=1.0).contains(&got) {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, oracle {want}"))
    }
}

fn exact_one(what: &str, got: f64) -> Result<(), String> {
    if got == 1.0 {
        Ok(())
    } else {
        Err(format!("{what}: identity gave {got}, expected exactly 1.0"))
    }
}

pub const BLEU_FIXTURES: &[(&str, &[&str])] = &[
    ("the cat sat", &["the cat sat down"]),
    ("the cat is on the mat", &["there is a cat on the mat"]),
    ("a b c", &["x y z"]),
    ("the the the the", &["the cat"]),
    (
        "it is a guide to action",
        &[
            "it is a guide to action that ensures",
            "it is the guiding principle",
        ],
    ),
    ("int x = a + b ;", &["int y = a + b ;"]),
    (
        "return sum of values",
        &["returns the sum of all values", "sum values"],
    ),
    ("a b a b a b c", &["a b c a b"]),
    ("one", &["one two three"]),
    ("x y z w v", &["x y z"]),
    (
        "get the max value from the list",
        &["return the maximum value in a list"],
    ),
    (
        "if ( x > 0 ) { return x ; }",
        &["if ( y > 0 ) { return y ; } else { return 0 ; }"],
    ),
];

pub fn bleu_suite() -> Result<usize, String> {
    for (cand, refs) in BLEU_FIXTURES {
        let c = ws(cand);
        let r: Vec<Vec<&str>> = refs.iter().map(|s| ws(s)).collect();
        close(
            &format!("bleu4({cand:?})"),
            bleu4(&c, &r),
            super::bleu(&c, &r, &|_| 1.0),
        )?;
        let kw = |t: &str| if Language::Java.is_keyword(t) { 4.0 } else { 1.0 };
        close(
            &format!("weighted_bleu4({cand:?})"),
            weighted_bleu4(&c, &r, |t| kw(t)),
            super::bleu(&c, &r, &kw),
        )?;
        exact_one(
            &format!("bleu4 identity {cand:?}"),
            bleu4(&c, std::slice::from_ref(&c)),
        )?;
    }
    Ok(BLEU_FIXTURES.len())
}

pub const ROUGE_FIXTURES: &[(&str, &str)] = &[
    ("a b c d", "a c b d"),
    ("the cat sat on the mat", "the cat was on the mat"),
    ("a b c", "x y z"),
    ("returns the sum", "returns the sum of two numbers"),
    ("sum of two numbers is returned", "returns the sum"),
    ("a a a b", "a b a b"),
    ("police killed the gunman", "the gunman police killed"),
    ("x", "x"),
    (
        "get file name from path",
        "extract the name of a file from a path string",
    ),
    (
        "one two three four five six seven eight",
        "eight seven six five four three two one",
    ),
    (
        "check if list is empty",
        "checks whether the given list is empty or null",
    ),
];

pub fn rouge_suite() -> Result<usize, String> {
    for (cand, reference) in ROUGE_FIXTURES {
        let (c, r) = (ws(cand), ws(reference));
        close(
            &format!("rouge_l({cand:?})"),
            rouge_l(&c, &r),
            super::rouge_l(&c, &r),
        )?;
        exact_one(&format!("rouge_l identity {cand:?}"), rouge_l(&c, &c))?;
    }
    let empty: Vec<&str> = vec![];
    close("rouge_l(empty)", rouge_l(&empty, &ws("a b")), 0.0)?;
    Ok(ROUGE_FIXTURES.len())
}

pub type Alignment = &'static [(usize, usize)];

/// Candidate, reference and the alignment worked out by hand.
pub const METEOR_FIXTURES: &[(&str, &str, Alignment)] = &[
    ("cats sat", "cat sits", &[(0, 0)]),
    (
        "the cat sat on the mat",
        "the cat sat on the mat",
        &[(0, 0), (1, 1), (2, 2), (3, 3), (4, 4), (5, 5)],
    ),
    ("a", "a", &[(0, 0)]),
    (
        "on the mat sat the cat",
        "the cat sat on the mat",
        &[(0, 3), (1, 4), (2, 5), (3, 2), (4, 0), (5, 1)],
    ),
    (
        "returns the maximum value",
        "return the max value",
        &[(0, 0), (1, 1), (3, 3)],
    ),
    (
        "sorted list of items",
        "sorts the items list",
        &[(0, 0), (1, 3), (3, 2)],
    ),
    ("get the file name", "gets file names", &[(0, 0), (2, 1), (3, 2)]),
    ("alpha beta", "gamma delta", &[]),
    ("a b a b", "b a b a", &[(0, 1), (1, 2), (2, 3), (3, 0)]),
    (
        "compute the sum of two numbers",
        "computes sum of the two given numbers",
        &[(0, 0), (1, 3), (2, 1), (3, 2), (4, 4), (5, 6)],
    ),
    ("print hello", "print hello world", &[(0, 0), (1, 1)]),
];

pub fn meteor_suite() -> Result<usize, String> {
    for (cand, reference, hand) in METEOR_FIXTURES {
        let (c, r) = (ws(cand), ws(reference));
        let got_pairs = align(&c, &r);
        if got_pairs != *hand {
            return Err(format!(
                "meteor alignment {cand:?}: got {got_pairs:?}, hand {hand:?}"
            ));
        }
        let want = super::meteor_from_alignment(hand, c.len(), r.len());
        close(&format!("meteor_lite({cand:?})"), meteor_lite(&c, &r), want)?;
    }
    Ok(METEOR_FIXTURES.len())
}

pub const SYNTAX_FIXTURES: &[(Language, &str, &str)] = &[
    (
        Language::Python,
        "def f():\n    pass\n",
        "def f():\n    return 1\n",
    ),
    (Language::Python, "x = 1\ny = x\nz = 2\n", "x = 1\ny = x\n"),
    (Language::Python, "x = 1\n", "x = 1\ny = x\n"),
    (
        Language::Python,
        "def add(a, b):\n    return a + b\n",
        "def add(x, y):\n    s = x + y\n    return s\n",
    ),
    (
        Language::Python,
        "for i in range(10):\n    print(i)\n",
        "i = 0\nwhile i < 10:\n    print(i)\n    i += 1\n",
    ),
    (
        Language::Python,
        "if a:\n    b = 1\nelse:\n    b = 2\n",
        "b = 1 if a else 2\n",
    ),
    (
        Language::Java,
        "int add(int a, int b) { return a + b; }",
        "int add(int x, int y) { int s = x + y; return s; }",
    ),
    (
        Language::Java,
        "for (int i = 0; i < n; i++) { sum += i; }",
        "int i = 0; while (i < n) { sum += i; i++; }",
    ),
    (
        Language::Java,
        "String s = \"a\"; int n = s.length();",
        "String t = \"b\"; int m = t.length(); System.out.println(m);",
    ),
    (
        Language::Java,
        "if (x > 0) { y = 1; }",
        "if (x > 0) { y = 1; } else { y = 2; }",
    ),
    (Language::Java, "return a * b;", "return a * b;"),
];

pub fn syntax_suite() -> Result<usize, String> {
    for (lang, cand, reference) in SYNTAX_FIXTURES {
        let c = parse_code(cand, *lang).map_err(|e| e.to_string())?;
        let r = parse_code(reference, *lang).map_err(|e| e.to_string())?;
        let (om, ot) = super::syntax_match(&c, &r);
        let (m, t) = syntax_match_counts(&c, &r);
        if (m, t) != (om, ot) {
            return Err(format!("syntax counts {cand:?}: got {m}/{t}, oracle {om}/{ot}"));
        }
        close(
            &format!("syntax_match({cand:?})"),
            syntax_match(&c, &r),
            om as f64 / ot as f64,
        )?;
        exact_one(&format!("syntax identity {reference:?}"), syntax_match(&r, &r))?;
    }
    Ok(SYNTAX_FIXTURES.len())
}

pub fn dataflow_fixtures() -> Vec<(Language, &'static str, Vec<DefUse>)> {
    use super::du;
    vec![
        (
            Language::Python,
            "x = 1\ny = x\n",
            vec![du("x", 1, 2, true, Some("y"))],
        ),
        (
            Language::Python,
            "a = 1\nb = a\na = b\nc = a\n",
            vec![
                du("a", 1, 2, true, Some("b")),
                du("b", 2, 3, true, Some("a")),
                du("a", 3, 4, true, Some("c")),
            ],
        ),
        (Language::Python, "x = 1\ny = 2\n", vec![]),
        (
            Language::Python,
            "def f(a, b):\n    c = a + b\n    return c * a\n",
            vec![
                du("a", 1, 2, false, Some("c")),
                du("b", 1, 2, false, Some("c")),
                du("c", 2, 3, false, None),
                du("a", 1, 3, false, None),
            ],
        ),
        (
            Language::Python,
            "x = 0\nfor i in range(3):\n    x = x + i\nprint(x)\n",
            vec![
                du("x", 1, 3, false, Some("x")),
                du("i", 2, 3, false, Some("x")),
                du("x", 3, 4, false, None),
            ],
        ),
        (
            Language::Python,
            "n = 5\nn += 1\nm = n\n",
            vec![du("n", 1, 2, false, Some("n")), du("n", 2, 3, true, Some("m"))],
        ),
        (
            Language::Python,
            "s = 'a'\nt = s.upper()\nu = len(t)\n",
            vec![du("s", 1, 2, false, Some("t")), du("t", 2, 3, false, Some("u"))],
        ),
        (
            Language::Java,
            "int a = 1;\nint b = a;\nint c = a + b;\n",
            vec![
                du("a", 1, 2, true, Some("b")),
                du("a", 1, 3, false, Some("c")),
                du("b", 2, 3, false, Some("c")),
            ],
        ),
        (
            Language::Java,
            "int f(int n) {\n  int s = 0;\n  s = s + n;\n  return s;\n}\n",
            vec![
                du("s", 2, 3, false, Some("s")),
                du("n", 1, 3, false, Some("s")),
                du("s", 3, 4, false, None),
            ],
        ),
        (
            Language::Java,
            "int x = 0;\nx++;\nint y = x;\n",
            vec![du("x", 1, 2, false, Some("x")), du("x", 2, 3, true, Some("y"))],
        ),
        (
            Language::Java,
            "String s = \"hi\";\nint n = s.length();\nSystem.out.println(n);\n",
            vec![du("s", 1, 2, false, Some("n")), du("n", 2, 3, false, None)],
        ),
        (
            Language::Java,
            "int t = 0;\nfor (int v : arr) {\n  t += v;\n}\n",
            vec![du("t", 1, 3, false, Some("t")), du("v", 2, 3, false, Some("t"))],
        ),
    ]
}

pub fn edge_rows(edges: &[DataflowEdge]) -> Vec<DefUse> {
    edges
        .iter()
        .map(|e| {
            super::du(
                &e.variable,
                e.def_position.line,
                e.use_position.line,
                e.relation == Relation::ComesFrom,
                e.sink.as_deref(),
            )
        })
        .collect()
}

/// Pairs of dataflow fixture indices `(candidate, reference)` scored with dataflow match.
pub const DATAFLOW_PAIRS: &[(usize, usize)] = &[
    (0, 0),
    (1, 0),
    (0, 1),
    (3, 4),
    (4, 3),
    (5, 0),
    (6, 3),
    (7, 8),
    (8, 7),
    (9, 7),
    (10, 8),
    (11, 8),
    (2, 0),
    (0, 2),
];

pub fn dataflow_suite() -> Result<usize, String> {
    let fixtures = dataflow_fixtures();
    let mut extracted = Vec::new();
    for (lang, src, table) in &fixtures {
        let tree = parse_code(src, *lang).map_err(|e| e.to_string())?;
        let edges = extract_dataflow(&tree);
        for e in &edges {
            if e.def_position >= e.use_position {
                return Err(format!("edge {e:?} in {src:?} does not flow forward"));
            }
        }
        let rows = edge_rows(&edges);
        if rows != *table {
            return Err(format!("def-use table for {src:?}: got {rows:?}, hand {table:?}"));
        }
        extracted.push(edges);
    }
    for &(ci, ri) in DATAFLOW_PAIRS {
        if fixtures[ci].0 != fixtures[ri].0 {
            return Err(format!("pair ({ci}, {ri}) mixes languages"));
        }
        let want = super::dataflow_match(&fixtures[ci].2, &fixtures[ri].2);
        let got = dataflow_match(&extracted[ci], &extracted[ri]);
        close(&format!("dataflow_match pair ({ci}, {ri})"), got, want)?;
    }
    for (i, e) in extracted.iter().enumerate() {
        if !e.is_empty() {
            exact_one(&format!("dataflow identity {i}"), dataflow_match(e, e))?;
        }
    }
    Ok(fixtures.len() + DATAFLOW_PAIRS.len())
}

pub const CODEBLEU_FIXTURES: &[(Language, &str, &str)] = &[
    (
        Language::Python,
        "def add(a, b):\n    return a + b\n",
        "def add(x, y):\n    s = x + y\n    return s\n",
    ),
    (Language::Python, "x = 1\ny = x\n", "x = 1\ny = x\n"),
    (Language::Python, "x = 1\ny = x + 1\n", "a = 1\nb = a\n"),
    (
        Language::Python,
        "total = 0\nfor v in values:\n    total += v\nprint(total)\n",
        "s = 0\nfor x in xs:\n    s = s + x\nprint(s)\n",
    ),
    (Language::Python, "print('hi')\n", "x = 2\ny = x * x\n"),
    (Language::Python, "x = 1\n", "y = 2\n"),
    (
        Language::Java,
        "int add(int a, int b) { return a + b; }",
        "int add(int x, int y) { int s = x + y; return s; }",
    ),
    (
        Language::Java,
        "int f(int n) { int s = 0; for (int i = 0; i < n; i++) { s += i; } return s; }",
        "int f(int n) { int s = 0; int i = 0; while (i < n) { s += i; i++; } return s; }",
    ),
    (
        Language::Java,
        "String s = \"a\"; int n = s.length();",
        "String t = \"b\"; int m = t.length(); System.out.println(m);",
    ),
    (
        Language::Java,
        "public static void main(String[] args) { System.out.println(args.length); }",
        "public static void main(String[] a) { int n = a.length; System.out.println(n); }",
    ),
    (Language::Java, "return a * b;", "int c = a * b; return c;"),
];

pub fn codebleu_suite() -> Result<usize, String> {
    let weights = CodeBleuWeights::default();
    for (lang, cand, reference) in CODEBLEU_FIXTURES {
        let ct = parse_code(cand, *lang).map_err(|e| e.to_string())?;
        let rt = parse_code(reference, *lang).map_err(|e| e.to_string())?;
        let (c_tok, r_tok) = (ct.tokens(), vec![rt.tokens()]);
        let bleu = super::bleu(&c_tok, &r_tok, &|_| 1.0);
        let kw = |t: &str| if lang.is_keyword(t) { 4.0 } else { 1.0 };
        let wbleu = super::bleu(&c_tok, &r_tok, &kw);
        let (m, t) = super::syntax_match(&ct, &rt);
        let sm = if t == 0 { 1.0 } else { m as f64 / t as f64 };
        let ref_rows = edge_rows(&extract_dataflow(&rt));
        let cand_rows = edge_rows(&extract_dataflow(&ct));
        let want = if ref_rows.is_empty() {
            (bleu + wbleu + sm) / 3.0
        } else {
            let dm = super::dataflow_match(&cand_rows, &ref_rows);
            0.25 * bleu + 0.25 * wbleu + 0.25 * sm + 0.25 * dm
        };
        let got = codebleu(cand, reference, *lang, &weights).map_err(|e| e.to_string())?;
        close(&format!("codebleu({cand:?})"), got.score, want)?;
        let ident = codebleu(reference, reference, *lang, &weights).map_err(|e| e.to_string())?;
        exact_one(&format!("codebleu identity {reference:?}"), ident.score)?;
    }
    Ok(CODEBLEU_FIXTURES.len())
}

pub const RETRIEVAL_TOL: f64 = 1e-12;

fn preds(lists: &[&[&str]]) -> Vec<codeprompt_metrics::ApiPrediction> {
    lists
        .iter()
        .map(|l| codeprompt_metrics::ApiPrediction::from_ranked(l.iter(), 10))
        .collect()
}

/// Hand fixtures plus 100 seeded random toy sets. Returns the number of random sets.
pub fn retrieval_suite() -> Result<usize, String> {
    use codeprompt_metrics::{mrr, success_rate_at_k, MatchMode};
    use rand::{Rng, SeedableRng};

    let near = |what: &str, got: f64, want: f64| {
        if (got - want).abs() <= RETRIEVAL_TOL {
            Ok(())
        } else {
            Err(format!("{what}: got {got}, want {want}"))
        }
    };

    // First relevant at ranks 1, 2, 4.
    let p = preds(&[&["t.a", "x.b"], &["x.a", "t.b"], &["x.a", "x.b", "x.c", "t.c"]]);
    let t = vec![vec!["t.a"], vec!["t.b"], vec!["t.c"]];
    near(
        "mrr ranks (1,2,4)",
        mrr(&p, &t, MatchMode::Exact).map_err(|e| e.to_string())?,
        7.0 / 12.0,
    )?;

    // First relevant at ranks 1, 2 and nowhere.
    let p = preds(&[&["t.a"], &["x.a", "t.b"], &["x.a", "x.b", "x.c"]]);
    let t = vec![vec!["t.a"], vec!["t.b"], vec!["t.c"]];
    near(
        "sr@3 (1,2,none)",
        success_rate_at_k(&p, &t, 3, MatchMode::Exact).map_err(|e| e.to_string())?,
        2.0 / 3.0,
    )?;
    near(
        "sr@1 (1,2,none)",
        success_rate_at_k(&p, &t, 1, MatchMode::Exact).map_err(|e| e.to_string())?,
        1.0 / 3.0,
    )?;
    near(
        "mrr (1,2,none)",
        mrr(&p, &t, MatchMode::Exact).map_err(|e| e.to_string())?,
        0.5,
    )?;

    let p = preds(&[&["a.x", "b.y"], &["c.z"]]);
    let t = vec![vec!["a.x"], vec!["c.z"]];
    near(
        "sr@1 all rank-1",
        success_rate_at_k(&p, &t, 1, MatchMode::Exact).unwrap(),
        1.0,
    )?;
    near("mrr all rank-1", mrr(&p, &t, MatchMode::Exact).unwrap(), 1.0)?;
    let t = vec![vec!["q.q"], vec!["r.r"]];
    near("mrr none relevant", mrr(&p, &t, MatchMode::Exact).unwrap(), 0.0)?;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5eed);
    let vocab: Vec<String> = (0..12).map(|i| format!("pkg.api{i}")).collect();
    let sets = 100;
    for set in 0..sets {
        let n = rng.gen_range(1..=20);
        let mut predictions = Vec::new();
        let mut truths: Vec<Vec<String>> = Vec::new();
        let mut raw: Vec<Vec<String>> = Vec::new();
        for _ in 0..n {
            let len = rng.gen_range(0..=8);
            let mut list: Vec<String> = Vec::new();
            while list.len() < len {
                let api = vocab[rng.gen_range(0..vocab.len())].clone();
                if !list.contains(&api) {
                    list.push(api);
                }
            }
            let t_len = rng.gen_range(1..=3);
            let truth: Vec<String> = (0..t_len)
                .map(|_| vocab[rng.gen_range(0..vocab.len())].clone())
                .collect();
            predictions.push(codeprompt_metrics::ApiPrediction::from_ranked(list.iter(), 10));
            raw.push(list);
            truths.push(truth);
        }
        let max_k = raw.iter().map(Vec::len).max().unwrap_or(0).max(1);
        let mut prev = 0.0;
        let mut sr = Vec::new();
        for k in 1..=max_k {
            let v =
                success_rate_at_k(&predictions, &truths, k, MatchMode::Exact).map_err(|e| e.to_string())?;
            if v < prev {
                return Err(format!("set {set}: SR@{k}={v} < SR@{}={prev}", k - 1));
            }
            prev = v;
            sr.push(v);
        }
        let m = mrr(&predictions, &truths, MatchMode::Exact).map_err(|e| e.to_string())?;
        if !(sr[0] <= m + RETRIEVAL_TOL && m <= sr[max_k - 1] + RETRIEVAL_TOL) {
            return Err(format!(
                "set {set}: SR@1={} MRR={m} SR@K={}",
                sr[0],
                sr[max_k - 1]
            ));
        }
        let oracle: f64 = raw
            .iter()
            .zip(&truths)
            .map(|(p, t)| {
                let p: Vec<&str> = p.iter().map(String::as_str).collect();
                let t: Vec<&str> = t.iter().map(String::as_str).collect();
                super::first_rank(&p, &t).map_or(0.0, |r| 1.0 / r as f64)
            })
            .sum::<f64>()
            / n as f64;
        near(&format!("set {set} mrr vs oracle"), m, oracle)?;
    }
    Ok(sets)
}
