//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

#[path = "../../core/tests/oracle/mod.rs"]
mod oracle;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use gecmetric::analysis::{
    compare_correlations, correlate, fisher_z, gaming_check, interpolate, lambda_grid, pearson, spearman, sweep_lambda,
    AggregationMode, SentenceRecords,
};
use gecmetric::corpus::{AnnotationSet, Corpus, Edit, ReferenceSet, Sentence, SystemOutput, Token};
use gecmetric::error::Result as LibResult;
use gecmetric::formats::{parse_m2_str, HumanRanking};
use gecmetric::gleu::{gleu_sentence, GleuConfig};
use gecmetric::grammaticality::{
    error_count_score, ArticleDetector, CapitalizationDetector, Detector, DetectorSuite, DuplicateDetector,
    ErrorCountStats, ErrorSpan, SpellDetector, TerminalPunctuationDetector, Wordlist,
};
use gecmetric::imeasure::{i_measure_sentence, IMeasureConfig};
use gecmetric::lfm::{cholesky_solve, normal_equations, train_ridge};
use gecmetric::maxmatch::{annotator_counts, M2Config};
use gecmetric::scoring::{Metric, Scorer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use oracle::{all_sentences, gleu_oracle, m2_cases, m2_oracle, random_sentence};

fn main() -> ExitCode {
    type Check = fn() -> String;
    let criteria: [(&str, Option<u64>, Check); 10] = [
        ("GLEU matches the brute-force oracle", Some(30), gleu_equivalence),
        ("M2 counts match the exhaustive enumerator", Some(60), m2_equivalence),
        ("I-measure hand cases and bounds", None, i_measure_cases),
        ("error-count formula and detector removal", None, error_count_property),
        ("interpolation endpoints and linearity", None, interpolation),
        ("correlation statistics hand examples", None, statistics),
        ("ridge residuals, slope and shrinkage", None, ridge),
        ("synthetic end-to-end experiment", Some(120), synthetic_experiment),
        ("sentence vs corpus aggregation", None, aggregation),
        ("CLI reports are byte-identical across runs", None, reproducibility),
    ];
    let mut failed = 0;
    for (k, (name, budget, check)) in criteria.into_iter().enumerate() {
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let elapsed = started.elapsed();
        let verdict = match outcome {
            Ok(_) if budget.is_some_and(|s| elapsed > Duration::from_secs(s)) => {
                Err(format!("took {elapsed:.1?}, budget {}s", budget.unwrap()))
            }
            Ok(detail) => Ok(detail),
            Err(panic) => Err(panic
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default()),
        };
        match verdict {
            Ok(detail) => println!("PASS {:>2} {name} ({elapsed:.2?}) {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name} ({elapsed:.2?}) {why}", k + 1);
            }
        }
    }
    println!("{} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn s(text: &str) -> Sentence {
    Sentence::tokenize(text)
}

fn sentence<S: AsRef<str>>(tokens: &[S]) -> Sentence {
    Sentence::from_tokens(tokens.iter().map(|t| t.as_ref().to_owned())).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() < tol
}

// 1
fn gleu_equivalence() -> String {
    const VOCAB: [&str; 3] = ["a", "b", "c"];
    let cfg = GleuConfig::default();
    let mut worst: f64 = 0.0;
    let mut check = |s: &[&str], h: &[&str], r: &[&str]| {
        let got = gleu_sentence(&sentence(s), &sentence(h), &sentence(r), &cfg);
        let want = gleu_oracle(s, h, r, cfg.max_n);
        assert!(
            close(got, want, 1e-12),
            "S={s:?} H={h:?} R={r:?}: {got} vs oracle {want}"
        );
        worst = worst.max((got - want).abs());
    };
    let short = all_sentences(&VOCAB, 3);
    let mut count = 0;
    for a in &short {
        for b in &short {
            for c in &short {
                check(a, b, c);
                count += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..10_000 {
        let (a, b, c) = (
            random_sentence(&mut rng, &VOCAB, 6),
            random_sentence(&mut rng, &VOCAB, 6),
            random_sentence(&mut rng, &VOCAB, 6),
        );
        check(&a, &b, &c);
        count += 1;
    }
    format!("{count} triples, max deviation {worst:e}")
}

// 2
fn m2_equivalence() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let cases = m2_cases(&mut rng, 1500);
    let cfg = M2Config::default();
    let (mut unique, mut tied) = (0, 0);
    for case in &cases {
        let edits = case
            .gold
            .iter()
            .map(|g| {
                let replacement = g.replacement.iter().map(|t| Token::new(t.as_str()).unwrap()).collect();
                Edit::new(g.start, g.end, replacement, "X", 0)
            })
            .collect();
        let gold = AnnotationSet::new(0, edits, case.source.len()).unwrap();
        let c = annotator_counts(&sentence(&case.source), &sentence(&case.hypothesis), &gold, &cfg);
        let got = (c.tp, c.fp, c.fn_);
        let want = m2_oracle(case, cfg.max_unchanged_words);
        assert!(want.contains(&got), "{case:?}: library {got:?}, oracle {want:?}");
        if want.len() == 1 {
            unique += 1;
        } else {
            tied += 1;
        }
    }
    format!("{} cases ({unique} with a unique optimum, {tied} tied)", cases.len())
}

// 3
fn i_measure_cases() -> String {
    let cfg = IMeasureConfig::default();
    let (src, reference) = (s("he go home"), s("he goes home"));
    let score = |h: &str| i_measure_sentence(&src, &s(h), std::slice::from_ref(&reference), &cfg).unwrap();
    assert!(close(score("he goes home"), 1.0, 1e-12));
    assert!(close(score("he go home"), 0.0, 1e-12));
    assert!(close(score("he gone home"), -1.0 / 7.0, 1e-12));

    const VOCAB: [&str; 4] = ["a", "b", "c", "d"];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let source = sentence(&random_sentence(&mut rng, &VOCAB, 6));
        let hypothesis = sentence(&random_sentence(&mut rng, &VOCAB, 6));
        let refs = [
            sentence(&random_sentence(&mut rng, &VOCAB, 6)),
            sentence(&random_sentence(&mut rng, &VOCAB, 6)),
        ];
        let i = i_measure_sentence(&source, &hypothesis, &refs, &cfg).unwrap();
        assert!((-1.0..=1.0).contains(&i), "I = {i}");
        assert_eq!(i_measure_sentence(&source, &source, &refs, &cfg).unwrap(), 0.0);
    }
    "3 hand cases, 1000 random triples".into()
}

// 4
struct Fixed {
    id: String,
    spans: Vec<(usize, usize, &'static str)>,
}

impl Detector for Fixed {
    fn id(&self) -> &str {
        &self.id
    }

    fn detect(&self, _: &Sentence) -> LibResult<Vec<ErrorSpan>> {
        Ok(self
            .spans
            .iter()
            .map(|&(a, b, c)| ErrorSpan::new(a, b, c, self.id.clone()))
            .collect())
    }
}

fn suite_of(detectors: &[&Fixed]) -> DetectorSuite {
    let mut suite = DetectorSuite::new();
    for d in detectors {
        suite
            .add(Box::new(Fixed {
                id: d.id.clone(),
                spans: d.spans.clone(),
            }))
            .unwrap();
    }
    suite
}

fn error_count_property() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let trials = 2000;
    for _ in 0..trials {
        let len = rng.gen_range(0..=10);
        let sentence = Sentence::from_tokens((0..len).map(|i| format!("t{i}"))).unwrap();
        let detectors: Vec<Fixed> = (0..rng.gen_range(1..=4))
            .map(|d| Fixed {
                id: format!("d{d}"),
                spans: (0..rng.gen_range(0..=12))
                    .map(|_| {
                        let start = rng.gen_range(0..=len);
                        (
                            start,
                            rng.gen_range(start..=len),
                            ["SPELL", "DUP", "CAPS"][rng.gen_range(0..3)],
                        )
                    })
                    .collect(),
            })
            .collect();
        let all: Vec<&Fixed> = detectors.iter().collect();
        let distinct: BTreeSet<_> = detectors.iter().flat_map(|d| d.spans.iter().copied()).collect();
        let want = if len == 0 {
            1.0
        } else {
            (1.0 - distinct.len() as f64 / len as f64).clamp(0.0, 1.0)
        };
        let full = error_count_score(&sentence, &suite_of(&all)).unwrap();
        assert_eq!(full, want, "{len} tokens, {} distinct errors", distinct.len());
        for skip in 0..all.len() {
            let rest: Vec<&Fixed> = all
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != skip)
                .map(|(_, d)| *d)
                .collect();
            let reduced = error_count_score(&sentence, &suite_of(&rest)).unwrap();
            assert!(reduced >= full, "dropping d{skip} lowered {full} to {reduced}");
        }
    }
    format!("{trials} random sentences")
}

// 5
fn interpolation() -> String {
    let grid = lambda_grid();
    assert_eq!(grid.len(), 101);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..10_000 {
        let (g, r): (f64, f64) = (rng.gen(), rng.gen_range(-1.0..1.0));
        assert_eq!(interpolate(g, r, 0.0).to_bits(), g.to_bits());
        assert_eq!(interpolate(g, r, 1.0).to_bits(), r.to_bits());
        for &lambda in &grid {
            worst = worst.max((interpolate(g, r, lambda) - (g + lambda * (r - g))).abs());
        }
    }
    assert!(worst < 1e-15, "deviation {worst:e}");
    assert!(close(interpolate(0.8, 0.4, 0.25), 0.7, 1e-15));
    format!("max deviation from the line {worst:e}")
}

// 6
fn statistics() -> String {
    let tol = 1e-12;
    assert!(close(
        spearman(&[1.0, 2.0, 3.0, 4.0], &[1.0, 3.0, 2.0, 4.0]).unwrap(),
        0.8,
        tol
    ));
    assert!(close(spearman(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 1.0, tol));
    assert!(close(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0, tol));
    // Deviations (−1, 0, 1) and (−4/3, −1/3, 5/3): Sxy = 3, Sxx = 2, Syy = 14/3.
    let want = 3.0 / (2.0f64 * 14.0 / 3.0).sqrt();
    assert!(close(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0, 4.0]).unwrap(), want, tol));
    assert!(close(want, 0.98198, 1e-5));
    let x = [1.0, 2.0, 3.0, 4.0, 5.0];
    let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
    let flipped: Vec<f64> = x.iter().map(|v| 5.0 - v).collect();
    assert!(close(pearson(&x, &doubled).unwrap(), 1.0, tol));
    assert!(close(pearson(&x, &flipped).unwrap(), -1.0, tol));

    for (r, n) in [(0.3, 4), (0.85, 12), (-0.5, 40)] {
        let t = compare_correlations(r, n, r, n).unwrap();
        assert_eq!((t.z, t.p), (0.0, 1.0));
    }
    let z = fisher_z(0.6).unwrap();
    assert_eq!(format!("{z:.5}"), "0.69315");
    assert!(close(z, (1.6f64 / 0.4).ln() / 2.0, tol));
    let t = compare_correlations(0.9, 12, 0.1, 12).unwrap();
    let want = ((1.9f64 / 0.1).ln() / 2.0 - (1.1f64 / 0.9).ln() / 2.0) / (2.0f64 / 9.0).sqrt();
    assert!(close(t.z, want, tol), "z = {} vs {want}", t.z);
    assert!(t.p > 0.0 && t.p < 0.01);
    "all hand examples within 1e-12".into()
}

// 7
fn ridge() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let rows = rng.gen_range(12..60);
        let x: Vec<Vec<f64>> = (0..rows)
            .map(|_| (0..8).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let y: Vec<f64> = (0..rows).map(|_| rng.gen()).collect();
        let alpha = rng.gen_range(0.0..3.0);
        let (mut a, b) = normal_equations(&x, &y);
        for (i, row) in a.iter_mut().enumerate() {
            row[i] += alpha;
        }
        let w = cholesky_solve(&a, &b).unwrap();
        let residual = a
            .iter()
            .zip(&b)
            .map(|(row, bi)| (row.iter().zip(&w).map(|(p, q)| p * q).sum::<f64>() - bi).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(residual);
    }
    assert!(worst < 1e-8, "residual {worst:e}");

    let x = vec![vec![1.0], vec![2.0], vec![3.0]];
    let y = [2.0, 4.0, 6.0];
    let slope = train_ridge(&x, &y, 1.0, false).unwrap().weights[0];
    assert!(close(slope, 4.0 / 3.0, 1e-12), "slope {slope}");
    let mut previous = f64::INFINITY;
    for alpha in [0.0, 0.1, 0.5, 1.0, 2.0, 8.0, 64.0, 1024.0] {
        let w = train_ridge(&x, &y, alpha, false).unwrap().weights[0];
        assert!(w < previous, "α = {alpha}: {w} ≥ {previous}");
        previous = w;
    }
    format!("max residual {worst:e}")
}

// 8
const ADJECTIVES: [&str; 8] = ["big", "small", "red", "quiet", "happy", "tall", "green", "lazy"];
const NOUNS: [&str; 10] = [
    "cat", "dog", "bird", "teacher", "farmer", "child", "horse", "baker", "girl", "boy",
];
const VERBS: [&str; 6] = ["sees", "likes", "follows", "helps", "finds", "calls"];
const SYSTEMS: usize = 12;
const SENTENCES: usize = 200;
const ERROR_KINDS: usize = 4;

fn clean_sentence(rng: &mut ChaCha8Rng) -> Vec<String> {
    let pick = |rng: &mut ChaCha8Rng, pool: &[&str]| pool[rng.gen_range(0..pool.len())].to_owned();
    vec![
        "The".into(),
        pick(rng, &ADJECTIVES),
        pick(rng, &NOUNS),
        pick(rng, &VERBS),
        "the".into(),
        pick(rng, &NOUNS),
        ".".into(),
    ]
}

/// Applies the selected error kinds: misspelled subject noun, duplicated
/// verb, lowercase first word, missing period.
fn corrupt(clean: &[String], kinds: [bool; ERROR_KINDS]) -> Vec<String> {
    let mut out = clean.to_vec();
    if kinds[0] {
        out[2] = format!("{}q", out[2]);
    }
    if kinds[1] {
        out.insert(4, out[3].clone());
    }
    if kinds[2] {
        out[0] = out[0].to_lowercase();
    }
    if kinds[3] {
        out.pop();
    }
    out
}

fn synthetic_experiment() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let clean: Vec<Vec<String>> = (0..SENTENCES).map(|_| clean_sentence(&mut rng)).collect();
    // One uniform draw per (sentence, error kind); system k injects an error
    // wherever the draw is below k/11, so error sets are nested in k.
    let draws: Vec<[f64; ERROR_KINDS]> = (0..SENTENCES).map(|_| rng.gen()).collect();
    let system = |k: usize| -> Vec<Sentence> {
        let rate = k as f64 / (SYSTEMS - 1) as f64;
        clean
            .iter()
            .zip(&draws)
            .map(|(c, u)| sentence(&corrupt(c, u.map(|x| x < rate))))
            .collect()
    };
    let outputs: Vec<SystemOutput> = (0..SYSTEMS)
        .map(|k| SystemOutput::new(format!("sys{k:02}"), system(k)))
        .collect();
    let mut human = HumanRanking::new();
    for k in 0..SYSTEMS {
        human.insert(format!("sys{k:02}"), (SYSTEMS - k) as f64).unwrap();
    }

    let words = ADJECTIVES.iter().chain(&NOUNS).chain(&VERBS).chain(&["the"]);
    let wordlist = Arc::new(Wordlist::from_words(words.copied()));
    let detectors = DetectorSuite::new()
        .with(SpellDetector::new(wordlist))
        .unwrap()
        .with(DuplicateDetector)
        .unwrap()
        .with(CapitalizationDetector)
        .unwrap()
        .with(TerminalPunctuationDetector)
        .unwrap()
        .with(ArticleDetector)
        .unwrap();
    // Learner sources carry every error; the clean sentences are the references.
    let corpus = Corpus::from_sources(system(SYSTEMS - 1));
    let refs = ReferenceSet::new(clean.iter().map(|c| vec![sentence(c)]).collect()).unwrap();
    let (gleu, m2, im) = (GleuConfig::default(), M2Config::default(), IMeasureConfig::default());
    let scorer = Scorer {
        corpus: &corpus,
        references: Some(&refs),
        gleu: &gleu,
        m2: &m2,
        imeasure: &im,
        detectors: Some(&detectors),
        lfm: None,
    };

    let ec = scorer.metric_scores(Metric::ErrorCount, &outputs).unwrap();
    let g = scorer.metric_scores(Metric::Gleu, &outputs).unwrap();
    let means = ec.system_means();
    assert!(
        means.windows(2).all(|w| w[0].1 > w[1].1),
        "error-count means not strictly decreasing: {means:?}"
    );
    let rho = correlate("error-count", AggregationMode::Sentence, &means, &human)
        .unwrap()
        .spearman;
    assert_eq!(rho, Some(1.0), "error-count ρ");

    let sweep = sweep_lambda(&ec, &g, &human).unwrap();
    assert_eq!(sweep.points.len(), 101);
    let oracle = sweep.oracle_spearman.as_ref().expect("oracle ρ").value;
    let endpoints = [sweep.points[0].spearman, sweep.points[100].spearman];
    for end in endpoints.into_iter().flatten() {
        assert!(oracle >= end, "oracle ρ {oracle} below endpoint {end}");
    }

    let gaming = gaming_check(&ec, &g, &refs, 0.5, 8, |r| {
        scorer.metric_scores_with(Metric::Gleu, &outputs, r)
    })
    .unwrap();
    let drop = gaming.rbm_relative_drop.expect("relative drop");
    assert!(drop > 0.0, "GLEU drop {drop}");
    format!(
        "ρ(error-count) = 1, oracle ρ {oracle:.4} ≥ endpoints {endpoints:?}, shuffled-reference GLEU drop {:.1}%",
        100.0 * drop
    )
}

// 9
fn aggregation() -> String {
    let records = SentenceRecords::ErrorCount {
        sentences: vec![
            ErrorCountStats { errors: 0, tokens: 10 },
            ErrorCountStats { errors: 2, tokens: 2 },
        ],
    };
    assert_eq!(records.aggregate(AggregationMode::Corpus).unwrap(), 1.0 - 2.0 / 12.0);
    assert_eq!(records.aggregate(AggregationMode::Sentence).unwrap(), 0.5);

    let doc = parse_m2_str(
        "S he go to school\nA 1 2|||R:VERB|||goes|||REQUIRED|||-NONE-|||0\nA 4 4|||M:PUNCT|||.|||REQUIRED|||-NONE-|||1\n\n\
         S a apple fell from the the tree .\nA 0 1|||R:DET|||An|||REQUIRED|||-NONE-|||0\nA 5 6|||U:DET||||||REQUIRED|||-NONE-|||0\n",
    )
    .unwrap();
    let hyps = [
        "he goes to school",
        "he go to school .",
        "she went to the school .",
        "",
        "An apple fell from the tree .",
        "a apple fell from the the tree .",
        "an apple fell the tree",
    ];
    let detectors = DetectorSuite::new()
        .with(DuplicateDetector)
        .unwrap()
        .with(ArticleDetector)
        .unwrap()
        .with(CapitalizationDetector)
        .unwrap()
        .with(TerminalPunctuationDetector)
        .unwrap();
    let (gleu, m2, im) = (GleuConfig::default(), M2Config::default(), IMeasureConfig::default());
    let mut compared = 0;
    for unit in &doc.units {
        let corpus = Corpus::new(vec![unit.clone()]);
        let refs = corpus.gold_references().unwrap();
        let scorer = Scorer {
            corpus: &corpus,
            references: Some(&refs),
            gleu: &gleu,
            m2: &m2,
            imeasure: &im,
            detectors: Some(&detectors),
            lfm: None,
        };
        for h in hyps {
            let output = SystemOutput::new("sys", vec![s(h)]);
            for metric in [Metric::Gleu, Metric::M2, Metric::IMeasure, Metric::ErrorCount] {
                let records = scorer.records(metric, &output).unwrap();
                assert!(records.supports(AggregationMode::Corpus));
                let (a, b) = (
                    records.aggregate(AggregationMode::Sentence).unwrap(),
                    records.aggregate(AggregationMode::Corpus).unwrap(),
                );
                assert_eq!(a.to_bits(), b.to_bits(), "{metric} on {h:?}: {a} vs {b}");
                compared += 1;
            }
        }
    }
    format!("0.8333 vs 0.5 exact, {compared} single-sentence comparisons")
}

// 10
const FIXTURE_M2: &str = "S he go to school
A 1 2|||R:VERB|||goes|||REQUIRED|||-NONE-|||0
A 1 2|||R:VERB|||went|||REQUIRED|||-NONE-|||1
A 4 4|||M:PUNCT|||.|||REQUIRED|||-NONE-|||1

S a apple fell from the tree .
A 0 1|||R:DET|||An|||REQUIRED|||-NONE-|||0
A 0 1|||R:DET|||An|||REQUIRED|||-NONE-|||1

S she like the the cats .
A 1 2|||R:VERB|||likes|||REQUIRED|||-NONE-|||0
A 3 4|||U:DET||||||REQUIRED|||-NONE-|||0
A 1 2|||R:VERB|||liked|||REQUIRED|||-NONE-|||1
A 2 4|||U:DET||||||REQUIRED|||-NONE-|||1

S they was late
A 1 2|||R:VERB|||were|||REQUIRED|||-NONE-|||0
A 3 3|||M:PUNCT|||.|||REQUIRED|||-NONE-|||0
A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||1
";

const FIXTURE_SYSTEMS: [(&str, &str, f64); 4] = [
    (
        "best",
        "He goes to school .\nAn apple fell from the tree .\nShe likes cats .\nThey were late .\n",
        4.0,
    ),
    (
        "good",
        "he goes to school .\nan apple fell from the tree .\nshe likes the cats .\nthey was late .\n",
        3.0,
    ),
    (
        "fair",
        "he go to school\nan apple fell from tree .\nshe like the the cats .\nthey were late\n",
        2.0,
    ),
    (
        "poor",
        "he go to to school\na apple fell from the tree\nshe like the the cats\nthey was late\n",
        1.0,
    ),
];

fn gecmetric(dir: &Path, args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_gecmetric"))
        .current_dir(dir)
        .args(args)
        .env_remove("GECMETRIC_SEED")
        .env("RUST_LOG", "warn")
        .output()
        .expect("running gecmetric");
    assert!(
        out.status.success(),
        "gecmetric {args:?} exited with {}: {}",
        out.status,
        String::from_utf8_lossy(&out.stderr)
    );
    let report = args.iter().position(|a| *a == "-o").map(|i| args[i + 1]).expect("-o");
    std::fs::read(dir.join(report)).unwrap()
}

fn reproducibility() -> String {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path();
    std::fs::write(path.join("gold.m2"), FIXTURE_M2).unwrap();
    let mut human = String::new();
    for (id, text, score) in FIXTURE_SYSTEMS {
        std::fs::write(path.join(format!("{id}.txt")), text).unwrap();
        human.push_str(&format!("{id}\t{score}\n"));
    }
    std::fs::write(path.join("human.tsv"), human).unwrap();
    let hyps: Vec<String> = FIXTURE_SYSTEMS
        .iter()
        .flat_map(|(id, _, _)| ["--hyp".to_owned(), format!("{id}={id}.txt")])
        .collect();
    let hyps: Vec<&str> = hyps.iter().map(String::as_str).collect();
    let corpus = |command: &str, rest: &[&str]| -> Vec<String> {
        let mut args = vec![command, "--m2", "gold.m2"];
        args.extend(&hyps);
        args.extend(rest);
        args.into_iter().map(str::to_owned).collect()
    };

    let runs: Vec<(&str, Vec<String>)> = vec![
        (
            "score",
            corpus(
                "score",
                &[
                    "--metric",
                    "gleu",
                    "--metric",
                    "m2",
                    "--metric",
                    "i-measure",
                    "--metric",
                    "error-count",
                    "-o",
                    "score.json",
                ],
            ),
        ),
        (
            "sweep",
            [
                "sweep",
                "--report",
                "score.json",
                "--human",
                "human.tsv",
                "--gbm",
                "error-count",
                "--rbm",
                "gleu",
                "-o",
                "sweep.json",
            ]
            .map(str::to_owned)
            .to_vec(),
        ),
        ("gaming", corpus("gaming", &["--lambda", "0.3", "-o", "gaming.json"])),
        (
            "ablate",
            corpus(
                "ablate",
                &["--human", "human.tsv", "--trials", "4", "-o", "ablate.json"],
            ),
        ),
    ];
    let mut checked = Vec::new();
    for (name, args) in &runs {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let first = gecmetric(path, &args);
        let again = gecmetric(path, &args);
        assert!(first == again, "{name}: repeated run differs");
        for jobs in ["1", "4"] {
            let mut with_jobs = vec!["--jobs", jobs];
            with_jobs.extend(&args);
            assert!(first == gecmetric(path, &with_jobs), "{name}: --jobs {jobs} differs");
        }
        let sweep_ok = *name != "sweep" || String::from_utf8_lossy(&first).matches("\"lambda\"").count() >= 101;
        assert!(sweep_ok, "sweep report lacks 101 grid points");
        checked.push(*name);
    }
    format!("{} identical across repeats and --jobs 1/4", checked.join(", "))
}
