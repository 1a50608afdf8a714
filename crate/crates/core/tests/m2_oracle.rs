mod oracle;

use gecmetric::corpus::{AnnotationSet, Edit, Sentence, Token};
use gecmetric::maxmatch::{annotator_counts, extract_system_edits, m2_sentence, M2Config, M2Counts};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use oracle::{m2_cases, m2_oracle, M2Case};

fn sentence(tokens: &[String]) -> Sentence {
    Sentence::from_tokens(tokens.iter().cloned()).unwrap()
}

fn annotation(case: &M2Case) -> AnnotationSet {
    let edits = case
        .gold
        .iter()
        .map(|g| {
            let replacement = g.replacement.iter().map(|t| Token::new(t.as_str()).unwrap()).collect();
            Edit::new(g.start, g.end, replacement, "X", 0)
        })
        .collect();
    AnnotationSet::new(0, edits, case.source.len()).unwrap()
}

fn library_counts(case: &M2Case, cfg: &M2Config) -> (usize, usize, usize) {
    let c: M2Counts = annotator_counts(
        &sentence(&case.source),
        &sentence(&case.hypothesis),
        &annotation(case),
        cfg,
    );
    (c.tp, c.fp, c.fn_)
}

#[test]
fn counts_match_exhaustive_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let cases = m2_cases(&mut rng, 1500);
    let cfg = M2Config::default();
    let (mut with_tp, mut ambiguous) = (0, 0);
    for case in &cases {
        let want = m2_oracle(case, cfg.max_unchanged_words);
        assert!(want.contains(&library_counts(case, &cfg)), "{case:?}: oracle {want:?}");
        with_tp += usize::from(want.iter().any(|c| c.0 > 0));
        ambiguous += usize::from(want.len() > 1);
    }
    // The suite exercises matched edits, not only misses, and the optimum
    // almost always pins down the counts.
    assert!(with_tp > 300, "only {with_tp} cases with a true positive");
    assert!(ambiguous * 100 < cases.len(), "{ambiguous} ambiguous cases");
}

#[test]
fn counts_match_for_other_unchanged_limits() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cases = m2_cases(&mut rng, 300);
    for k in [0, 1, 3] {
        let cfg = M2Config {
            max_unchanged_words: k,
            ..M2Config::default()
        };
        for case in &cases {
            let want = m2_oracle(case, k);
            assert!(
                want.contains(&library_counts(case, &cfg)),
                "k={k} {case:?}: oracle {want:?}"
            );
        }
    }
}

#[test]
fn larger_reward_changes_nothing() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let base = M2Config::default();
    let big = M2Config {
        gold_match_reward: 1e6,
        ..M2Config::default()
    };
    for case in m2_cases(&mut rng, 500) {
        let (s, h, gold) = (sentence(&case.source), sentence(&case.hypothesis), annotation(&case));
        assert_eq!(
            extract_system_edits(&s, &h, &gold, &base),
            extract_system_edits(&s, &h, &gold, &big)
        );
    }
}

fn words(text: &str) -> Vec<String> {
    text.split_whitespace().map(str::to_owned).collect()
}

fn case(source: &str, hypothesis: &str, gold: &[(usize, usize, &str)]) -> M2Case {
    M2Case {
        source: words(source),
        hypothesis: words(hypothesis),
        gold: gold
            .iter()
            .map(|&(start, end, r)| oracle::OracleEdit {
                start,
                end,
                replacement: words(r),
            })
            .collect(),
    }
}

#[test]
fn worked_examples() {
    let cfg = M2Config::default();
    let examples = [
        (case("a b c", "a x c", &[(1, 2, "x")]), (1, 0, 0), 1.0),
        (case("a b c", "a b c", &[(1, 2, "x")]), (0, 0, 1), 0.0),
        (case("a b c", "a y c", &[(1, 2, "x")]), (0, 1, 1), 0.0),
        (case("a b c d", "a x y d", &[(1, 3, "x y")]), (1, 0, 0), 1.0),
        (case("a b c", "a b c", &[]), (0, 0, 0), 1.0),
    ];
    for (c, counts, f) in examples {
        assert_eq!(m2_oracle(&c, 2), vec![counts], "{c:?}");
        assert_eq!(library_counts(&c, &cfg), counts, "{c:?}");
        let (_, score) = m2_sentence(&sentence(&c.source), &sentence(&c.hypothesis), &[annotation(&c)], &cfg).unwrap();
        assert_eq!(score, f);
    }
    // The compound edit is chosen over two substitutions.
    // A repeated insertion earns one true positive and one false positive.
    let c = case("a", "x x a", &[(0, 0, "x")]);
    assert_eq!(m2_oracle(&c, 2), vec![(1, 1, 0)]);
    assert_eq!(library_counts(&c, &cfg), (1, 1, 0));

    let c = case("a b c d", "a x y d", &[(1, 3, "x y")]);
    let edits = extract_system_edits(&sentence(&c.source), &sentence(&c.hypothesis), &annotation(&c), &cfg);
    assert_eq!(edits.len(), 1);
    assert_eq!((edits[0].start, edits[0].end), (1, 3));
}
