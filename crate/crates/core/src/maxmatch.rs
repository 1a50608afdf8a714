//! MaxMatch (M²) scoring.
//!
//! The system's edits are not given; they are recovered from the
//! source/hypothesis pair by searching an edit lattice for the edit sequence
//! that agrees most with the gold annotation:
//!
//! 1. Levenshtein DP between source and hypothesis tokens.
//! 2. A lattice of every edge lying on some minimal-cost alignment path.
//! 3. Compound edges merging contiguous edits that span at most
//!    `max_unchanged_words` matched tokens.
//! 4. Edge costs `1 + ε·(tokens spanned)`, minus `gold_match_reward` for
//!    edges equal to a gold edit.
//! 5. The cheapest path's edits are the system edits.

use std::collections::HashSet;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::align::{prefix_distances, suffix_distances};
use crate::corpus::{AnnotationSet, Edit, Sentence, Token};
use crate::error::{Error, Result};

/// Per-token tie-break cost on non-matching lattice edges.
pub const EDGE_EPSILON: f64 = 0.001;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M2Config {
    pub beta: f64,
    pub max_unchanged_words: usize,
    pub gold_match_reward: f64,
}

impl Default for M2Config {
    fn default() -> Self {
        M2Config {
            beta: 0.5,
            max_unchanged_words: 2,
            gold_match_reward: 1000.0,
        }
    }
}

impl M2Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "M2 beta must be positive, got {}",
                self.beta
            )));
        }
        if self.gold_match_reward.is_nan() || self.gold_match_reward <= 0.0 {
            return Err(Error::InvalidArgument("M2 gold_match_reward must be positive".into()));
        }
        Ok(())
    }
}

/// A system edit recovered from the lattice: `source[start..end]` became
/// `replacement`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemEdit {
    pub start: usize,
    pub end: usize,
    pub replacement: Vec<Token>,
}

impl SystemEdit {
    fn matches(&self, gold: &Edit) -> bool {
        self.start == gold.start && self.end == gold.end && self.replacement == gold.replacement
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct M2Counts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl M2Counts {
    pub fn add(&mut self, other: M2Counts) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    pub fn precision(&self) -> f64 {
        if self.tp + self.fp == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fp) as f64
        }
    }

    pub fn recall(&self) -> f64 {
        if self.tp + self.fn_ == 0 {
            1.0
        } else {
            self.tp as f64 / (self.tp + self.fn_) as f64
        }
    }

    pub fn f_beta(&self, beta: f64) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p == 0.0 && r == 0.0 {
            return 0.0;
        }
        let b2 = beta * beta;
        (1.0 + b2) * p * r / (b2 * p + r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct M2SentenceCounts {
    pub counts: M2Counts,
    pub chosen_annotator: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct Node {
    i: usize,
    j: usize,
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Match,
    Edit,
}

struct Lattice {
    // Basic edges out of each on-path node, keyed by node index.
    nodes: Vec<Node>,
    index: Vec<Vec<Option<usize>>>,
    basic: Vec<Vec<(usize, Step)>>,
}

impl Lattice {
    fn build(source: &[Token], hypothesis: &[Token]) -> Self {
        let (n, m) = (source.len(), hypothesis.len());
        let fwd = prefix_distances(source, hypothesis);
        let bwd = suffix_distances(source, hypothesis);
        let total = fwd[n][m];

        let mut nodes = Vec::new();
        let mut index = vec![vec![None; m + 1]; n + 1];
        for i in 0..=n {
            for j in 0..=m {
                if fwd[i][j] + bwd[i][j] == total {
                    index[i][j] = Some(nodes.len());
                    nodes.push(Node { i, j });
                }
            }
        }

        let on_path = |from: Node, to: Node, cost: u32| fwd[from.i][from.j] + cost + bwd[to.i][to.j] == total;
        let mut basic = vec![Vec::new(); nodes.len()];
        for (u, &node) in nodes.iter().enumerate() {
            let Node { i, j } = node;
            let mut candidates = Vec::with_capacity(3);
            if i < n && j < m {
                let same = source[i] == hypothesis[j];
                let step = if same { Step::Match } else { Step::Edit };
                candidates.push((Node { i: i + 1, j: j + 1 }, step, u32::from(!same)));
            }
            if i < n {
                candidates.push((Node { i: i + 1, j }, Step::Edit, 1));
            }
            if j < m {
                candidates.push((Node { i, j: j + 1 }, Step::Edit, 1));
            }
            for (to, step, cost) in candidates {
                if on_path(node, to, cost) {
                    if let Some(v) = index[to.i][to.j] {
                        basic[u].push((v, step));
                    }
                }
            }
        }
        Lattice { nodes, index, basic }
    }

    /// Every node reachable from `u` by a lattice path that contains at
    /// least one edit and at most `max_unchanged` matched tokens.
    fn edit_targets(&self, u: usize, max_unchanged: usize) -> Vec<usize> {
        let mut seen = HashSet::new();
        let mut targets = Vec::new();
        let mut stack = vec![(u, 0usize, false)];
        while let Some((v, matched, has_edit)) = stack.pop() {
            for &(w, step) in &self.basic[v] {
                let state = match step {
                    Step::Match if matched < max_unchanged => (w, matched + 1, has_edit),
                    Step::Match => continue,
                    Step::Edit => (w, matched, true),
                };
                if seen.insert(state) {
                    if state.2 {
                        targets.push(w);
                    }
                    stack.push(state);
                }
            }
        }
        targets.sort_unstable();
        targets.dedup();
        targets
    }
}

/// Gold edits that actually change the source. Identity edits are dropped
/// with a warning.
fn effective_gold<'a>(source: &Sentence, gold: &'a AnnotationSet) -> Vec<&'a Edit> {
    gold.edits
        .iter()
        .filter(|e| {
            let identity = e.is_identity(source);
            if identity {
                warn!(
                    "ignoring identity gold edit ({},{}) from annotator {}",
                    e.start, e.end, gold.annotator
                );
            }
            !identity
        })
        .collect()
}

fn extract_with_gold(source: &Sentence, hypothesis: &Sentence, gold: &[&Edit], cfg: &M2Config) -> Vec<SystemEdit> {
    let lattice = Lattice::build(source, hypothesis);
    let count = lattice.nodes.len();
    // Nodes are created in (i, j) order, which is a topological order.
    let mut best = vec![f64::INFINITY; count];
    let mut back: Vec<Option<(usize, bool)>> = vec![None; count];
    best[0] = 0.0;

    for u in 0..count {
        if !best[u].is_finite() {
            continue;
        }
        let from = lattice.nodes[u];
        for &(v, step) in &lattice.basic[u] {
            if let Step::Match = step {
                if best[u] < best[v] {
                    best[v] = best[u];
                    back[v] = Some((u, false));
                }
            }
        }
        for v in lattice.edit_targets(u, cfg.max_unchanged_words) {
            let to = lattice.nodes[v];
            let edit = SystemEdit {
                start: from.i,
                end: to.i,
                replacement: hypothesis[from.j..to.j].to_vec(),
            };
            let span = (to.i - from.i) + (to.j - from.j);
            let mut cost = 1.0 + EDGE_EPSILON * span as f64;
            if gold.iter().any(|g| edit.matches(g)) {
                cost -= cfg.gold_match_reward;
            }
            let candidate = best[u] + cost;
            if candidate < best[v] {
                best[v] = candidate;
                back[v] = Some((u, true));
            }
        }
    }

    let (n, m) = (source.len(), hypothesis.len());
    let mut v = lattice.index[n][m].expect("end node lies on every optimal path");
    let mut edits = Vec::new();
    while let Some((u, is_edit)) = back[v] {
        if is_edit {
            let (from, to) = (lattice.nodes[u], lattice.nodes[v]);
            edits.push(SystemEdit {
                start: from.i,
                end: to.i,
                replacement: hypothesis[from.j..to.j].to_vec(),
            });
        }
        v = u;
    }
    edits.reverse();
    edits
}

/// Recovers the system's edits, choosing the lattice path that overlaps the
/// gold annotation maximally.
pub fn extract_system_edits(
    source: &Sentence,
    hypothesis: &Sentence,
    gold: &AnnotationSet,
    cfg: &M2Config,
) -> Vec<SystemEdit> {
    let gold = effective_gold(source, gold);
    extract_with_gold(source, hypothesis, &gold, cfg)
}

/// tp/fp/fn of the hypothesis against a single annotator.
pub fn annotator_counts(source: &Sentence, hypothesis: &Sentence, gold: &AnnotationSet, cfg: &M2Config) -> M2Counts {
    let gold = effective_gold(source, gold);
    let system = extract_with_gold(source, hypothesis, &gold, cfg);
    // Each gold edit is credited once; repeated system edits are false positives.
    let tp = gold.iter().filter(|g| system.iter().any(|e| e.matches(g))).count();
    M2Counts {
        tp,
        fp: system.len() - tp,
        fn_: gold.len() - tp,
    }
}

/// Counts against every annotator, in annotation order.
pub fn all_annotator_counts(
    source: &Sentence,
    hypothesis: &Sentence,
    annotations: &[AnnotationSet],
    cfg: &M2Config,
) -> Result<Vec<(u32, M2Counts)>> {
    if annotations.is_empty() {
        return Err(Error::InvalidArgument("M2 needs at least one annotation set".into()));
    }
    Ok(annotations
        .iter()
        .map(|set| (set.annotator, annotator_counts(source, hypothesis, set, cfg)))
        .collect())
}

/// Picks the annotator with the highest F_β; ties go to the lowest id.
pub fn best_annotator(per_annotator: &[(u32, M2Counts)], beta: f64) -> (M2SentenceCounts, f64) {
    let mut best: Option<(M2SentenceCounts, f64)> = None;
    for &(annotator, counts) in per_annotator {
        let f = counts.f_beta(beta);
        let better = match &best {
            None => true,
            Some((cur, best_f)) => f > *best_f || (f == *best_f && annotator < cur.chosen_annotator),
        };
        if better {
            best = Some((
                M2SentenceCounts {
                    counts,
                    chosen_annotator: annotator,
                },
                f,
            ));
        }
    }
    best.expect("at least one annotator")
}

/// Sentence-level M²: counts and F_β for the best-matching annotator.
pub fn m2_sentence(
    source: &Sentence,
    hypothesis: &Sentence,
    annotations: &[AnnotationSet],
    cfg: &M2Config,
) -> Result<(M2SentenceCounts, f64)> {
    let per_annotator = all_annotator_counts(source, hypothesis, annotations, cfg)?;
    Ok(best_annotator(&per_annotator, cfg.beta))
}

/// Pooled corpus F_β. Sentences are processed in order and each picks the
/// annotator that maximizes the running cumulative F_β (ties: lowest id).
pub fn m2_pooled(per_sentence: &[Vec<(u32, M2Counts)>], beta: f64) -> f64 {
    let mut total = M2Counts::default();
    for annotators in per_sentence {
        let mut best: Option<(f64, u32, M2Counts)> = None;
        for &(annotator, counts) in annotators {
            let mut trial = total;
            trial.add(counts);
            let f = trial.f_beta(beta);
            let better = match best {
                None => true,
                Some((bf, ba, _)) => f > bf || (f == bf && annotator < ba),
            };
            if better {
                best = Some((f, annotator, counts));
            }
        }
        if let Some((_, _, counts)) = best {
            total.add(counts);
        }
    }
    total.f_beta(beta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(text: &str) -> Sentence {
        Sentence::tokenize(text)
    }

    fn gold(edits: &[(usize, usize, &str)], len: usize) -> AnnotationSet {
        AnnotationSet::new(
            0,
            edits.iter().map(|&(a, b, r)| Edit::substitute(a, b, r)).collect(),
            len,
        )
        .unwrap()
    }

    fn sys(start: usize, end: usize, repl: &str) -> SystemEdit {
        SystemEdit {
            start,
            end,
            replacement: s(repl).tokens().to_vec(),
        }
    }

    #[test]
    fn single_substitution_is_recovered() {
        let g = gold(&[(1, 2, "x")], 3);
        let edits = extract_system_edits(&s("a b c"), &s("a x c"), &g, &M2Config::default());
        assert_eq!(edits, vec![sys(1, 2, "x")]);
    }

    #[test]
    fn unchanged_hypothesis_has_no_edits() {
        let g = gold(&[(1, 2, "x")], 3);
        assert!(extract_system_edits(&s("a b c"), &s("a b c"), &g, &M2Config::default()).is_empty());
    }

    #[test]
    fn gold_phrase_edit_is_merged() {
        let g = gold(&[(1, 3, "x y")], 4);
        let edits = extract_system_edits(&s("a b c d"), &s("a x y d"), &g, &M2Config::default());
        assert_eq!(edits, vec![sys(1, 3, "x y")]);
    }

    #[test]
    fn gold_edit_spanning_an_unchanged_word_is_matched() {
        let g = gold(&[(1, 3, "b x")], 4);
        let edits = extract_system_edits(&s("a b c d"), &s("a b x d"), &g, &M2Config::default());
        assert_eq!(edits, vec![sys(1, 3, "b x")]);
        let cfg = M2Config {
            max_unchanged_words: 0,
            ..M2Config::default()
        };
        assert_eq!(
            extract_system_edits(&s("a b c d"), &s("a b x d"), &g, &cfg),
            vec![sys(2, 3, "x")]
        );
    }

    #[test]
    fn sentence_examples() {
        let g = vec![gold(&[(1, 2, "x")], 3)];
        let cfg = M2Config::default();
        let (c, f) = m2_sentence(&s("a b c"), &s("a x c"), &g, &cfg).unwrap();
        assert_eq!(c.counts, M2Counts { tp: 1, fp: 0, fn_: 0 });
        assert_eq!(f, 1.0);

        let (c, f) = m2_sentence(&s("a b c"), &s("a b c"), &g, &cfg).unwrap();
        assert_eq!(c.counts, M2Counts { tp: 0, fp: 0, fn_: 1 });
        assert_eq!((c.counts.precision(), c.counts.recall()), (1.0, 0.0));
        assert_eq!(f, 0.0);

        let (c, f) = m2_sentence(&s("a b c"), &s("a y c"), &g, &cfg).unwrap();
        assert_eq!(c.counts, M2Counts { tp: 0, fp: 1, fn_: 1 });
        assert_eq!(f, 0.0);
    }

    #[test]
    fn no_gold_and_no_change_scores_one() {
        let (c, f) = m2_sentence(&s("a b"), &s("a b"), &[AnnotationSet::empty(0)], &M2Config::default()).unwrap();
        assert_eq!(c.counts, M2Counts::default());
        assert_eq!(f, 1.0);
    }

    #[test]
    fn best_annotator_ties_go_to_lowest_id() {
        let sets = vec![
            AnnotationSet::new(3, vec![Edit::substitute(1, 2, "x")], 3).unwrap(),
            AnnotationSet::new(1, vec![Edit::substitute(1, 2, "y")], 3).unwrap(),
            AnnotationSet::new(2, vec![Edit::substitute(1, 2, "x")], 3).unwrap(),
        ];
        let (c, f) = m2_sentence(&s("a b c"), &s("a x c"), &sets, &M2Config::default()).unwrap();
        assert_eq!(c.chosen_annotator, 2);
        assert_eq!(f, 1.0);
        assert!(m2_sentence(&s("a"), &s("a"), &[], &M2Config::default()).is_err());
    }

    #[test]
    fn identity_gold_edits_are_ignored() {
        let g = AnnotationSet::new(0, vec![Edit::substitute(1, 2, "b")], 3).unwrap();
        assert_eq!(
            annotator_counts(&s("a b c"), &s("a b c"), &g, &M2Config::default()),
            M2Counts::default()
        );
    }

    #[test]
    fn pooled_single_sentence_matches_sentence_level() {
        let sets = vec![
            AnnotationSet::new(0, vec![Edit::substitute(1, 2, "x")], 3).unwrap(),
            AnnotationSet::new(1, vec![Edit::substitute(0, 1, "z")], 3).unwrap(),
        ];
        let cfg = M2Config::default();
        let per = all_annotator_counts(&s("a b c"), &s("z b q"), &sets, &cfg).unwrap();
        let (_, f) = best_annotator(&per, cfg.beta);
        assert_eq!(m2_pooled(&[per], cfg.beta), f);
    }

    #[test]
    fn f_beta_formula() {
        let c = M2Counts { tp: 2, fp: 1, fn_: 2 };
        let (p, r) = (2.0 / 3.0, 0.5);
        let expected = 1.25 * p * r / (0.25 * p + r);
        assert!((c.f_beta(0.5) - expected).abs() < 1e-15);
    }
}
