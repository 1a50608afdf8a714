//! Brute-force reference implementations used as test oracles.
//!
//! Everything here works on plain string slices and shares no code with the
//! library beyond test-case generation.

#![allow(dead_code)]

use std::collections::BTreeMap;

use rand::Rng;

/// Every sentence over `vocab` with at most `max_len` tokens.
pub fn all_sentences<'a>(vocab: &[&'a str], max_len: usize) -> Vec<Vec<&'a str>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for prefix in &frontier {
            for &w in vocab {
                let mut s: Vec<&str> = prefix.clone();
                s.push(w);
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn random_sentence<'a, R: Rng>(rng: &mut R, vocab: &[&'a str], max_len: usize) -> Vec<&'a str> {
    let len = rng.gen_range(0..=max_len);
    (0..len).map(|_| vocab[rng.gen_range(0..vocab.len())]).collect()
}

// ---------------------------------------------------------------- GLEU

/// The n-gram multiset of `tokens`.
fn multiset<'a>(tokens: &[&'a str], n: usize) -> BTreeMap<Vec<&'a str>, i64> {
    let mut counts = BTreeMap::new();
    let mut start = 0;
    while start + n <= tokens.len() {
        *counts.entry(tokens[start..start + n].to_vec()).or_insert(0) += 1;
        start += 1;
    }
    counts
}

/// GLEU straight from the definition: per-order clipped matches minus the
/// source penalty, smoothed precisions, brevity penalty, geometric mean.
pub fn gleu_oracle(source: &[&str], hypothesis: &[&str], reference: &[&str], max_n: usize) -> f64 {
    if hypothesis.is_empty() {
        return 0.0;
    }
    let mut log_precisions = 0.0;
    for n in 1..=max_n {
        let (ch, cr, cs) = (multiset(hypothesis, n), multiset(reference, n), multiset(source, n));
        let get = |m: &BTreeMap<Vec<&str>, i64>, g: &Vec<&str>| m.get(g).copied().unwrap_or(0);
        let mut matches = 0i64;
        let mut penalty = 0i64;
        let mut total = 0i64;
        for (g, &h) in &ch {
            let (r, s) = (get(&cr, g), get(&cs, g));
            matches += h.min(r);
            penalty += h.min((s - r).max(0));
            total += h;
        }
        let numerator = (matches - penalty).max(0);
        let p = if total == 0 {
            1.0
        } else if numerator == 0 {
            1.0 / (2.0 * (total as f64 + 1.0))
        } else {
            numerator as f64 / total as f64
        };
        log_precisions += p.ln();
    }
    let (h, r) = (hypothesis.len() as f64, reference.len() as f64);
    let bp = if h >= r { 1.0 } else { (1.0 - r / h).exp() };
    bp * (log_precisions / max_n as f64).exp()
}

// ---------------------------------------------------------------- M²

/// A gold or system edit: `source[start..end]` becomes `replacement`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleEdit {
    pub start: usize,
    pub end: usize,
    pub replacement: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct M2Case {
    pub source: Vec<String>,
    pub hypothesis: Vec<String>,
    pub gold: Vec<OracleEdit>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Match,
    Substitute,
    Delete,
    Insert,
}

/// Every alignment of `s` to `h` as an operation sequence. Equal tokens on
/// the diagonal are always a match.
fn all_alignments(s: &[String], h: &[String]) -> Vec<Vec<Op>> {
    fn walk(s: &[String], h: &[String], i: usize, j: usize, path: &mut Vec<Op>, out: &mut Vec<Vec<Op>>) {
        if i == s.len() && j == h.len() {
            out.push(path.clone());
            return;
        }
        if i < s.len() && j < h.len() {
            path.push(if s[i] == h[j] { Op::Match } else { Op::Substitute });
            walk(s, h, i + 1, j + 1, path, out);
            path.pop();
        }
        if i < s.len() {
            path.push(Op::Delete);
            walk(s, h, i + 1, j, path, out);
            path.pop();
        }
        if j < h.len() {
            path.push(Op::Insert);
            walk(s, h, i, j + 1, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    walk(s, h, 0, 0, &mut Vec::new(), &mut out);
    out
}

fn cost(ops: &[Op]) -> usize {
    ops.iter().filter(|op| **op != Op::Match).count()
}

/// Every way to cover an alignment with edits: each maximal group is a
/// contiguous run of operations with at least one non-match and at most
/// `max_unchanged` matches; operations outside groups must be matches.
fn segmentations(ops: &[Op], positions: &[(usize, usize)], h: &[String], max_unchanged: usize) -> Vec<Vec<OracleEdit>> {
    fn go(
        p: usize,
        ops: &[Op],
        positions: &[(usize, usize)],
        h: &[String],
        k: usize,
        current: &mut Vec<OracleEdit>,
        out: &mut Vec<Vec<OracleEdit>>,
    ) {
        if p == ops.len() {
            out.push(current.clone());
            return;
        }
        if ops[p] == Op::Match {
            go(p + 1, ops, positions, h, k, current, out);
        }
        let mut matches = 0;
        let mut edits = 0;
        for q in p..ops.len() {
            if ops[q] == Op::Match {
                matches += 1;
            } else {
                edits += 1;
            }
            if matches > k {
                break;
            }
            if edits > 0 {
                let (i0, j0) = positions[p];
                let (i1, j1) = positions[q + 1];
                current.push(OracleEdit {
                    start: i0,
                    end: i1,
                    replacement: h[j0..j1].to_vec(),
                });
                go(q + 1, ops, positions, h, k, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(0, ops, positions, h, max_unchanged, &mut Vec::new(), &mut out);
    out
}

fn positions(ops: &[Op]) -> Vec<(usize, usize)> {
    let mut at = vec![(0, 0)];
    let (mut i, mut j) = (0, 0);
    for op in ops {
        match op {
            Op::Match | Op::Substitute => {
                i += 1;
                j += 1;
            }
            Op::Delete => i += 1,
            Op::Insert => j += 1,
        }
        at.push((i, j));
    }
    at
}

/// tp/fp/fn from exhaustive search over every minimum-cost alignment and
/// every valid grouping of it into edits. Groupings are ranked by the number
/// of edits equal to a gold edit (more is better), then by edit count, then
/// by tokens spanned (fewer is better). Each gold edit is credited at most
/// once. Returns the distinct counts over all top-ranked groupings.
pub fn m2_oracle(case: &M2Case, max_unchanged: usize) -> Vec<(usize, usize, usize)> {
    let gold: Vec<&OracleEdit> = case
        .gold
        .iter()
        .filter(|g| case.source[g.start..g.end] != g.replacement[..])
        .collect();
    let alignments = all_alignments(&case.source, &case.hypothesis);
    let best_cost = alignments.iter().map(|a| cost(a)).min().unwrap_or(0);
    let mut best_rank: Option<(std::cmp::Reverse<usize>, usize, usize)> = None;
    let mut best_counts: Vec<(usize, usize, usize)> = Vec::new();
    for ops in alignments.iter().filter(|a| cost(a) == best_cost) {
        for edits in segmentations(ops, &positions(ops), &case.hypothesis, max_unchanged) {
            let rewarded = edits.iter().filter(|e| gold.contains(e)).count();
            let span: usize = edits.iter().map(|e| e.end - e.start + e.replacement.len()).sum();
            let rank = (std::cmp::Reverse(rewarded), edits.len(), span);
            let tp = gold.iter().filter(|g| edits.contains(g)).count();
            let counts = (tp, edits.len() - tp, gold.len() - tp);
            if best_rank.is_none_or(|b| rank < b) {
                best_rank = Some(rank);
                best_counts = vec![counts];
            } else if best_rank == Some(rank) && !best_counts.contains(&counts) {
                best_counts.push(counts);
            }
        }
    }
    best_counts.sort_unstable();
    best_counts
}

fn apply(source: &[String], edits: &[&OracleEdit]) -> Vec<String> {
    let mut out = Vec::new();
    let mut at = 0;
    for e in edits {
        out.extend_from_slice(&source[at..e.start]);
        out.extend(e.replacement.iter().cloned());
        at = e.end;
    }
    out.extend_from_slice(&source[at..]);
    out
}

/// Random cases with sources and hypotheses of at most six tokens and at
/// most three non-overlapping gold edits. Hypotheses apply a random subset
/// of the gold edits and are sometimes perturbed further.
pub fn m2_cases<R: Rng>(rng: &mut R, count: usize) -> Vec<M2Case> {
    const VOCAB: [&str; 4] = ["a", "b", "c", "d"];
    const REPLACEMENTS: [&str; 5] = ["a", "b", "c", "x", "y"];
    let word = |rng: &mut R, pool: &[&str]| pool[rng.gen_range(0..pool.len())].to_owned();
    let mut cases = Vec::with_capacity(count);
    while cases.len() < count {
        let len = rng.gen_range(0..=6);
        let source: Vec<String> = (0..len).map(|_| word(rng, &VOCAB)).collect();
        let mut gold: Vec<OracleEdit> = Vec::new();
        let wanted = rng.gen_range(0..=3);
        for _ in 0..20 {
            if gold.len() == wanted {
                break;
            }
            let start = rng.gen_range(0..=len);
            let end = (start + rng.gen_range(0..=2)).min(len);
            let replacement: Vec<String> = (0..rng.gen_range(0..=2)).map(|_| word(rng, &REPLACEMENTS)).collect();
            let edit = OracleEdit {
                start,
                end,
                replacement,
            };
            let identity = source[start..end] == edit.replacement[..];
            let clashes = gold.iter().any(|g| {
                (edit.start < g.end && g.start < edit.end)
                    || (edit.start == edit.end && g.start == g.end && edit.start == g.start)
                    || (edit.start == edit.end && g.start < edit.start && edit.start < g.end)
                    || (g.start == g.end && edit.start < g.start && g.start < edit.end)
            });
            if !identity && !clashes {
                gold.push(edit);
            }
        }
        gold.sort_by_key(|g| (g.start, g.end));

        let applied: Vec<&OracleEdit> = gold.iter().filter(|_| rng.gen_bool(0.6)).collect();
        let mut hypothesis = apply(&source, &applied);
        if rng.gen_bool(0.35) {
            match rng.gen_range(0..3) {
                0 if !hypothesis.is_empty() => {
                    let at = rng.gen_range(0..hypothesis.len());
                    hypothesis[at] = word(rng, &REPLACEMENTS);
                }
                1 => {
                    let at = rng.gen_range(0..=hypothesis.len());
                    hypothesis.insert(at, word(rng, &REPLACEMENTS));
                }
                _ if !hypothesis.is_empty() => {
                    let at = rng.gen_range(0..hypothesis.len());
                    hypothesis.remove(at);
                }
                _ => {}
            }
        }
        if hypothesis.len() <= 6 {
            cases.push(M2Case {
                source,
                hypothesis,
                gold,
            });
        }
    }
    cases
}
