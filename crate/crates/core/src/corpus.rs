//! Sentences, edits, annotations and system outputs.
//!
//! Everything here is pre-tokenized text: a [`Sentence`] is a sequence of
//! whitespace-free [`Token`]s and all edit offsets are 0-based token indices
//! with an exclusive end.

use std::collections::HashSet;
use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A single whitespace-free, non-empty token.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token(String);

impl Token {
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::InvalidToken(surface));
        }
        Ok(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Deref for Token {
    type Target = str;

    fn deref(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Token {
    type Error = Error;

    fn try_from(value: String) -> Result<Self> {
        Token::new(value)
    }
}

impl From<Token> for String {
    fn from(token: Token) -> Self {
        token.0
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// An ordered, possibly empty, sequence of tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sentence(Vec<Token>);

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence(tokens)
    }

    /// Splits on runs of Unicode whitespace. No case or punctuation
    /// normalization is applied.
    pub fn tokenize(raw: &str) -> Self {
        Sentence(raw.split_whitespace().map(|t| Token(t.to_owned())).collect())
    }

    /// Builds a sentence from individual token strings, validating each.
    pub fn from_tokens<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        tokens
            .into_iter()
            .map(Token::new)
            .collect::<Result<Vec<_>>>()
            .map(Sentence)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Token> {
        self.0.iter()
    }

    /// Joins the tokens with single spaces.
    pub fn detokenize(&self) -> String {
        self.to_string()
    }
}

impl Deref for Sentence {
    type Target = [Token];

    fn deref(&self) -> &[Token] {
        &self.0
    }
}

impl FromIterator<Token> for Sentence {
    fn from_iter<I: IntoIterator<Item = Token>>(iter: I) -> Self {
        Sentence(iter.into_iter().collect())
    }
}

impl<'a> IntoIterator for &'a Sentence {
    type Item = &'a Token;
    type IntoIter = std::slice::Iter<'a, Token>;

    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

impl fmt::Display for Sentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, token) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(token)?;
        }
        Ok(())
    }
}

pub const DEFAULT_REQUIRED: &str = "REQUIRED";
pub const DEFAULT_COMMENT: &str = "-NONE-";

/// A gold correction: replace `source[start..end]` with `replacement`.
///
/// `start == end` is an insertion; an empty replacement with `start < end`
/// is a deletion. The `required` and `comment` fields are carried through
/// from M² files but play no part in scoring.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub replacement: Vec<Token>,
    pub category: String,
    pub annotator: u32,
    pub required: String,
    pub comment: String,
}

impl Edit {
    pub fn new(start: usize, end: usize, replacement: Vec<Token>, category: impl Into<String>, annotator: u32) -> Self {
        Edit {
            start,
            end,
            replacement,
            category: category.into(),
            annotator,
            required: DEFAULT_REQUIRED.to_owned(),
            comment: DEFAULT_COMMENT.to_owned(),
        }
    }

    /// Convenience constructor from a space-separated replacement string.
    pub fn substitute(start: usize, end: usize, replacement: &str) -> Self {
        Edit::new(start, end, Sentence::tokenize(replacement).0, "UNK", 0)
    }

    /// Same span and same replacement; category and annotator are ignored.
    pub fn same_correction(&self, other: &Edit) -> bool {
        self.start == other.start && self.end == other.end && self.replacement == other.replacement
    }

    /// True if applying the edit to `source` leaves it unchanged.
    pub fn is_identity(&self, source: &Sentence) -> bool {
        self.end <= source.len() && source[self.start..self.end] == self.replacement[..]
    }

    fn describe(&self) -> String {
        let repl: Vec<&str> = self.replacement.iter().map(Token::as_str).collect();
        format!("({},{})->{:?}", self.start, self.end, repl.join(" "))
    }
}

/// Checks the span and ordering rules for an edit sequence against a source
/// of length `source_len`. Returns one message per violation.
fn edit_sequence_issues(edits: &[Edit], source_len: usize) -> Vec<String> {
    let mut issues = Vec::new();
    for edit in edits {
        if edit.start > edit.end || edit.end > source_len {
            issues.push(format!(
                "edit {} out of bounds for source of length {}",
                edit.describe(),
                source_len
            ));
        }
    }
    for pair in edits.windows(2) {
        let (a, b) = (&pair[0], &pair[1]);
        if (a.start, a.end) > (b.start, b.end) {
            issues.push(format!(
                "edits {} and {} are not sorted by span",
                a.describe(),
                b.describe()
            ));
        } else if a.end > b.start {
            issues.push(format!("edits {} and {} overlap", a.describe(), b.describe()));
        } else if a.start == a.end && b.start == b.end && a.start == b.start {
            issues.push(format!(
                "edits {} and {} are two insertions at the same point",
                a.describe(),
                b.describe()
            ));
        }
    }
    issues
}

/// One annotator's edits for a source sentence.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationSet {
    pub annotator: u32,
    pub edits: Vec<Edit>,
}

impl AnnotationSet {
    /// Sorts the edits by span and validates them against the source length.
    pub fn new(annotator: u32, mut edits: Vec<Edit>, source_len: usize) -> Result<Self> {
        edits.sort_by_key(|e| (e.start, e.end));
        let issues = edit_sequence_issues(&edits, source_len);
        if let Some(first) = issues.into_iter().next() {
            return Err(Error::Validation(format!("annotator {annotator}: {first}")));
        }
        Ok(AnnotationSet { annotator, edits })
    }

    pub fn empty(annotator: u32) -> Self {
        AnnotationSet {
            annotator,
            edits: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.edits.is_empty()
    }
}

/// A source sentence with one or more annotators' gold edits.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedSource {
    pub source: Sentence,
    pub annotations: Vec<AnnotationSet>,
}

impl AnnotatedSource {
    pub fn new(source: Sentence, annotations: Vec<AnnotationSet>) -> Result<Self> {
        let unit = AnnotatedSource { source, annotations };
        if let Some(first) = unit.issues().into_iter().next() {
            return Err(Error::Validation(first));
        }
        Ok(unit)
    }

    /// A source with a single annotator (id 0) who made no edits.
    pub fn unannotated(source: Sentence) -> Self {
        AnnotatedSource {
            source,
            annotations: vec![AnnotationSet::empty(0)],
        }
    }

    fn issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.annotations.is_empty() {
            issues.push("source has no annotation sets".to_owned());
        }
        let mut seen = HashSet::new();
        for set in &self.annotations {
            if !seen.insert(set.annotator) {
                issues.push(format!("annotator id {} appears twice", set.annotator));
            }
            for issue in edit_sequence_issues(&set.edits, self.source.len()) {
                issues.push(format!("annotator {}: {issue}", set.annotator));
            }
        }
        issues
    }

    /// The corrected sentence for each annotator, in annotation order.
    pub fn references(&self) -> Result<Vec<Sentence>> {
        self.annotations
            .iter()
            .map(|set| apply_edits(&self.source, &set.edits))
            .collect()
    }
}

/// Sources with stable 0-based sentence indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub units: Vec<AnnotatedSource>,
}

impl Corpus {
    pub fn new(units: Vec<AnnotatedSource>) -> Self {
        Corpus { units }
    }

    /// A corpus of plain sources, each with a single empty annotation set.
    pub fn from_sources(sources: Vec<Sentence>) -> Self {
        Corpus {
            units: sources.into_iter().map(AnnotatedSource::unannotated).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn sources(&self) -> impl Iterator<Item = &Sentence> {
        self.units.iter().map(|u| &u.source)
    }

    /// References materialized from each unit's annotation sets. Units may
    /// have different annotator counts, so the result is ragged.
    pub fn gold_references(&self) -> Result<ReferenceSet> {
        let lists = self
            .units
            .iter()
            .map(AnnotatedSource::references)
            .collect::<Result<Vec<_>>>()?;
        ReferenceSet::ragged(lists)
    }
}

/// Reference sentences per source sentence.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferenceSet {
    per_sentence: Vec<Vec<Sentence>>,
}

impl ReferenceSet {
    /// Strict construction: every sentence has the same number (≥ 1) of
    /// references.
    pub fn new(per_sentence: Vec<Vec<Sentence>>) -> Result<Self> {
        let set = ReferenceSet::ragged(per_sentence)?;
        if let Some(first) = set.per_sentence.first() {
            let n = first.len();
            if let Some((i, refs)) = set.per_sentence.iter().enumerate().find(|(_, r)| r.len() != n) {
                return Err(Error::Validation(format!(
                    "sentence {i} has {} references, expected {n}",
                    refs.len()
                )));
            }
        }
        Ok(set)
    }

    /// Lenient construction: every sentence needs at least one reference,
    /// but counts may differ between sentences.
    pub fn ragged(per_sentence: Vec<Vec<Sentence>>) -> Result<Self> {
        if let Some(i) = per_sentence.iter().position(Vec::is_empty) {
            return Err(Error::Validation(format!("sentence {i} has no references")));
        }
        Ok(ReferenceSet { per_sentence })
    }

    /// Builds a strict set from reference files, one column per file.
    pub fn from_columns(columns: Vec<Vec<Sentence>>) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::Validation("no reference columns".to_owned()));
        };
        let n = first.len();
        for (j, col) in columns.iter().enumerate() {
            if col.len() != n {
                return Err(Error::Validation(format!(
                    "reference column {j} has {} sentences, column 0 has {n}",
                    col.len()
                )));
            }
        }
        let mut per_sentence = vec![Vec::with_capacity(columns.len()); n];
        for col in columns {
            for (i, sentence) in col.into_iter().enumerate() {
                per_sentence[i].push(sentence);
            }
        }
        ReferenceSet::new(per_sentence)
    }

    pub fn len(&self) -> usize {
        self.per_sentence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_sentence.is_empty()
    }

    pub fn get(&self, sentence: usize) -> &[Sentence] {
        &self.per_sentence[sentence]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Sentence]> {
        self.per_sentence.iter().map(Vec::as_slice)
    }

    /// The common reference count, or `None` if the set is ragged or empty.
    pub fn n_refs(&self) -> Option<usize> {
        let n = self.per_sentence.first()?.len();
        self.per_sentence.iter().all(|r| r.len() == n).then_some(n)
    }

    /// Largest per-sentence reference count.
    pub fn max_refs(&self) -> usize {
        self.per_sentence.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Keeps, for each sentence, the references at the given indices.
    pub fn select(&self, indices: &[Vec<usize>]) -> Result<Self> {
        if indices.len() != self.per_sentence.len() {
            return Err(Error::Validation(format!(
                "selection covers {} sentences, reference set has {}",
                indices.len(),
                self.per_sentence.len()
            )));
        }
        let mut out = Vec::with_capacity(indices.len());
        for (i, (refs, picks)) in self.per_sentence.iter().zip(indices).enumerate() {
            let chosen = picks
                .iter()
                .map(|&j| {
                    refs.get(j)
                        .cloned()
                        .ok_or_else(|| Error::Validation(format!("sentence {i} has no reference {j}")))
                })
                .collect::<Result<Vec<_>>>()?;
            out.push(chosen);
        }
        ReferenceSet::ragged(out)
    }

    /// Reassigns reference lists to sentences: sentence `i` receives the
    /// references of sentence `permutation[i]`.
    pub fn permuted(&self, permutation: &[usize]) -> Result<Self> {
        if permutation.len() != self.per_sentence.len() {
            return Err(Error::Validation(
                "permutation length differs from reference count".to_owned(),
            ));
        }
        let lists = permutation
            .iter()
            .map(|&j| {
                self.per_sentence
                    .get(j)
                    .cloned()
                    .ok_or_else(|| Error::Validation(format!("permutation index {j} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        ReferenceSet::ragged(lists)
    }
}

/// One hypothesis per source sentence for a named system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemOutput {
    pub system_id: String,
    pub hypotheses: Vec<Sentence>,
}

impl SystemOutput {
    pub fn new(system_id: impl Into<String>, hypotheses: Vec<Sentence>) -> Self {
        SystemOutput {
            system_id: system_id.into(),
            hypotheses,
        }
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }
}

/// Applies sorted, non-overlapping edits to `source`.
///
/// Fails with a validation error naming the first offending edit if the
/// sequence is out of bounds, unsorted or overlapping.
pub fn apply_edits(source: &Sentence, edits: &[Edit]) -> Result<Sentence> {
    if let Some(first) = edit_sequence_issues(edits, source.len()).into_iter().next() {
        return Err(Error::Validation(first));
    }
    let mut out = Vec::with_capacity(source.len());
    let mut cursor = 0;
    for edit in edits {
        out.extend_from_slice(&source[cursor..edit.start]);
        out.extend(edit.replacement.iter().cloned());
        cursor = edit.end;
    }
    out.extend_from_slice(&source[cursor..]);
    Ok(Sentence(out))
}

/// A single problem found by [`validate_alignment`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValidationIssue {
    CountMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    Annotation {
        sentence: usize,
        message: String,
    },
    EmptyReferences {
        sentence: usize,
    },
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationIssue::CountMismatch { what, expected, found } => {
                write!(f, "{what}: expected {expected} sentences, found {found}")
            }
            ValidationIssue::Annotation { sentence, message } => {
                write!(f, "sentence {sentence}: {message}")
            }
            ValidationIssue::EmptyReferences { sentence } => {
                write!(f, "sentence {sentence}: no references")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub issues: Vec<ValidationIssue>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.issues.is_empty()
    }

    /// Converts a non-empty report into a validation error listing every issue.
    pub fn into_result(self) -> Result<()> {
        if self.issues.is_empty() {
            return Ok(());
        }
        let lines: Vec<String> = self.issues.iter().map(ToString::to_string).collect();
        Err(Error::Validation(lines.join("; ")))
    }
}

/// Reports every size mismatch and annotation violation between a corpus and
/// optional system output and references.
pub fn validate_alignment(
    corpus: &Corpus,
    output: Option<&SystemOutput>,
    refs: Option<&ReferenceSet>,
) -> ValidationReport {
    let mut issues = Vec::new();
    for (i, unit) in corpus.units.iter().enumerate() {
        for message in unit.issues() {
            issues.push(ValidationIssue::Annotation { sentence: i, message });
        }
    }
    if let Some(output) = output {
        if output.len() != corpus.len() {
            issues.push(ValidationIssue::CountMismatch {
                what: "hypotheses",
                expected: corpus.len(),
                found: output.len(),
            });
        }
    }
    if let Some(refs) = refs {
        if refs.len() != corpus.len() {
            issues.push(ValidationIssue::CountMismatch {
                what: "references",
                expected: corpus.len(),
                found: refs.len(),
            });
        }
        for (i, list) in refs.per_sentence.iter().enumerate() {
            if list.is_empty() {
                issues.push(ValidationIssue::EmptyReferences { sentence: i });
            }
        }
    }
    ValidationReport { issues }
}
