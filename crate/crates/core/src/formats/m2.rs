//! Reader and writer for the M² gold-annotation format.
//!
//! ```text
//! S <space-joined tokens>
//! A <start> <end>|||<type>|||<correction>|||<required>|||<comment>|||<annotator>
//! <blank line>
//! ```

use std::fmt::Write as _;
use std::io::BufRead;

use crate::corpus::{AnnotatedSource, AnnotationSet, Corpus, Edit, Sentence, Token};
use crate::error::{Error, Result};

const NOOP_CATEGORY: &str = "noop";
const NONE_MARKER: &str = "-NONE-";

/// A parsed M² file.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct M2Document {
    pub units: Vec<AnnotatedSource>,
}

impl M2Document {
    pub fn into_corpus(self) -> Corpus {
        Corpus::new(self.units)
    }
}

struct PendingUnit {
    line: usize,
    source: Sentence,
    // Annotators in order of first appearance, with their edits.
    annotators: Vec<(u32, Vec<Edit>)>,
}

impl PendingUnit {
    fn annotator_mut(&mut self, id: u32) -> &mut Vec<Edit> {
        let pos = match self.annotators.iter().position(|(a, _)| *a == id) {
            Some(pos) => pos,
            None => {
                self.annotators.push((id, Vec::new()));
                self.annotators.len() - 1
            }
        };
        &mut self.annotators[pos].1
    }

    fn finish(self) -> Result<AnnotatedSource> {
        let len = self.source.len();
        let mut annotators = self.annotators;
        if annotators.is_empty() {
            annotators.push((0, Vec::new()));
        }
        let sets = annotators
            .into_iter()
            .map(|(id, edits)| AnnotationSet::new(id, edits, len))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::parse(self.line, e.to_string()))?;
        AnnotatedSource::new(self.source, sets).map_err(|e| Error::parse(self.line, e.to_string()))
    }
}

fn parse_index(field: &str, line: usize) -> Result<i64> {
    field
        .parse::<i64>()
        .map_err(|_| Error::parse(line, format!("span offset {field:?} is not an integer")))
}

fn parse_tokens(text: &str) -> Vec<Token> {
    Sentence::tokenize(text).tokens().to_vec()
}

/// Parses an M² stream.
///
/// Every parsed edit is checked against its source sentence; out-of-bounds or
/// overlapping edits fail with the offending line number.
pub fn parse_m2<R: BufRead>(reader: R) -> Result<M2Document> {
    let mut units = Vec::new();
    let mut pending: Option<PendingUnit> = None;

    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let mut line = line?;
        if idx == 0 {
            if let Some(stripped) = line.strip_prefix('\u{feff}') {
                line = stripped.to_owned();
            }
        }
        let line = line.trim_end_matches(['\r', '\n']);

        if line.trim().is_empty() {
            if let Some(unit) = pending.take() {
                units.push(unit.finish()?);
            }
        } else if let Some(rest) = line.strip_prefix("S ").or(if line == "S" { Some("") } else { None }) {
            if let Some(unit) = pending.take() {
                units.push(unit.finish()?);
            }
            pending = Some(PendingUnit {
                line: lineno,
                source: Sentence::tokenize(rest),
                annotators: Vec::new(),
            });
        } else if let Some(rest) = line.strip_prefix("A ") {
            let unit = pending
                .as_mut()
                .ok_or_else(|| Error::parse(lineno, "annotation line before any source line"))?;
            let fields: Vec<&str> = rest.split("|||").collect();
            if fields.len() != 6 {
                return Err(Error::parse(
                    lineno,
                    format!("expected 6 `|||`-separated fields, found {}", fields.len()),
                ));
            }
            let mut span = fields[0].split_whitespace();
            let (Some(start), Some(end), None) = (span.next(), span.next(), span.next()) else {
                return Err(Error::parse(lineno, "span must be `<start> <end>`"));
            };
            let (start, end) = (parse_index(start, lineno)?, parse_index(end, lineno)?);
            let category = fields[1].trim();
            let correction = fields[2].trim();
            let annotator = fields[5]
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::parse(lineno, format!("annotator id {:?} is not an integer", fields[5])))?;

            if category.eq_ignore_ascii_case(NOOP_CATEGORY) {
                unit.annotator_mut(annotator);
                continue;
            }
            let len = unit.source.len() as i64;
            if start < 0 || end < start || end > len {
                return Err(Error::parse(
                    lineno,
                    format!("edit span ({start},{end}) out of bounds for source of length {len}"),
                ));
            }
            let replacement = if correction == NONE_MARKER {
                Vec::new()
            } else {
                parse_tokens(correction)
            };
            let edit = Edit {
                start: start as usize,
                end: end as usize,
                replacement,
                category: category.to_owned(),
                annotator,
                required: fields[3].trim().to_owned(),
                comment: fields[4].trim().to_owned(),
            };
            unit.annotator_mut(annotator).push(edit);
        } else {
            return Err(Error::parse(lineno, "line must start with `S ` or `A ` or be blank"));
        }
    }
    if let Some(unit) = pending.take() {
        units.push(unit.finish()?);
    }
    Ok(M2Document { units })
}

/// Parses M² text held in memory.
pub fn parse_m2_str(text: &str) -> Result<M2Document> {
    parse_m2(text.as_bytes())
}

/// Serializes a document. Annotators without edits are written as `noop`
/// lines so that they survive a round trip.
pub fn serialize_m2(doc: &M2Document) -> String {
    let mut out = String::new();
    for unit in &doc.units {
        let _ = writeln!(out, "S {}", unit.source);
        for set in &unit.annotations {
            if set.edits.is_empty() {
                let _ = writeln!(
                    out,
                    "A -1 -1|||{NOOP_CATEGORY}|||{NONE_MARKER}|||REQUIRED|||{NONE_MARKER}|||{}",
                    set.annotator
                );
            }
            for edit in &set.edits {
                let replacement = Sentence::new(edit.replacement.clone());
                let _ = writeln!(
                    out,
                    "A {} {}|||{}|||{}|||{}|||{}|||{}",
                    edit.start, edit.end, edit.category, replacement, edit.required, edit.comment, set.annotator
                );
            }
        }
        out.push('\n');
    }
    out
}
