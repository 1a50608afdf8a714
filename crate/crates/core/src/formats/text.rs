//! Line-per-sentence text and wordlists.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::corpus::Sentence;
use crate::error::Result;

/// Reads one pre-tokenized sentence per line. Line `i` becomes sentence `i`;
/// a blank line is an empty sentence and a trailing newline is tolerated.
pub fn read_parallel_text<R: BufRead>(reader: R) -> Result<Vec<Sentence>> {
    let mut out = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = if idx == 0 {
            line.strip_prefix('\u{feff}').unwrap_or(&line).to_owned()
        } else {
            line
        };
        out.push(Sentence::tokenize(&line));
    }
    Ok(out)
}

pub fn read_parallel_file(path: impl AsRef<Path>) -> Result<Vec<Sentence>> {
    read_parallel_text(BufReader::new(File::open(path)?))
}

/// Reads a wordlist: one word per line, blank lines ignored.
pub fn read_word_lines<R: BufRead>(reader: R) -> Result<Vec<String>> {
    let mut words = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let line = if idx == 0 {
            line.trim_start_matches('\u{feff}').to_owned()
        } else {
            line
        };
        let word = line.trim();
        if !word.is_empty() {
            words.push(word.to_owned());
        }
    }
    Ok(words)
}
