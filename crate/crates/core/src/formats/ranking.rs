//! Human system rankings: two tab-separated columns, `system_id` and score.

use std::io::BufRead;

use indexmap::IndexMap;

use crate::error::{Error, Result};

/// Human judgement per system; a higher score means a better system.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HumanRanking {
    scores: IndexMap<String, f64>,
}

impl HumanRanking {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, system: impl Into<String>, score: f64) -> Result<()> {
        let system = system.into();
        if self.scores.contains_key(&system) {
            return Err(Error::Validation(format!("duplicate system id {system:?}")));
        }
        self.scores.insert(system, score);
        Ok(())
    }

    pub fn get(&self, system: &str) -> Option<f64> {
        self.scores.get(system).copied()
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.scores.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

impl FromIterator<(String, f64)> for HumanRanking {
    /// Later duplicates overwrite earlier ones; use [`HumanRanking::insert`]
    /// to reject them.
    fn from_iter<I: IntoIterator<Item = (String, f64)>>(iter: I) -> Self {
        HumanRanking {
            scores: iter.into_iter().collect(),
        }
    }
}

/// Reads a ranking table. Blank lines and lines starting with `#` are skipped.
pub fn read_human_ranking<R: BufRead>(reader: R) -> Result<HumanRanking> {
    let mut ranking = HumanRanking::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let line = line.trim_start_matches('\u{feff}').trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                lineno,
                format!("expected 2 tab-separated columns, found {}", fields.len()),
            ));
        }
        let id = fields[0].trim();
        let score: f64 = fields[1]
            .trim()
            .parse()
            .ok()
            .filter(|s: &f64| s.is_finite())
            .ok_or_else(|| Error::parse(lineno, format!("score {:?} is not a number", fields[1])))?;
        if ranking.get(id).is_some() {
            return Err(Error::parse(lineno, format!("duplicate system id {id:?}")));
        }
        ranking.insert(id, score)?;
    }
    Ok(ranking)
}
