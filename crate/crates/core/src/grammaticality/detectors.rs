//! Built-in rule detectors.

use std::collections::HashSet;
use std::io::BufRead;
use std::path::Path;
use std::sync::Arc;

use crate::corpus::{Sentence, Token};
use crate::error::Result;
use crate::formats::read_word_lines;

use super::{Detector, ErrorSpan};

/// Ids of the built-in detectors, in default suite order.
pub const BUILTIN_DETECTORS: [&str; 6] = [
    "spell",
    "duplicate",
    "article",
    "capitalization",
    "terminal-punctuation",
    "punctuation-spacing",
];

/// A set of known words, stored lowercase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Wordlist {
    words: HashSet<String>,
}

impl Wordlist {
    pub fn from_words<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Wordlist {
            words: words.into_iter().map(|w| w.as_ref().to_owned()).collect(),
        }
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self> {
        Ok(Wordlist::from_words(read_word_lines(reader)?))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Wordlist::from_reader(std::io::BufReader::new(file))
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// A token is known if it, its lowercase form, or its form with the
    /// first letter lowercased is listed.
    pub fn contains(&self, token: &str) -> bool {
        if self.words.contains(token) || self.words.contains(&token.to_lowercase()) {
            return true;
        }
        let mut chars = token.chars();
        match chars.next() {
            Some(first) => {
                let decapitalized: String = first.to_lowercase().chain(chars).collect();
                self.words.contains(&decapitalized)
            }
            None => false,
        }
    }
}

/// True for tokens a spell checker should look at: at least one letter
/// and no digits.
pub(crate) fn is_word(token: &str) -> bool {
    token.chars().any(char::is_alphabetic) && !token.chars().any(|c| c.is_ascii_digit())
}

fn is_punctuation(token: &str) -> bool {
    !token.is_empty() && token.chars().all(|c| !c.is_alphanumeric())
}

/// Flags words missing from a wordlist. Category `SPELL`.
#[derive(Debug, Clone)]
pub struct SpellDetector {
    wordlist: Arc<Wordlist>,
}

impl SpellDetector {
    pub fn new(wordlist: Arc<Wordlist>) -> Self {
        SpellDetector { wordlist }
    }
}

impl Detector for SpellDetector {
    fn id(&self) -> &str {
        "spell"
    }

    fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>> {
        Ok(sentence
            .iter()
            .enumerate()
            .filter(|(_, t)| is_word(t) && !self.wordlist.contains(t))
            .map(|(i, _)| ErrorSpan::new(i, i + 1, "SPELL", self.id()))
            .collect())
    }
}

/// Flags a word immediately repeated, ignoring case. Category `DUP`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DuplicateDetector;

impl Detector for DuplicateDetector {
    fn id(&self) -> &str {
        "duplicate"
    }

    fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>> {
        Ok(sentence
            .windows(2)
            .enumerate()
            .filter(|(_, w)| is_word(&w[0]) && w[0].to_lowercase() == w[1].to_lowercase())
            .map(|(i, _)| ErrorSpan::new(i, i + 2, "DUP", self.id()))
            .collect())
    }
}

// Words whose spelling and sound disagree on the initial vowel.
const CONSONANT_SOUND_PREFIXES: [&str; 7] = ["uni", "use", "usu", "uti", "eu", "one", "once"];
const VOWEL_SOUND_PREFIXES: [&str; 4] = ["hour", "honest", "honor", "heir"];

fn starts_with_vowel_sound(word: &str) -> Option<bool> {
    let lower = word.to_lowercase();
    let first = lower.chars().next().filter(|c| c.is_alphabetic())?;
    if VOWEL_SOUND_PREFIXES.iter().any(|p| lower.starts_with(p)) {
        return Some(true);
    }
    if CONSONANT_SOUND_PREFIXES.iter().any(|p| lower.starts_with(p)) {
        return Some(false);
    }
    Some(matches!(first, 'a' | 'e' | 'i' | 'o' | 'u'))
}

/// a/an agreement with the next word's onset. Category `ART`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ArticleDetector;

impl Detector for ArticleDetector {
    fn id(&self) -> &str {
        "article"
    }

    fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>> {
        let mut spans = Vec::new();
        for (i, pair) in sentence.windows(2).enumerate() {
            let article = pair[0].to_lowercase();
            let Some(vowel) = starts_with_vowel_sound(&pair[1]) else {
                continue;
            };
            let wrong = match article.as_str() {
                "a" => vowel,
                "an" => !vowel,
                _ => false,
            };
            if wrong {
                spans.push(ErrorSpan::new(i, i + 2, "ART", self.id()));
            }
        }
        Ok(spans)
    }
}

/// Sentence starting with a lowercase letter. Category `CAPS`.
#[derive(Debug, Clone, Copy, Default)]
pub struct CapitalizationDetector;

impl Detector for CapitalizationDetector {
    fn id(&self) -> &str {
        "capitalization"
    }

    fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>> {
        let lowercase_start = sentence
            .first()
            .and_then(|t| t.chars().next())
            .is_some_and(char::is_lowercase);
        Ok(if lowercase_start {
            vec![ErrorSpan::new(0, 1, "CAPS", self.id())]
        } else {
            Vec::new()
        })
    }
}

const CLOSERS: [&str; 6] = ["\"", "'", ")", "”", "’", "''"];

/// Sentence not ending in `.`, `!` or `?` (closing quotes and brackets are
/// skipped). Reported as a point error at the end. Category `PUNCT_END`.
#[derive(Debug, Clone, Copy, Default)]
pub struct TerminalPunctuationDetector;

impl Detector for TerminalPunctuationDetector {
    fn id(&self) -> &str {
        "terminal-punctuation"
    }

    fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>> {
        let last = sentence.iter().rev().map(Token::as_str).find(|t| !CLOSERS.contains(t));
        let missing = match last {
            None => false,
            Some(t) => !t.ends_with(['.', '!', '?', '…']),
        };
        let n = sentence.len();
        Ok(if missing {
            vec![ErrorSpan::new(n, n, "PUNCT_END", self.id())]
        } else {
            Vec::new()
        })
    }
}

/// Punctuation glued to the following word, as in `word ,and`, which is
/// what a space placed before instead of after the mark looks like once
/// tokenized. Category `PUNCT_SPACE`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PunctuationSpacingDetector;

impl Detector for PunctuationSpacingDetector {
    fn id(&self) -> &str {
        "punctuation-spacing"
    }

    fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>> {
        Ok(sentence
            .iter()
            .enumerate()
            .filter(|(_, t)| {
                let mut chars = t.chars();
                let first = chars.next();
                let rest: String = chars.collect();
                matches!(first, Some(',' | ';' | ':' | '!' | '?' | '.'))
                    && rest.chars().next().is_some_and(char::is_alphabetic)
                    && !is_punctuation(&rest)
            })
            .map(|(i, _)| ErrorSpan::new(i, i + 1, "PUNCT_SPACE", self.id()))
            .collect())
    }
}
