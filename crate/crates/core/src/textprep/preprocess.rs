use super::stem::stem;
use std::collections::{HashMap, HashSet};
use std::sync::Arc;

/// Hook for correcting misspelt tokens between abbreviation expansion and
/// stop-word removal. The default pipeline uses [`NoCorrection`].
pub trait SpellCorrector: Send + Sync + std::fmt::Debug {
    fn correct(&self, token: &str) -> String;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoCorrection;

impl SpellCorrector for NoCorrection {
    fn correct(&self, token: &str) -> String {
        token.to_string()
    }
}

/// Abbreviation map keyed by uppercase abbreviation; values are the
/// lowercase expansion words.
pub type AbbreviationMap = HashMap<String, Vec<String>>;

/// Lowercase, strip symbols, expand abbreviations, correct, drop stop words,
/// stem.
#[derive(Debug, Clone)]
pub struct TextPreprocessor {
    abbreviations: AbbreviationMap,
    stop_words: HashSet<String>,
    corrector: Arc<dyn SpellCorrector>,
}

impl TextPreprocessor {
    pub fn new(abbreviations: AbbreviationMap, stop_words: HashSet<String>) -> Self {
        TextPreprocessor {
            abbreviations,
            stop_words,
            corrector: Arc::new(NoCorrection),
        }
    }

    pub fn with_corrector(mut self, corrector: Arc<dyn SpellCorrector>) -> Self {
        self.corrector = corrector;
        self
    }

    pub fn abbreviations(&self) -> &AbbreviationMap {
        &self.abbreviations
    }

    pub fn stop_words(&self) -> &HashSet<String> {
        &self.stop_words
    }

    fn single_pass(&self, text: &str) -> Vec<String> {
        let mut words = Vec::new();
        for raw in raw_tokens(text) {
            match self.abbreviations.get(&raw.to_uppercase()) {
                Some(expansion) => words.extend(expansion.iter().cloned()),
                None => words.push(raw.to_lowercase()),
            }
        }
        words
            .into_iter()
            .map(|w| self.corrector.correct(&w))
            .filter(|w| !w.is_empty() && !self.stop_words.contains(w))
            .map(|w| stem(&w))
            .filter(|w| !w.is_empty() && !self.stop_words.contains(w))
            .collect()
    }

    /// Runs the pipeline to a fixed point, so the result is stable when fed
    /// back in (a stem can collide with a stop word or an abbreviation).
    pub fn preprocess(&self, text: &str) -> Vec<String> {
        let mut tokens = self.single_pass(text);
        for _ in 0..8 {
            let again = self.single_pass(&tokens.join(" "));
            if again == tokens {
                break;
            }
            tokens = again;
        }
        tokens
    }
}

/// Splits on anything that is not alphanumeric. Apostrophes are dropped
/// inside words ("don't" → "dont").
fn raw_tokens(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.push(ch);
        } else if ch == '\'' || ch == '\u{2019}' {
            continue;
        } else if !current.is_empty() {
            out.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        out.push(current);
    }
    out
}

/// Free-function form of [`TextPreprocessor::preprocess`].
pub fn preprocess_text(
    text: &str,
    abbreviations: &AbbreviationMap,
    stop_words: &HashSet<String>,
) -> Vec<String> {
    TextPreprocessor::new(abbreviations.clone(), stop_words.clone()).preprocess(text)
}

/// Parses an abbreviation file: `ABBR<whitespace>expansion`, `#` comments.
pub fn parse_abbreviations(text: &str) -> AbbreviationMap {
    data_lines(text)
        .filter_map(|line| {
            let mut parts = line.splitn(2, char::is_whitespace);
            let key = parts.next()?.trim().to_uppercase();
            let expansion: Vec<String> = raw_tokens(parts.next()?.trim())
                .into_iter()
                .map(|w| w.to_lowercase())
                .collect();
            (!key.is_empty() && !expansion.is_empty()).then_some((key, expansion))
        })
        .collect()
}

/// Parses a one-entry-per-line word list, lowercasing entries.
pub fn parse_word_list(text: &str) -> HashSet<String> {
    data_lines(text).map(|l| l.to_lowercase()).collect()
}

pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
}
