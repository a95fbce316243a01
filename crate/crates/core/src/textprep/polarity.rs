use super::preprocess::{data_lines, TextPreprocessor};
use crate::error::{Error, Result};
use std::collections::BTreeSet;

/// Positive and negative term sets, stored in stemmed form so they match
/// preprocessed tokens.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SentimentLexicon {
    positive_terms: BTreeSet<String>,
    negative_terms: BTreeSet<String>,
}

impl SentimentLexicon {
    /// Builds a lexicon from already-normalized terms. Fails when a term is in
    /// both sets.
    pub fn new(
        positive_terms: impl IntoIterator<Item = String>,
        negative_terms: impl IntoIterator<Item = String>,
    ) -> Result<Self> {
        let positive_terms: BTreeSet<String> = positive_terms.into_iter().collect();
        let negative_terms: BTreeSet<String> = negative_terms.into_iter().collect();
        let overlap: Vec<&String> = positive_terms.intersection(&negative_terms).collect();
        if !overlap.is_empty() {
            return Err(Error::arg(format!(
                "lexicon terms are both positive and negative: {overlap:?}"
            )));
        }
        Ok(SentimentLexicon {
            positive_terms,
            negative_terms,
        })
    }

    /// Parses two word lists and runs every entry through `preprocessor`, so
    /// "worse" and "worsening" land on the same stems as comment tokens.
    pub fn from_word_lists(
        positive: &str,
        negative: &str,
        preprocessor: &TextPreprocessor,
    ) -> Result<Self> {
        let normalize = |text: &str| -> Vec<String> {
            data_lines(text)
                .flat_map(|line| preprocessor.preprocess(line))
                .collect()
        };
        Self::new(normalize(positive), normalize(negative))
    }

    pub fn positive_terms(&self) -> &BTreeSet<String> {
        &self.positive_terms
    }

    pub fn negative_terms(&self) -> &BTreeSet<String> {
        &self.negative_terms
    }
}

/// Comment polarity in [0,1]; 0.5 when no token hits the lexicon.
pub fn polarity(tokens: &[String], lexicon: &SentimentLexicon) -> f64 {
    let pos = tokens
        .iter()
        .filter(|t| lexicon.positive_terms.contains(*t))
        .count();
    let neg = tokens
        .iter()
        .filter(|t| lexicon.negative_terms.contains(*t))
        .count();
    let s = (pos as f64 - neg as f64) / (pos + neg).max(1) as f64;
    (s + 1.0) / 2.0
}
