//! Text preprocessing, bag-of-words features, comment polarity and the
//! combined user rating.

mod cur;
mod polarity;
mod preprocess;
pub mod stem;
mod vocab;

pub use cur::{compute_cur, CurInputs, CurMode};
pub use polarity::{polarity, SentimentLexicon};
pub use preprocess::{
    parse_abbreviations, parse_word_list, preprocess_text, AbbreviationMap, NoCorrection,
    SpellCorrector, TextPreprocessor,
};
pub use vocab::{build_feature_matrix, build_vocabulary, FeatureMatrix, Vocabulary};

use std::collections::HashSet;

pub const DEFAULT_ABBREVIATIONS: &str = include_str!("../../data/abbreviations.txt");
pub const DEFAULT_STOP_WORDS: &str = include_str!("../../data/stopwords.txt");
pub const DEFAULT_POSITIVE_TERMS: &str = include_str!("../../data/positive.txt");
pub const DEFAULT_NEGATIVE_TERMS: &str = include_str!("../../data/negative.txt");

pub const DEFAULT_MIN_FREQUENCY: usize = 2;

pub fn default_abbreviations() -> AbbreviationMap {
    parse_abbreviations(DEFAULT_ABBREVIATIONS)
}

pub fn default_stop_words() -> HashSet<String> {
    parse_word_list(DEFAULT_STOP_WORDS)
}

pub fn default_preprocessor() -> TextPreprocessor {
    TextPreprocessor::new(default_abbreviations(), default_stop_words())
}

pub fn default_lexicon() -> SentimentLexicon {
    SentimentLexicon::from_word_lists(
        DEFAULT_POSITIVE_TERMS,
        DEFAULT_NEGATIVE_TERMS,
        &default_preprocessor(),
    )
    .expect("shipped lexicon is disjoint")
}
