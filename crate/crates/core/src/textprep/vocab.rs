use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

/// Corpus terms ordered by frequency (descending), ties lexicographic.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vocabulary {
    pub terms: Vec<(String, usize)>,
    pub min_frequency: usize,
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn index(&self) -> HashMap<&str, usize> {
        self.terms
            .iter()
            .enumerate()
            .map(|(i, (t, _))| (t.as_str(), i))
            .collect()
    }

    /// Binary presence row for one document.
    pub fn encode(&self, tokens: &[String]) -> Vec<u8> {
        let index = self.index();
        let mut row = vec![0u8; self.len()];
        for t in tokens {
            if let Some(&j) = index.get(t.as_str()) {
                row[j] = 1;
            }
        }
        row
    }
}

/// Counts tokens corpus-wide and keeps those seen at least `min_frequency`
/// times (a `min_frequency` of 0 behaves like 1).
pub fn build_vocabulary(token_lists: &[Vec<String>], min_frequency: usize) -> Vocabulary {
    let min_frequency = min_frequency.max(1);
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in token_lists {
        for t in doc {
            *counts.entry(t.as_str()).or_default() += 1;
        }
    }
    let mut terms: Vec<(String, usize)> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_frequency)
        .map(|(t, c)| (t.to_string(), c))
        .collect();
    terms.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Vocabulary {
        terms,
        min_frequency,
    }
}

/// Dense binary document-term matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<u8>,
}

impl FeatureMatrix {
    pub fn row(&self, i: usize) -> &[u8] {
        &self.cells[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.cells[i * self.cols + j]
    }
}

pub fn build_feature_matrix(token_lists: &[Vec<String>], vocabulary: &Vocabulary) -> FeatureMatrix {
    let index = vocabulary.index();
    let cols = vocabulary.len();
    let mut cells = vec![0u8; token_lists.len() * cols];
    for (i, doc) in token_lists.iter().enumerate() {
        for t in doc {
            if let Some(&j) = index.get(t.as_str()) {
                cells[i * cols + j] = 1;
            }
        }
    }
    FeatureMatrix {
        rows: token_lists.len(),
        cols,
        cells,
    }
}
