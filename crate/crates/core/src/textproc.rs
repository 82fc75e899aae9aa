//! Text preprocessing: tokenization, Porter stemming, and TF-IDF sparse
//! vector spaces with cosine similarity.
//!
//! Tokens are maximal runs of Unicode letters and digits, lowercased; there
//! is no stop-word removal and no stemming at the vectorization stage (the
//! stemmer is only consulted by metrics that ask for it). A vector space is
//! fitted over whatever units the caller supplies, so sentence-level and
//! event-version-level spaces stay independent.

mod porter;

use std::collections::{HashMap, HashSet};

use thiserror::Error;

pub use porter::stem;

/// A tokenized unit of text.
pub type TokenList = Vec<String>;

/// Errors from vector space fitting.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum TextError {
    #[error("cannot fit a vector space over zero units")]
    EmptyCorpus,
}

/// Splits text into lowercased maximal alphanumeric runs. Punctuation and
/// whitespace separate tokens and are dropped.
pub fn tokenize(text: &str) -> TokenList {
    let mut tokens = Vec::new();
    let mut current = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            current.extend(ch.to_lowercase());
        } else if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// A TF-IDF vocabulary fitted over a fixed set of units.
///
/// Dimensions are dense indices `0..len()` in first-appearance order;
/// `idf(dim) = ln(n_units / document_frequency)` with raw counts.
#[derive(Debug, Clone)]
pub struct VectorSpace {
    index: HashMap<String, usize>,
    idf: Vec<f64>,
    n_units: usize,
}

impl VectorSpace {
    /// Builds a space directly from a vocabulary and its idf values. Panics
    /// when the two lengths disagree; intended for tests and deserialization.
    pub fn from_parts(vocabulary: Vec<String>, idf: Vec<f64>, n_units: usize) -> Self {
        assert_eq!(vocabulary.len(), idf.len(), "vocabulary/idf length mismatch");
        let index = vocabulary
            .into_iter()
            .enumerate()
            .map(|(dim, token)| (token, dim))
            .collect();
        Self { index, idf, n_units }
    }

    pub fn len(&self) -> usize {
        self.idf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.idf.is_empty()
    }

    /// Number of units the space was fitted over.
    pub fn n_units(&self) -> usize {
        self.n_units
    }

    pub fn dim_of(&self, token: &str) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn idf(&self, dim: usize) -> f64 {
        self.idf[dim]
    }
}

/// Fits a TF-IDF space over the given units.
pub fn fit_space(units: &[TokenList]) -> Result<VectorSpace, TextError> {
    if units.is_empty() {
        return Err(TextError::EmptyCorpus);
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut df: Vec<usize> = Vec::new();
    for unit in units {
        let mut seen: HashSet<usize> = HashSet::new();
        for token in unit {
            let dim = match index.get(token) {
                Some(&dim) => dim,
                None => {
                    let dim = df.len();
                    index.insert(token.clone(), dim);
                    df.push(0);
                    dim
                }
            };
            if seen.insert(dim) {
                df[dim] += 1;
            }
        }
    }
    let n = units.len() as f64;
    let idf = df.iter().map(|&d| (n / d as f64).ln()).collect();
    Ok(VectorSpace {
        index,
        idf,
        n_units: units.len(),
    })
}

/// A sparse vector with strictly increasing dimensions and no zero weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SparseVector {
    entries: Vec<(usize, f64)>,
}

impl SparseVector {
    /// Builds a vector from (dimension, weight) pairs. Zero weights are
    /// dropped; duplicate dimensions panic.
    pub fn from_entries(mut entries: Vec<(usize, f64)>) -> Self {
        entries.retain(|&(_, w)| w != 0.0);
        entries.sort_by_key(|&(dim, _)| dim);
        for pair in entries.windows(2) {
            assert!(pair[0].0 < pair[1].0, "duplicate dimension {}", pair[1].0);
        }
        Self { entries }
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(_, w)| w * w)
            .sum::<f64>()
            .sqrt()
    }

    /// Dot product by merge join over the sorted entries.
    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let mut acc = 0.0;
        while i < self.entries.len() && j < other.entries.len() {
            let (da, wa) = self.entries[i];
            let (db, wb) = other.entries[j];
            match da.cmp(&db) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    acc += wa * wb;
                    i += 1;
                    j += 1;
                }
            }
        }
        acc
    }
}

/// Projects a unit into a fitted space. Tokens outside the vocabulary and
/// dimensions with zero idf are elided, so weights are always positive.
pub fn vectorize(unit: &[String], space: &VectorSpace) -> SparseVector {
    let mut counts: HashMap<usize, f64> = HashMap::new();
    for token in unit {
        if let Some(dim) = space.dim_of(token) {
            *counts.entry(dim).or_insert(0.0) += 1.0;
        }
    }
    let mut entries: Vec<(usize, f64)> = counts
        .into_iter()
        .map(|(dim, tf)| (dim, tf * space.idf(dim)))
        .filter(|&(_, w)| w != 0.0)
        .collect();
    entries.sort_by_key(|&(dim, _)| dim);
    SparseVector { entries }
}

/// Cosine similarity. Zero whenever either vector is zero; otherwise in
/// [0, 1] for the nonnegative weights produced by [`vectorize`].
pub fn cosine(u: &SparseVector, v: &SparseVector) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (u.dot(v) / (nu * nv)).min(1.0)
}
