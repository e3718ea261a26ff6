//! Document vectors: sparse TF-IDF weights or averaged dense embeddings.

mod embeddings;
mod tfidf;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use embeddings::{EmbeddingFormat, EmbeddingTable};
pub use tfidf::{TfIdfConfig, TfIdfModel};

/// Sparse vector with strictly ascending feature ids and no stored zeros.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVector {
    entries: Vec<(u32, f64)>,
}

impl SparseVector {
    /// Builds from unordered `(id, weight)` pairs; duplicate ids are summed and
    /// zero weights dropped.
    pub fn from_pairs(mut pairs: Vec<(u32, f64)>) -> Self {
        pairs.sort_by_key(|&(id, _)| id);
        let mut entries: Vec<(u32, f64)> = Vec::with_capacity(pairs.len());
        for (id, w) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == id => last.1 += w,
                _ => entries.push((id, w)),
            }
        }
        entries.retain(|&(_, w)| w != 0.0);
        SparseVector { entries }
    }

    pub fn entries(&self) -> &[(u32, f64)] {
        &self.entries
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> f64 {
        self.entries
            .binary_search_by_key(&id, |&(i, _)| i)
            .map(|pos| self.entries[pos].1)
            .unwrap_or(0.0)
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|&(_, w)| w * w).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SparseVector) -> f64 {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.entries, &other.entries);
        let mut sum = 0.0;
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    sum += a[i].1 * b[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        sum
    }

    pub fn scaled(&self, c: f64) -> SparseVector {
        SparseVector::from_pairs(self.entries.iter().map(|&(i, w)| (i, w * c)).collect())
    }

    /// Largest feature id + 1, or 0 for the zero vector.
    pub fn min_dim(&self) -> usize {
        self.entries.last().map_or(0, |&(i, _)| i as usize + 1)
    }
}

/// Dense vector of fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Self {
        DenseVector { values }
    }

    pub fn zeros(dim: usize) -> Self {
        DenseVector { values: vec![0.0; dim] }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &DenseVector) -> Result<f64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum())
    }

    pub fn scaled(&self, c: f64) -> DenseVector {
        DenseVector::new(self.values.iter().map(|v| v * c).collect())
    }
}

/// Which vectorization produced a vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    #[serde(rename = "tfidf")]
    TfIdf,
    #[serde(alias = "w2v")]
    Embedding,
}

impl Backend {
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::TfIdf => "tfidf",
            Backend::Embedding => "embedding",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tfidf" => Ok(Backend::TfIdf),
            "embedding" | "w2v" => Ok(Backend::Embedding),
            other => Err(Error::InvalidConfig(format!("unknown backend `{other}`"))),
        }
    }
}

/// A document vector from either backend.
#[derive(Debug, Clone, PartialEq)]
pub enum FeatureVector {
    Sparse(SparseVector),
    Dense(DenseVector),
}

impl FeatureVector {
    pub fn backend(&self) -> Backend {
        match self {
            FeatureVector::Sparse(_) => Backend::TfIdf,
            FeatureVector::Dense(_) => Backend::Embedding,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            FeatureVector::Sparse(v) => v.is_zero(),
            FeatureVector::Dense(v) => v.is_zero(),
        }
    }

    pub fn norm(&self) -> f64 {
        match self {
            FeatureVector::Sparse(v) => v.norm(),
            FeatureVector::Dense(v) => v.norm(),
        }
    }

    pub fn scaled(&self, c: f64) -> FeatureVector {
        match self {
            FeatureVector::Sparse(v) => FeatureVector::Sparse(v.scaled(c)),
            FeatureVector::Dense(v) => FeatureVector::Dense(v.scaled(c)),
        }
    }

    /// Calls `f(feature, value)` for every non-zero component.
    pub fn for_each_nonzero(&self, mut f: impl FnMut(usize, f64)) {
        match self {
            FeatureVector::Sparse(v) => v.entries().iter().for_each(|&(i, w)| f(i as usize, w)),
            FeatureVector::Dense(v) => v
                .values()
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .for_each(|(i, &w)| f(i, w)),
        }
    }
}

impl From<SparseVector> for FeatureVector {
    fn from(v: SparseVector) -> Self {
        FeatureVector::Sparse(v)
    }
}

impl From<DenseVector> for FeatureVector {
    fn from(v: DenseVector) -> Self {
        FeatureVector::Dense(v)
    }
}
