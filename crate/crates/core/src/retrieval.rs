//! Exact cosine nearest-neighbour retrieval over training diff vectors.
//!
//! Generation returns the stored commit message of the single most similar
//! training diff. Search is exhaustive; ties (including the all-zero query)
//! go to the lowest training index.

use std::cmp::Ordering;
use std::thread;

use crate::error::{Error, Result};
use crate::io_util::{fmt_f64, parse_f64};
use crate::vectorize::{Backend, DenseVector, FeatureVector, SparseVector};

const HEADER: &str = "commitgen-index 1";

/// Cosine similarity; 0 when either vector is zero.
pub fn cosine(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    let dot = match (a, b) {
        (FeatureVector::Sparse(x), FeatureVector::Sparse(y)) => x.dot(y),
        (FeatureVector::Dense(x), FeatureVector::Dense(y)) => x.dot(y)?,
        _ => {
            return Err(Error::BackendMismatch {
                expected: a.backend().to_string(),
                found: b.backend().to_string(),
            })
        }
    };
    Ok(similarity(dot, a.norm(), b.norm()))
}

fn similarity(dot: f64, norm_a: f64, norm_b: f64) -> f64 {
    if norm_a == 0.0 || norm_b == 0.0 {
        return 0.0;
    }
    (dot / (norm_a * norm_b)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub train_index: usize,
    pub similarity: f64,
}

/// Higher similarity first, then lower index.
fn rank(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then(a.train_index.cmp(&b.train_index))
}

#[derive(Debug, Clone, PartialEq)]
enum Store {
    Sparse {
        vectors: Vec<SparseVector>,
        // feature id -> (row, weight), rows ascending
        postings: Vec<Vec<(u32, f64)>>,
    },
    Dense {
        dim: usize,
        vectors: Vec<DenseVector>,
    },
}

/// Immutable store of training vectors and their messages.
#[derive(Debug, Clone, PartialEq)]
pub struct NNIndex {
    store: Store,
    norms: Vec<f64>,
    messages: Vec<String>,
}

impl NNIndex {
    /// Builds the index. All vectors must come from `backend`, and dense
    /// vectors must share one dimension.
    pub fn build(vectors: Vec<FeatureVector>, messages: Vec<String>, backend: Backend) -> Result<Self> {
        if vectors.len() != messages.len() {
            return Err(Error::LengthMismatch {
                left: vectors.len(),
                right: messages.len(),
            });
        }
        if vectors.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if let Some(v) = vectors.iter().find(|v| v.backend() != backend) {
            return Err(Error::BackendMismatch {
                expected: backend.to_string(),
                found: v.backend().to_string(),
            });
        }
        let norms = vectors.iter().map(FeatureVector::norm).collect();
        let store = match backend {
            Backend::TfIdf => {
                let vectors: Vec<SparseVector> = vectors
                    .into_iter()
                    .map(|v| match v {
                        FeatureVector::Sparse(s) => s,
                        FeatureVector::Dense(_) => unreachable!("checked above"),
                    })
                    .collect();
                let dim = vectors.iter().map(SparseVector::min_dim).max().unwrap_or(0);
                let mut postings = vec![Vec::new(); dim];
                for (row, v) in vectors.iter().enumerate() {
                    for &(f, w) in v.entries() {
                        postings[f as usize].push((row as u32, w));
                    }
                }
                Store::Sparse { vectors, postings }
            }
            Backend::Embedding => {
                let vectors: Vec<DenseVector> = vectors
                    .into_iter()
                    .map(|v| match v {
                        FeatureVector::Dense(d) => d,
                        FeatureVector::Sparse(_) => unreachable!("checked above"),
                    })
                    .collect();
                let dim = vectors[0].dim();
                if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
                    return Err(Error::DimensionMismatch { left: dim, right: v.dim() });
                }
                Store::Dense { dim, vectors }
            }
        };
        Ok(NNIndex { store, norms, messages })
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn backend(&self) -> Backend {
        match self.store {
            Store::Sparse { .. } => Backend::TfIdf,
            Store::Dense { .. } => Backend::Embedding,
        }
    }

    pub fn messages(&self) -> &[String] {
        &self.messages
    }

    pub fn vector(&self, i: usize) -> FeatureVector {
        match &self.store {
            Store::Sparse { vectors, .. } => FeatureVector::Sparse(vectors[i].clone()),
            Store::Dense { vectors, .. } => FeatureVector::Dense(vectors[i].clone()),
        }
    }

    /// Similarity of the query to every stored vector, in index order.
    pub fn similarities(&self, query: &FeatureVector) -> Result<Vec<f64>> {
        let qnorm = query.norm();
        match (&self.store, query) {
            (Store::Sparse { postings, .. }, FeatureVector::Sparse(q)) => {
                let mut dots = vec![0.0; self.len()];
                for &(f, w) in q.entries() {
                    if let Some(list) = postings.get(f as usize) {
                        for &(row, x) in list {
                            dots[row as usize] += w * x;
                        }
                    }
                }
                Ok(dots
                    .into_iter()
                    .zip(&self.norms)
                    .map(|(d, &n)| similarity(d, qnorm, n))
                    .collect())
            }
            (Store::Dense { dim, vectors }, FeatureVector::Dense(q)) => {
                if q.dim() != *dim {
                    return Err(Error::DimensionMismatch { left: *dim, right: q.dim() });
                }
                vectors
                    .iter()
                    .zip(&self.norms)
                    .map(|(v, &n)| Ok(similarity(v.dot(q)?, qnorm, n)))
                    .collect()
            }
            _ => Err(Error::BackendMismatch {
                expected: self.backend().to_string(),
                found: query.backend().to_string(),
            }),
        }
    }

    /// The `k` most similar entries, best first.
    pub fn nearest(&self, query: &FeatureVector, k: usize) -> Result<Vec<Neighbor>> {
        let sims = self.similarities(query)?;
        let mut all: Vec<Neighbor> = sims
            .into_iter()
            .enumerate()
            .map(|(train_index, similarity)| Neighbor { train_index, similarity })
            .collect();
        if k == 1 {
            let best = all.iter().copied().min_by(rank).expect("index is non-empty");
            return Ok(vec![best]);
        }
        let k = k.min(all.len());
        if k == 0 {
            return Ok(Vec::new());
        }
        all.select_nth_unstable_by(k - 1, rank);
        all.truncate(k);
        all.sort_by(rank);
        Ok(all)
    }

    /// Message of the nearest training vector, verbatim.
    pub fn generate(&self, query: &FeatureVector) -> Result<&str> {
        let best = self.nearest(query, 1)?[0];
        Ok(&self.messages[best.train_index])
    }

    /// Generates for many queries, fanning out across threads. Output order
    /// matches input order.
    pub fn generate_batch(&self, queries: &[FeatureVector]) -> Result<Vec<String>> {
        let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(16);
        let chunk = queries.len().div_ceil(workers).max(1);
        thread::scope(|s| {
            let handles: Vec<_> = queries
                .chunks(chunk)
                .map(|part| {
                    s.spawn(move || {
                        part.iter()
                            .map(|q| self.generate(q).map(str::to_owned))
                            .collect::<Result<Vec<_>>>()
                    })
                })
                .collect();
            let mut out = Vec::with_capacity(queries.len());
            for h in handles {
                out.extend(h.join().expect("generation worker panicked")?);
            }
            Ok(out)
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\nbackend\t{}\n", self.backend());
        match &self.store {
            Store::Sparse { vectors, .. } => {
                out.push_str(&format!("size\t{}\n", self.len()));
                for (v, m) in vectors.iter().zip(&self.messages) {
                    let cells: Vec<String> =
                        v.entries().iter().map(|&(f, w)| format!("{f}:{}", fmt_f64(w))).collect();
                    out.push_str(&cells.join(" "));
                    out.push('\n');
                    out.push_str(&escape(m));
                    out.push('\n');
                }
            }
            Store::Dense { dim, vectors } => {
                out.push_str(&format!("size\t{}\ndim\t{dim}\n", self.len()));
                for (v, m) in vectors.iter().zip(&self.messages) {
                    let cells: Vec<String> = v.values().iter().map(|&x| fmt_f64(x)).collect();
                    out.push_str(&cells.join(" "));
                    out.push('\n');
                    out.push_str(&escape(m));
                    out.push('\n');
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |d: &str| Error::format("index", d.to_string());
        let mut lines = text.split('\n');
        if lines.next() != Some(HEADER) {
            return Err(bad("unsupported header"));
        }
        let mut field = |name: &str| -> Result<String> {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            match line.split_once('\t') {
                Some((k, v)) if k == name => Ok(v.to_string()),
                _ => Err(bad(line)),
            }
        };
        let backend: Backend = field("backend")?.parse()?;
        let size: usize = field("size")?.parse().map_err(|_| bad("size"))?;
        let dim: Option<usize> = match backend {
            Backend::Embedding => Some(field("dim")?.parse().map_err(|_| bad("dim"))?),
            Backend::TfIdf => None,
        };
        let mut vectors = Vec::with_capacity(size);
        let mut messages = Vec::with_capacity(size);
        for _ in 0..size {
            let vline = lines.next().ok_or_else(|| bad("truncated"))?;
            let mline = lines.next().ok_or_else(|| bad("truncated"))?;
            let v = match dim {
                None => {
                    let mut pairs = Vec::new();
                    for cell in vline.split(' ').filter(|c| !c.is_empty()) {
                        let (f, w) = cell.split_once(':').ok_or_else(|| bad(cell))?;
                        pairs.push((f.parse().map_err(|_| bad(cell))?, parse_f64(w, "index")?));
                    }
                    FeatureVector::Sparse(SparseVector::from_pairs(pairs))
                }
                Some(dim) => {
                    let values = vline
                        .split(' ')
                        .filter(|c| !c.is_empty())
                        .map(|c| parse_f64(c, "index"))
                        .collect::<Result<Vec<_>>>()?;
                    if values.len() != dim {
                        return Err(Error::DimensionMismatch { left: dim, right: values.len() });
                    }
                    FeatureVector::Dense(DenseVector::new(values))
                }
            };
            vectors.push(v);
            messages.push(unescape(mline));
        }
        NNIndex::build(vectors, messages, backend)
    }
}

pub(crate) fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

pub(crate) fn unescape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    while let Some(c) = chars.next() {
        if c != '\\' {
            out.push(c);
            continue;
        }
        match chars.next() {
            Some('n') => out.push('\n'),
            Some('r') => out.push('\r'),
            Some(other) => out.push(other),
            None => out.push('\\'),
        }
    }
    out
}
