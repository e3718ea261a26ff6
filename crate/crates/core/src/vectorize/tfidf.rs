use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::SparseVector;
use crate::error::{Error, Result};
use crate::io_util::{fmt_f64, parse_f64};
use crate::preprocess::{Vocabulary, SPECIAL_TOKENS};

const HEADER: &str = "commitgen-tfidf 1";

/// Document-frequency cutoffs applied when fitting. The defaults keep every
/// token.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TfIdfConfig {
    /// Drop tokens appearing in fewer than this many documents.
    pub min_df: usize,
    /// Drop tokens appearing in more than this fraction of documents.
    pub max_df: f64,
}

impl Default for TfIdfConfig {
    fn default() -> Self {
        TfIdfConfig {
            min_df: 1,
            max_df: 1.0,
        }
    }
}

/// Learned inverse document frequencies over the training vocabulary.
///
/// Feature ids are vocabulary ids shifted down past the special tokens, so
/// feature 0 is the most frequent training token.
#[derive(Debug, Clone, PartialEq)]
pub struct TfIdfModel {
    vocab: Vocabulary,
    idf: Vec<f64>,
    doc_count: usize,
}

const OFFSET: u32 = SPECIAL_TOKENS.len() as u32;

impl TfIdfModel {
    /// Fits on tokenized training documents.
    ///
    /// `idf(t) = ln((1 + N) / (1 + df(t))) + 1` with `N` the document count.
    pub fn fit<S: AsRef<[String]>>(docs: &[S], config: &TfIdfConfig) -> Result<Self> {
        if docs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut df: HashMap<&str, u64> = HashMap::new();
        let mut tf: HashMap<&str, u64> = HashMap::new();
        for doc in docs {
            let mut seen: Vec<&str> = doc.as_ref().iter().map(String::as_str).collect();
            for t in &seen {
                *tf.entry(t).or_insert(0) += 1;
            }
            seen.sort_unstable();
            seen.dedup();
            for t in seen {
                *df.entry(t).or_insert(0) += 1;
            }
        }
        let n = docs.len();
        let max_df = (config.max_df * n as f64).floor() as u64;
        let kept = tf
            .into_iter()
            .filter(|(t, _)| {
                let d = df[t];
                d >= config.min_df as u64 && d <= max_df
            });
        let vocab = Vocabulary::from_counts(kept, None)?;
        let idf = vocab
            .regular_tokens()
            .iter()
            .map(|t| smoothed_idf(n, df[t.as_str()]))
            .collect();
        Ok(TfIdfModel {
            vocab,
            idf,
            doc_count: n,
        })
    }

    pub fn feature_count(&self) -> usize {
        self.idf.len()
    }

    pub fn doc_count(&self) -> usize {
        self.doc_count
    }

    pub fn vocab(&self) -> &Vocabulary {
        &self.vocab
    }

    pub fn feature_id(&self, token: &str) -> Option<u32> {
        self.vocab.id_of(token).filter(|&id| id >= OFFSET).map(|id| id - OFFSET)
    }

    pub fn idf(&self, feature: u32) -> Option<f64> {
        self.idf.get(feature as usize).copied()
    }

    pub fn idf_of(&self, token: &str) -> Option<f64> {
        self.feature_id(token).and_then(|f| self.idf(f))
    }

    /// Raw count times idf, L2-normalized. Tokens outside the feature space
    /// are ignored; a document with none yields the zero vector.
    pub fn transform<S: AsRef<str>>(&self, doc: &[S]) -> SparseVector {
        let mut counts: HashMap<u32, u32> = HashMap::new();
        for tok in doc {
            if let Some(f) = self.feature_id(tok.as_ref()) {
                *counts.entry(f).or_insert(0) += 1;
            }
        }
        let pairs: Vec<(u32, f64)> = counts
            .into_iter()
            .map(|(f, c)| (f, c as f64 * self.idf[f as usize]))
            .collect();
        let v = SparseVector::from_pairs(pairs);
        let norm = v.norm();
        if norm == 0.0 {
            return v;
        }
        SparseVector::from_pairs(v.entries().iter().map(|&(f, w)| (f, w / norm)).collect())
    }

    /// Versioned text form: header, document count, `vocab.txt` body, then one
    /// `feature_id<TAB>idf` line per feature.
    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER}\ndoc_count\t{}\nvocab\t{}\n", self.doc_count, self.vocab.len());
        out.push_str(&self.vocab.to_vocab_txt());
        out.push_str(&format!("idf\t{}\n", self.idf.len()));
        for (i, w) in self.idf.iter().enumerate() {
            out.push_str(&format!("{i}\t{}\n", fmt_f64(*w)));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |d: &str| Error::format("tf-idf model", d.to_string());
        let mut lines = text.lines();
        if lines.next() != Some(HEADER) {
            return Err(bad("unsupported header"));
        }
        let mut field = |name: &str| -> Result<usize> {
            let line = lines.next().ok_or_else(|| bad("truncated"))?;
            let (k, v) = line.split_once('\t').ok_or_else(|| bad(line))?;
            if k != name {
                return Err(bad(line));
            }
            v.parse().map_err(|_| bad(line))
        };
        let doc_count = field("doc_count")?;
        let vocab_len = field("vocab")?;
        let mut vocab_txt = String::new();
        for _ in 0..vocab_len {
            vocab_txt.push_str(lines.next().ok_or_else(|| bad("truncated vocabulary"))?);
            vocab_txt.push('\n');
        }
        let vocab = Vocabulary::from_vocab_txt(&vocab_txt)?;
        let header = lines.next().ok_or_else(|| bad("truncated"))?;
        let count: usize = header
            .strip_prefix("idf\t")
            .and_then(|c| c.parse().ok())
            .ok_or_else(|| bad(header))?;
        if count + SPECIAL_TOKENS.len() != vocab.len() {
            return Err(bad("idf count does not match vocabulary"));
        }
        let mut idf = Vec::with_capacity(count);
        for i in 0..count {
            let line = lines.next().ok_or_else(|| bad("truncated idf table"))?;
            let (id, w) = line.split_once('\t').ok_or_else(|| bad(line))?;
            if id.parse::<usize>().ok() != Some(i) {
                return Err(bad(line));
            }
            idf.push(parse_f64(w, "tf-idf model")?);
        }
        Ok(TfIdfModel { vocab, idf, doc_count })
    }
}

fn smoothed_idf(n: usize, df: u64) -> f64 {
    ((1.0 + n as f64) / (1.0 + df as f64)).ln() + 1.0
}
