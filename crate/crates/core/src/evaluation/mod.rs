//! Scoring generated messages: corpus BLEU overall and per diff-size bucket,
//! comparative reports across models, and review-sheet sampling.

mod bleu;
mod review;

use std::fmt;

use serde::Serialize;

use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};

pub use bleu::{bleu_corpus, bleu_messages, tokenize, BleuReport, NgramStats, MAX_ORDER};
pub use review::{sample_for_manual_review, ReviewRow, ReviewSheet};

/// Diff-size classes by token count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bucket {
    Small,
    Medium,
    Large,
}

impl Bucket {
    pub const ALL: [Bucket; 3] = [Bucket::Small, Bucket::Medium, Bucket::Large];

    pub fn as_str(self) -> &'static str {
        match self {
            Bucket::Small => "small",
            Bucket::Medium => "medium",
            Bucket::Large => "large",
        }
    }
}

impl fmt::Display for Bucket {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Inclusive upper bounds of the small and medium buckets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketSpec {
    pub small_max: usize,
    pub medium_max: usize,
}

impl Default for BucketSpec {
    /// small: under 50 tokens, medium: 50 to 75, large: over 75.
    fn default() -> Self {
        BucketSpec {
            small_max: 49,
            medium_max: 75,
        }
    }
}

impl BucketSpec {
    pub fn new(small_max: usize, medium_max: usize) -> Result<Self> {
        if small_max >= medium_max {
            return Err(Error::InvalidConfig("small_max must be < medium_max".into()));
        }
        Ok(BucketSpec { small_max, medium_max })
    }

    pub fn assign(&self, token_count: usize) -> Bucket {
        if token_count <= self.small_max {
            Bucket::Small
        } else if token_count <= self.medium_max {
            Bucket::Medium
        } else {
            Bucket::Large
        }
    }
}

pub fn bucket_assign<S>(diff_tokens: &[S], spec: &BucketSpec) -> Bucket {
    spec.assign(diff_tokens.len())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BucketScore {
    pub bucket: Bucket,
    pub examples: usize,
    pub report: BleuReport,
}

/// One model's scores on a test split.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub model: String,
    pub examples: usize,
    pub overall: BleuReport,
    /// Non-empty buckets only, in small/medium/large order.
    pub buckets: Vec<BucketScore>,
}

impl RunReport {
    pub fn bucket(&self, b: Bucket) -> Option<&BucketScore> {
        self.buckets.iter().find(|s| s.bucket == b)
    }
}

/// Scores `generated[i]` against the test message `i`, overall and by the
/// token count of diff `i`.
pub fn evaluate_run<S: AsRef<str>>(
    model: &str,
    test: &ParallelCorpus,
    generated: &[S],
    spec: &BucketSpec,
    smooth: bool,
) -> Result<RunReport> {
    if generated.len() != test.len() {
        return Err(Error::LengthMismatch {
            left: test.len(),
            right: generated.len(),
        });
    }
    if test.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut overall = NgramStats::default();
    let mut per_bucket = [(NgramStats::default(), 0usize); 3];
    for (ex, cand) in test.examples().iter().zip(generated) {
        let stats = NgramStats::of_pair(&tokenize(cand.as_ref()), &tokenize(ex.msg()));
        overall.add(&stats);
        let slot = &mut per_bucket[spec.assign(ex.diff_token_count()) as usize];
        slot.0.add(&stats);
        slot.1 += 1;
    }
    let buckets = Bucket::ALL
        .iter()
        .zip(per_bucket)
        .filter(|(_, (_, n))| *n > 0)
        .map(|(&bucket, (stats, examples))| BucketScore {
            bucket,
            examples,
            report: stats.report(smooth),
        })
        .collect();
    Ok(RunReport {
        model: model.to_string(),
        examples: test.len(),
        overall: overall.report(smooth),
        buckets,
    })
}

/// Several models scored on the same test split, best overall BLEU first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComparativeReport {
    pub runs: Vec<RunReport>,
}

#[derive(Serialize)]
struct Record<'a> {
    model: &'a str,
    bucket: &'a str,
    bleu: f64,
    p1: f64,
    p2: f64,
    p3: f64,
    p4: f64,
    bp: f64,
    examples: usize,
    candidate_length: usize,
    reference_length: usize,
}

impl ComparativeReport {
    pub fn new(mut runs: Vec<RunReport>) -> Self {
        runs.sort_by(|a, b| {
            b.overall
                .bleu
                .total_cmp(&a.overall.bleu)
                .then_with(|| a.model.cmp(&b.model))
        });
        ComparativeReport { runs }
    }

    fn rows(&self) -> impl Iterator<Item = (&str, &str, usize, &BleuReport)> + '_ {
        self.runs.iter().flat_map(|run| {
            std::iter::once((run.model.as_str(), "overall", run.examples, &run.overall)).chain(
                run.buckets
                    .iter()
                    .map(move |b| (run.model.as_str(), b.bucket.as_str(), b.examples, &b.report)),
            )
        })
    }

    /// One JSON object per model × bucket, newline separated.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for (model, bucket, examples, r) in self.rows() {
            let rec = Record {
                model,
                bucket,
                bleu: r.bleu,
                p1: r.precisions[0],
                p2: r.precisions[1],
                p3: r.precisions[2],
                p4: r.precisions[3],
                bp: r.brevity_penalty,
                examples,
                candidate_length: r.candidate_length,
                reference_length: r.reference_length,
            };
            out.push_str(&serde_json::to_string(&rec).expect("record serializes"));
            out.push('\n');
        }
        out
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let header = ["model", "bucket", "bleu", "p1", "p2", "p3", "p4", "bp", "n", "c", "r"];
        let mut rows: Vec<Vec<String>> = vec![header.iter().map(|s| s.to_string()).collect()];
        for (model, bucket, examples, r) in self.rows() {
            rows.push(vec![
                model.to_string(),
                bucket.to_string(),
                format!("{:.2}", r.bleu),
                format!("{:.4}", r.precisions[0]),
                format!("{:.4}", r.precisions[1]),
                format!("{:.4}", r.precisions[2]),
                format!("{:.4}", r.precisions[3]),
                format!("{:.4}", r.brevity_penalty),
                examples.to_string(),
                r.candidate_length.to_string(),
                r.reference_length.to_string(),
            ]);
        }
        let widths: Vec<usize> = (0..header.len())
            .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in rows {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (cell, &w))| {
                    if i < 2 {
                        format!("{cell:<w$}")
                    } else {
                        format!("{cell:>w$}")
                    }
                })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
        }
        out
    }
}
