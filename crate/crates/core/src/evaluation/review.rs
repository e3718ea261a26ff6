use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Bucket, BucketSpec};
use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewRow {
    pub bucket: Bucket,
    /// Position in the test split.
    pub index: usize,
    pub diff: String,
    pub reference: String,
    /// One generated message per model, in the order the models were given.
    pub generated: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReviewSheet {
    pub models: Vec<String>,
    pub rows: Vec<ReviewRow>,
    /// Buckets holding fewer rows than requested; all of their rows are included.
    pub short_buckets: Vec<Bucket>,
}

/// Draws up to `per_bucket` test examples uniformly from each diff-size
/// bucket, deterministically for a given seed.
pub fn sample_for_manual_review(
    test: &ParallelCorpus,
    outputs: &[(String, Vec<String>)],
    per_bucket: usize,
    seed: u64,
    spec: &BucketSpec,
) -> Result<ReviewSheet> {
    if per_bucket == 0 {
        return Err(Error::InvalidConfig("per_bucket must be >= 1".into()));
    }
    for (_, gen) in outputs {
        if gen.len() != test.len() {
            return Err(Error::LengthMismatch {
                left: test.len(),
                right: gen.len(),
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::new();
    let mut short_buckets = Vec::new();
    for bucket in Bucket::ALL {
        let members: Vec<usize> = test
            .examples()
            .iter()
            .enumerate()
            .filter(|(_, ex)| spec.assign(ex.diff_token_count()) == bucket)
            .map(|(i, _)| i)
            .collect();
        let mut picked: Vec<usize> = if members.len() <= per_bucket {
            if members.len() < per_bucket {
                short_buckets.push(bucket);
            }
            members
        } else {
            sample(&mut rng, members.len(), per_bucket)
                .into_iter()
                .map(|k| members[k])
                .collect()
        };
        picked.sort_unstable();
        for index in picked {
            let ex = &test.examples()[index];
            rows.push(ReviewRow {
                bucket,
                index,
                diff: ex.diff().to_string(),
                reference: ex.msg().to_string(),
                generated: outputs.iter().map(|(_, g)| g[index].clone()).collect(),
            });
        }
    }
    Ok(ReviewSheet {
        models: outputs.iter().map(|(m, _)| m.clone()).collect(),
        rows,
        short_buckets,
    })
}

fn cell(s: &str) -> String {
    s.replace('\\', "\\\\").replace('\t', "\\t")
}

impl ReviewSheet {
    /// Tab-separated sheet with empty `rank` and `comments` columns.
    pub fn to_tsv(&self) -> String {
        let mut header = vec!["id".to_string(), "bucket".into(), "diff".into(), "reference".into()];
        header.extend(self.models.iter().map(|m| cell(m)));
        header.extend(["rank".to_string(), "comments".into()]);
        let mut out = header.join("\t");
        out.push('\n');
        for row in &self.rows {
            let mut cells = vec![
                row.index.to_string(),
                row.bucket.to_string(),
                cell(&row.diff),
                cell(&row.reference),
            ];
            cells.extend(row.generated.iter().map(|g| cell(g)));
            cells.extend([String::new(), String::new()]);
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Example, Split};

    fn corpus() -> ParallelCorpus {
        let mut ex = Vec::new();
        for i in 0..20 {
            ex.push(Example::new(format!("small {i}"), format!("s{i}")).unwrap());
        }
        for i in 0..5 {
            ex.push(Example::new(vec!["m"; 60].join(" "), format!("m{i}")).unwrap());
        }
        ex.push(Example::new(vec!["l"; 80].join(" "), "l0").unwrap());
        ParallelCorpus::new(Split::Test, ex)
    }

    #[test]
    fn deterministic_and_short_buckets() {
        let c = corpus();
        let gen: Vec<String> = c.messages().map(|m| format!("gen {m}")).collect();
        let outputs = vec![("nn".to_string(), gen)];
        let a = sample_for_manual_review(&c, &outputs, 2, 7, &BucketSpec::default()).unwrap();
        let b = sample_for_manual_review(&c, &outputs, 2, 7, &BucketSpec::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows.len(), 5);
        assert_eq!(a.short_buckets, [Bucket::Large]);
        let large: Vec<_> = a.rows.iter().filter(|r| r.bucket == Bucket::Large).collect();
        assert_eq!(large.len(), 1);
        assert_eq!(large[0].generated, ["gen l0"]);
    }

    #[test]
    fn tsv_layout() {
        let c = corpus();
        let outputs = vec![
            ("a".to_string(), c.messages().map(String::from).collect()),
            ("b".to_string(), c.messages().map(|_| "x\ty".to_string()).collect()),
        ];
        let s = sample_for_manual_review(&c, &outputs, 1, 1, &BucketSpec::default()).unwrap();
        let tsv = s.to_tsv();
        let mut lines = tsv.lines();
        assert_eq!(lines.next().unwrap(), "id\tbucket\tdiff\treference\ta\tb\trank\tcomments");
        for l in lines {
            assert_eq!(l.split('\t').count(), 8);
            assert!(l.contains("x\\ty"));
        }
    }

    #[test]
    fn zero_per_bucket_rejected() {
        assert!(sample_for_manual_review(&corpus(), &[], 0, 1, &BucketSpec::default()).is_err());
    }
}
