//! Draws a per-bucket sample of test examples with each system's output, as a
//! TSV sheet for manual review.

use commitgen::corpus::{Example, ParallelCorpus, Split};
use commitgen::evaluation::{sample_for_manual_review, BucketSpec};

fn main() -> commitgen::Result<()> {
    let mut examples = Vec::new();
    for i in 0..12 {
        let diff = (0..i * 8 + 5).map(|k| format!("+ x{k}")).collect::<Vec<_>>().join(" ");
        examples.push(Example::new(diff, format!("Change {i}"))?);
    }
    let test = ParallelCorpus::new(Split::Test, examples);
    let nn: Vec<String> = (0..12).map(|i| format!("Change {}", i / 2 * 2)).collect();
    let lr: Vec<String> = (0..12).map(|_| "Change 0".to_string()).collect();
    let sheet = sample_for_manual_review(&test, &[("nn".into(), nn), ("lr".into(), lr)], 2, 7, &BucketSpec::default())?;
    print!("{}", sheet.to_tsv());
    Ok(())
}
