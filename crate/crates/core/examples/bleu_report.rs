//! Scores two systems against reference messages with corpus BLEU-4, overall
//! and by diff size.

use commitgen::corpus::{Example, ParallelCorpus, Split};
use commitgen::evaluation::{bleu_messages, evaluate_run, BucketSpec, ComparativeReport};

fn main() -> commitgen::Result<()> {
    let long_diff = |n: usize| (0..n).map(|i| format!("+ line{i}")).collect::<Vec<_>>().join(" <nl> ");
    let test = ParallelCorpus::new(
        Split::Test,
        vec![
            Example::new(long_diff(10), "fix null check in the parser")?,
            Example::new(long_diff(30), "add retry logic to the http client")?,
            Example::new(long_diff(60), "update serde to the latest version")?,
        ],
    );
    let good = ["fix null check in the parser", "add retry logic to http client", "update serde to the newest version"];
    let poor = ["fix parser", "add tests for the client", "bump version to 1.0"];

    let single = bleu_messages(&good[..1], &test.messages().take(1).collect::<Vec<_>>(), false)?;
    println!("first pair alone: BLEU {:.2}, precisions {:?}\n", single.bleu, single.precisions);

    let spec = BucketSpec::default();
    let report = ComparativeReport::new(vec![
        evaluate_run("good", &test, &good, &spec, false)?,
        evaluate_run("poor", &test, &poor, &spec, false)?,
        evaluate_run("poor-smoothed", &test, &poor, &spec, true)?,
    ]);
    print!("{}", report.to_table());
    println!();
    print!("{}", report.to_jsonl());
    Ok(())
}
