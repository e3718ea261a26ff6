//! Normalizes a few diffs, builds a vocabulary and encodes one diff as a
//! fixed-length id sequence.

use commitgen::preprocess::{normalize, to_ids, PipelineConfig, Vocabulary};

fn main() -> commitgen::Result<()> {
    let diffs = [
        "diff --git a/src/Parser.rs b/src/Parser.rs <nl> + fn parse_header(input: &str) -> Result<Header> {",
        "- version = \"1.0.3\" <nl> + version = \"1.0.4\"",
        "+ // Handles the parsing of headers and returns errors",
    ];

    for (name, cfg) in [("raw", PipelineConfig::raw()), ("full", PipelineConfig::full())] {
        println!("[{name}]");
        for d in &diffs {
            println!("  {}", normalize(d, &cfg).join());
        }
    }

    let full = PipelineConfig::full();
    let vocab = Vocabulary::build(diffs.iter().map(|d| normalize(d, &full).into_inner()), None)?;
    println!("\nvocabulary ({} entries):", vocab.len());
    print!("{}", vocab.to_vocab_txt());

    let seq = PipelineConfig::sequence(12);
    let ids = to_ids(diffs[1], &seq, &vocab);
    println!("\nids: {ids:?}");
    println!("decoded: {}", vocab.decode(&ids).join(" "));
    Ok(())
}
