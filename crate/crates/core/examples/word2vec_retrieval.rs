//! Averaged word-embedding retrieval. Pass a word2vec file (binary by default,
//! `--text` for the text format) or run without arguments to use a small
//! built-in table.
//!
//! ```text
//! cargo run --example word2vec_retrieval -- vectors.bin
//! ```

use std::sync::Arc;

use commitgen::corpus::{Example, ParallelCorpus, Split};
use commitgen::pipeline::{Featurizer, Generator};
use commitgen::preprocess::PipelineConfig;
use commitgen::vectorize::{EmbeddingFormat, EmbeddingTable};

fn toy_table() -> commitgen::Result<EmbeddingTable> {
    let mut t = EmbeddingTable::new(3)?;
    for (w, v) in [
        ("version", [1.0, 0.0, 0.0]),
        ("release", [0.9, 0.1, 0.0]),
        ("bump", [0.8, 0.0, 0.2]),
        ("test", [0.0, 1.0, 0.0]),
        ("assert", [0.1, 0.9, 0.0]),
        ("docs", [0.0, 0.0, 1.0]),
        ("readme", [0.0, 0.1, 0.9]),
    ] {
        t.push(w.to_string(), &v)?;
    }
    Ok(t)
}

fn main() -> commitgen::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let format = if args.iter().any(|a| a == "--text") { EmbeddingFormat::Text } else { EmbeddingFormat::Binary };
    let table = match args.iter().find(|a| !a.starts_with("--")) {
        Some(path) => EmbeddingTable::load(path.as_ref(), format)?,
        None => toy_table()?,
    };
    println!("{} vectors of dimension {}", table.vocab_count(), table.dim());

    let train = ParallelCorpus::new(
        Split::Train,
        vec![
            Example::new("bump version release", "Release 2.1")?,
            Example::new("add test assert", "Add tests")?,
            Example::new("update readme docs", "Update docs")?,
        ],
    );
    let featurizer = Featurizer::embedding(Arc::new(table), PipelineConfig::embedding());
    let generator = Generator::nearest_neighbor(featurizer, &train)?;
    for q in ["new release version", "more assert calls in test", "fix typo in readme"] {
        println!("{q:30} -> {}", generator.generate(q)?);
    }
    Ok(())
}
