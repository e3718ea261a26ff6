//! TF-IDF nearest-neighbour generation: the message of the most similar
//! training diff is returned for each query.

use commitgen::corpus::{Example, ParallelCorpus, Split};
use commitgen::pipeline::{Featurizer, Generator};
use commitgen::preprocess::PipelineConfig;
use commitgen::retrieval::cosine;
use commitgen::vectorize::TfIdfConfig;

fn corpus(split: Split, pairs: &[(&str, &str)]) -> commitgen::Result<ParallelCorpus> {
    let examples = pairs.iter().map(|(d, m)| Example::new(*d, *m)).collect::<commitgen::Result<_>>()?;
    Ok(ParallelCorpus::new(split, examples))
}

fn main() -> commitgen::Result<()> {
    let train = corpus(
        Split::Train,
        &[
            ("- version = \"0.3.1\" <nl> + version = \"0.3.2\"", "Bump version to 0.3.2"),
            ("+ pub fn parse_header(input: &str) -> Header { <nl> + }", "Add header parser"),
            ("- use std::io; <nl> + use std::io::{self, Read};", "Tidy imports"),
            ("+ #[test] <nl> + fn cache_evicts_oldest() {", "Add cache eviction test"),
        ],
    )?;
    let featurizer = Featurizer::fit_tfidf(&train, PipelineConfig::full(), TfIdfConfig::default())?;
    let generator = Generator::nearest_neighbor(featurizer, &train)?;

    let queries = [
        "- version = \"1.4.0\" <nl> + version = \"1.5.0\"",
        "+ #[test] <nl> + fn router_matches_prefix() {",
        "+ pub fn parse_footer(input: &str) -> Footer {",
    ];
    let f = generator.featurizer();
    for q in queries {
        let qv = f.featurize(q);
        let best = train
            .diffs()
            .map(|d| cosine(&qv, &f.featurize(d)))
            .collect::<commitgen::Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::MIN, f64::max);
        println!("{q}\n  -> {} (cosine {best:.3})", generator.generate(q)?);
    }
    Ok(())
}
