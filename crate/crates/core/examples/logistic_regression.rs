//! Trains the message classifier on TF-IDF features, prints the loss curve,
//! then saves and reloads the generator.

use commitgen::classifier::{train_with_log, LabelCodec, TrainConfig};
use commitgen::corpus::{Example, ParallelCorpus, Split};
use commitgen::pipeline::{Featurizer, Generator};
use commitgen::preprocess::PipelineConfig;
use commitgen::vectorize::TfIdfConfig;

fn main() -> commitgen::Result<()> {
    let mut examples = Vec::new();
    for i in 0..20 {
        examples.push(Example::new(format!("- version = \"0.{i}\" <nl> + version = \"0.{}\"", i + 1), "Bump version")?);
        examples.push(Example::new(format!("+ #[test] <nl> + fn case_{i}() {{ assert!(check({i})); }}"), "Add tests")?);
        examples.push(Example::new(format!("+ ## Section {i} <nl> + The module handles input."), "Update docs")?);
    }
    let train = ParallelCorpus::new(Split::Train, examples);
    let featurizer = Featurizer::fit_tfidf(&train, PipelineConfig::full(), TfIdfConfig::default())?;

    let messages: Vec<&str> = train.messages().collect();
    let codec = LabelCodec::fit(&messages)?;
    let labels = codec.encode(&messages)?;
    let xs = featurizer.featurize_all(train.diffs());
    let cfg = TrainConfig { learning_rate: 0.05, epochs: 15, batch_size: 8, ..TrainConfig::default() };
    let (_, losses) = train_with_log(&xs, &labels, codec.class_count(), featurizer.feature_dim(), &cfg)?;
    for (epoch, loss) in losses.iter().enumerate() {
        println!("epoch {:2}  loss {loss:.4}", epoch + 1);
    }

    let generator = Generator::logistic_regression(featurizer, &train, &cfg)?;
    let dir = std::env::temp_dir().join("commitgen-lr-example");
    generator.save(&dir)?;
    let reloaded = Generator::load(&dir)?;
    for q in ["- version = \"3.0\" <nl> + version = \"3.1\"", "+ #[test] <nl> + fn edge() {}"] {
        println!("{q}\n  -> {}", reloaded.generate(q)?);
    }
    Ok(())
}
