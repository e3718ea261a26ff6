//! Commit message generation from code diffs.
//!
//! Two families of generators are provided, both driven by a line-aligned
//! corpus of training diffs and their messages:
//!
//! - **retrieval**: vectorize every training diff (TF-IDF or averaged word
//!   embeddings), then answer a query diff with the message of its nearest
//!   training diff under cosine similarity;
//! - **classification**: a multinomial logistic regression that treats every
//!   distinct training message as a class.
//!
//! Output is scored with corpus-level BLEU-4, overall and per diff-size bucket.
//!
//! ```
//! use commitgen::corpus::{Example, ParallelCorpus, Split};
//! use commitgen::pipeline::{Featurizer, Generator};
//! use commitgen::preprocess::PipelineConfig;
//! use commitgen::vectorize::TfIdfConfig;
//!
//! let train = ParallelCorpus::new(Split::Train, vec![
//!     Example::new("+ fn parse_header ( ) <nl> + }", "Add header parser").unwrap(),
//!     Example::new("- version = 1.0 <nl> + version = 1.1", "Bump version").unwrap(),
//! ]);
//! let featurizer = Featurizer::fit_tfidf(&train, PipelineConfig::full(), TfIdfConfig::default()).unwrap();
//! let generator = Generator::nearest_neighbor(featurizer, &train).unwrap();
//! assert_eq!(generator.generate("+ version = 2.0").unwrap(), "Bump version");
//! ```

pub mod classifier;
pub mod commands;
pub mod config;
pub mod corpus;
pub mod error;
pub mod evaluation;
mod io_util;
pub mod pipeline;
pub mod preprocess;
pub mod retrieval;
pub mod vectorize;

pub use error::{Error, Result};
pub use io_util::write_atomic;
