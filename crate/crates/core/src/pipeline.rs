//! End-to-end generators: a featurizer (normalization plus vectorization)
//! paired with either a nearest-neighbour index or a logistic regression
//! model, with on-disk persistence.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::classifier::{self, LRModel, LabelCodec, TrainConfig};
use crate::corpus::ParallelCorpus;
use crate::error::{Error, Result};
use crate::io_util::{read_to_string, write_atomic};
use crate::preprocess::{normalize, PipelineConfig};
use crate::retrieval::NNIndex;
use crate::vectorize::{Backend, EmbeddingFormat, EmbeddingTable, FeatureVector, TfIdfConfig, TfIdfModel};

/// Turns raw diff text into a feature vector.
#[derive(Debug, Clone)]
pub enum Featurizer {
    TfIdf {
        pipeline: PipelineConfig,
        model: TfIdfModel,
    },
    Embedding {
        pipeline: PipelineConfig,
        table: Arc<EmbeddingTable>,
        source: Option<(PathBuf, EmbeddingFormat)>,
    },
}

impl Featurizer {
    /// Fits TF-IDF weights on the normalized training diffs.
    pub fn fit_tfidf(train: &ParallelCorpus, pipeline: PipelineConfig, config: TfIdfConfig) -> Result<Self> {
        train.ensure_non_empty()?;
        pipeline.validate()?;
        let docs: Vec<_> = train.diffs().map(|d| normalize(d, &pipeline)).collect();
        let model = TfIdfModel::fit(&docs, &config)?;
        Ok(Featurizer::TfIdf { pipeline, model })
    }

    pub fn embedding(table: Arc<EmbeddingTable>, pipeline: PipelineConfig) -> Self {
        Featurizer::Embedding {
            pipeline,
            table,
            source: None,
        }
    }

    /// Loads a pre-trained table and remembers where it came from so a saved
    /// generator can reload it.
    pub fn load_embedding(path: &Path, format: EmbeddingFormat, pipeline: PipelineConfig) -> Result<Self> {
        let table = EmbeddingTable::load(path, format)?;
        Ok(Featurizer::Embedding {
            pipeline,
            table: Arc::new(table),
            source: Some((path.to_path_buf(), format)),
        })
    }

    pub fn backend(&self) -> Backend {
        match self {
            Featurizer::TfIdf { .. } => Backend::TfIdf,
            Featurizer::Embedding { .. } => Backend::Embedding,
        }
    }

    pub fn pipeline(&self) -> &PipelineConfig {
        match self {
            Featurizer::TfIdf { pipeline, .. } | Featurizer::Embedding { pipeline, .. } => pipeline,
        }
    }

    pub fn feature_dim(&self) -> usize {
        match self {
            Featurizer::TfIdf { model, .. } => model.feature_count(),
            Featurizer::Embedding { table, .. } => table.dim(),
        }
    }

    pub fn featurize(&self, diff: &str) -> FeatureVector {
        let tokens = normalize(diff, self.pipeline());
        match self {
            Featurizer::TfIdf { model, .. } => FeatureVector::Sparse(model.transform(&tokens)),
            Featurizer::Embedding { table, .. } => FeatureVector::Dense(table.embed(&tokens)),
        }
    }

    /// Featurizes many diffs across threads, preserving order.
    pub fn featurize_all<'a, I>(&self, diffs: I) -> Vec<FeatureVector>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let diffs: Vec<&str> = diffs.into_iter().collect();
        let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(16);
        let chunk = diffs.len().div_ceil(workers).max(1);
        thread::scope(|s| {
            let handles: Vec<_> = diffs
                .chunks(chunk)
                .map(|part| s.spawn(move || part.iter().map(|d| self.featurize(d)).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("featurization worker panicked"))
                .collect()
        })
    }
}

/// Which generator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Nearest-neighbour retrieval.
    Nn,
    /// Logistic regression over distinct messages.
    Lr,
}

impl ModelKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Nn => "nn",
            ModelKind::Lr => "lr",
        }
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nn" => Ok(ModelKind::Nn),
            "lr" => Ok(ModelKind::Lr),
            other => Err(Error::InvalidConfig(format!("unknown model `{other}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub enum Generator {
    NearestNeighbor {
        featurizer: Featurizer,
        index: NNIndex,
    },
    Classifier {
        featurizer: Featurizer,
        model: LRModel,
        codec: LabelCodec,
    },
}

/// Description of a saved generator, stored as `generator.toml`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Descriptor {
    format_version: u32,
    model: ModelKind,
    backend: Backend,
    pipeline: PipelineConfig,
    embedding_path: Option<PathBuf>,
    embedding_format: Option<EmbeddingFormat>,
}

const DESCRIPTOR: &str = "generator.toml";
const TFIDF_FILE: &str = "tfidf.txt";
const INDEX_FILE: &str = "index.txt";
const LR_FILE: &str = "lr.bin";

impl Generator {
    /// Indexes every training diff; no learning takes place.
    pub fn nearest_neighbor(featurizer: Featurizer, train: &ParallelCorpus) -> Result<Self> {
        train.ensure_non_empty()?;
        let vectors = featurizer.featurize_all(train.diffs());
        let messages = train.messages().map(str::to_owned).collect();
        let index = NNIndex::build(vectors, messages, featurizer.backend())?;
        Ok(Generator::NearestNeighbor { featurizer, index })
    }

    pub fn logistic_regression(featurizer: Featurizer, train: &ParallelCorpus, config: &TrainConfig) -> Result<Self> {
        train.ensure_non_empty()?;
        let messages: Vec<&str> = train.messages().collect();
        let codec = LabelCodec::fit(&messages)?;
        let labels = codec.encode(&messages)?;
        let features = featurizer.featurize_all(train.diffs());
        let model = classifier::train(&features, &labels, codec.class_count(), featurizer.feature_dim(), config)?;
        Ok(Generator::Classifier {
            featurizer,
            model,
            codec,
        })
    }

    pub fn featurizer(&self) -> &Featurizer {
        match self {
            Generator::NearestNeighbor { featurizer, .. } | Generator::Classifier { featurizer, .. } => featurizer,
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Generator::NearestNeighbor { .. } => ModelKind::Nn,
            Generator::Classifier { .. } => ModelKind::Lr,
        }
    }

    pub fn backend(&self) -> Backend {
        self.featurizer().backend()
    }

    pub fn generate(&self, diff: &str) -> Result<String> {
        let x = self.featurizer().featurize(diff);
        self.generate_from(&x)
    }

    pub fn generate_from(&self, x: &FeatureVector) -> Result<String> {
        match self {
            Generator::NearestNeighbor { index, .. } => index.generate(x).map(str::to_owned),
            Generator::Classifier { model, codec, .. } => model.predict(codec, x).map(str::to_owned),
        }
    }

    /// One message per diff, in input order.
    pub fn generate_all<'a, I>(&self, diffs: I) -> Result<Vec<String>>
    where
        I: IntoIterator<Item = &'a str>,
    {
        let features = self.featurizer().featurize_all(diffs);
        match self {
            Generator::NearestNeighbor { index, .. } => index.generate_batch(&features),
            Generator::Classifier { .. } => features.iter().map(|x| self.generate_from(x)).collect(),
        }
    }

    /// Writes the generator into `dir`. Files are written atomically and their
    /// contents depend only on the generator.
    pub fn save(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::from(e).context(dir.display().to_string()))?;
        let featurizer = self.featurizer();
        let (embedding_path, embedding_format) = match featurizer {
            Featurizer::TfIdf { model, .. } => {
                write_atomic(&dir.join(TFIDF_FILE), model.to_text().as_bytes())?;
                (None, None)
            }
            Featurizer::Embedding { source, .. } => {
                let (path, format) = source.clone().ok_or_else(|| {
                    Error::InvalidConfig("embedding featurizer has no source file to record".into())
                })?;
                (Some(path), Some(format))
            }
        };
        let descriptor = Descriptor {
            format_version: 1,
            model: self.kind(),
            backend: self.backend(),
            pipeline: *featurizer.pipeline(),
            embedding_path,
            embedding_format,
        };
        let text = toml::to_string(&descriptor).map_err(|e| Error::format("generator descriptor", e.to_string()))?;
        write_atomic(&dir.join(DESCRIPTOR), text.as_bytes())?;
        match self {
            Generator::NearestNeighbor { index, .. } => write_atomic(&dir.join(INDEX_FILE), index.to_text().as_bytes()),
            Generator::Classifier { model, codec, .. } => {
                let mut buf = Vec::new();
                model.write_to(codec, &mut buf)?;
                write_atomic(&dir.join(LR_FILE), &buf)
            }
        }
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let text = read_to_string(&dir.join(DESCRIPTOR))?;
        let d: Descriptor = toml::from_str(&text).map_err(|e| Error::format("generator descriptor", e.to_string()))?;
        if d.format_version != 1 {
            return Err(Error::format("generator descriptor", "unsupported format_version"));
        }
        let featurizer = match d.backend {
            Backend::TfIdf => Featurizer::TfIdf {
                pipeline: d.pipeline,
                model: TfIdfModel::from_text(&read_to_string(&dir.join(TFIDF_FILE))?)?,
            },
            Backend::Embedding => {
                let (Some(path), Some(format)) = (d.embedding_path, d.embedding_format) else {
                    return Err(Error::format("generator descriptor", "embedding source missing"));
                };
                Featurizer::load_embedding(&path, format, d.pipeline)?
            }
        };
        match d.model {
            ModelKind::Nn => {
                let index = NNIndex::from_text(&read_to_string(&dir.join(INDEX_FILE))?)?;
                if index.backend() != featurizer.backend() {
                    return Err(Error::BackendMismatch {
                        expected: featurizer.backend().to_string(),
                        found: index.backend().to_string(),
                    });
                }
                Ok(Generator::NearestNeighbor { featurizer, index })
            }
            ModelKind::Lr => {
                let path = dir.join(LR_FILE);
                let file = File::open(&path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
                let (model, codec) = LRModel::read_from(&mut BufReader::new(file))?;
                if model.backend() != featurizer.backend() {
                    return Err(Error::BackendMismatch {
                        expected: featurizer.backend().to_string(),
                        found: model.backend().to_string(),
                    });
                }
                Ok(Generator::Classifier {
                    featurizer,
                    model,
                    codec,
                })
            }
        }
    }
}
