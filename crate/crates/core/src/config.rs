//! Run configuration, read from a TOML file and overridable from the command
//! line. A resolved snapshot is written next to every run's outputs.
//!
//! ```toml
//! version = 1
//! backend = "tfidf"          # or "w2v"
//! model = "nn"               # or "lr"
//! output_dir = "runs/tfidf-nn"
//!
//! [data]
//! dir = "data"               # <dir>/{train,valid,test}.{diff,msg}
//!
//! [pipeline]                 # optional; defaults depend on the backend
//! lowercase = true
//! strip_special_chars = true
//! remove_stopwords = true
//! stem = true
//!
//! [embedding]                # required iff backend = "w2v"
//! path = "GoogleNews-vectors-negative300.bin"
//! format = "binary"
//!
//! [train]                    # logistic regression only
//! learning_rate = 0.001
//! epochs = 10
//! batch_size = 64
//! seed = 0
//!
//! [eval]
//! smooth = false
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::classifier::TrainConfig;
use crate::corpus::{split_paths, Split};
use crate::error::{Error, Result};
use crate::io_util::read_to_string;
use crate::pipeline::ModelKind;
use crate::preprocess::PipelineConfig;
use crate::vectorize::{Backend, EmbeddingFormat, TfIdfConfig};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataPaths {
    /// Directory holding `<split>.diff` / `<split>.msg`.
    pub dir: Option<PathBuf>,
    pub train_diff: Option<PathBuf>,
    pub train_msg: Option<PathBuf>,
    pub valid_diff: Option<PathBuf>,
    pub valid_msg: Option<PathBuf>,
    pub test_diff: Option<PathBuf>,
    pub test_msg: Option<PathBuf>,
}

impl DataPaths {
    /// Diff and message paths of a split; explicit paths win over `dir`.
    pub fn split(&self, split: Split) -> Option<(PathBuf, PathBuf)> {
        let (d, m) = match split {
            Split::Train => (&self.train_diff, &self.train_msg),
            Split::Valid => (&self.valid_diff, &self.valid_msg),
            Split::Test => (&self.test_diff, &self.test_msg),
        };
        let from_dir = self.dir.as_ref().map(|dir| split_paths(dir, split.as_str()));
        let d = d.clone().or_else(|| from_dir.as_ref().map(|p| p.0.clone()))?;
        let m = m.clone().or_else(|| from_dir.as_ref().map(|p| p.1.clone()))?;
        Some((d, m))
    }

    fn relative_to(&mut self, base: &Path) {
        for p in [
            &mut self.dir,
            &mut self.train_diff,
            &mut self.train_msg,
            &mut self.valid_diff,
            &mut self.valid_msg,
            &mut self.test_diff,
            &mut self.test_msg,
        ] {
            if let Some(path) = p {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddingSource {
    pub path: PathBuf,
    #[serde(default = "default_format")]
    pub format: EmbeddingFormat,
}

fn default_format() -> EmbeddingFormat {
    EmbeddingFormat::Binary
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    pub smooth: bool,
    pub small_max: usize,
    pub medium_max: usize,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            smooth: false,
            small_max: 49,
            medium_max: 75,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    pub backend: Backend,
    pub model: ModelKind,
    pub output_dir: PathBuf,
    pub data: DataPaths,
    pub pipeline: Option<PipelineConfig>,
    pub tfidf: TfIdfConfig,
    pub embedding: Option<EmbeddingSource>,
    pub train: TrainConfig,
    pub eval: EvalConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            version: CONFIG_VERSION,
            backend: Backend::TfIdf,
            model: ModelKind::Nn,
            output_dir: PathBuf::from("out"),
            data: DataPaths::default(),
            pipeline: None,
            tfidf: TfIdfConfig::default(),
            embedding: None,
            train: TrainConfig::default(),
            eval: EvalConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Reads a config file; relative paths inside it resolve against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = read_to_string(path).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| e.context(path.display().to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.data.relative_to(base);
        if let Some(e) = &mut cfg.embedding {
            if e.path.is_relative() {
                e.path = base.join(&e.path);
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    /// The normalization pipeline: explicit, or the backend default (the full
    /// chain for TF-IDF, lowercasing and stop-word removal for embeddings).
    pub fn resolved_pipeline(&self) -> PipelineConfig {
        self.pipeline.unwrap_or(match self.backend {
            Backend::TfIdf => PipelineConfig::full(),
            Backend::Embedding => PipelineConfig::embedding(),
        })
    }

    /// Same config with defaults filled in.
    pub fn resolved(&self) -> RunConfig {
        RunConfig {
            pipeline: Some(self.resolved_pipeline()),
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(Error::InvalidConfig(format!(
                "unsupported config version {} (expected {CONFIG_VERSION})",
                self.version
            )));
        }
        match (self.backend, &self.embedding) {
            (Backend::Embedding, None) => {
                return Err(Error::InvalidConfig("backend w2v requires [embedding] path".into()))
            }
            (Backend::TfIdf, Some(_)) => {
                return Err(Error::InvalidConfig("[embedding] is only valid with backend w2v".into()))
            }
            _ => {}
        }
        self.resolved_pipeline().validate()?;
        if self.model == ModelKind::Lr {
            self.train.validate()?;
        }
        if self.eval.small_max >= self.eval.medium_max {
            return Err(Error::InvalidConfig("eval.small_max must be < eval.medium_max".into()));
        }
        Ok(())
    }

    /// Checks that the given splits and the embedding file exist.
    pub fn check_paths(&self, splits: &[Split]) -> Result<()> {
        for &split in splits {
            let (d, m) = self
                .data
                .split(split)
                .ok_or_else(|| Error::InvalidConfig(format!("no {split} data configured")))?;
            for p in [d, m] {
                if !p.is_file() {
                    return Err(Error::InvalidConfig(format!("{split} file not found: {}", p.display())));
                }
            }
        }
        if let Some(e) = &self.embedding {
            if !e.path.is_file() {
                return Err(Error::InvalidConfig(format!("embedding file not found: {}", e.path.display())));
            }
        }
        Ok(())
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the resolved TOML snapshot.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.resolved().to_toml().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let text = r#"
            version = 1
            backend = "w2v"
            model = "lr"
            output_dir = "runs/x"
            [data]
            dir = "data"
            [embedding]
            path = "vectors.bin"
            [train]
            epochs = 3
        "#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.backend, Backend::Embedding);
        assert_eq!(cfg.model, ModelKind::Lr);
        assert_eq!(cfg.train.epochs, 3);
        assert_eq!(cfg.train.batch_size, 64);
        assert_eq!(cfg.embedding.as_ref().unwrap().format, EmbeddingFormat::Binary);
        assert_eq!(cfg.resolved_pipeline(), PipelineConfig::embedding());
        cfg.validate().unwrap();
        let (d, m) = cfg.data.split(Split::Test).unwrap();
        assert_eq!(d, PathBuf::from("data/test.diff"));
        assert_eq!(m, PathBuf::from("data/test.msg"));
    }

    #[test]
    fn w2v_requires_embedding() {
        let cfg = RunConfig { backend: Backend::Embedding, ..RunConfig::default() };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::from_toml("bogus = 1").is_err());
    }

    #[test]
    fn snapshot_round_trip_and_hash() {
        let cfg = RunConfig::default().resolved();
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
        let other = RunConfig { model: ModelKind::Lr, ..RunConfig::default() };
        assert_ne!(other.hash(), cfg.hash());
    }
}
