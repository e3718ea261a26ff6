//! The operations behind the `commitgen` subcommands. Each one reads its
//! inputs, writes its outputs atomically, and returns a summary for printing.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::corpus::{self, load_parallel, shuffle_split, split_paths, MineOptions, ParallelCorpus, Split};
use crate::error::{Error, Result};
use crate::evaluation::{evaluate_run, sample_for_manual_review, Bucket, BucketSpec, ComparativeReport, ReviewSheet};
use crate::io_util::{read_to_string, write_atomic};
use crate::pipeline::{Featurizer, Generator, ModelKind};
use crate::preprocess::{encode, normalize, pad_or_trim, Vocabulary};
use crate::vectorize::Backend;

pub const CONFIG_SNAPSHOT: &str = "config.toml";
pub const MANIFEST: &str = "manifest.txt";

/// Loads one configured split.
pub fn load_configured(cfg: &RunConfig, split: Split) -> Result<ParallelCorpus> {
    let (d, m) = cfg
        .data
        .split(split)
        .ok_or_else(|| Error::InvalidConfig(format!("no {split} data configured")))?;
    load_parallel(&d, &m, split).map_err(|e| e.context(format!("{} / {}", d.display(), m.display())))
}

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Seconds since the epoch, or `SOURCE_DATE_EPOCH` when set.
fn timestamp() -> u64 {
    std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.parse().ok())
        .unwrap_or_else(|| SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0))
}

/// Writes the resolved config snapshot and a manifest listing the config hash,
/// a creation time and the digest of every file in `artifacts`.
pub fn write_run_record(dir: &Path, cfg: &RunConfig, command: &str, artifacts: &[PathBuf]) -> Result<()> {
    write_atomic(&dir.join(CONFIG_SNAPSHOT), cfg.resolved().to_toml().as_bytes())?;
    let mut manifest = String::new();
    writeln!(manifest, "command\t{command}").unwrap();
    writeln!(manifest, "version\t{}", env!("CARGO_PKG_VERSION")).unwrap();
    writeln!(manifest, "config_sha256\t{}", cfg.hash()).unwrap();
    writeln!(manifest, "created_unix\t{}", timestamp()).unwrap();
    for path in artifacts {
        let bytes = std::fs::read(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        let name = path.strip_prefix(dir).unwrap_or(path);
        writeln!(manifest, "artifact\t{}\t{}", name.display(), sha256_hex(&bytes)).unwrap();
    }
    write_atomic(&dir.join(MANIFEST), manifest.as_bytes())
}

#[derive(Debug, Clone)]
pub struct PreprocessSummary {
    pub splits: Vec<(Split, usize)>,
    pub vocab_size: usize,
    pub stats: String,
}

/// Normalizes every configured split into `out_dir`: `<split>.diff` holds
/// normalized tokens, `<split>.msg` the untouched messages, `<split>.ids` the
/// padded id sequences when a pad length is set. The vocabulary is built from
/// the training diffs.
pub fn preprocess(cfg: &RunConfig, out_dir: &Path, max_vocab: Option<usize>) -> Result<PreprocessSummary> {
    let pipeline = cfg.resolved_pipeline();
    let spec = BucketSpec::new(cfg.eval.small_max, cfg.eval.medium_max)?;
    let mut loaded = Vec::new();
    for split in Split::ALL {
        if split == Split::Train || cfg.data.split(split).is_some_and(|(d, m)| d.is_file() && m.is_file()) {
            loaded.push(load_configured(cfg, split)?);
        }
    }
    let normalized: Vec<Vec<_>> = loaded
        .iter()
        .map(|c| c.diffs().map(|d| normalize(d, &pipeline)).collect())
        .collect();
    let vocab = Vocabulary::build(normalized[0].iter(), max_vocab)?;
    write_atomic(&out_dir.join("vocab.txt"), vocab.to_vocab_txt().as_bytes())?;
    let mut artifacts = vec![out_dir.join("vocab.txt")];
    let mut stats = String::new();
    let mut splits = Vec::new();
    for (corpus, docs) in loaded.iter().zip(&normalized) {
        let split = corpus.split();
        let (diff_path, msg_path) = split_paths(out_dir, split.as_str());
        let mut diffs = String::new();
        let mut msgs = String::new();
        let mut ids = String::new();
        for (ex, doc) in corpus.examples().iter().zip(docs) {
            diffs.push_str(&doc.join());
            diffs.push('\n');
            msgs.push_str(ex.msg());
            msgs.push('\n');
            if let Some(len) = pipeline.pad_length {
                let seq = pad_or_trim(&encode(doc, &vocab, pipeline.add_sentence_markers), len);
                let line: Vec<String> = seq.iter().map(u32::to_string).collect();
                ids.push_str(&line.join(" "));
                ids.push('\n');
            }
        }
        write_atomic(&diff_path, diffs.as_bytes())?;
        write_atomic(&msg_path, msgs.as_bytes())?;
        artifacts.extend([diff_path, msg_path]);
        if pipeline.pad_length.is_some() {
            let ids_path = out_dir.join(format!("{split}.ids"));
            write_atomic(&ids_path, ids.as_bytes())?;
            artifacts.push(ids_path);
        }

        let mut buckets = [0usize; 3];
        for ex in corpus.examples() {
            buckets[spec.assign(ex.diff_token_count()) as usize] += 1;
        }
        writeln!(stats, "[{split}]").unwrap();
        stats.push_str(&corpus.stats().render());
        for b in Bucket::ALL {
            writeln!(stats, "bucket={b}\t{}", buckets[b as usize]).unwrap();
        }
        splits.push((split, corpus.len()));
    }
    writeln!(stats, "[vocab]\nsize\t{}", vocab.len()).unwrap();
    write_atomic(&out_dir.join("stats.txt"), stats.as_bytes())?;
    artifacts.push(out_dir.join("stats.txt"));
    write_run_record(out_dir, cfg, "preprocess", &artifacts)?;
    Ok(PreprocessSummary {
        splits,
        vocab_size: vocab.len(),
        stats,
    })
}

/// Builds the featurizer the config describes, fitting TF-IDF on `train`.
pub fn featurizer(cfg: &RunConfig, train: &ParallelCorpus) -> Result<Featurizer> {
    let pipeline = cfg.resolved_pipeline();
    match cfg.backend {
        Backend::TfIdf => Featurizer::fit_tfidf(train, pipeline, cfg.tfidf),
        Backend::Embedding => {
            let src = cfg
                .embedding
                .as_ref()
                .ok_or_else(|| Error::InvalidConfig("backend w2v requires [embedding] path".into()))?;
            Featurizer::load_embedding(&src.path, src.format, pipeline)
        }
    }
}

/// Builds the configured generator from the training split.
pub fn build_generator(cfg: &RunConfig, train: &ParallelCorpus) -> Result<Generator> {
    let featurizer = featurizer(cfg, train)?;
    match cfg.model {
        ModelKind::Nn => Generator::nearest_neighbor(featurizer, train),
        ModelKind::Lr => Generator::logistic_regression(featurizer, train, &cfg.train),
    }
}

/// Fits the configured generator on the training split and saves it, with a
/// config snapshot and manifest, into the output directory.
pub fn fit(cfg: &RunConfig) -> Result<Generator> {
    let train = load_configured(cfg, Split::Train)?;
    let generator = build_generator(cfg, &train)?;
    let dir = &cfg.output_dir;
    generator.save(dir)?;
    let mut artifacts = vec![dir.join("generator.toml")];
    if generator.backend() == Backend::TfIdf {
        artifacts.push(dir.join("tfidf.txt"));
    }
    artifacts.push(dir.join(match generator.kind() {
        ModelKind::Nn => "index.txt",
        ModelKind::Lr => "lr.bin",
    }));
    write_run_record(dir, cfg, "fit", &artifacts)?;
    Ok(generator)
}

/// Reads one diff per line; a trailing newline is optional and CRs are dropped.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = std::fs::read(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    let text = String::from_utf8_lossy(&bytes);
    if text.is_empty() {
        return Ok(Vec::new());
    }
    Ok(text
        .strip_suffix('\n')
        .unwrap_or(&text)
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect())
}

/// Generates one message per input diff with a saved generator. When
/// `expected` is given the generator's backend must match it.
pub fn generate(model_dir: &Path, diffs: &[String], expected: Option<Backend>) -> Result<Vec<String>> {
    let generator = Generator::load(model_dir).map_err(|e| e.context(model_dir.display().to_string()))?;
    if let Some(b) = expected {
        if b != generator.backend() {
            return Err(Error::BackendMismatch {
                expected: b.to_string(),
                found: generator.backend().to_string(),
            });
        }
    }
    generator.generate_all(diffs.iter().map(String::as_str))
}

/// Renders generated messages one per line.
pub fn render_lines<S: AsRef<str>>(lines: &[S]) -> String {
    let mut out = String::new();
    for l in lines {
        out.push_str(l.as_ref());
        out.push('\n');
    }
    out
}

/// A named file of generated messages, aligned with the test split.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub name: String,
    pub messages: Vec<String>,
}

impl RunOutput {
    /// Parses `name=path`, or a bare path named after its file stem.
    pub fn load(spec: &str) -> Result<Self> {
        let (name, path) = match spec.split_once('=') {
            Some((n, p)) => (n.to_string(), PathBuf::from(p)),
            None => {
                let p = PathBuf::from(spec);
                let n = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                (n, p)
            }
        };
        let messages = read_lines(&path)?;
        Ok(RunOutput { name, messages })
    }
}

/// Scores every run against the test split.
pub fn evaluate(test: &ParallelCorpus, runs: &[(RunOutput, PathBuf)], spec: &BucketSpec, smooth: bool) -> Result<ComparativeReport> {
    let mut reports = Vec::with_capacity(runs.len());
    for (run, path) in runs {
        let r = evaluate_run(&run.name, test, &run.messages, spec, smooth)
            .map_err(|e| e.context(path.display().to_string()))?;
        reports.push(r);
    }
    Ok(ComparativeReport::new(reports))
}

/// Writes `report.jsonl` and `report.txt` into `out_dir`.
pub fn write_report(out_dir: &Path, report: &ComparativeReport) -> Result<()> {
    write_atomic(&out_dir.join("report.jsonl"), report.to_jsonl().as_bytes())?;
    write_atomic(&out_dir.join("report.txt"), report.to_table().as_bytes())
}

pub fn review_sheet(test: &ParallelCorpus, runs: &[RunOutput], per_bucket: usize, seed: u64, spec: &BucketSpec) -> Result<ReviewSheet> {
    let outputs: Vec<(String, Vec<String>)> = runs.iter().map(|r| (r.name.clone(), r.messages.clone())).collect();
    sample_for_manual_review(test, &outputs, per_bucket, seed, spec)
}

#[derive(Debug, Clone)]
pub struct MineSummary {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

/// Mines a repository and writes an 80/10/10 seeded split into `out_dir`.
pub fn mine(repo: &Path, out_dir: &Path, options: &MineOptions, seed: u64) -> Result<MineSummary> {
    let mined = corpus::mine_git_repo(repo, options)?;
    mined.ensure_non_empty().map_err(|e| e.context(format!("no usable commits in {}", repo.display())))?;
    let (train, valid, test) = shuffle_split(mined.examples().to_vec(), seed, 0.8, 0.1);
    for c in [&train, &valid, &test] {
        let (d, m) = split_paths(out_dir, c.split().as_str());
        corpus::write_parallel(c, &d, &m)?;
    }
    Ok(MineSummary {
        train: train.len(),
        valid: valid.len(),
        test: test.len(),
    })
}

/// Reads a config snapshot written by an earlier run.
pub fn load_snapshot(dir: &Path) -> Result<RunConfig> {
    RunConfig::from_toml(&read_to_string(&dir.join(CONFIG_SNAPSHOT))?)
}
