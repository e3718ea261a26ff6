//! Line-aligned parallel corpora of diffs and commit messages.
//!
//! A corpus lives on disk as two files, `<name>.diff` and `<name>.msg`, where
//! line `i` of one pairs with line `i` of the other. Newlines inside a diff are
//! encoded as the literal token [`NEWLINE_TOKEN`].

mod git;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io_util;

pub use git::{mine_git_repo, MineOptions};

/// Token standing in for a newline of the original diff.
pub const NEWLINE_TOKEN: &str = "<nl>";

/// One (diff, message) pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Example {
    diff: String,
    msg: String,
}

impl Example {
    /// Builds an example, rejecting diffs that are blank and fields containing
    /// line breaks (which would break line alignment on disk).
    pub fn new(diff: impl Into<String>, msg: impl Into<String>) -> Result<Self> {
        let diff = diff.into();
        let msg = msg.into();
        if diff.trim().is_empty() {
            return Err(Error::format("example", "diff is empty"));
        }
        if diff.contains(['\n', '\r']) {
            return Err(Error::format("example", "diff contains a line break"));
        }
        if msg.contains(['\n', '\r']) {
            return Err(Error::format("example", "message contains a line break"));
        }
        Ok(Example { diff, msg })
    }

    pub fn diff(&self) -> &str {
        &self.diff
    }

    pub fn msg(&self) -> &str {
        &self.msg
    }

    /// Whitespace token count of the encoded diff (each `<nl>` counts as one).
    pub fn diff_token_count(&self) -> usize {
        diff_token_count(&self.diff)
    }
}

pub fn diff_token_count(diff: &str) -> usize {
    diff.split_whitespace().count()
}

/// Encodes a multi-line diff onto a single line.
pub fn encode_diff(raw: &str) -> String {
    let raw = raw.replace("\r\n", "\n").replace('\r', " ");
    raw.trim_end_matches('\n')
        .split('\n')
        .collect::<Vec<_>>()
        .join(&format!(" {NEWLINE_TOKEN} "))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Split {
    Train,
    Valid,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Valid, Split::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Valid => "valid",
            Split::Test => "test",
        }
    }
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "valid" | "validation" => Ok(Split::Valid),
            "test" => Ok(Split::Test),
            other => Err(Error::InvalidConfig(format!("unknown split `{other}`"))),
        }
    }
}

/// Ordered, aligned examples of one split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParallelCorpus {
    split: Split,
    examples: Vec<Example>,
}

impl ParallelCorpus {
    pub fn new(split: Split, examples: Vec<Example>) -> Self {
        ParallelCorpus { split, examples }
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn examples(&self) -> &[Example] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn diffs(&self) -> impl Iterator<Item = &str> + '_ {
        self.examples.iter().map(Example::diff)
    }

    pub fn messages(&self) -> impl Iterator<Item = &str> + '_ {
        self.examples.iter().map(Example::msg)
    }

    /// Fails with [`Error::EmptyCorpus`] when there is nothing to fit on.
    pub fn ensure_non_empty(&self) -> Result<()> {
        if self.examples.is_empty() {
            Err(Error::EmptyCorpus)
        } else {
            Ok(())
        }
    }

    pub fn stats(&self) -> CorpusStats {
        let mut token_count_histogram = BTreeMap::new();
        for ex in &self.examples {
            *token_count_histogram.entry(ex.diff_token_count()).or_insert(0) += 1;
        }
        CorpusStats {
            example_count: self.examples.len(),
            token_count_histogram,
        }
    }

    /// Deterministic contiguous split into train/valid/test by the given
    /// fractions of train and valid; the remainder is test.
    pub fn split_by_fraction(
        examples: Vec<Example>,
        train_frac: f64,
        valid_frac: f64,
    ) -> (ParallelCorpus, ParallelCorpus, ParallelCorpus) {
        let n = examples.len();
        let n_train = ((n as f64) * train_frac).round() as usize;
        let n_valid = (((n as f64) * valid_frac).round() as usize).min(n - n_train.min(n));
        let n_train = n_train.min(n);
        let mut rest = examples;
        let mut tail = rest.split_off(n_train);
        let test = tail.split_off(n_valid);
        (
            ParallelCorpus::new(Split::Train, rest),
            ParallelCorpus::new(Split::Valid, tail),
            ParallelCorpus::new(Split::Test, test),
        )
    }
}

/// Like [`ParallelCorpus::split_by_fraction`], after a seeded shuffle.
pub fn shuffle_split(
    mut examples: Vec<Example>,
    seed: u64,
    train_frac: f64,
    valid_frac: f64,
) -> (ParallelCorpus, ParallelCorpus, ParallelCorpus) {
    examples.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    ParallelCorpus::split_by_fraction(examples, train_frac, valid_frac)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    pub example_count: usize,
    /// diff token count -> number of examples
    pub token_count_histogram: BTreeMap<usize, usize>,
}

impl CorpusStats {
    pub fn render(&self) -> String {
        let mut out = format!("examples\t{}\n", self.example_count);
        for (tokens, freq) in &self.token_count_histogram {
            out.push_str(&format!("tokens={tokens}\t{freq}\n"));
        }
        out
    }
}

/// Splits file content into lines: LF separated, optional trailing LF, trailing
/// CR of each line removed.
fn split_lines(content: &str) -> Vec<&str> {
    if content.is_empty() {
        return Vec::new();
    }
    let body = content.strip_suffix('\n').unwrap_or(content);
    body.split('\n')
        .map(|line| line.strip_suffix('\r').unwrap_or(line))
        .collect()
}

fn read_lossy(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::from(e).context(path.display().to_string()))?;
    Ok(String::from_utf8_lossy(&bytes).into_owned())
}

/// Loads a `.diff`/`.msg` file pair.
pub fn load_parallel(diff_path: &Path, msg_path: &Path, split: Split) -> Result<ParallelCorpus> {
    let diff_content = read_lossy(diff_path)?;
    let msg_content = read_lossy(msg_path)?;
    let diffs = split_lines(&diff_content);
    let msgs = split_lines(&msg_content);
    if diffs.len() != msgs.len() {
        return Err(Error::LineCountMismatch {
            diff_lines: diffs.len(),
            msg_lines: msgs.len(),
        });
    }
    if diffs.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let examples = diffs
        .into_iter()
        .zip(msgs)
        .enumerate()
        .map(|(i, (d, m))| {
            Example::new(d, m).map_err(|e| e.context(format!("{} line {}", diff_path.display(), i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParallelCorpus::new(split, examples))
}

/// Loads `<dir>/<split>.diff` and `<dir>/<split>.msg`.
pub fn load_split(dir: &Path, split: Split) -> Result<ParallelCorpus> {
    let (diff_path, msg_path) = split_paths(dir, split.as_str());
    load_parallel(&diff_path, &msg_path, split)
}

pub fn split_paths(dir: &Path, name: &str) -> (std::path::PathBuf, std::path::PathBuf) {
    (dir.join(format!("{name}.diff")), dir.join(format!("{name}.msg")))
}

/// Writes the corpus as a line-aligned file pair. Both files are written to
/// temporary names and renamed into place once complete.
pub fn write_parallel(corpus: &ParallelCorpus, diff_path: &Path, msg_path: &Path) -> Result<()> {
    let mut diffs = String::new();
    let mut msgs = String::new();
    for ex in corpus.examples() {
        diffs.push_str(ex.diff());
        diffs.push('\n');
        msgs.push_str(ex.msg());
        msgs.push('\n');
    }
    io_util::write_atomic(diff_path, diffs.as_bytes())?;
    io_util::write_atomic(msg_path, msgs.as_bytes())?;
    Ok(())
}
