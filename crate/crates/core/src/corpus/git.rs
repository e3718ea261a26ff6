//! Corpus mining from a git history, via the `git` executable.

use std::path::Path;
use std::process::Command;

use super::{diff_token_count, encode_diff, Example, ParallelCorpus, Split};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct MineOptions {
    /// Commits whose encoded diff has more tokens than this are skipped.
    pub max_diff_tokens: usize,
    /// Lines of unified-diff context.
    pub context_lines: u32,
    /// Revision to walk back from.
    pub rev: String,
}

impl Default for MineOptions {
    fn default() -> Self {
        MineOptions {
            max_diff_tokens: 100,
            context_lines: 3,
            rev: "HEAD".to_string(),
        }
    }
}

fn git(repo: &Path) -> Command {
    let mut cmd = Command::new("git");
    cmd.arg("-C").arg(repo);
    // user configuration must not change what gets mined
    cmd.env("GIT_CONFIG_NOSYSTEM", "1")
        .env("GIT_CONFIG_GLOBAL", "/dev/null")
        .env_remove("GIT_DIR")
        .env_remove("GIT_WORK_TREE");
    cmd
}

fn run(mut cmd: Command) -> Result<std::process::Output> {
    cmd.output()
        .map_err(|e| Error::GitUnavailable(e.to_string()))
}

/// Mines one example per non-merge commit reachable from `options.rev`, in
/// topological order (oldest first).
///
/// The diff is taken against the first parent (the empty tree for root
/// commits); the message is the first line of the commit message. Commits with
/// an empty subject, an empty diff, or more than `max_diff_tokens` diff tokens
/// are skipped. The returned corpus may be empty.
pub fn mine_git_repo(repo_path: &Path, options: &MineOptions) -> Result<ParallelCorpus> {
    let mut probe = Command::new("git");
    probe.arg("--version");
    let out = run(probe)?;
    if !out.status.success() {
        return Err(Error::GitUnavailable(String::from_utf8_lossy(&out.stderr).into_owned()));
    }

    if !repo_path.is_dir() {
        return Err(Error::NotARepository(repo_path.to_path_buf()));
    }
    let mut cmd = git(repo_path);
    cmd.args(["rev-parse", "--git-dir"]);
    if !run(cmd)?.status.success() {
        return Err(Error::NotARepository(repo_path.to_path_buf()));
    }

    let mut cmd = git(repo_path);
    cmd.args(["rev-parse", "--verify", "--quiet"])
        .arg(format!("{}^{{commit}}", options.rev));
    if !run(cmd)?.status.success() {
        // unborn branch: no history to mine
        return Ok(ParallelCorpus::new(Split::Train, Vec::new()));
    }

    let mut cmd = git(repo_path);
    cmd.args([
        "-c",
        "core.quotepath=false",
        "log",
        "-p",
        "--root",
        "--no-merges",
        "--topo-order",
        "--reverse",
        "--no-color",
        "--no-ext-diff",
        "--no-textconv",
        "--no-renames",
        "--diff-algorithm=myers",
        "--encoding=UTF-8",
    ])
    .arg(format!("-U{}", options.context_lines))
    .arg("--format=%x00%H%x1f%B%x1f")
    .arg(&options.rev)
    .arg("--");
    let out = run(cmd)?;
    if !out.status.success() {
        return Err(Error::Git(String::from_utf8_lossy(&out.stderr).into_owned()));
    }
    let text = String::from_utf8_lossy(&out.stdout);
    parse_log(&text, options.max_diff_tokens)
}

fn parse_log(text: &str, max_diff_tokens: usize) -> Result<ParallelCorpus> {
    let mut examples = Vec::new();
    for record in text.split('\0').filter(|r| !r.is_empty()) {
        let mut fields = record.splitn(3, '\x1f');
        let (Some(_hash), Some(body), Some(patch)) = (fields.next(), fields.next(), fields.next())
        else {
            return Err(Error::Git(format!("unparseable log record: {record:.80}")));
        };
        let subject = body.lines().next().unwrap_or("").trim();
        if subject.is_empty() {
            continue;
        }
        let patch = patch.trim_start_matches('\n');
        if patch.trim().is_empty() {
            continue;
        }
        let diff = encode_diff(patch);
        if diff_token_count(&diff) > max_diff_tokens {
            continue;
        }
        examples.push(Example::new(diff, subject)?);
    }
    Ok(ParallelCorpus::new(Split::Train, examples))
}
