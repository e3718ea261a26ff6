mod common;

use std::process::Command;

use commitgen::corpus::{mine_git_repo, MineOptions};
use commitgen::evaluation::{Bucket, BucketSpec};
use common::synth;

#[test]
fn mining_is_deterministic_and_filters_by_size() {
    let dir = tempfile::tempdir().unwrap();
    synth::write_repo(dir.path(), 300, 11);
    let opts = MineOptions::default();
    let a = mine_git_repo(dir.path(), &opts).unwrap();
    let b = mine_git_repo(dir.path(), &opts).unwrap();
    assert_eq!(a, b);
    assert!(a.len() > 200, "mined {}", a.len());
    assert!(a.examples().iter().all(|e| e.diff_token_count() <= 100));
    assert!(a.messages().all(|m| !m.is_empty() && !m.contains('\n')));
    assert!(a.diffs().all(|d| d.starts_with("diff --git ")));
    let spec = BucketSpec::default();
    for bucket in Bucket::ALL {
        let n = a.examples().iter().filter(|e| spec.assign(e.diff_token_count()) == bucket).count();
        assert!(n > 0, "no {bucket} examples");
    }
    let tight = mine_git_repo(dir.path(), &MineOptions { max_diff_tokens: 40, ..opts }).unwrap();
    assert!(tight.len() < a.len());
}

#[test]
fn unborn_repository_yields_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    assert!(Command::new("git").arg("init").arg("-q").arg(dir.path()).status().unwrap().success());
    let c = mine_git_repo(dir.path(), &MineOptions::default()).unwrap();
    assert!(c.is_empty());
}

#[test]
fn first_line_of_message_is_kept() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let git = |args: &[&str]| {
        let ok = Command::new("git")
            .arg("-C")
            .arg(p)
            .args(["-c", "user.name=T", "-c", "user.email=t@example.com"])
            .args(args)
            .env("GIT_CONFIG_GLOBAL", "/dev/null")
            .status()
            .unwrap()
            .success();
        assert!(ok, "{args:?}");
    };
    git(&["init", "-q"]);
    std::fs::write(p.join("a.txt"), "one\n").unwrap();
    git(&["add", "a.txt"]);
    git(&["commit", "-q", "-m", "Add a\n\nLonger body text."]);
    std::fs::write(p.join("a.txt"), "one\ntwo\n").unwrap();
    git(&["commit", "-q", "-am", "Extend a"]);
    let c = mine_git_repo(p, &MineOptions::default()).unwrap();
    assert_eq!(c.messages().collect::<Vec<_>>(), ["Add a", "Extend a"]);
    assert!(c.examples()[1].diff().contains("<nl> +two"));
}
