//! Deterministic synthetic git histories, written with `git fast-import`.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Stdio};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODULES: &[&str] = &[
    "parser", "lexer", "cache", "router", "config", "logger", "session", "storage", "scheduler", "auth",
    "metrics", "render", "codec", "socket", "queue", "index", "shell", "plugin", "archive", "format",
];
const VERBS: &[&str] = &["parse", "load", "store", "flush", "reset", "update", "validate", "render", "encode", "merge"];
const NOUNS: &[&str] = &["header", "entry", "buffer", "token", "record", "frame", "path", "state", "item", "block"];
const LIBS: &[&str] = &["serde", "log", "regex", "rand", "tokio", "clap", "bytes", "itertools"];
const WORDS: &[&str] = &[
    "the", "module", "handles", "input", "and", "returns", "a", "result", "for", "each", "call", "with", "errors",
];

fn git(dir: &Path) -> Command {
    let mut c = Command::new("git");
    c.arg("-C")
        .arg(dir)
        .env("GIT_CONFIG_NOSYSTEM", "1")
        .env("GIT_CONFIG_GLOBAL", "/dev/null");
    c
}

fn pick<'a>(rng: &mut ChaCha8Rng, xs: &[&'a str]) -> &'a str {
    xs.choose(rng).unwrap()
}

struct Tree {
    files: BTreeMap<String, Vec<String>>,
    version: (u32, u32, u32),
    deps: BTreeMap<String, (u32, u32)>,
}

impl Tree {
    fn render(lines: &[String]) -> String {
        let mut s = lines.join("\n");
        s.push('\n');
        s
    }
}

/// Creates a repository in `dir` with `commits` commits on `main`, generated
/// from `seed`. Most commits change one file with a templated message.
pub fn write_repo(dir: &Path, commits: usize, seed: u64) {
    let ok = git(dir).args(["init", "-q"]).status().unwrap().success();
    assert!(ok, "git init failed");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tree = Tree {
        files: BTreeMap::new(),
        version: (0, 1, 0),
        deps: LIBS.iter().map(|l| (l.to_string(), (1, 0))).collect(),
    };
    for m in MODULES {
        tree.files.insert(
            format!("src/{m}.rs"),
            vec![format!("use crate::{m};"), "use std::io;".into(), String::new(), format!("pub struct {m};")],
        );
        tree.files.insert(format!("docs/{m}.md"), vec![format!("# {m}"), WORDS.join(" ")]);
    }
    let mut stream = Vec::new();
    for i in 0..commits {
        let mut changed: Vec<String> = Vec::new();
        let mut deleted: Vec<String> = Vec::new();
        let msg = if i == 0 {
            changed.extend(tree.files.keys().cloned());
            "Initial import".to_string()
        } else {
            mutate(&mut tree, &mut rng, &mut changed, &mut deleted)
        };
        if i == 0 {
            changed.push("VERSION".into());
            changed.push("deps.toml".into());
        }
        writeln!(stream, "commit refs/heads/main").unwrap();
        writeln!(stream, "mark :{}", i + 1).unwrap();
        writeln!(stream, "committer Dev <dev@example.com> {} +0000", 1_500_000_000 + i * 600).unwrap();
        writeln!(stream, "data {}\n{msg}", msg.len()).unwrap();
        if i > 0 {
            writeln!(stream, "from :{i}").unwrap();
        }
        for path in &deleted {
            writeln!(stream, "D {path}").unwrap();
        }
        for path in &changed {
            let content = match path.as_str() {
                "VERSION" => {
                    let (a, b, c) = tree.version;
                    format!("name = \"app\"\nversion = \"{a}.{b}.{c}\"\nedition = \"2021\"\n")
                }
                "deps.toml" => tree.deps.iter().map(|(k, (a, b))| format!("{k} = \"{a}.{b}\"\n")).collect(),
                p => Tree::render(&tree.files[p]),
            };
            writeln!(stream, "M 100644 inline {path}\ndata {}\n{content}", content.len()).unwrap();
        }
        writeln!(stream).unwrap();
    }
    let mut child = git(dir)
        .args(["fast-import", "--quiet"])
        .stdin(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&stream).unwrap();
    assert!(child.wait().unwrap().success(), "fast-import failed");
    assert!(git(dir).args(["symbolic-ref", "HEAD", "refs/heads/main"]).status().unwrap().success());
}

fn mutate(tree: &mut Tree, rng: &mut ChaCha8Rng, changed: &mut Vec<String>, deleted: &mut Vec<String>) -> String {
    let m = pick(rng, MODULES);
    match rng.gen_range(0..100) {
        0..=14 => {
            let (a, b, c) = &mut tree.version;
            if rng.gen_bool(0.2) {
                *b += 1;
                *c = 0;
            } else {
                *c += 1;
            }
            changed.push("VERSION".into());
            format!("Bump version to {a}.{b}.{c}")
        }
        15..=44 => {
            let (v, n) = (pick(rng, VERBS), pick(rng, NOUNS));
            let body = rng.gen_range(1..=14);
            let path = format!("src/{m}.rs");
            let lines = tree.files.get_mut(&path).unwrap();
            lines.push(String::new());
            lines.push(format!("pub fn {v}_{n}(input: &str) -> io::Result<()> {{"));
            for k in 0..body {
                lines.push(format!("    let {n}{k} = {m}::{v}(input, {k})?;"));
            }
            lines.push("    Ok(())".into());
            lines.push("}".into());
            changed.push(path);
            format!("Add {v}_{n} to {m}")
        }
        45..=59 => {
            let path = format!("docs/{m}.md");
            let lines = tree.files.get_mut(&path).unwrap();
            let extra = rng.gen_range(1..=6);
            for _ in 0..extra {
                let sentence: Vec<&str> = (0..rng.gen_range(4..10)).map(|_| pick(rng, WORDS)).collect();
                lines.push(sentence.join(" "));
            }
            changed.push(path);
            format!("Document {m} behaviour")
        }
        60..=74 => {
            let lib = pick(rng, LIBS);
            let (a, b) = tree.deps.get_mut(lib).unwrap();
            if rng.gen_bool(0.3) {
                *a += 1;
                *b = 0;
            } else {
                *b += 1;
            }
            changed.push("deps.toml".into());
            format!("Update {lib} to {a}.{b}")
        }
        75..=89 => {
            let path = format!("tests/{m}_test.rs");
            let n = pick(rng, NOUNS);
            let cases = rng.gen_range(1..=4);
            let lines = tree.files.entry(path.clone()).or_insert_with(|| vec![format!("use app::{m};")]);
            for k in 0..cases {
                lines.push(String::new());
                lines.push("#[test]".into());
                lines.push(format!("fn {m}_{n}_{k}() {{"));
                lines.push(format!("    assert!({m}::check(\"{n}\"));"));
                lines.push("}".into());
            }
            changed.push(path);
            format!("Add tests for {m} {n}")
        }
        _ => {
            let path = format!("tests/{m}_test.rs");
            if tree.files.remove(&path).is_some() {
                deleted.push(path);
                format!("Remove {m} tests")
            } else {
                let path = format!("src/{m}.rs");
                let lines = tree.files.get_mut(&path).unwrap();
                lines.retain(|l| !l.starts_with("use std::io"));
                lines.insert(1, "use std::io;".into());
                lines.insert(1, format!("use crate::{};", pick(rng, MODULES)));
                changed.push(path);
                format!("Tidy imports in {m}")
            }
        }
    }
}
