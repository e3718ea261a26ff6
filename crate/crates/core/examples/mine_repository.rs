//! Mines (diff, message) pairs from a git repository and writes train, valid
//! and test splits.
//!
//! ```text
//! cargo run --example mine_repository -- /path/to/repo out/
//! ```

use std::path::PathBuf;

use commitgen::corpus::{mine_git_repo, shuffle_split, split_paths, write_parallel, MineOptions};

fn main() -> commitgen::Result<()> {
    let mut args = std::env::args().skip(1);
    let repo = PathBuf::from(args.next().unwrap_or_else(|| ".".into()));
    let out = args.next().map(PathBuf::from);

    let corpus = mine_git_repo(&repo, &MineOptions::default())?;
    println!("{} commits mined from {}", corpus.len(), repo.display());
    print!("{}", corpus.stats().render());
    for ex in corpus.examples().iter().rev().take(3) {
        println!("\n{}\n  {} tokens: {:.80}", ex.msg(), ex.diff_token_count(), ex.diff());
    }

    if let Some(out) = out {
        std::fs::create_dir_all(&out)?;
        let (train, valid, test) = shuffle_split(corpus.examples().to_vec(), 0, 0.8, 0.1);
        for split in [&train, &valid, &test] {
            let (d, m) = split_paths(&out, split.split().as_str());
            write_parallel(split, &d, &m)?;
            println!("wrote {} ({} pairs)", d.display(), split.len());
        }
    }
    Ok(())
}
