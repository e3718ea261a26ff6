use std::io::Write;
use std::panic;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use commitgen::commands::{self, RunOutput};
use commitgen::config::{EmbeddingSource, RunConfig};
use commitgen::corpus::{MineOptions, Split};
use commitgen::evaluation::BucketSpec;
use commitgen::pipeline::ModelKind;
use commitgen::preprocess::PipelineConfig;
use commitgen::vectorize::{Backend, EmbeddingFormat};
use commitgen::{write_atomic, Error, Result};

#[derive(Parser)]
#[command(name = "commitgen", version, about = "Generate commit messages from diffs and score them with BLEU-4")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Normalize the corpora, build vocab.txt and print corpus statistics.
    Preprocess {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory [default: <output_dir>/preprocessed]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        max_vocab: Option<usize>,
    },
    /// Fit a generator on the training split and save it to the output directory.
    Fit {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Generate one message per input diff with a saved generator.
    Generate {
        /// Directory written by `fit`.
        #[arg(long)]
        model: PathBuf,
        /// One diff per line [default: the configured test split]
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output file [default: stdout]
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Score generated messages against the test split, overall and per bucket.
    Evaluate {
        #[command(flatten)]
        run: RunArgs,
        /// Generated messages as `name=path` (or just `path`); repeatable.
        #[arg(long = "run", value_name = "NAME=PATH", required = true)]
        runs: Vec<String>,
        /// Directory for report.jsonl / report.txt [default: <output_dir>]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write review.tsv with this many examples per bucket.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Mine a git repository into train/valid/test files (80/10/10).
    Mine {
        #[arg(long)]
        repo: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 100)]
        max_diff_tokens: usize,
        #[arg(long, default_value_t = 3)]
        context: u32,
        #[arg(long, default_value = "HEAD")]
        rev: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a TSV of sampled test examples for manual ranking.
    SampleReview {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long = "run", value_name = "NAME=PATH", required = true)]
        runs: Vec<String>,
        #[arg(long, default_value_t = 10)]
        per_bucket: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, short)]
        output: PathBuf,
    },
}

/// Config file plus flag overrides.
#[derive(Args)]
struct RunArgs {
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Directory holding <split>.diff / <split>.msg
    #[arg(long)]
    data_dir: Option<PathBuf>,
    #[arg(long, value_parser = parse_via::<Backend>)]
    backend: Option<Backend>,
    #[arg(long, value_parser = parse_via::<ModelKind>)]
    model_kind: Option<ModelKind>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// raw, full or embedding
    #[arg(long)]
    pipeline: Option<String>,
    #[arg(long)]
    embedding: Option<PathBuf>,
    #[arg(long, value_parser = parse_via::<EmbeddingFormat>)]
    embedding_format: Option<EmbeddingFormat>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    train_seed: Option<u64>,
    #[arg(long)]
    smooth: bool,
}

fn parse_via<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(d) = &self.data_dir {
            cfg.data.dir = Some(d.clone());
        }
        if let Some(b) = self.backend {
            cfg.backend = b;
        }
        if let Some(m) = self.model_kind {
            cfg.model = m;
        }
        if let Some(o) = &self.output_dir {
            cfg.output_dir = o.clone();
        }
        if let Some(p) = &self.pipeline {
            cfg.pipeline = Some(match p.as_str() {
                "raw" => PipelineConfig::raw(),
                "full" => PipelineConfig::full(),
                "embedding" => PipelineConfig::embedding(),
                other => return Err(Error::InvalidConfig(format!("unknown pipeline preset `{other}`"))),
            });
        }
        if let Some(path) = &self.embedding {
            let format = self
                .embedding_format
                .or(cfg.embedding.as_ref().map(|e| e.format))
                .unwrap_or(EmbeddingFormat::Binary);
            cfg.embedding = Some(EmbeddingSource { path: path.clone(), format });
        } else if let (Some(f), Some(e)) = (self.embedding_format, cfg.embedding.as_mut()) {
            e.format = f;
        }
        if let Some(v) = self.learning_rate {
            cfg.train.learning_rate = v;
        }
        if let Some(v) = self.epochs {
            cfg.train.epochs = v;
        }
        if let Some(v) = self.batch_size {
            cfg.train.batch_size = v;
        }
        if let Some(v) = self.train_seed {
            cfg.train.seed = v;
        }
        if self.smooth {
            cfg.eval.smooth = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn load_runs(specs: &[String]) -> Result<Vec<(RunOutput, PathBuf)>> {
    specs
        .iter()
        .map(|s| {
            let path = PathBuf::from(s.split_once('=').map_or(s.as_str(), |(_, p)| p));
            RunOutput::load(s).map(|r| (r, path))
        })
        .collect()
}

fn write_or_print(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Preprocess { run, out, max_vocab } => {
            let cfg = run.resolve()?;
            cfg.check_paths(&[Split::Train])?;
            let out = out.unwrap_or_else(|| cfg.output_dir.join("preprocessed"));
            let summary = commands::preprocess(&cfg, &out, max_vocab)?;
            print!("{}", summary.stats);
            eprintln!("wrote {}", out.display());
        }
        Command::Fit { run } => {
            let cfg = run.resolve()?;
            cfg.check_paths(&[Split::Train])?;
            let generator = commands::fit(&cfg)?;
            eprintln!(
                "fitted {}+{} into {}",
                generator.backend(),
                generator.kind().as_str(),
                cfg.output_dir.display()
            );
        }
        Command::Generate { model, input, output, run } => {
            let expected = run.backend;
            let diffs = match input {
                Some(p) => commands::read_lines(&p)?,
                None => {
                    let cfg = run.resolve()?;
                    cfg.check_paths(&[Split::Test])?;
                    commands::load_configured(&cfg, Split::Test)?.diffs().map(str::to_owned).collect()
                }
            };
            let messages = commands::generate(&model, &diffs, expected)?;
            write_or_print(output.as_deref(), &commands::render_lines(&messages))?;
        }
        Command::Evaluate { run, runs, out, sample, seed } => {
            let cfg = run.resolve()?;
            cfg.check_paths(&[Split::Test])?;
            let test = commands::load_configured(&cfg, Split::Test)?;
            let spec = BucketSpec::new(cfg.eval.small_max, cfg.eval.medium_max)?;
            let runs = load_runs(&runs)?;
            let report = commands::evaluate(&test, &runs, &spec, cfg.eval.smooth)?;
            let out = out.unwrap_or_else(|| cfg.output_dir.clone());
            commands::write_report(&out, &report)?;
            if let Some(n) = sample {
                let outputs: Vec<RunOutput> = runs.into_iter().map(|(r, _)| r).collect();
                let sheet = commands::review_sheet(&test, &outputs, n, seed, &spec)?;
                write_atomic(&out.join("review.tsv"), sheet.to_tsv().as_bytes())?;
            }
            commands::write_run_record(
                &out,
                &cfg,
                "evaluate",
                &[out.join("report.jsonl"), out.join("report.txt")],
            )?;
            print!("{}", report.to_table());
        }
        Command::Mine { repo, out, max_diff_tokens, context, rev, seed } => {
            let options = MineOptions {
                max_diff_tokens,
                context_lines: context,
                rev,
            };
            let s = commands::mine(&repo, &out, &options, seed)?;
            println!("train\t{}\nvalid\t{}\ntest\t{}", s.train, s.valid, s.test);
        }
        Command::SampleReview { run, runs, per_bucket, seed, output } => {
            let cfg = run.resolve()?;
            cfg.check_paths(&[Split::Test])?;
            let test = commands::load_configured(&cfg, Split::Test)?;
            let spec = BucketSpec::new(cfg.eval.small_max, cfg.eval.medium_max)?;
            let outputs: Vec<RunOutput> = load_runs(&runs)?.into_iter().map(|(r, _)| r).collect();
            let sheet = commands::review_sheet(&test, &outputs, per_bucket, seed, &spec)?;
            write_atomic(&output, sheet.to_tsv().as_bytes())?;
            for b in &sheet.short_buckets {
                eprintln!("warning: bucket {b} has fewer than {per_bucket} examples");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match panic::catch_unwind(|| run(cli)) {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
        Err(_) => ExitCode::from(3),
    }
}
