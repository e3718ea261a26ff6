//! Text normalization, vocabulary construction and fixed-length encoding.

pub mod porter;
mod vocab;

use std::collections::HashSet;
use std::ops::Deref;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

pub use vocab::{encode, pad_or_trim, Vocabulary, BOS, EOS, PAD, SPECIAL_TOKENS, UNK};

const STOPWORDS_EN: &str = include_str!("stopwords_en.txt");

/// The 127-word English stop-word list, one word per line in the shipped
/// data file.
pub fn stopwords() -> &'static HashSet<&'static str> {
    static SET: OnceLock<HashSet<&'static str>> = OnceLock::new();
    SET.get_or_init(|| STOPWORDS_EN.lines().filter(|l| !l.is_empty()).collect())
}

/// A sequence of non-empty, whitespace-free tokens.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    /// Splits on runs of whitespace.
    pub fn from_whitespace(text: &str) -> Self {
        TokenSeq(text.split_whitespace().map(str::to_owned).collect())
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }

    pub fn join(&self) -> String {
        self.0.join(" ")
    }
}

impl Deref for TokenSeq {
    type Target = [String];

    fn deref(&self) -> &[String] {
        &self.0
    }
}

impl AsRef<[String]> for TokenSeq {
    fn as_ref(&self) -> &[String] {
        &self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSeq {
    /// Collects tokens, dropping empty ones and splitting any that contain
    /// whitespace so the invariant holds.
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        let mut out = Vec::new();
        for tok in iter {
            let tok: String = tok.into();
            if tok.contains(char::is_whitespace) {
                out.extend(tok.split_whitespace().map(str::to_owned));
            } else if !tok.is_empty() {
                out.push(tok);
            }
        }
        TokenSeq(out)
    }
}

/// Which normalization steps to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub lowercase: bool,
    pub strip_special_chars: bool,
    pub remove_stopwords: bool,
    pub stem: bool,
    /// Wrap encoded sequences in `<s>` ... `</s>`.
    pub add_sentence_markers: bool,
    /// Pad or trim encoded sequences to this many ids.
    pub pad_length: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig::full()
    }
}

impl PipelineConfig {
    /// Whitespace tokenization only.
    pub const fn raw() -> Self {
        PipelineConfig {
            lowercase: false,
            strip_special_chars: false,
            remove_stopwords: false,
            stem: false,
            add_sentence_markers: false,
            pad_length: None,
        }
    }

    /// Every text-level step enabled.
    pub const fn full() -> Self {
        PipelineConfig {
            lowercase: true,
            strip_special_chars: true,
            remove_stopwords: true,
            stem: true,
            add_sentence_markers: false,
            pad_length: None,
        }
    }

    /// Lowercasing and stop-word removal, leaving surface forms intact so they
    /// can still be looked up in a pre-trained embedding table.
    pub const fn embedding() -> Self {
        PipelineConfig {
            lowercase: true,
            strip_special_chars: false,
            remove_stopwords: true,
            stem: false,
            add_sentence_markers: false,
            pad_length: None,
        }
    }

    /// Fixed-length id sequences as fed to sequence models.
    pub const fn sequence(pad_length: usize) -> Self {
        PipelineConfig {
            lowercase: true,
            strip_special_chars: true,
            remove_stopwords: true,
            stem: false,
            add_sentence_markers: true,
            pad_length: Some(pad_length),
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        if self.pad_length == Some(0) {
            return Err(crate::Error::InvalidConfig("pad_length must be > 0".into()));
        }
        Ok(())
    }
}

fn keep_char(c: char) -> bool {
    matches!(c, 'a'..='z' | '0'..='9' | '_' | '<' | '>' | '+' | '-' | '@' | '/' | '.')
}

/// Applies, in order: trim, lowercase, whitespace split, special-character
/// removal, stop-word removal, Porter stemming. Disabled steps are skipped.
pub fn normalize(text: &str, config: &PipelineConfig) -> TokenSeq {
    let text = text.trim();
    let lowered;
    let text = if config.lowercase {
        lowered = text.to_lowercase();
        lowered.as_str()
    } else {
        text
    };
    let stop = stopwords();
    let tokens = text
        .split_whitespace()
        .filter_map(|tok| {
            if config.strip_special_chars {
                let kept: String = tok.chars().filter(|&c| keep_char(c)).collect();
                (!kept.is_empty()).then_some(kept)
            } else {
                Some(tok.to_owned())
            }
        })
        .filter(|tok| !(config.remove_stopwords && stop.contains(tok.as_str())))
        .map(|tok| if config.stem { porter::stem(&tok) } else { tok });
    TokenSeq(tokens.collect())
}

/// Normalizes, encodes and (optionally) pads a text according to `config`.
pub fn to_ids(text: &str, config: &PipelineConfig, vocab: &Vocabulary) -> Vec<u32> {
    let ids = encode(&normalize(text, config), vocab, config.add_sentence_markers);
    match config.pad_length {
        Some(len) => pad_or_trim(&ids, len),
        None => ids,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stop_list_has_127_entries() {
        assert_eq!(stopwords().len(), 127);
        assert!(stopwords().contains("a"));
    }

    #[test]
    fn full_pipeline() {
        // "added" stems to "ad" under the reference Porter algorithm
        let toks = normalize("  Added a new Test!  ", &PipelineConfig::full());
        assert_eq!(&*toks, ["ad", "new", "test"]);
    }

    #[test]
    fn empty_input() {
        assert!(normalize("", &PipelineConfig::full()).is_empty());
        assert!(normalize("   \t ", &PipelineConfig::raw()).is_empty());
    }

    #[test]
    fn raw_is_whitespace_split() {
        assert_eq!(&*normalize("foo bar", &PipelineConfig::raw()), ["foo", "bar"]);
        assert_eq!(&*normalize("Foo,  Bar!", &PipelineConfig::raw()), ["Foo,", "Bar!"]);
    }

    #[test]
    fn diff_syntax_survives_stripping() {
        let cfg = PipelineConfig {
            stem: false,
            remove_stopwords: false,
            ..PipelineConfig::full()
        };
        let toks = normalize("@@ -1,3 +1,4 @@ <nl> +foo(bar); src/Main.java", &cfg);
        assert_eq!(&*toks, ["@@", "-13", "+14", "@@", "<nl>", "+foobar", "src/main.java"]);
    }

    #[test]
    fn tokens_emptied_by_stripping_are_dropped() {
        let cfg = PipelineConfig { strip_special_chars: true, ..PipelineConfig::raw() };
        assert_eq!(&*normalize("{ } x", &cfg), ["x"]);
    }

    #[test]
    fn uppercase_is_stripped_without_lowercasing() {
        let cfg = PipelineConfig { strip_special_chars: true, ..PipelineConfig::raw() };
        assert_eq!(&*normalize("Foo", &cfg), ["oo"]);
    }

    #[test]
    fn stemming_is_not_idempotent() {
        // a stem can itself be stemmed again, or become a stop word
        let cfg = PipelineConfig::full();
        let once = normalize("agreed", &cfg);
        assert_eq!(&*once, ["agre"]);
        let twice = normalize(&once.join(), &cfg);
        assert_eq!(&*twice, ["agr"]);
        let cfg = PipelineConfig { remove_stopwords: true, stem: true, ..PipelineConfig::raw() };
        assert_eq!(&*normalize("abouts", &cfg), ["about"]);
        assert!(normalize("about", &cfg).is_empty());
    }

    #[test]
    fn token_seq_from_iter_enforces_invariant() {
        let t: TokenSeq = ["a b", "", "c"].into_iter().collect();
        assert_eq!(&*t, ["a", "b", "c"]);
    }

    #[test]
    fn zero_pad_length_rejected() {
        let cfg = PipelineConfig { pad_length: Some(0), ..PipelineConfig::raw() };
        assert!(cfg.validate().is_err());
    }
}
