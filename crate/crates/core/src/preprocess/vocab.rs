use std::collections::HashMap;

use crate::error::{Error, Result};

pub const PAD: &str = "<PAD>";
pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const UNK: &str = "<UNK>";

/// Reserved tokens, in id order.
pub const SPECIAL_TOKENS: [&str; 4] = [PAD, BOS, EOS, UNK];

const PAD_ID: u32 = 0;
const BOS_ID: u32 = 1;
const EOS_ID: u32 = 2;
const UNK_ID: u32 = 3;

/// Frequency-ranked token table. Ids 0..4 hold the special tokens; the rest are
/// ordered by descending corpus frequency, ties broken lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, u32>,
}

impl Vocabulary {
    /// Builds a vocabulary from token sequences, keeping at most `max_size`
    /// entries (specials included) when given.
    ///
    /// Tokens spelled exactly like a special token are folded into that
    /// special rather than given their own id.
    pub fn build<I, S>(sequences: I, max_size: Option<usize>) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<[String]>,
    {
        let mut counts: HashMap<&str, u64> = HashMap::new();
        let mut owned: Vec<S> = Vec::new();
        for seq in sequences {
            owned.push(seq);
        }
        if owned.is_empty() {
            return Err(Error::EmptyInput);
        }
        for seq in &owned {
            for tok in seq.as_ref() {
                *counts.entry(tok.as_str()).or_insert(0) += 1;
            }
        }
        Self::from_counts(counts, max_size)
    }

    /// Builds from precomputed token frequencies.
    pub(crate) fn from_counts<'a>(
        counts: impl IntoIterator<Item = (&'a str, u64)>,
        max_size: Option<usize>,
    ) -> Result<Self> {
        if let Some(max) = max_size {
            if max < 5 {
                return Err(Error::VocabTooSmall(max));
            }
        }
        let mut ranked: Vec<(&str, u64)> = counts
            .into_iter()
            .filter(|(t, _)| !SPECIAL_TOKENS.contains(t))
            .collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        if let Some(max) = max_size {
            ranked.truncate(max - SPECIAL_TOKENS.len());
        }
        let tokens = SPECIAL_TOKENS
            .iter()
            .map(|s| s.to_string())
            .chain(ranked.into_iter().map(|(t, _)| t.to_owned()))
            .collect();
        Ok(Self::from_tokens(tokens))
    }

    fn from_tokens(tokens: Vec<String>) -> Self {
        let ids = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocabulary { tokens, ids }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id_of(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token_of(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    /// Non-special tokens in id order.
    pub fn regular_tokens(&self) -> &[String] {
        &self.tokens[SPECIAL_TOKENS.len()..]
    }

    pub fn decode(&self, ids: &[u32]) -> Vec<&str> {
        ids.iter().map(|&id| self.token_of(id).unwrap_or(UNK)).collect()
    }

    /// `vocab.txt` content: one token per line, line number = id.
    pub fn to_vocab_txt(&self) -> String {
        let mut out = String::new();
        for t in &self.tokens {
            out.push_str(t);
            out.push('\n');
        }
        out
    }

    pub fn from_vocab_txt(text: &str) -> Result<Self> {
        let tokens: Vec<String> = text.lines().map(str::to_owned).collect();
        if tokens.len() < SPECIAL_TOKENS.len()
            || tokens[..SPECIAL_TOKENS.len()].iter().zip(SPECIAL_TOKENS).any(|(a, b)| a != b)
        {
            return Err(Error::format("vocab.txt", "special tokens missing from ids 0..3"));
        }
        if let Some(bad) = tokens.iter().find(|t| t.is_empty() || t.contains(char::is_whitespace)) {
            return Err(Error::format("vocab.txt", format!("invalid token `{bad}`")));
        }
        let vocab = Self::from_tokens(tokens);
        if vocab.ids.len() != vocab.tokens.len() {
            return Err(Error::format("vocab.txt", "duplicate token"));
        }
        Ok(vocab)
    }
}

/// Maps tokens to ids, unknown tokens to `<UNK>`; optionally wraps the result
/// in sentence markers.
pub fn encode(tokens: &[String], vocab: &Vocabulary, mark_sentence: bool) -> Vec<u32> {
    let body = tokens.iter().map(|t| vocab.id_of(t).unwrap_or(UNK_ID));
    if mark_sentence {
        std::iter::once(BOS_ID)
            .chain(body)
            .chain(std::iter::once(EOS_ID))
            .collect()
    } else {
        body.collect()
    }
}

/// Right-pads with `<PAD>` or keeps the first `target_len` ids.
pub fn pad_or_trim(ids: &[u32], target_len: usize) -> Vec<u32> {
    let mut out: Vec<u32> = ids.iter().copied().take(target_len).collect();
    out.resize(target_len, PAD_ID);
    out
}
