//! Corpus-level BLEU-4 with a single reference per candidate.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ORDER: usize = 4;

/// Corpus BLEU with its components. `bleu` is on a 0..100 scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BleuReport {
    pub bleu: f64,
    pub precisions: [f64; MAX_ORDER],
    pub brevity_penalty: f64,
    pub candidate_length: usize,
    pub reference_length: usize,
    /// Clipped n-gram matches per order.
    pub matches: [usize; MAX_ORDER],
    /// Candidate n-gram totals per order.
    pub totals: [usize; MAX_ORDER],
}

/// Per-pair sufficient statistics; corpus statistics are their sum.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct NgramStats {
    pub matches: [usize; MAX_ORDER],
    pub totals: [usize; MAX_ORDER],
    pub candidate_length: usize,
    pub reference_length: usize,
}

impl NgramStats {
    pub fn of_pair<S: AsRef<str>>(candidate: &[S], reference: &[S]) -> Self {
        let cand: Vec<&str> = candidate.iter().map(AsRef::as_ref).collect();
        let refr: Vec<&str> = reference.iter().map(AsRef::as_ref).collect();
        let mut stats = NgramStats {
            candidate_length: cand.len(),
            reference_length: refr.len(),
            ..Default::default()
        };
        for n in 1..=MAX_ORDER {
            if cand.len() < n {
                break;
            }
            let mut ref_counts: HashMap<&[&str], usize> = HashMap::new();
            for g in refr.windows(n) {
                *ref_counts.entry(g).or_insert(0) += 1;
            }
            let mut cand_counts: HashMap<&[&str], usize> = HashMap::new();
            for g in cand.windows(n) {
                *cand_counts.entry(g).or_insert(0) += 1;
            }
            stats.totals[n - 1] = cand.len() + 1 - n;
            stats.matches[n - 1] = cand_counts
                .iter()
                .map(|(g, &c)| c.min(ref_counts.get(g).copied().unwrap_or(0)))
                .sum();
        }
        stats
    }

    pub fn add(&mut self, other: &NgramStats) {
        for n in 0..MAX_ORDER {
            self.matches[n] += other.matches[n];
            self.totals[n] += other.totals[n];
        }
        self.candidate_length += other.candidate_length;
        self.reference_length += other.reference_length;
    }

    /// BLEU from accumulated statistics. With `smooth`, orders 2..4 get +1 on
    /// both numerator and denominator.
    pub fn report(&self, smooth: bool) -> BleuReport {
        let mut precisions = [0.0; MAX_ORDER];
        for n in 0..MAX_ORDER {
            let (num, den) = if smooth && n > 0 {
                (self.matches[n] as f64 + 1.0, self.totals[n] as f64 + 1.0)
            } else {
                (self.matches[n] as f64, self.totals[n] as f64)
            };
            precisions[n] = if den > 0.0 { num / den } else { 0.0 };
        }
        let (c, r) = (self.candidate_length as f64, self.reference_length as f64);
        // an empty candidate side against non-empty references gets the
        // limiting value 0
        let brevity_penalty = if c >= r {
            1.0
        } else if c == 0.0 {
            0.0
        } else {
            (1.0 - r / c).exp()
        };
        let bleu = if precisions.iter().any(|&p| p <= 0.0) {
            0.0
        } else {
            let log_mean = precisions.iter().map(|p| p.ln()).sum::<f64>() / MAX_ORDER as f64;
            100.0 * brevity_penalty * log_mean.exp()
        };
        BleuReport {
            bleu,
            precisions,
            brevity_penalty,
            candidate_length: self.candidate_length,
            reference_length: self.reference_length,
            matches: self.matches,
            totals: self.totals,
        }
    }
}

/// Corpus BLEU-4 over aligned, pre-tokenized candidates and references.
pub fn bleu_corpus<S: AsRef<str>>(candidates: &[Vec<S>], references: &[Vec<S>], smooth: bool) -> Result<BleuReport> {
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut total = NgramStats::default();
    for (c, r) in candidates.iter().zip(references) {
        total.add(&NgramStats::of_pair(c, r));
    }
    Ok(total.report(smooth))
}

/// Whitespace tokenization of raw message lines, as used for scoring.
pub fn tokenize(message: &str) -> Vec<&str> {
    message.split_whitespace().collect()
}

/// Convenience wrapper over raw message strings.
pub fn bleu_messages<S: AsRef<str>, T: AsRef<str>>(candidates: &[S], references: &[T], smooth: bool) -> Result<BleuReport> {
    let c: Vec<Vec<&str>> = candidates.iter().map(|m| tokenize(m.as_ref())).collect();
    let r: Vec<Vec<&str>> = references.iter().map(|m| tokenize(m.as_ref())).collect();
    bleu_corpus(&c, &r, smooth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<&str> {
        s.split_whitespace().collect()
    }

    #[test]
    fn perfect_match() {
        let c = vec![toks("fix the null check in parser"), toks("add tests for the cli")];
        let r = bleu_corpus(&c, &c, false).unwrap();
        assert!((r.bleu - 100.0).abs() < 1e-9);
        assert_eq!(r.brevity_penalty, 1.0);
    }

    #[test]
    fn clipped_unigram_precision() {
        let r = bleu_corpus(&[toks("the the the")], &[toks("the cat")], false).unwrap();
        assert!((r.precisions[0] - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.bleu, 0.0);
    }

    #[test]
    fn brevity_penalty() {
        let r = bleu_corpus(&[toks("a b")], &[toks("a b c d")], false).unwrap();
        assert!((r.brevity_penalty - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn smoothing_affects_higher_orders_only() {
        let r = bleu_corpus(&[toks("a b x")], &[toks("a b c")], true).unwrap();
        assert!((r.precisions[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.precisions[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((r.precisions[3] - 1.0).abs() < 1e-15);
        assert!(r.bleu > 0.0);
    }

    #[test]
    fn errors() {
        let a = vec![toks("a")];
        assert!(matches!(bleu_corpus(&a, &[], false), Err(Error::LengthMismatch { .. })));
        assert!(matches!(bleu_corpus::<&str>(&[], &[], false), Err(Error::EmptyInput)));
    }

    #[test]
    fn empty_candidates() {
        let r = bleu_corpus(&[toks("")], &[toks("a b")], false).unwrap();
        assert_eq!(r.bleu, 0.0);
        assert_eq!(r.brevity_penalty, 0.0);
    }
}
