//! Brute-force reference implementations shared by the property and
//! acceptance tests. They favour obviousness over speed.
#![allow(dead_code)]

use commitgen::classifier::LRModel;
use commitgen::vectorize::FeatureVector;

/// Every n-gram of `tokens`, materialized.
pub fn ngrams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].to_vec()).collect()
}

fn count(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

/// Corpus BLEU-4 on a 0..100 scale, unsmoothed.
pub fn bleu_oracle(cands: &[Vec<String>], refs: &[Vec<String>]) -> (f64, [f64; 4], f64) {
    let mut num = [0usize; 4];
    let mut den = [0usize; 4];
    let (mut c, mut r) = (0usize, 0usize);
    for (cand, refr) in cands.iter().zip(refs) {
        c += cand.len();
        r += refr.len();
        for n in 1..=4 {
            let cg = ngrams(cand, n);
            let rg = ngrams(refr, n);
            den[n - 1] += cg.len();
            let mut distinct: Vec<Vec<String>> = Vec::new();
            for g in &cg {
                if !distinct.contains(g) {
                    distinct.push(g.clone());
                }
            }
            for g in &distinct {
                num[n - 1] += count(&cg, g).min(count(&rg, g));
            }
        }
    }
    let mut p = [0.0; 4];
    for n in 0..4 {
        p[n] = if den[n] == 0 { 0.0 } else { num[n] as f64 / den[n] as f64 };
    }
    // c == r gives exp(0) = 1, which also settles c = r = 0
    let bp = if c >= r {
        1.0
    } else if c == 0 {
        0.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    let bleu = if p.iter().any(|&x| x == 0.0) {
        0.0
    } else {
        100.0 * bp * (p.iter().map(|x| x.ln()).sum::<f64>() / 4.0).exp()
    };
    (bleu, p, bp)
}

/// TF-IDF weights of `query` against `docs`, keyed by token, L2-normalized.
pub fn tfidf_oracle(docs: &[Vec<String>], query: &[String]) -> Vec<(String, f64)> {
    let n = docs.len() as f64;
    let mut out: Vec<(String, f64)> = Vec::new();
    for t in query {
        if out.iter().any(|(u, _)| u == t) {
            continue;
        }
        let df = docs.iter().filter(|d| d.contains(t)).count();
        if df == 0 {
            continue;
        }
        let tf = query.iter().filter(|u| *u == t).count() as f64;
        let idf = ((1.0 + n) / (1.0 + df as f64)).ln() + 1.0;
        out.push((t.clone(), tf * idf));
    }
    let norm = out.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
    for (_, w) in &mut out {
        *w /= norm;
    }
    out
}

pub fn cosine_dense(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// First index of the maximum cosine.
pub fn brute_nearest(index: &[Vec<f64>], q: &[f64]) -> usize {
    let mut best = 0;
    let mut best_sim = f64::NEG_INFINITY;
    for (i, v) in index.iter().enumerate() {
        let s = cosine_dense(v, q);
        if s > best_sim {
            best = i;
            best_sim = s;
        }
    }
    best
}

/// Largest relative error between analytic and central-difference gradients
/// over all weights and biases.
pub fn max_gradient_error(model: &LRModel, x: &FeatureVector, y: usize) -> f64 {
    let h = 1e-5;
    let (_, g) = model.loss_and_grad(x, y).unwrap();
    let loss = |m: &LRModel| m.loss_and_grad(x, y).unwrap().0;
    let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs()).max(1e-6);
    let mut worst: f64 = 0.0;
    for c in 0..model.class_count() {
        for f in 0..model.feature_dim() {
            let w = model.weight(c, f);
            let mut plus = model.clone();
            plus.set_weight(c, f, w + h);
            let mut minus = model.clone();
            minus.set_weight(c, f, w - h);
            let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
            worst = worst.max(rel(g.weights[f * model.class_count() + c], numeric));
        }
        let mut plus = model.clone();
        plus.bias_mut()[c] += h;
        let mut minus = model.clone();
        minus.bias_mut()[c] -= h;
        let numeric = (loss(&plus) - loss(&minus)) / (2.0 * h);
        worst = worst.max(rel(g.bias[c], numeric));
    }
    worst
}

pub fn toks(s: &str) -> Vec<String> {
    s.split_whitespace().map(str::to_owned).collect()
}
pub mod synth;
