use std::io::{BufRead, Write};

use super::LabelCodec;
use crate::error::{Error, Result};
use crate::retrieval::{escape, unescape};
use crate::vectorize::{Backend, FeatureVector};

const HEADER: &str = "commitgen-lr 1";

/// Softmax with max-subtraction.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|&z| (z - max).exp()).collect();
    let sum: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / sum).collect()
}

pub fn log_softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|&z| (z - max).exp()).sum::<f64>().ln();
    logits.iter().map(|&z| z - lse).collect()
}

/// Parameter gradients, laid out like the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// Feature-major: entry `f * class_count + c`.
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Weights are stored feature-major so that one feature's weights across all
/// classes are contiguous; [`LRModel::weight`] gives the `(class, feature)`
/// view.
#[derive(Debug, Clone, PartialEq)]
pub struct LRModel {
    backend: Backend,
    class_count: usize,
    feature_dim: usize,
    pub(super) weights: Vec<f64>,
    pub(super) bias: Vec<f64>,
}

impl LRModel {
    pub fn zeros(backend: Backend, class_count: usize, feature_dim: usize) -> Self {
        LRModel {
            backend,
            class_count,
            feature_dim,
            weights: vec![0.0; class_count * feature_dim],
            bias: vec![0.0; class_count],
        }
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn feature_dim(&self) -> usize {
        self.feature_dim
    }

    pub fn weight(&self, class: usize, feature: usize) -> f64 {
        self.weights[feature * self.class_count + class]
    }

    pub fn set_weight(&mut self, class: usize, feature: usize, value: f64) {
        self.weights[feature * self.class_count + class] = value;
    }

    pub fn bias(&self) -> &[f64] {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut [f64] {
        &mut self.bias
    }

    pub fn weights_raw(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_raw_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    pub(super) fn check_input(&self, x: &FeatureVector) -> Result<()> {
        if x.backend() != self.backend {
            return Err(Error::BackendMismatch {
                expected: self.backend.to_string(),
                found: x.backend().to_string(),
            });
        }
        if let FeatureVector::Dense(d) = x {
            if d.dim() != self.feature_dim {
                return Err(Error::DimensionMismatch {
                    left: self.feature_dim,
                    right: d.dim(),
                });
            }
        }
        Ok(())
    }

    /// `weights · x + bias`. Sparse features beyond the model's dimension are
    /// ignored.
    pub fn logits(&self, x: &FeatureVector) -> Result<Vec<f64>> {
        self.check_input(x)?;
        Ok(self.logits_unchecked(x))
    }

    pub(super) fn logits_unchecked(&self, x: &FeatureVector) -> Vec<f64> {
        let c = self.class_count;
        let mut z = self.bias.clone();
        x.for_each_nonzero(|f, v| {
            if f < self.feature_dim {
                let col = &self.weights[f * c..(f + 1) * c];
                for (zi, w) in z.iter_mut().zip(col) {
                    *zi += w * v;
                }
            }
        });
        z
    }

    /// Cross-entropy loss of one example and its exact gradients.
    pub fn loss_and_grad(&self, x: &FeatureVector, true_class: usize) -> Result<(f64, Gradients)> {
        if true_class >= self.class_count {
            return Err(Error::InvalidClass {
                class: true_class,
                class_count: self.class_count,
            });
        }
        let z = self.logits(x)?;
        let logp = log_softmax(&z);
        let loss = -logp[true_class];
        let mut residual: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        residual[true_class] -= 1.0;
        let c = self.class_count;
        let mut weights = vec![0.0; self.weights.len()];
        x.for_each_nonzero(|f, v| {
            if f < self.feature_dim {
                for (g, r) in weights[f * c..(f + 1) * c].iter_mut().zip(&residual) {
                    *g = r * v;
                }
            }
        });
        Ok((loss, Gradients { weights, bias: residual }))
    }

    /// Class with the largest logit; ties go to the lowest class id.
    pub fn predict_class(&self, x: &FeatureVector) -> Result<usize> {
        let z = self.logits(x)?;
        Ok(argmax(&z))
    }

    /// Message of the predicted class.
    pub fn predict<'c>(&self, codec: &'c LabelCodec, x: &FeatureVector) -> Result<&'c str> {
        let class = self.predict_class(x)?;
        codec.message(class).ok_or(Error::InvalidClass {
            class,
            class_count: codec.class_count(),
        })
    }

    /// Versioned container: text header with shapes and the label table,
    /// followed by raw little-endian `f64` weights (feature-major) and bias.
    pub fn write_to<W: Write>(&self, codec: &LabelCodec, w: &mut W) -> Result<()> {
        if codec.class_count() != self.class_count {
            return Err(Error::LengthMismatch {
                left: self.class_count,
                right: codec.class_count(),
            });
        }
        writeln!(w, "{HEADER}")?;
        writeln!(w, "backend\t{}", self.backend)?;
        writeln!(w, "classes\t{}", self.class_count)?;
        writeln!(w, "features\t{}", self.feature_dim)?;
        for m in codec.messages() {
            writeln!(w, "{}", escape(m))?;
        }
        writeln!(w, "params\tf64le")?;
        let mut buf = Vec::with_capacity((self.weights.len() + self.bias.len()) * 8);
        for v in self.weights.iter().chain(&self.bias) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn read_from<R: BufRead>(r: &mut R) -> Result<(LRModel, LabelCodec)> {
        let bad = |d: &str| Error::format("logistic regression model", d.to_string());
        let mut line = String::new();
        let mut next_line = |r: &mut R| -> Result<String> {
            line.clear();
            if r.read_line(&mut line)? == 0 {
                return Err(bad("truncated"));
            }
            Ok(line.strip_suffix('\n').unwrap_or(&line).to_string())
        };
        if next_line(r)? != HEADER {
            return Err(bad("unsupported header"));
        }
        let mut field = |r: &mut R, name: &str| -> Result<String> {
            let l = next_line(r)?;
            match l.split_once('\t') {
                Some((k, v)) if k == name => Ok(v.to_string()),
                _ => Err(bad(&l)),
            }
        };
        let backend: Backend = field(r, "backend")?.parse()?;
        let classes: usize = field(r, "classes")?.parse().map_err(|_| bad("classes"))?;
        let features: usize = field(r, "features")?.parse().map_err(|_| bad("features"))?;
        let mut messages = Vec::with_capacity(classes);
        for _ in 0..classes {
            let mut l = String::new();
            if r.read_line(&mut l)? == 0 {
                return Err(bad("truncated label table"));
            }
            messages.push(unescape(l.strip_suffix('\n').unwrap_or(&l)));
        }
        let codec = LabelCodec::from_messages(messages)?;
        if field(r, "params")? != "f64le" {
            return Err(bad("unsupported parameter encoding"));
        }
        let n = classes
            .checked_mul(features)
            .and_then(|n| n.checked_add(classes))
            .ok_or_else(|| bad("shape overflow"))?;
        let mut raw = Vec::new();
        r.read_to_end(&mut raw)?;
        if raw.len() != n * 8 {
            return Err(bad("parameter block has the wrong size"));
        }
        let mut values = raw
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")));
        let weights: Vec<f64> = values.by_ref().take(classes * features).collect();
        let bias: Vec<f64> = values.collect();
        let model = LRModel {
            backend,
            class_count: classes,
            feature_dim: features,
            weights,
            bias,
        };
        if !model.is_finite() {
            return Err(bad("non-finite parameter"));
        }
        Ok((model, codec))
    }
}

pub(super) fn argmax(z: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in z.iter().enumerate().skip(1) {
        if v > z[best] {
            best = i;
        }
    }
    best
}
