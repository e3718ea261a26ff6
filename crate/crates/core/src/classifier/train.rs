use log::info;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{log_softmax, LRModel};
use crate::error::{Error, Result};
use crate::vectorize::{Backend, FeatureVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Adam,
    Sgd,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub optimizer: Optimizer,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    /// L2 penalty strength, applied to the parameters a batch touches.
    pub l2: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            epochs: 10,
            batch_size: 64,
            seed: 0,
            optimizer: Optimizer::Adam,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            l2: 0.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be > 0");
        }
        if self.epochs < 1 {
            return fail("epochs must be >= 1");
        }
        if self.batch_size < 1 {
            return fail("batch_size must be >= 1");
        }
        if !(0.0..1.0).contains(&self.beta1) || !(0.0..1.0).contains(&self.beta2) {
            return fail("adam betas must lie in [0, 1)");
        }
        if !(self.epsilon > 0.0) {
            return fail("epsilon must be > 0");
        }
        if !(self.l2 >= 0.0) {
            return fail("l2 must be >= 0");
        }
        Ok(())
    }
}

/// Trains from zero-initialized parameters. See [`train_with_log`].
pub fn train(
    features: &[FeatureVector],
    labels: &[usize],
    class_count: usize,
    feature_dim: usize,
    config: &TrainConfig,
) -> Result<LRModel> {
    train_with_log(features, labels, class_count, feature_dim, config).map(|(m, _)| m)
}

/// Mini-batch training on mean cross-entropy. Returns the model and the mean
/// training loss measured after each epoch.
///
/// Each epoch visits the examples in a shuffle order drawn from `config.seed`.
/// For sparse inputs only the weight columns of features present in the
/// batch are updated (bias is always updated); the optimizer state is kept for
/// every parameter.
pub fn train_with_log(
    features: &[FeatureVector],
    labels: &[usize],
    class_count: usize,
    feature_dim: usize,
    config: &TrainConfig,
) -> Result<(LRModel, Vec<f64>)> {
    config.validate()?;
    if features.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: features.len(),
            right: labels.len(),
        });
    }
    if features.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if class_count == 0 {
        return Err(Error::InvalidConfig("class_count must be >= 1".into()));
    }
    if let Some(&bad) = labels.iter().find(|&&y| y >= class_count) {
        return Err(Error::InvalidClass { class: bad, class_count });
    }
    let backend = features[0].backend();
    let mut model = LRModel::zeros(backend, class_count, feature_dim);
    for x in features {
        model.check_input(x)?;
    }

    let mut state = OptimizerState::new(config, model.weights.len(), class_count);
    let mut scratch = BatchScratch::new(feature_dim, class_count, backend);
    let mut order: Vec<usize> = (0..features.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut epoch_losses = Vec::with_capacity(config.epochs);

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        for batch in order.chunks(config.batch_size) {
            scratch.accumulate(&model, features, labels, batch);
            state.step(&mut model, &mut scratch, batch.len());
        }
        let loss = mean_loss(&model, features, labels);
        info!("epoch {}/{}: training loss {loss:.6}", epoch + 1, config.epochs);
        epoch_losses.push(loss);
    }
    Ok((model, epoch_losses))
}

fn mean_loss(model: &LRModel, features: &[FeatureVector], labels: &[usize]) -> f64 {
    let total: f64 = features
        .iter()
        .zip(labels)
        .map(|(x, &y)| -log_softmax(&model.logits_unchecked(x))[y])
        .sum();
    total / features.len() as f64
}

/// Summed batch gradient, stored per touched feature column.
struct BatchScratch {
    class_count: usize,
    dense: bool,
    // feature -> slot in `grad`, usize::MAX when untouched
    slot_of: Vec<usize>,
    touched: Vec<usize>,
    grad: Vec<f64>,
    bias_grad: Vec<f64>,
}

impl BatchScratch {
    fn new(feature_dim: usize, class_count: usize, backend: Backend) -> Self {
        let dense = backend == Backend::Embedding;
        let mut s = BatchScratch {
            class_count,
            dense,
            slot_of: vec![usize::MAX; feature_dim],
            touched: Vec::new(),
            grad: Vec::new(),
            bias_grad: vec![0.0; class_count],
        };
        if dense {
            // every column is updated on every step
            s.touched = (0..feature_dim).collect();
            s.slot_of = (0..feature_dim).collect();
            s.grad = vec![0.0; feature_dim * class_count];
        }
        s
    }

    fn reset(&mut self) {
        if self.dense {
            self.grad.iter_mut().for_each(|g| *g = 0.0);
        } else {
            for &f in &self.touched {
                self.slot_of[f] = usize::MAX;
            }
            self.touched.clear();
            self.grad.clear();
        }
        self.bias_grad.iter_mut().for_each(|g| *g = 0.0);
    }

    fn accumulate(&mut self, model: &LRModel, features: &[FeatureVector], labels: &[usize], batch: &[usize]) {
        self.reset();
        let c = self.class_count;
        let dim = model.feature_dim();
        for &i in batch {
            let z = model.logits_unchecked(&features[i]);
            let mut residual: Vec<f64> = log_softmax(&z).into_iter().map(f64::exp).collect();
            residual[labels[i]] -= 1.0;
            for (b, r) in self.bias_grad.iter_mut().zip(&residual) {
                *b += r;
            }
            features[i].for_each_nonzero(|f, v| {
                if f >= dim {
                    return;
                }
                let mut slot = self.slot_of[f];
                if slot == usize::MAX {
                    slot = self.touched.len();
                    self.slot_of[f] = slot;
                    self.touched.push(f);
                    self.grad.resize(self.grad.len() + c, 0.0);
                }
                for (g, r) in self.grad[slot * c..(slot + 1) * c].iter_mut().zip(&residual) {
                    *g += r * v;
                }
            });
        }
    }
}

struct OptimizerState {
    config: TrainConfig,
    step: i32,
    m_w: Vec<f64>,
    v_w: Vec<f64>,
    m_b: Vec<f64>,
    v_b: Vec<f64>,
}

impl OptimizerState {
    fn new(config: &TrainConfig, n_weights: usize, class_count: usize) -> Self {
        let adam = config.optimizer == Optimizer::Adam;
        let n = if adam { n_weights } else { 0 };
        let nb = if adam { class_count } else { 0 };
        OptimizerState {
            config: config.clone(),
            step: 0,
            m_w: vec![0.0; n],
            v_w: vec![0.0; n],
            m_b: vec![0.0; nb],
            v_b: vec![0.0; nb],
        }
    }

    fn step(&mut self, model: &mut LRModel, scratch: &mut BatchScratch, batch_len: usize) {
        let cfg = &self.config;
        let scale = 1.0 / batch_len as f64;
        let c = scratch.class_count;
        self.step += 1;
        let lr = cfg.learning_rate;
        match cfg.optimizer {
            Optimizer::Sgd => {
                for (slot, &f) in scratch.touched.iter().enumerate() {
                    let w = &mut model.weights[f * c..(f + 1) * c];
                    for (wi, g) in w.iter_mut().zip(&scratch.grad[slot * c..(slot + 1) * c]) {
                        *wi -= lr * (g * scale + cfg.l2 * *wi);
                    }
                }
                for (b, g) in model.bias.iter_mut().zip(&scratch.bias_grad) {
                    *b -= lr * g * scale;
                }
            }
            Optimizer::Adam => {
                let (b1, b2, eps) = (cfg.beta1, cfg.beta2, cfg.epsilon);
                let bc1 = 1.0 - b1.powi(self.step);
                let bc2 = 1.0 - b2.powi(self.step);
                let update = |w: &mut f64, m: &mut f64, v: &mut f64, g: f64| {
                    *m = b1 * *m + (1.0 - b1) * g;
                    *v = b2 * *v + (1.0 - b2) * g * g;
                    *w -= lr * (*m / bc1) / ((*v / bc2).sqrt() + eps);
                };
                for (slot, &f) in scratch.touched.iter().enumerate() {
                    let range = f * c..(f + 1) * c;
                    let grads = &scratch.grad[slot * c..(slot + 1) * c];
                    for (((w, m), v), g) in model.weights[range.clone()]
                        .iter_mut()
                        .zip(&mut self.m_w[range.clone()])
                        .zip(&mut self.v_w[range])
                        .zip(grads)
                    {
                        let g = g * scale + cfg.l2 * *w;
                        update(w, m, v, g);
                    }
                }
                for (((w, m), v), g) in model
                    .bias
                    .iter_mut()
                    .zip(&mut self.m_b)
                    .zip(&mut self.v_b)
                    .zip(&scratch.bias_grad)
                {
                    update(w, m, v, g * scale);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vectorize::{DenseVector, SparseVector};

    fn toy() -> (Vec<FeatureVector>, Vec<usize>) {
        let pts = [([1.0, 1.0], 0), ([2.0, 1.5], 0), ([-1.0, -1.0], 1), ([-1.5, -2.0], 1)];
        (
            pts.iter().map(|(p, _)| FeatureVector::Dense(DenseVector::new(p.to_vec()))).collect(),
            pts.iter().map(|&(_, y)| y).collect(),
        )
    }

    #[test]
    fn config_validation() {
        let bad = TrainConfig { epochs: 0, ..TrainConfig::default() };
        assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        let bad = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        let bad = TrainConfig { batch_size: 0, ..TrainConfig::default() };
        assert!(bad.validate().is_err());
        assert!(TrainConfig::default().validate().is_ok());
    }

    #[test]
    fn length_mismatch() {
        let (x, _) = toy();
        assert!(matches!(
            train(&x, &[0, 1], 2, 2, &TrainConfig::default()),
            Err(Error::LengthMismatch { left: 4, right: 2 })
        ));
    }

    #[test]
    fn separable_toy_reaches_full_accuracy() {
        let (x, y) = toy();
        let cfg = TrainConfig { learning_rate: 0.1, epochs: 200, batch_size: 2, ..TrainConfig::default() };
        let (m, losses) = train_with_log(&x, &y, 2, 2, &cfg).unwrap();
        for (xi, &yi) in x.iter().zip(&y) {
            assert_eq!(m.predict_class(xi).unwrap(), yi);
        }
        assert!(losses.windows(2).all(|w| w[1] <= w[0]), "{losses:?}");
    }

    #[test]
    fn sgd_also_learns() {
        let (x, y) = toy();
        let cfg = TrainConfig {
            optimizer: Optimizer::Sgd,
            learning_rate: 0.5,
            epochs: 50,
            ..TrainConfig::default()
        };
        let m = train(&x, &y, 2, 2, &cfg).unwrap();
        assert!(x.iter().zip(&y).all(|(xi, &yi)| m.predict_class(xi).unwrap() == yi));
    }

    #[test]
    fn sparse_training_is_deterministic() {
        let x: Vec<FeatureVector> = (0..30)
            .map(|i| {
                FeatureVector::Sparse(SparseVector::from_pairs(vec![(i % 7, 1.0), ((i * 3) % 11, 0.5)]))
            })
            .collect();
        let y: Vec<usize> = (0..30).map(|i| (i % 7) as usize % 3).collect();
        let cfg = TrainConfig { epochs: 3, batch_size: 4, seed: 9, ..TrainConfig::default() };
        let a = train(&x, &y, 3, 11, &cfg).unwrap();
        let b = train(&x, &y, 3, 11, &cfg).unwrap();
        assert!(a.weights_raw().iter().zip(b.weights_raw()).all(|(p, q)| p.to_bits() == q.to_bits()));
        assert!(a.is_finite());
    }
}
