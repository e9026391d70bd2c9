//! Stage III: dithered training-set construction and the N-class MLP noise
//! profile classifier (tanh hidden layers, softmax output, MSE loss, Adam).

use crate::adam::{AdamConfig, AdamState};
use crate::error::{Error, Result};
use crate::seed::{rng_from, subseed};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Replica count and Gaussian dither strength for training-set synthesis.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DitherConfig {
    pub replicas: usize,
    pub std: f64,
    pub seed: u64,
}

/// Feature vectors with integer class labels.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub features: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub n_classes: usize,
}

/// N*R labeled examples: each class feature replicated R times with iid
/// Gaussian noise added per component.
pub fn build_dither_set(class_features: &[Vec<f64>], cfg: &DitherConfig) -> Result<LabeledDataset> {
    if class_features.len() < 2 {
        return Err(Error::InvalidConfig("dithering needs >= 2 classes".into()));
    }
    if cfg.replicas == 0 || cfg.std < 0.0 {
        return Err(Error::InvalidConfig("need replicas >= 1 and std >= 0".into()));
    }
    let dim = class_features[0].len();
    if class_features.iter().any(|f| f.len() != dim) {
        return Err(Error::ShapeMismatch("ragged class features".into()));
    }
    let normal = Normal::new(0.0, cfg.std.max(f64::MIN_POSITIVE)).unwrap();
    let mut features = Vec::with_capacity(class_features.len() * cfg.replicas);
    let mut labels = Vec::with_capacity(features.capacity());
    for (c, base) in class_features.iter().enumerate() {
        let mut rng = rng_from(subseed(cfg.seed, "dither", c as u64));
        for _ in 0..cfg.replicas {
            let noisy = if cfg.std == 0.0 {
                base.clone()
            } else {
                base.iter().map(|v| v + normal.sample(&mut rng)).collect()
            };
            features.push(noisy);
            labels.push(c);
        }
    }
    Ok(LabeledDataset {
        features,
        labels,
        n_classes: class_features.len(),
    })
}

/// Feed-forward [dim -> N -> 3N -> N] network. Weight matrices are stored
/// row-major, one row per output neuron.
#[derive(Debug, Clone)]
pub struct MlpClassifier {
    pub sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

fn softmax_in_place(z: &mut [f64]) {
    let hi = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for v in z.iter_mut() {
        *v = (*v - hi).exp();
        sum += *v;
    }
    for v in z.iter_mut() {
        *v /= sum;
    }
}

/// Argmax with exact ties broken uniformly at random.
pub fn argmax_tiebreak<R: Rng>(p: &[f64], rng: &mut R) -> usize {
    let hi = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let ties: Vec<usize> = (0..p.len()).filter(|&i| p[i] == hi).collect();
    ties[rng.gen_range(0..ties.len())]
}

impl MlpClassifier {
    /// Glorot-style random initialization of the fixed [d, N, 3N, N] architecture.
    pub fn new(feature_dim: usize, n_classes: usize, seed: u64) -> Result<Self> {
        if feature_dim == 0 || n_classes < 2 {
            return Err(Error::InvalidConfig(
                "classifier needs feature_dim >= 1 and n_classes >= 2".into(),
            ));
        }
        let sizes = vec![feature_dim, n_classes, 3 * n_classes, n_classes];
        let mut rng = rng_from(seed);
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for l in 0..sizes.len() - 1 {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push(
                (0..fan_in * fan_out)
                    .map(|_| rng.gen_range(-bound..bound))
                    .collect(),
            );
            biases.push(vec![0.0; fan_out]);
        }
        Ok(MlpClassifier {
            sizes,
            weights,
            biases,
        })
    }

    fn affine(&self, l: usize, x: &[f64]) -> Vec<f64> {
        let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
        let mut z = self.biases[l].clone();
        for (o, zo) in z.iter_mut().enumerate().take(fan_out) {
            let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
            *zo += row.iter().zip(x).map(|(w, xi)| w * xi).sum::<f64>();
        }
        z
    }

    /// Softmax class probabilities; sums to 1 within 1e-9.
    pub fn predict_proba(&self, features: &[f64]) -> Result<Vec<f64>> {
        if features.len() != self.sizes[0] {
            return Err(Error::ShapeMismatch(format!(
                "feature dim {} vs input layer {}",
                features.len(),
                self.sizes[0]
            )));
        }
        let mut a: Vec<f64> = self.affine(0, features);
        a.iter_mut().for_each(|v| *v = v.tanh());
        let mut b = self.affine(1, &a);
        b.iter_mut().for_each(|v| *v = v.tanh());
        let mut out = self.affine(2, &b);
        softmax_in_place(&mut out);
        Ok(out)
    }

    /// Argmax label and the probability vector; exact ties are broken
    /// uniformly at random from `rng`.
    pub fn predict<R: Rng>(&self, features: &[f64], rng: &mut R) -> Result<(usize, Vec<f64>)> {
        let p = self.predict_proba(features)?;
        Ok((argmax_tiebreak(&p, rng), p))
    }

    fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in 0..self.weights.len() {
            out.extend_from_slice(&self.weights[l]);
            out.extend_from_slice(&self.biases[l]);
        }
        out
    }

    fn unflatten(&mut self, flat: &[f64]) {
        let mut at = 0;
        for l in 0..self.weights.len() {
            let nw = self.weights[l].len();
            self.weights[l].copy_from_slice(&flat[at..at + nw]);
            at += nw;
            let nb = self.biases[l].len();
            self.biases[l].copy_from_slice(&flat[at..at + nb]);
            at += nb;
        }
    }
}

/// Per-iteration MSE plus the held-out accuracy of the returned network.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassifierTrainReport {
    pub train_mse: Vec<f64>,
    pub holdout_accuracy: f64,
}

/// Forward with cached activations, then backprop of the softmax-MSE loss.
/// Returns (loss contribution, flat gradient contribution) for one example.
fn example_grad(clf: &MlpClassifier, x: &[f64], label: usize, scale: f64, grad: &mut [f64]) -> f64 {
    let mut a1 = clf.affine(0, x);
    a1.iter_mut().for_each(|v| *v = v.tanh());
    let mut a2 = clf.affine(1, &a1);
    a2.iter_mut().for_each(|v| *v = v.tanh());
    let mut p = clf.affine(2, &a2);
    softmax_in_place(&mut p);

    let c = p.len();
    let mut loss = 0.0;
    let mut e = vec![0.0; c];
    for i in 0..c {
        let y = if i == label { 1.0 } else { 0.0 };
        let r = p[i] - y;
        loss += scale * r * r;
        e[i] = 2.0 * scale * r;
    }
    // softmax jacobian: dz_j = p_j (e_j - sum_i e_i p_i)
    let dot: f64 = e.iter().zip(&p).map(|(a, b)| a * b).sum();
    let dz3: Vec<f64> = (0..c).map(|j| p[j] * (e[j] - dot)).collect();

    let sizes = &clf.sizes;
    let (n0, n1, n2, n3) = (sizes[0], sizes[1], sizes[2], sizes[3]);
    let off_w1 = 0;
    let off_b1 = off_w1 + n0 * n1;
    let off_w2 = off_b1 + n1;
    let off_b2 = off_w2 + n1 * n2;
    let off_w3 = off_b2 + n2;
    let off_b3 = off_w3 + n2 * n3;

    let mut da2 = vec![0.0; n2];
    for j in 0..n3 {
        for i in 0..n2 {
            grad[off_w3 + j * n2 + i] += dz3[j] * a2[i];
            da2[i] += clf.weights[2][j * n2 + i] * dz3[j];
        }
        grad[off_b3 + j] += dz3[j];
    }
    let dz2: Vec<f64> = (0..n2).map(|i| da2[i] * (1.0 - a2[i] * a2[i])).collect();
    let mut da1 = vec![0.0; n1];
    for j in 0..n2 {
        for i in 0..n1 {
            grad[off_w2 + j * n1 + i] += dz2[j] * a1[i];
            da1[i] += clf.weights[1][j * n1 + i] * dz2[j];
        }
        grad[off_b2 + j] += dz2[j];
    }
    let dz1: Vec<f64> = (0..n1).map(|i| da1[i] * (1.0 - a1[i] * a1[i])).collect();
    for j in 0..n1 {
        for i in 0..n0 {
            grad[off_w1 + j * n0 + i] += dz1[j] * x[i];
        }
        grad[off_b1 + j] += dz1[j];
    }
    loss
}

/// Full-batch Adam training of the MLP on a shuffled split of the dithered
/// set. Aborts on non-finite loss.
pub fn train_classifier(
    data: &LabeledDataset,
    test_fraction: f64,
    iterations: usize,
    adam: &AdamConfig,
    seed: u64,
) -> Result<(MlpClassifier, ClassifierTrainReport)> {
    let classes_present: std::collections::BTreeSet<usize> = data.labels.iter().cloned().collect();
    if classes_present.len() < 2 {
        return Err(Error::InvalidConfig(
            "training needs >= 2 classes present".into(),
        ));
    }
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidConfig(format!(
            "test fraction {test_fraction} outside [0, 1)"
        )));
    }
    let dim = data.features[0].len();
    let mut clf = MlpClassifier::new(dim, data.n_classes, subseed(seed, "init", 0))?;

    // shuffled split so every class reaches both halves
    let mut order: Vec<usize> = (0..data.features.len()).collect();
    order.shuffle(&mut rng_from(subseed(seed, "split", 0)));
    let n_test = ((order.len() as f64) * test_fraction).round() as usize;
    let n_train = order.len() - n_test;
    if n_train == 0 {
        return Err(Error::InvalidConfig("split leaves no training examples".into()));
    }
    let (train_idx, test_idx) = order.split_at(n_train);

    let mut params = clf.flatten();
    let mut state = AdamState::new(params.len());
    let scale = 1.0 / (n_train * data.n_classes) as f64;
    let mut report = ClassifierTrainReport {
        train_mse: Vec::with_capacity(iterations),
        holdout_accuracy: 0.0,
    };
    for it in 0..iterations {
        let mut grad = vec![0.0; params.len()];
        let mut loss = 0.0;
        for &i in train_idx {
            loss += example_grad(&clf, &data.features[i], data.labels[i], scale, &mut grad);
        }
        if !loss.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite classifier MSE at iteration {it}"
            )));
        }
        report.train_mse.push(loss);
        state.update(adam, &mut params, &grad);
        clf.unflatten(&params);
    }

    let eval_idx = if test_idx.is_empty() { train_idx } else { test_idx };
    let mut rng = rng_from(subseed(seed, "tiebreak", 0));
    let mut hits = 0;
    for &i in eval_idx {
        let (label, _) = clf.predict(&data.features[i], &mut rng)?;
        if label == data.labels[i] {
            hits += 1;
        }
    }
    report.holdout_accuracy = hits as f64 / eval_idx.len() as f64;
    Ok((clf, report))
}
