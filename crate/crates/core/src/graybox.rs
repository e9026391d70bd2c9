//! Stage I graybox model: a fixed control path plus K_model trainable
//! dephasing realizations and softmax-normalized weights, trained by Adam on
//! the MSE between predicted and recorded expectation values.

use crate::adam::{AdamConfig, AdamState};
use crate::error::{Error, Result};
use crate::evolution::{expectation, interaction_expectation, ControlFrame};
use crate::mat2::Mat2;
use crate::noise::ProfileKind;
use crate::pulse::PulseSequence;
use crate::seed::rng_from;
use crate::sim::{CharacterizationExample, MeasurementBasisSet};
use num_complex::Complex;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

/// Fixed simulation parameters baked into a model.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GrayboxConfig {
    pub k_model: usize,
    pub m: usize,
    pub t_total: f64,
    pub omega: f64,
}

/// Trainable model: unconstrained weights `w_tilde` (softmaxed on use) and
/// K_model trainable realization signals, one angular-frequency sample per
/// grid step.
#[derive(Debug, Clone)]
pub struct GrayboxModel {
    pub config: GrayboxConfig,
    pub basis: MeasurementBasisSet,
    pub w_tilde: Vec<f64>,
    pub beta_hat: Vec<Vec<f64>>,
    pub profile: Option<ProfileKind>,
}

pub fn softmax(x: &[f64]) -> Vec<f64> {
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = x.iter().map(|&v| (v - hi).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.iter().map(|&e| e / z).collect()
}

/// Gradient of the loss with respect to every trainable parameter.
#[derive(Debug, Clone)]
pub struct GrayboxGradients {
    pub w_tilde: Vec<f64>,
    pub beta_hat: Vec<Vec<f64>>,
}

/// Per-iteration training record plus the index of the snapshot returned.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GrayboxTrainReport {
    pub train_mse: Vec<f64>,
    pub test_mse: Vec<f64>,
    pub best_iteration: usize,
    pub best_test_mse: f64,
}

/// One example pre-transformed into the interaction frame so the training
/// loop never rebuilds control unitaries.
struct Prepared {
    frame: ControlFrame<f64>,
    o_prime: Vec<Mat2<f64>>,
    rho: Vec<Mat2<f64>>,
    targets: Vec<f64>,
}

/// Im tr((a.sigma) X) for a real Bloch vector a.
#[inline]
fn im_tr_axis(a: &[f64; 3], x: &Mat2<f64>) -> f64 {
    let i = Complex::new(0.0, 1.0);
    let z = (x.get(0, 1) + x.get(1, 0)).scale(a[0])
        + (i * (x.get(0, 1) - x.get(1, 0))).scale(a[1])
        + (x.get(0, 0) - x.get(1, 1)).scale(a[2]);
    z.im
}

impl GrayboxModel {
    /// Fresh model: uniform weights (w_tilde = 0) and small random
    /// realization signals to break the symmetry between them.
    pub fn new(config: GrayboxConfig, seed: u64) -> Result<Self> {
        if config.k_model == 0 || config.m == 0 {
            return Err(Error::InvalidConfig(
                "graybox needs k_model >= 1 and m >= 1".into(),
            ));
        }
        let mut rng = rng_from(seed);
        let normal = Normal::new(0.0, 0.1 * config.omega.abs().max(1.0)).unwrap();
        let beta_hat = (0..config.k_model)
            .map(|_| (0..config.m).map(|_| normal.sample(&mut rng)).collect())
            .collect();
        Ok(GrayboxModel {
            w_tilde: vec![0.0; config.k_model],
            beta_hat,
            basis: MeasurementBasisSet::default_dephasing(),
            config,
            profile: None,
        })
    }

    pub fn weights(&self) -> Vec<f64> {
        softmax(&self.w_tilde)
    }

    fn check_grid(&self, pulse: &PulseSequence) -> Result<()> {
        if pulse.steps() != self.config.m || (pulse.t_total() - self.config.t_total).abs() > 1e-12
        {
            return Err(Error::ShapeMismatch(format!(
                "pulse grid (m={}, t={}) does not match model (m={}, t={})",
                pulse.steps(),
                pulse.t_total(),
                self.config.m,
                self.config.t_total
            )));
        }
        Ok(())
    }

    /// Predicted features for a pulse together with the probed V_O estimate
    /// per distinct observable. The features are computed from those same
    /// operators, so the two outputs are one computation.
    pub fn forward(&self, pulse: &PulseSequence) -> Result<(Vec<f64>, Vec<Mat2<f64>>)> {
        self.check_grid(pulse)?;
        let frame = ControlFrame::new(&pulse.build_control_hamiltonian(self.config.omega));
        self.forward_in_frame(&frame)
    }

    /// Same as `forward` for a pre-built control frame, so callers probing
    /// several models under one pulse share the control computation.
    pub fn forward_in_frame(&self, frame: &ControlFrame<f64>) -> Result<(Vec<f64>, Vec<Mat2<f64>>)> {
        if frame.steps() != self.config.m {
            return Err(Error::ShapeMismatch(format!(
                "frame has {} steps, model expects {}",
                frame.steps(),
                self.config.m
            )));
        }
        let w = self.weights();
        let groups = self.basis.observable_groups();
        let mut accs = vec![Mat2::<f64>::zero(); groups.len()];
        for (k, beta) in self.beta_hat.iter().enumerate() {
            let ut = frame.modified_interaction_dephasing(beta)?;
            for ((obs, _), acc) in groups.iter().zip(accs.iter_mut()) {
                *acc = *acc + (ut.adjoint() * *obs * ut).scale_re(w[k]);
            }
        }
        let mut features = vec![0.0; self.basis.len()];
        let mut vos = Vec::with_capacity(groups.len());
        for ((obs, members), acc) in groups.iter().zip(&accs) {
            let vo = obs.inverse().ok_or(Error::SingularObservable)? * *acc;
            for &i in members {
                features[i] =
                    expectation(&vo, &frame.u0_final, &self.basis.pairs[i].rho0, obs)?;
            }
            vos.push(vo);
        }
        Ok((features, vos))
    }

    fn prepare(&self, ex: &CharacterizationExample) -> Result<Prepared> {
        self.check_grid(&ex.pulse)?;
        if ex.features.len() != self.basis.len() {
            return Err(Error::ShapeMismatch(format!(
                "example has {} features, basis has {}",
                ex.features.len(),
                self.basis.len()
            )));
        }
        let frame = ControlFrame::new(&ex.pulse.build_control_hamiltonian(self.config.omega));
        let q = frame.u0_final;
        let o_prime = self
            .basis
            .pairs
            .iter()
            .map(|p| q.adjoint() * p.observable * q)
            .collect();
        let rho = self.basis.pairs.iter().map(|p| p.rho0).collect();
        Ok(Prepared {
            frame,
            o_prime,
            rho,
            targets: ex.features.clone(),
        })
    }

    /// Loss and (optionally) its gradient over a prepared batch. The beta
    /// gradient is the analytic adjoint of the step product: with prefixes
    /// F_i and suffixes S_i of the interaction unitary, d<O>/d beta_i =
    /// dt * Im tr(W_i F_{i+1} rho U^H O' S_{i+1}).
    fn batch_pass(&self, preps: &[Prepared], want_grad: bool) -> Result<(f64, Option<GrayboxGradients>)> {
        let kq = self.config.k_model;
        let m = self.config.m;
        let b_len = self.basis.len();
        let w = self.weights();
        let denom = (preps.len() * b_len) as f64;

        let mut loss = 0.0;
        let mut g_raw = vec![0.0; kq];
        let mut g_beta = vec![vec![0.0; m]; kq];
        let mut prefixes = vec![vec![Mat2::<f64>::identity(); m + 1]; if want_grad { kq } else { 0 }];
        let mut g = vec![vec![0.0; b_len]; kq];

        for prep in preps {
            let frame = &prep.frame;
            for k in 0..kq {
                let beta = &self.beta_hat[k];
                let ui = if want_grad {
                    let pf = &mut prefixes[k];
                    pf[0] = Mat2::identity();
                    for i in 0..m {
                        pf[i + 1] = frame.dephasing_step(i, beta[i]) * pf[i];
                    }
                    pf[m]
                } else {
                    frame.interaction_unitary_dephasing(beta)?
                };
                for b in 0..b_len {
                    g[k][b] = interaction_expectation(&ui, &prep.o_prime[b], &prep.rho[b]);
                }
            }
            let mut c = vec![0.0; b_len];
            for b in 0..b_len {
                let p: f64 = (0..kq).map(|k| w[k] * g[k][b]).sum();
                let r = p - prep.targets[b];
                loss += r * r / denom;
                c[b] = 2.0 * r / denom;
            }
            if !want_grad {
                continue;
            }
            for k in 0..kq {
                for b in 0..b_len {
                    g_raw[k] += c[b] * g[k][b];
                }
                let ui = prefixes[k][m];
                let uid = ui.adjoint();
                let mut d = Mat2::<f64>::zero();
                for b in 0..b_len {
                    d = d + (prep.rho[b] * uid * prep.o_prime[b]).scale_re(c[b]);
                }
                let mut s = Mat2::<f64>::identity();
                let beta = &self.beta_hat[k];
                for i in (0..m).rev() {
                    let x = prefixes[k][i + 1] * d * s;
                    g_beta[k][i] += w[k] * frame.dt * im_tr_axis(&frame.axes[i], &x);
                    s = s * frame.dephasing_step(i, beta[i]);
                }
            }
        }
        if !want_grad {
            return Ok((loss, None));
        }
        let g_dot: f64 = (0..kq).map(|k| w[k] * g_raw[k]).sum();
        let g_w = (0..kq).map(|k| w[k] * (g_raw[k] - g_dot)).collect();
        Ok((
            loss,
            Some(GrayboxGradients {
                w_tilde: g_w,
                beta_hat: g_beta,
            }),
        ))
    }

    /// Mean squared error between predictions and recorded features.
    pub fn loss(&self, batch: &[CharacterizationExample]) -> Result<f64> {
        if batch.is_empty() {
            return Err(Error::InvalidConfig("loss needs a nonempty batch".into()));
        }
        let preps = batch.iter().map(|e| self.prepare(e)).collect::<Result<Vec<_>>>()?;
        Ok(self.batch_pass(&preps, false)?.0)
    }

    /// Gradient of `loss` with respect to every w_tilde and beta_hat entry.
    pub fn gradients(&self, batch: &[CharacterizationExample]) -> Result<GrayboxGradients> {
        if batch.is_empty() {
            return Err(Error::InvalidConfig("gradients need a nonempty batch".into()));
        }
        let preps = batch.iter().map(|e| self.prepare(e)).collect::<Result<Vec<_>>>()?;
        Ok(self.batch_pass(&preps, true)?.1.unwrap())
    }
}

/// Full-batch Adam training with a held-out tail split. Records train/test
/// MSE per iteration and returns the best-test-MSE snapshot.
pub fn train(
    model: &GrayboxModel,
    dataset: &[CharacterizationExample],
    test_fraction: f64,
    iterations: usize,
    adam: &AdamConfig,
) -> Result<(GrayboxModel, GrayboxTrainReport)> {
    if dataset.is_empty() {
        return Err(Error::InvalidConfig("training needs a nonempty dataset".into()));
    }
    if !(0.0..1.0).contains(&test_fraction) {
        return Err(Error::InvalidConfig(format!(
            "test fraction {test_fraction} outside [0, 1)"
        )));
    }
    let n_test = ((dataset.len() as f64) * test_fraction).round() as usize;
    let n_train = dataset.len() - n_test;
    if n_train == 0 {
        return Err(Error::InvalidConfig("split leaves no training examples".into()));
    }

    let mut model = model.clone();
    model.profile = Some(dataset[0].profile);
    let train_preps = dataset[..n_train]
        .iter()
        .map(|e| model.prepare(e))
        .collect::<Result<Vec<_>>>()?;
    let test_preps = dataset[n_train..]
        .iter()
        .map(|e| model.prepare(e))
        .collect::<Result<Vec<_>>>()?;

    let kq = model.config.k_model;
    let m = model.config.m;
    let mut adam_w = AdamState::new(kq);
    let mut adam_b = AdamState::new(kq * m);
    let mut report = GrayboxTrainReport {
        train_mse: Vec::with_capacity(iterations),
        test_mse: Vec::with_capacity(iterations),
        best_iteration: 0,
        best_test_mse: f64::INFINITY,
    };
    let mut best = (model.w_tilde.clone(), model.beta_hat.clone());

    for it in 0..iterations {
        // cosine step decay: full step early for coarse fitting, a tenth of
        // it near the end so the snapshot settles into the local minimum
        let frac = it as f64 / iterations.max(1) as f64;
        let sched = AdamConfig {
            step: adam.step * (0.1 + 0.45 * (1.0 + (std::f64::consts::PI * frac).cos())),
            ..*adam
        };
        let (train_loss, grads) = model.batch_pass(&train_preps, true)?;
        let grads = grads.unwrap();
        let test_loss = if test_preps.is_empty() {
            train_loss
        } else {
            model.batch_pass(&test_preps, false)?.0
        };
        if !train_loss.is_finite() || !test_loss.is_finite() {
            return Err(Error::Divergence(format!(
                "non-finite MSE at iteration {it}: train {train_loss}, test {test_loss}"
            )));
        }
        report.train_mse.push(train_loss);
        report.test_mse.push(test_loss);
        if test_loss < report.best_test_mse {
            report.best_test_mse = test_loss;
            report.best_iteration = it;
            best = (model.w_tilde.clone(), model.beta_hat.clone());
        }

        adam_w.update(&sched, &mut model.w_tilde, &grads.w_tilde);
        let mut flat_b: Vec<f64> = model.beta_hat.iter().flatten().cloned().collect();
        let flat_g: Vec<f64> = grads.beta_hat.iter().flatten().cloned().collect();
        adam_b.update(&sched, &mut flat_b, &flat_g);
        for (k, row) in model.beta_hat.iter_mut().enumerate() {
            row.copy_from_slice(&flat_b[k * m..(k + 1) * m]);
        }
    }

    model.w_tilde = best.0;
    model.beta_hat = best.1;
    Ok((model, report))
}
