//! Generators for the six dephasing noise profiles N0-N5.
//!
//! N1/N5 are synthesized in the frequency domain from their closed-form PSD
//! (Hermitian-symmetric shaped spectrum, inverse FFT). N2 is stationary
//! Gaussian colored noise (circular convolution of white noise with a
//! truncated Gaussian kernel), N3 multiplies N2 by a deterministic envelope,
//! and N4 squares the modulated noise and removes the induced mean. N2-N4
//! are normalized to unit time-averaged ensemble variance before an optional
//! per-profile scale factor.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::seed::{rng_from, subseed};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ProfileKind {
    N0,
    N1,
    N2,
    N3,
    N4,
    N5,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 6] = [
        ProfileKind::N0,
        ProfileKind::N1,
        ProfileKind::N2,
        ProfileKind::N3,
        ProfileKind::N4,
        ProfileKind::N5,
    ];
}

impl fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for ProfileKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "N0" => Ok(ProfileKind::N0),
            "N1" => Ok(ProfileKind::N1),
            "N2" => Ok(ProfileKind::N2),
            "N3" => Ok(ProfileKind::N3),
            "N4" => Ok(ProfileKind::N4),
            "N5" => Ok(ProfileKind::N5),
            other => Err(Error::UnknownProfile(other.to_string())),
        }
    }
}

/// Generative description of one noise profile.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseProfileSpec {
    pub kind: ProfileKind,
    /// Amplitude scale applied to the unit-variance N2-N4 constructions.
    pub scale: f64,
    /// Width of the N2 coloring kernel as a fraction of T.
    pub kernel_width_fraction: f64,
    /// Depth of the N3/N4 modulation envelope 1 + depth*sin(2 pi t / T).
    pub envelope_depth: f64,
}

impl NoiseProfileSpec {
    pub fn new(kind: ProfileKind) -> Self {
        NoiseProfileSpec {
            kind,
            scale: 1.0,
            kernel_width_fraction: 1.0 / 32.0,
            envelope_depth: 0.75,
        }
    }

    /// Closed-form PSD S_Z(f), f in cycles per unit time. Only N0, N1 and
    /// N5 have one; the kernel-defined profiles N2-N4 do not.
    pub fn psd_eval(&self, f: f64) -> Result<f64> {
        assert!(f >= 0.0, "psd_eval expects f >= 0");
        let bump_center = match self.kind {
            ProfileKind::N0 => return Ok(0.0),
            ProfileKind::N1 => 30.0,
            ProfileKind::N5 => 40.0,
            k => return Err(Error::NoClosedFormPsd(k.to_string())),
        };
        let base = if f <= 15.0 { 1.0 / (f + 1.0) } else { 1.0 / 16.0 };
        let d = f - bump_center;
        Ok(base + 0.5 * (-d * d / 50.0).exp())
    }

    /// K realizations of M samples each; deterministic in `seed`, with
    /// per-realization sub-seeds so any generation schedule agrees.
    pub fn generate(&self, k: usize, m: usize, t_total: f64, seed: u64) -> Result<NoiseRealizationSet> {
        if k == 0 || m == 0 {
            return Err(Error::InvalidConfig("need K >= 1 and M >= 1".into()));
        }
        if t_total <= 0.0 {
            return Err(Error::InvalidConfig("need T > 0".into()));
        }
        let dt = t_total / m as f64;
        let mut data = vec![0.0f64; k * m];
        match self.kind {
            ProfileKind::N0 => {}
            ProfileKind::N1 | ProfileKind::N5 => {
                let psd: Vec<f64> = (0..m)
                    .map(|j| {
                        let f = j.min(m - j) as f64 / t_total;
                        self.psd_eval(f).expect("closed-form PSD")
                    })
                    .collect();
                let mut planner = FftPlanner::new();
                let ifft = planner.plan_fft_inverse(m);
                let mut buf = vec![Complex::new(0.0, 0.0); m];
                for r in 0..k {
                    let mut rng = rng_from(subseed(seed, "psd", r as u64));
                    synthesize_from_psd(&psd, m, dt, &mut rng, &mut buf);
                    ifft.process(&mut buf);
                    let row = &mut data[r * m..(r + 1) * m];
                    let inv_m = 1.0 / m as f64;
                    for (x, z) in row.iter_mut().zip(&buf) {
                        *x = z.re * inv_m;
                    }
                }
            }
            ProfileKind::N2 | ProfileKind::N3 | ProfileKind::N4 => {
                let kernel_fft = coloring_kernel_fft(m, t_total, self.kernel_width_fraction);
                let env: Vec<f64> = (0..m)
                    .map(|i| {
                        1.0 + self.envelope_depth
                            * (2.0 * std::f64::consts::PI * i as f64 * dt / t_total).sin()
                    })
                    .collect();
                let mean_env2 = env.iter().map(|e| e * e).sum::<f64>() / m as f64;
                let mean_env4 = env.iter().map(|e| e.powi(4)).sum::<f64>() / m as f64;
                let mut planner = FftPlanner::new();
                let fft = planner.plan_fft_forward(m);
                let ifft = planner.plan_fft_inverse(m);
                let normal = Normal::new(0.0, 1.0).unwrap();
                let mut buf = vec![Complex::new(0.0, 0.0); m];
                for r in 0..k {
                    let mut rng = rng_from(subseed(seed, "colored", r as u64));
                    for z in buf.iter_mut() {
                        *z = Complex::new(normal.sample(&mut rng), 0.0);
                    }
                    fft.process(&mut buf);
                    for (z, h) in buf.iter_mut().zip(&kernel_fft) {
                        *z *= *h;
                    }
                    ifft.process(&mut buf);
                    let inv_m = 1.0 / m as f64;
                    let row = &mut data[r * m..(r + 1) * m];
                    match self.kind {
                        ProfileKind::N2 => {
                            for (x, z) in row.iter_mut().zip(&buf) {
                                *x = self.scale * z.re * inv_m;
                            }
                        }
                        ProfileKind::N3 => {
                            let env_norm = mean_env2.sqrt();
                            for ((x, z), e) in row.iter_mut().zip(&buf).zip(&env) {
                                *x = self.scale * z.re * inv_m * e / env_norm;
                            }
                        }
                        ProfileKind::N4 => {
                            // modulate, square, subtract the ensemble mean
                            // env(t)^2, normalize Var = 2 mean(env^4) away
                            let norm = (2.0 * mean_env4).sqrt();
                            for ((x, z), e) in row.iter_mut().zip(&buf).zip(&env) {
                                let y = z.re * inv_m * e;
                                *x = self.scale * (y * y - e * e) / norm;
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
        Ok(NoiseRealizationSet {
            data,
            k,
            m,
            dt,
            kind: self.kind,
            seed,
        })
    }
}

/// Fill `buf` with a Hermitian-symmetric shaped spectrum so that the
/// two-sided periodogram (dt/M) |X_j|^2 has expectation S(f_j).
fn synthesize_from_psd(
    psd: &[f64],
    m: usize,
    dt: f64,
    rng: &mut impl Rng,
    buf: &mut [Complex<f64>],
) {
    let normal = Normal::new(0.0, 1.0).unwrap();
    buf[0] = Complex::new((psd[0] * m as f64 / dt).sqrt() * normal.sample(rng), 0.0);
    let half = m / 2;
    for j in 1..(m + 1) / 2 {
        let amp = (psd[j] * m as f64 / (2.0 * dt)).sqrt();
        let z = Complex::new(amp * normal.sample(rng), amp * normal.sample(rng));
        buf[j] = z;
        buf[m - j] = z.conj();
    }
    if m % 2 == 0 && half > 0 {
        buf[half] = Complex::new((psd[half] * m as f64 / dt).sqrt() * normal.sample(rng), 0.0);
    }
}

/// FFT of the truncated-Gaussian low-pass kernel, normalized so circular
/// convolution with unit white noise has unit variance (sum h^2 = 1).
fn coloring_kernel_fft(m: usize, t_total: f64, width_fraction: f64) -> Vec<Complex<f64>> {
    let dt = t_total / m as f64;
    let sigma = width_fraction * t_total;
    let mut h = vec![0.0f64; m];
    let reach = ((4.0 * sigma / dt).ceil() as usize).min(m / 2);
    for d in 0..=reach {
        let tau = d as f64 * dt;
        let v = (-tau * tau / (2.0 * sigma * sigma)).exp();
        h[d] = v;
        if d > 0 {
            h[m - d] = v;
        }
    }
    let norm = h.iter().map(|x| x * x).sum::<f64>().sqrt();
    let mut buf: Vec<Complex<f64>> = h.iter().map(|&x| Complex::new(x / norm, 0.0)).collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut buf);
    buf
}

/// K x M batch of sampled beta(t) trajectories.
#[derive(Debug, Clone)]
pub struct NoiseRealizationSet {
    data: Vec<f64>,
    k: usize,
    m: usize,
    dt: f64,
    kind: ProfileKind,
    seed: u64,
}

impl NoiseRealizationSet {
    pub fn realizations(&self) -> usize {
        self.k
    }
    pub fn steps(&self) -> usize {
        self.m
    }
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn kind(&self) -> ProfileKind {
        self.kind
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }
    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.m..(r + 1) * self.m]
    }
    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.m)
    }
    pub fn rows_owned(&self) -> Vec<Vec<f64>> {
        self.rows().map(|r| r.to_vec()).collect()
    }
}
