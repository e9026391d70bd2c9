//! Gaussian pulse trains: f_x(t) = sum_k A_k exp(-(t - mu_k)^2 / (2 sigma^2)),
//! randomized by the slot method so pulses never overlap, discretized on the
//! simulation grid, and turned into control Hamiltonian trajectories
//! H(t) = (1/2) f_x(t) sigma_x + (1/2) Omega sigma_z.

use rand::Rng;

use crate::error::{Error, Result};
use crate::evolution::HamiltonianTrajectory;
use crate::mat2::{Axis, Mat2};

/// Minimum center separation, in units of the common width.
pub const MIN_GAP_SIGMAS: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence {
    amps: Vec<f64>,
    centers: Vec<f64>,
    sigma: f64,
    m: usize,
    t_total: f64,
    samples: Vec<f64>,
}

/// Default common width sigma = (1/6) (T / (2n)).
pub fn default_width(n: usize, t_total: f64) -> f64 {
    t_total / (12.0 * n as f64)
}

impl PulseSequence {
    pub fn new(
        amps: Vec<f64>,
        centers: Vec<f64>,
        sigma: f64,
        m: usize,
        t_total: f64,
    ) -> Result<Self> {
        if amps.len() != centers.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} amplitudes vs {} centers",
                amps.len(),
                centers.len()
            )));
        }
        if m == 0 || t_total <= 0.0 || sigma <= 0.0 {
            return Err(Error::InfeasibleGeometry(
                "need M >= 1, T > 0, sigma > 0".into(),
            ));
        }
        let margin = 3.0 * sigma;
        let slack = 1e-9 * t_total;
        for (i, &mu) in centers.iter().enumerate() {
            if mu < margin - slack || mu > t_total - margin + slack {
                return Err(Error::InfeasibleGeometry(format!(
                    "center {i} at {mu} outside [{margin}, {}]",
                    t_total - margin
                )));
            }
            if i > 0 {
                let gap = mu - centers[i - 1];
                if gap < MIN_GAP_SIGMAS * sigma - slack {
                    return Err(Error::InfeasibleGeometry(format!(
                        "centers {i}-{} closer than {} sigma",
                        i - 1,
                        MIN_GAP_SIGMAS
                    )));
                }
            }
        }
        let mut p = PulseSequence {
            amps,
            centers,
            sigma,
            m,
            t_total,
            samples: Vec::new(),
        };
        p.resample();
        Ok(p)
    }

    /// Zero waveform with the default geometry for n pulses.
    pub fn zero(n: usize, t_total: f64, m: usize) -> Self {
        let sigma = default_width(n, t_total);
        let slot = t_total / n as f64;
        let centers = (0..n).map(|k| (k as f64 + 0.5) * slot).collect();
        PulseSequence::new(vec![0.0; n], centers, sigma, m, t_total)
            .expect("default geometry is feasible")
    }

    /// Random train: amplitudes uniform on `amp_range`, one center jittered
    /// uniformly inside the feasible sub-interval of each of the n equal
    /// slots of [0, T]. Adjacent slots then guarantee gaps >= 6 sigma.
    pub fn random(
        n: usize,
        t_total: f64,
        m: usize,
        amp_range: (f64, f64),
        rng: &mut impl Rng,
    ) -> Result<Self> {
        if !(amp_range.0.is_finite() && amp_range.1.is_finite() && amp_range.0 <= amp_range.1) {
            return Err(Error::InvalidConfig("amplitude range must be finite".into()));
        }
        let sigma = default_width(n, t_total);
        let (lo, hi) = slot_bounds(0, n, t_total, sigma)?;
        debug_assert!(lo < hi);
        let amps = (0..n)
            .map(|_| {
                if amp_range.0 == amp_range.1 {
                    amp_range.0
                } else {
                    rng.gen_range(amp_range.0..amp_range.1)
                }
            })
            .collect();
        let centers = (0..n)
            .map(|k| {
                let (lo, hi) = slot_bounds(k, n, t_total, sigma).expect("checked above");
                rng.gen_range(lo..hi)
            })
            .collect();
        PulseSequence::new(amps, centers, sigma, m, t_total)
    }

    /// Closed-form waveform value.
    pub fn eval(&self, t: f64) -> f64 {
        let two_s2 = 2.0 * self.sigma * self.sigma;
        self.amps
            .iter()
            .zip(&self.centers)
            .map(|(&a, &mu)| a * (-(t - mu) * (t - mu) / two_s2).exp())
            .sum()
    }

    fn resample(&mut self) {
        let dt = self.dt();
        self.samples = (0..self.m).map(|i| self.eval(i as f64 * dt)).collect();
    }

    /// Amplitude-clamped copy; centers and width unchanged.
    pub fn clamp(&self, lo: f64, hi: f64) -> PulseSequence {
        assert!(lo < hi, "clamp needs lo < hi");
        let mut out = self.clone();
        for a in &mut out.amps {
            *a = a.clamp(lo, hi);
        }
        out.resample();
        out
    }

    /// Copy with new amplitudes and centers on the same geometry.
    pub fn with_params(&self, amps: Vec<f64>, centers: Vec<f64>) -> Result<PulseSequence> {
        PulseSequence::new(amps, centers, self.sigma, self.m, self.t_total)
    }

    /// Control Hamiltonian trajectory (1/2) f_x(t_i) sigma_x + (1/2) Omega sigma_z.
    pub fn build_control_hamiltonian(&self, omega: f64) -> HamiltonianTrajectory<f64> {
        let z = Mat2::pauli(Axis::Z).scale_re(0.5 * omega);
        let x = Mat2::pauli(Axis::X);
        let samples = self
            .samples
            .iter()
            .map(|&f| x.scale_re(0.5 * f) + z)
            .collect();
        HamiltonianTrajectory::new(samples, self.dt()).expect("valid grid")
    }

    /// Same continuous-time parameters on a finer/coarser grid.
    pub fn with_resolution(&self, m: usize) -> Result<PulseSequence> {
        PulseSequence::new(
            self.amps.clone(),
            self.centers.clone(),
            self.sigma,
            m,
            self.t_total,
        )
    }

    pub fn n_pulses(&self) -> usize {
        self.amps.len()
    }
    pub fn amps(&self) -> &[f64] {
        &self.amps
    }
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn steps(&self) -> usize {
        self.m
    }
    pub fn t_total(&self) -> f64 {
        self.t_total
    }
    pub fn dt(&self) -> f64 {
        self.t_total / self.m as f64
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
}

/// Feasible center interval of slot k (of n) honoring the 3 sigma margins.
pub fn slot_bounds(k: usize, n: usize, t_total: f64, sigma: f64) -> Result<(f64, f64)> {
    let slot = t_total / n as f64;
    let lo = (k as f64 * slot + 3.0 * sigma).max(3.0 * sigma);
    let hi = ((k as f64 + 1.0) * slot - 3.0 * sigma).min(t_total - 3.0 * sigma);
    if lo >= hi {
        return Err(Error::InfeasibleGeometry(format!(
            "slot {k} of {n} cannot hold a pulse of width sigma = {sigma}"
        )));
    }
    Ok((lo, hi))
}
