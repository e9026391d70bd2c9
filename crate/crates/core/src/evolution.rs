//! Open-system evolution for a single qubit: time-ordered unitaries from
//! piecewise-constant Hamiltonians, interaction-picture unitaries, the
//! noise operator V_O, and observable expectations.
//!
//! All step products use the left-endpoint sample of each interval, i.e.
//! U = exp(-i H(t_{M-1}) dt) ... exp(-i H(t_1) dt) exp(-i H(t_0) dt).

use crate::error::{Error, Result};
use crate::mat2::{Axis, Mat2, Scalar};

/// M samples of a Hermitian 2x2 Hamiltonian on a uniform grid of step `dt`.
#[derive(Debug, Clone)]
pub struct HamiltonianTrajectory<T: Scalar> {
    samples: Vec<Mat2<T>>,
    dt: T,
}

impl<T: Scalar> HamiltonianTrajectory<T> {
    /// Samples are symmetrized on ingestion; asymmetry beyond 1e-10 is
    /// reported through `log::warn`.
    pub fn new(samples: Vec<Mat2<T>>, dt: T) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::ShapeMismatch("trajectory needs M >= 1 samples".into()));
        }
        if dt <= T::zero() {
            return Err(Error::ShapeMismatch("trajectory step dt must be positive".into()));
        }
        let tol = T::lit(1e-10);
        let samples = samples
            .into_iter()
            .enumerate()
            .map(|(i, h)| {
                let asym = (h - h.adjoint()).frobenius_norm();
                if asym > tol {
                    log::warn!("symmetrizing non-Hermitian sample {i} (asymmetry {asym:?})");
                }
                h.hermitize()
            })
            .collect();
        Ok(HamiltonianTrajectory { samples, dt })
    }

    /// All-zero trajectory.
    pub fn zeros(m: usize, dt: T) -> Self {
        HamiltonianTrajectory {
            samples: vec![Mat2::zero(); m.max(1)],
            dt,
        }
    }

    /// Dephasing trajectory (1/2) beta(t) sigma_z.
    pub fn dephasing(beta: &[T], dt: T) -> Self {
        let half = T::lit(0.5);
        let samples = beta
            .iter()
            .map(|&b| Mat2::pauli(Axis::Z).scale_re(half * b))
            .collect();
        HamiltonianTrajectory { samples, dt }
    }

    pub fn steps(&self) -> usize {
        self.samples.len()
    }

    pub fn dt(&self) -> T {
        self.dt
    }

    pub fn samples(&self) -> &[Mat2<T>] {
        &self.samples
    }

    /// Pointwise sum of two trajectories on the same grid.
    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_grid(other)?;
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| *a + *b)
            .collect();
        Ok(HamiltonianTrajectory {
            samples,
            dt: self.dt,
        })
    }

    fn check_grid(&self, other: &Self) -> Result<()> {
        if self.samples.len() != other.samples.len() {
            return Err(Error::ShapeMismatch(format!(
                "trajectory grids differ: {} vs {} steps",
                self.samples.len(),
                other.samples.len()
            )));
        }
        if (self.dt - other.dt).abs() > T::lit(1e-15) {
            return Err(Error::ShapeMismatch("trajectory steps dt differ".into()));
        }
        Ok(())
    }
}

/// Single step exp(-i H dt) (closed form; unitary to machine precision).
pub fn expm_hermitian_step<T: Scalar>(h: &Mat2<T>, dt: T) -> Mat2<T> {
    h.expm_hermitian(dt)
}

/// Right-to-left ordered product of per-step exponentials.
pub fn time_ordered_unitary<T: Scalar>(traj: &HamiltonianTrajectory<T>) -> Mat2<T> {
    let mut u = Mat2::identity();
    for h in traj.samples() {
        u = h.expm_hermitian(traj.dt) * u;
    }
    u
}

/// Pre-computed control information shared across noise realizations:
/// the running prefixes U_0(t_i), the conjugated dephasing axes
/// n_i.sigma = U_0(t_i)^H sigma_z U_0(t_i), and U_0(T).
#[derive(Debug, Clone)]
pub struct ControlFrame<T: Scalar> {
    pub prefixes: Vec<Mat2<T>>,
    pub axes: Vec<[T; 3]>,
    pub u0_final: Mat2<T>,
    pub dt: T,
}

impl<T: Scalar> ControlFrame<T> {
    pub fn new(ctrl: &HamiltonianTrajectory<T>) -> Self {
        let m = ctrl.steps();
        let mut prefixes = Vec::with_capacity(m + 1);
        let mut axes = Vec::with_capacity(m);
        let mut p = Mat2::identity();
        for h in ctrl.samples() {
            prefixes.push(p);
            let w = p.adjoint() * Mat2::pauli(Axis::Z) * p;
            let (_, a) = w.bloch_decompose();
            axes.push(a);
            p = h.expm_hermitian(ctrl.dt) * p;
        }
        prefixes.push(p);
        ControlFrame {
            u0_final: p,
            prefixes,
            axes,
            dt: ctrl.dt(),
        }
    }

    pub fn steps(&self) -> usize {
        self.axes.len()
    }

    /// Per-step rotation exp(-i (beta_i dt / 2) n_i.sigma) for a dephasing
    /// realization beta(t). The conjugated generator is an involution, so
    /// the exponential needs one sin/cos pair per step.
    #[inline]
    pub fn dephasing_step(&self, i: usize, beta_i: T) -> Mat2<T> {
        let theta = beta_i * self.dt * T::lit(0.5);
        Mat2::su2_rotation(theta, self.axes[i])
    }

    /// Interaction unitary U_I(T) for one dephasing realization.
    pub fn interaction_unitary_dephasing(&self, beta: &[T]) -> Result<Mat2<T>> {
        if beta.len() != self.axes.len() {
            return Err(Error::ShapeMismatch(format!(
                "realization has {} samples, control grid has {}",
                beta.len(),
                self.axes.len()
            )));
        }
        let mut u = Mat2::identity();
        for (i, &b) in beta.iter().enumerate() {
            u = self.dephasing_step(i, b) * u;
        }
        Ok(u)
    }

    /// Modified interaction unitary U_0(T) U_I(T) U_0(T)^H.
    pub fn modified_interaction_dephasing(&self, beta: &[T]) -> Result<Mat2<T>> {
        let ui = self.interaction_unitary_dephasing(beta)?;
        Ok(self.u0_final * ui * self.u0_final.adjoint())
    }
}

/// U_I(T) for a general Hermitian noise trajectory: the step product applied
/// to U_0(t)^H H1(t) U_0(t), with U_0(t) the running prefix product.
pub fn interaction_unitary<T: Scalar>(
    ctrl: &HamiltonianTrajectory<T>,
    noise: &HamiltonianTrajectory<T>,
) -> Result<Mat2<T>> {
    ctrl.check_grid(noise)?;
    let mut p = Mat2::identity();
    let mut u = Mat2::identity();
    for (hc, hn) in ctrl.samples().iter().zip(noise.samples()) {
        let g = p.adjoint() * *hn * p;
        u = g.expm_hermitian(ctrl.dt) * u;
        p = hc.expm_hermitian(ctrl.dt) * p;
    }
    Ok(u)
}

/// Modified interaction picture unitary U_0(T) U_I(T) U_0(T)^H.
pub fn modified_interaction_unitary<T: Scalar>(
    ctrl: &HamiltonianTrajectory<T>,
    noise: &HamiltonianTrajectory<T>,
) -> Result<Mat2<T>> {
    let u0 = time_ordered_unitary(ctrl);
    let ui = interaction_unitary(ctrl, noise)?;
    Ok(u0 * ui * u0.adjoint())
}

/// Weighted empirical V_O = O^{-1} sum_k w_k U~_I^(k)H O U~_I^(k) over
/// dephasing realizations. Weights must sum to 1 within 1e-9.
pub fn vo_empirical<T: Scalar>(
    ctrl: &HamiltonianTrajectory<T>,
    realizations: &[Vec<T>],
    weights: &[T],
    observable: &Mat2<T>,
) -> Result<Mat2<T>> {
    if realizations.len() != weights.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} realizations vs {} weights",
            realizations.len(),
            weights.len()
        )));
    }
    let wsum = weights.iter().fold(T::zero(), |a, &b| a + b);
    if (wsum - T::one()).abs() > T::lit(1e-9) {
        return Err(Error::InvalidConfig("weights must sum to 1".into()));
    }
    let o_inv = observable.inverse().ok_or(Error::SingularObservable)?;
    let frame = ControlFrame::new(ctrl);
    let mut acc = Mat2::zero();
    for (beta, &w) in realizations.iter().zip(weights) {
        let ut = frame.modified_interaction_dephasing(beta)?;
        acc = acc + (ut.adjoint() * *observable * ut).scale_re(w);
    }
    Ok(o_inv * acc)
}

/// <O(T)> = Re tr(V_O U_0 rho0 U_0^H O). The imaginary part of the trace
/// must vanish to 1e-9; it is asserted and discarded.
pub fn expectation<T: Scalar>(
    vo: &Mat2<T>,
    u0: &Mat2<T>,
    rho0: &Mat2<T>,
    observable: &Mat2<T>,
) -> Result<T> {
    if !rho0.is_density(T::lit(1e-9)) {
        return Err(Error::InvalidDensity(
            "rho0 must be Hermitian, unit-trace, PSD".into(),
        ));
    }
    if !observable.is_hermitian(T::lit(1e-9)) {
        return Err(Error::InvalidDensity("observable must be Hermitian".into()));
    }
    let tr = (*vo * *u0 * *rho0 * u0.adjoint() * *observable).trace();
    debug_assert!(
        tr.im.abs() < T::lit(1e-9),
        "expectation trace has imaginary part {:?}",
        tr.im
    );
    Ok(tr.re)
}

/// Expectation in the conjugated frame: Re tr(U_I^H O' U_I rho0) with
/// O' = U_0(T)^H O U_0(T). Equal to `expectation` by trace cyclicity; used
/// by the inner training loops.
#[inline]
pub fn interaction_expectation<T: Scalar>(
    ui: &Mat2<T>,
    o_prime: &Mat2<T>,
    rho0: &Mat2<T>,
) -> T {
    (ui.adjoint() * *o_prime * *ui * *rho0).trace().re
}

pub fn identity_weights<T: Scalar>(k: usize) -> Vec<T> {
    vec![T::one() / T::lit(k as f64); k]
}
