//! Test-tree oracles: closed-form attenuation arguments kept out of the
//! shipped library.
//!
//! Filter-function convention (pinned here because conventions vary):
//! PSDs are two-sided in ordinary frequency f (cycles per unit time),
//! S(-f) = S(f). A dephasing Hamiltonian beta(t)/2 sigma_z accumulates the
//! phase phi = Int beta dt, and for stationary Gaussian beta
//!
//!     <X(T)> = exp(-chi) <X(0)>,   chi = Var(phi)/2.
//!
//! We fold the 1/2 into the filter function, so the exponent is
//!
//!     chi = Int_0^inf S(f) |F(f)|^2 df,   |F(f)|^2 = T^2 sinc^2(pi f T)
//!
//! for free evolution of duration T (the standard sinc^2 kernel; the
//! one-sided integral over f >= 0 absorbs the symmetric negative branch).

#![allow(dead_code)]

use specdet::mat2::{Axis, Mat2};

/// Pulse schedule for the filter-function overlap.
pub enum Schedule {
    /// No control: the window is the plain rectangle of length `duration`.
    Free { duration: f64 },
    /// Ideal instantaneous pi pulses at the given times in (0, duration).
    PiPulses { duration: f64, times: Vec<f64> },
}

impl Schedule {
    /// |F(f)|^2 including the Var/2 convention factor. The switching
    /// function s(t) = +/-1 flips sign at every pi pulse;
    /// F(f) = Int_0^T s(t) e^{-2 pi i f t} dt.
    fn filter_sq(&self, f: f64) -> f64 {
        match self {
            Schedule::Free { duration } => {
                let x = std::f64::consts::PI * f * duration;
                let sinc = if x.abs() < 1e-8 { 1.0 } else { x.sin() / x };
                duration * duration * sinc * sinc
            }
            Schedule::PiPulses { duration, times } => {
                // piecewise-constant s(t): sum the segment transforms
                let mut edges = vec![0.0];
                edges.extend(times.iter().copied());
                edges.push(*duration);
                let mut re = 0.0;
                let mut im = 0.0;
                let mut sign = 1.0;
                let w = 2.0 * std::f64::consts::PI * f;
                for seg in edges.windows(2) {
                    let (a, b) = (seg[0], seg[1]);
                    if w.abs() < 1e-12 {
                        re += sign * (b - a);
                    } else {
                        // Int_a^b e^{-iwt} dt = (e^{-iwa} - e^{-iwb}) / (iw)
                        re += sign * ((w * b).sin() - (w * a).sin()) / w;
                        im += sign * ((w * b).cos() - (w * a).cos()) / w;
                    }
                    sign = -sign;
                }
                re * re + im * im
            }
        }
    }
}

/// chi = Int_0^{f_max} S(f) |F(f)|^2 df by composite Simpson quadrature.
/// `n` is the number of (even) subintervals.
pub fn overlap_integral(psd: &dyn Fn(f64) -> f64, schedule: &Schedule, f_max: f64, n: usize) -> f64 {
    assert!(f_max > 0.0 && n >= 2);
    let n = n + n % 2;
    let h = f_max / n as f64;
    let g = |f: f64| psd(f) * schedule.filter_sq(f);
    let mut acc = g(0.0) + g(f_max);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * g(i as f64 * h);
    }
    let chi = acc * h / 3.0;
    assert!(chi >= 0.0, "overlap integral must be nonnegative, got {chi}");
    chi
}

/// Both sides of the scalar-attenuation measurement-distance identity:
/// for V_j = c_j * identity the distance between the two predicted X
/// measurements equals |c_1 - c_2| |tr(rho_c(T) sigma_x)|.
///
/// lhs is evaluated through the production measurement formula; rhs is the
/// closed form. Errors if either V is not a real multiple of the identity.
pub fn measurement_distance_identity(
    v1: &Mat2<f64>,
    v2: &Mat2<f64>,
    u0: &Mat2<f64>,
    rho0: &Mat2<f64>,
) -> specdet::Result<(f64, f64)> {
    let scalar_of = |v: &Mat2<f64>| -> specdet::Result<f64> {
        let c = v.get(0, 0);
        let dev = (*v - Mat2::identity().scale_re(c.re)).frobenius_norm();
        if c.im.abs() > 1e-12 || dev > 1e-12 {
            return Err(specdet::Error::Incompatible(
                "measurement-distance identity needs V proportional to the identity".into(),
            ));
        }
        Ok(c.re)
    };
    let (c1, c2) = (scalar_of(v1)?, scalar_of(v2)?);
    let x = Mat2::pauli(Axis::X);
    let g1 = specdet::evolution::expectation(v1, u0, rho0, &x)?;
    let g2 = specdet::evolution::expectation(v2, u0, rho0, &x)?;
    let lhs = (g1 - g2).abs();
    let rho_c = *u0 * *rho0 * u0.adjoint();
    let rhs = (c1 - c2).abs() * (rho_c * x).trace().re.abs();
    Ok((lhs, rhs))
}

/// The closed-form PSD of a profile as a plain closure for the quadrature.
pub fn psd_closure(kind: specdet::noise::ProfileKind) -> impl Fn(f64) -> f64 {
    let spec = specdet::noise::NoiseProfileSpec::new(kind);
    move |f: f64| spec.psd_eval(f.abs()).expect("closed-form PSD")
}
