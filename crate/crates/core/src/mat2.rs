//! Exact 2x2 complex linear algebra: Pauli constants, Hermitian matrix
//! exponentials in closed form, norms, and density-matrix helpers.
//!
//! Generic over the float type through `num-traits`; the rest of the crate
//! instantiates everything at `f64` (see the aliases at the crate root).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex;
use num_traits::{Float, FloatConst};

/// Scalar types the 2x2 kernels accept.
pub trait Scalar: Float + FloatConst + fmt::Debug + Send + Sync + 'static {
    /// Lift a literal tolerance into the scalar type.
    fn lit(v: f64) -> Self {
        Self::from(v).expect("literal representable in scalar type")
    }
}
impl<T> Scalar for T where T: Float + FloatConst + fmt::Debug + Send + Sync + 'static {}

/// Pauli axis selector, with `I` for the identity sigma_0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
    I,
}

/// 2x2 complex matrix, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub e: [Complex<T>; 4],
}

impl<T: Scalar> fmt::Debug for Mat2<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{:?}, {:?}], [{:?}, {:?}]]",
            self.e[0], self.e[1], self.e[2], self.e[3]
        )
    }
}

#[inline]
fn c<T: Scalar>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

impl<T: Scalar> Mat2<T> {
    #[inline]
    pub fn new(e00: Complex<T>, e01: Complex<T>, e10: Complex<T>, e11: Complex<T>) -> Self {
        Mat2 {
            e: [e00, e01, e10, e11],
        }
    }

    #[inline]
    pub fn zero() -> Self {
        Mat2::new(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
    }

    #[inline]
    pub fn identity() -> Self {
        Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0))
    }

    /// Pauli constant for the given axis (`I` yields sigma_0).
    pub fn pauli(axis: Axis) -> Self {
        match axis {
            Axis::X => Mat2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
            Axis::Y => Mat2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
            Axis::Z => Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
            Axis::I => Mat2::identity(),
        }
    }

    /// a_x sigma_x + a_y sigma_y + a_z sigma_z.
    #[inline]
    pub fn from_bloch(a: [T; 3]) -> Self {
        let zero = T::zero();
        Mat2::new(
            Complex::new(a[2], zero),
            Complex::new(a[0], -a[1]),
            Complex::new(a[0], a[1]),
            Complex::new(-a[2], zero),
        )
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.e[2 * i + j]
    }

    #[inline]
    pub fn adjoint(&self) -> Self {
        Mat2::new(
            self.e[0].conj(),
            self.e[2].conj(),
            self.e[1].conj(),
            self.e[3].conj(),
        )
    }

    #[inline]
    pub fn trace(&self) -> Complex<T> {
        self.e[0] + self.e[3]
    }

    #[inline]
    pub fn det(&self) -> Complex<T> {
        self.e[0] * self.e[3] - self.e[1] * self.e[2]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() < T::lit(1e-14) {
            return None;
        }
        let inv = Complex::new(T::one(), T::zero()) / d;
        Some(Mat2::new(
            self.e[3] * inv,
            -self.e[1] * inv,
            -self.e[2] * inv,
            self.e[0] * inv,
        ))
    }

    #[inline]
    pub fn scale(&self, s: Complex<T>) -> Self {
        Mat2::new(self.e[0] * s, self.e[1] * s, self.e[2] * s, self.e[3] * s)
    }

    #[inline]
    pub fn scale_re(&self, s: T) -> Self {
        self.scale(Complex::new(s, T::zero()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.e
            .iter()
            .map(|z| z.norm_sqr())
            .fold(T::zero(), |a, b| a + b)
            .sqrt()
    }

    /// Largest singular value, via the closed-form eigenvalues of A^H A.
    pub fn spectral_norm(&self) -> T {
        let g = self.adjoint() * *self;
        let tr = g.trace().re;
        let det = g.det().re;
        let two = T::lit(2.0);
        let disc = (tr * tr - T::lit(4.0) * det).max(T::zero()).sqrt();
        ((tr + disc) / two).max(T::zero()).sqrt()
    }

    /// Eigenvalues from the characteristic quadratic.
    pub fn eigenvalues(&self) -> [Complex<T>; 2] {
        let tr = self.trace();
        let four: Complex<T> = c(4.0, 0.0);
        let half: Complex<T> = c(0.5, 0.0);
        let disc = (tr * tr - four * self.det()).sqrt();
        [(tr + disc) * half, (tr - disc) * half]
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        (*self - self.adjoint()).frobenius_norm() < tol
    }

    /// Frobenius distance of U^H U from the identity.
    pub fn unitary_error(&self) -> T {
        (self.adjoint() * *self - Mat2::identity()).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.unitary_error() < tol
    }

    /// (H + H^H)/2.
    pub fn hermitize(&self) -> Self {
        (*self + self.adjoint()).scale_re(T::lit(0.5))
    }

    /// Decompose a Hermitian matrix as c*sigma_0 + a.sigma.
    pub fn bloch_decompose(&self) -> (T, [T; 3]) {
        let half = T::lit(0.5);
        let cc = (self.e[0].re + self.e[3].re) * half;
        let ax = self.e[1].re;
        let ay = -self.e[1].im;
        let az = (self.e[0].re - self.e[3].re) * half;
        (cc, [ax, ay, az])
    }

    /// exp(-i H dt) for Hermitian H, in closed form:
    /// e^{-ic dt} (cos(|a| dt) sigma_0 - i sin(|a| dt) (a_hat . sigma)).
    pub fn expm_hermitian(&self, dt: T) -> Self {
        let (cc, a) = self.bloch_decompose();
        let r = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
        let phase = Complex::from_polar(T::one(), -cc * dt);
        if r == T::zero() {
            return Mat2::identity().scale(phase);
        }
        let theta = r * dt;
        let (s, co) = (theta.sin(), theta.cos());
        let inv_r = T::one() / r;
        let n = [a[0] * inv_r, a[1] * inv_r, a[2] * inv_r];
        // cos I - i sin (n.sigma)
        let mi_s = Complex::new(T::zero(), -s);
        let u = Mat2::identity().scale_re(co) + Mat2::from_bloch(n).scale(mi_s);
        u.scale(phase)
    }

    /// Rotation factor exp(-i theta n.sigma) for a unit Bloch axis.
    #[inline]
    pub fn su2_rotation(theta: T, n: [T; 3]) -> Self {
        let (s, co) = (theta.sin(), theta.cos());
        Mat2::new(
            Complex::new(co, -s * n[2]),
            Complex::new(-s * n[1], -s * n[0]),
            Complex::new(s * n[1], -s * n[0]),
            Complex::new(co, s * n[2]),
        )
    }

    /// Density matrix of the +1 eigenstate of sigma_x.
    pub fn density_plus_x() -> Self {
        Mat2::new(c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0))
    }

    /// Density matrix of the +1 eigenstate of sigma_y.
    pub fn density_plus_y() -> Self {
        Mat2::new(c(0.5, 0.0), c(0.0, -0.5), c(0.0, 0.5), c(0.5, 0.0))
    }

    /// Density matrix of |0><0| (+1 eigenstate of sigma_z).
    pub fn density_ket0() -> Self {
        Mat2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0))
    }

    /// Hermitian, unit-trace, positive-semidefinite (within tol).
    pub fn is_density(&self, tol: T) -> bool {
        if !self.is_hermitian(tol) {
            return false;
        }
        if (self.trace().re - T::one()).abs() > tol {
            return false;
        }
        // PSD for 2x2 Hermitian: nonnegative diagonal and determinant.
        self.e[0].re > -tol && self.e[3].re > -tol && self.det().re > -tol
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Mat2<T>;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Mat2::new(
            self.e[0] + rhs.e[0],
            self.e[1] + rhs.e[1],
            self.e[2] + rhs.e[2],
            self.e[3] + rhs.e[3],
        )
    }
}

impl<T: Scalar> Sub for Mat2<T> {
    type Output = Mat2<T>;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Mat2::new(
            self.e[0] - rhs.e[0],
            self.e[1] - rhs.e[1],
            self.e[2] - rhs.e[2],
            self.e[3] - rhs.e[3],
        )
    }
}

impl<T: Scalar> Neg for Mat2<T> {
    type Output = Mat2<T>;
    #[inline]
    fn neg(self) -> Self {
        Mat2::new(-self.e[0], -self.e[1], -self.e[2], -self.e[3])
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Mat2<T>;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let a = &self.e;
        let b = &rhs.e;
        Mat2::new(
            a[0] * b[0] + a[1] * b[2],
            a[0] * b[1] + a[1] * b[3],
            a[2] * b[0] + a[3] * b[2],
            a[2] * b[1] + a[3] * b[3],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    type M = Mat2<f64>;
    type C = Complex<f64>;

    /// Scaling-and-squaring matrix exponential used as an independent
    /// oracle for the closed-form Hermitian exponential.
    fn expm_oracle(a: M) -> M {
        let mut s = 0u32;
        let mut x = a;
        while x.frobenius_norm() > 0.25 {
            x = x.scale_re(0.5);
            s += 1;
        }
        let mut term = M::identity();
        let mut sum = M::identity();
        for k in 1..30 {
            term = term * x;
            term = term.scale_re(1.0 / k as f64);
            sum = sum + term;
        }
        for _ in 0..s {
            sum = sum * sum;
        }
        sum
    }

    #[test]
    fn pauli_constants() {
        let x = M::pauli(Axis::X);
        assert_eq!(x.get(0, 1), C::new(1.0, 0.0));
        assert_eq!(x.get(0, 0), C::new(0.0, 0.0));
        assert_eq!(M::pauli(Axis::I), M::identity());
        let z = M::pauli(Axis::Z);
        assert_eq!(z.get(0, 0), C::new(1.0, 0.0));
        assert_eq!(z.get(1, 1), C::new(-1.0, 0.0));
        let y = M::pauli(Axis::Y);
        assert_eq!(y.get(0, 1), C::new(0.0, -1.0));
        // sigma_x sigma_y = i sigma_z
        let xy = x * y;
        assert!((xy - z.scale(C::new(0.0, 1.0))).frobenius_norm() < 1e-15);
    }

    #[test]
    fn expm_quarter_period_x() {
        let h = M::pauli(Axis::X).scale_re(std::f64::consts::FRAC_PI_2);
        let u = h.expm_hermitian(1.0);
        let expect = M::pauli(Axis::X).scale(C::new(0.0, -1.0));
        assert!((u - expect).frobenius_norm() < 1e-12);
    }

    #[test]
    fn expm_zero_is_identity() {
        let u = M::zero().expm_hermitian(1.0);
        assert!((u - M::identity()).frobenius_norm() < 1e-15);
    }

    #[test]
    fn expm_matches_series_oracle() {
        let h = M::pauli(Axis::Z).scale_re(6.0);
        let u = h.expm_hermitian(1.0);
        assert_abs_diff_eq!(u.get(0, 0).re, (-6.0f64).cos(), epsilon = 1e-12);
        assert_abs_diff_eq!(u.get(0, 0).im, (-6.0f64).sin(), epsilon = 1e-12);
        let oracle = expm_oracle(h.scale(C::new(0.0, -1.0)));
        assert!((u - oracle).frobenius_norm() < 1e-10);

        // a generic Hermitian matrix
        let g = M::new(
            C::new(0.7, 0.0),
            C::new(1.3, -0.4),
            C::new(1.3, 0.4),
            C::new(-2.1, 0.0),
        );
        let u = g.expm_hermitian(0.37);
        let oracle = expm_oracle(g.scale(C::new(0.0, -0.37)));
        assert!((u - oracle).frobenius_norm() < 1e-10);
        assert!(u.is_unitary(1e-12));
    }

    #[test]
    fn su2_rotation_matches_expm() {
        let n = [0.6, -0.64, 0.48];
        let r = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        let n = [n[0] / r, n[1] / r, n[2] / r];
        let theta = 0.83;
        let u = M::su2_rotation(theta, n);
        let h = M::from_bloch(n).scale_re(theta);
        assert!((u - h.expm_hermitian(1.0)).frobenius_norm() < 1e-13);
    }

    #[test]
    fn inverse_and_eigenvalues() {
        let x = M::pauli(Axis::X);
        assert!((x.inverse().unwrap() - x).frobenius_norm() < 1e-15);
        let ev = M::pauli(Axis::Z).eigenvalues();
        assert_abs_diff_eq!(ev[0].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[1].re, -1.0, epsilon = 1e-12);
    }

    #[test]
    fn spectral_norm_of_pauli_is_one() {
        for a in [Axis::X, Axis::Y, Axis::Z, Axis::I] {
            assert_abs_diff_eq!(M::pauli(a).spectral_norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn density_states() {
        for rho in [M::density_plus_x(), M::density_plus_y(), M::density_ket0()] {
            assert!(rho.is_density(1e-12));
        }
        assert!(!M::pauli(Axis::X).is_density(1e-12));
    }

    #[test]
    fn f32_instantiation() {
        let u = Mat2::<f32>::pauli(Axis::X)
            .scale_re(0.5f32)
            .expm_hermitian(1.0);
        assert!(u.is_unitary(1e-5));
    }
}
