//! Spectator-qubit noise detection in simulation.
//!
//! The library covers the full protocol: exact 2x2 open-system evolution,
//! colored-noise generation, Gaussian pulse trains, Monte Carlo
//! characterization, trainable graybox models of the noise operator,
//! discriminating-pulse optimization, a dithered MLP classifier, and the
//! periodic detection harness that produces confusion matrices.

pub mod adam;
pub mod artifacts;
pub mod classifier;
pub mod config;
pub mod container;
pub mod error;
pub mod evolution;
pub mod graybox;
pub mod harness;
pub mod mat2;
pub mod noise;
pub mod optimizer;
pub mod pipeline;
pub mod pulse;
pub mod report;
pub mod seed;
pub mod sim;

pub use error::{Error, Result};
pub use mat2::{Axis, Mat2, Scalar};

/// Concrete scalar aliases. All pipeline code runs in `f64`; the linear
/// algebra and evolution kernels are generic over the float type.
pub type Mat2F64 = Mat2<f64>;
pub type Mat2F32 = Mat2<f32>;
pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;
