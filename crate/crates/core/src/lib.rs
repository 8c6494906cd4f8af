//! Meshfree peridynamic correspondence models with polynomial-reproducing
//! gradient weights.

pub mod benchmarks;
pub mod cli;
pub mod correspondence;
pub mod dispersion;
pub mod elastostatics;
pub mod error;
pub mod gradops;
pub mod kernels;
pub mod pointcloud;

pub use error::{Error, Result};

/// Positions, displacements and bond vectors. 1D problems use `y = 0`.
pub type Vec2 = nalgebra::Vector2<f64>;
/// Deformation gradients and stresses.
pub type Tensor2 = nalgebra::Matrix2<f64>;
