//! Pseudospectral simulator and numerical-verification toolkit for the
//! magnetization-ripple equation: a nonlocal, strongly anisotropic elliptic
//! SPDE on the unit 2-torus driven by periodic white noise.
//!
//! The crate covers noise sampling, mollification, the linear and Picard
//! fixed-point solves, the off-line product P(v_l d2 R v_l), anisotropic
//! Hoelder-norm estimation through the heat semigroup of |d1|^3 - d2^2, and
//! the scaling-law studies that exercise all of it.

pub mod error;
pub mod experiments;
pub mod fixed_point;
pub mod noise;
pub mod norms;
pub mod operators;
pub mod spectral;

pub use error::{Result, RippleError};
