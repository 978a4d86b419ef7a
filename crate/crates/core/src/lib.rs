//! Tools for variable-order nonlocal operators with kernels
//! `K(y) ≍ 1/(|y|ⁿ φ(|y|))`: normalising constants, moments, Pucci operators,
//! barrier constructions and a one-dimensional Harnack laboratory.

pub mod asymptotics;
pub mod barrier;
pub mod config;
pub mod error;
pub mod functions;
pub mod harnack;
pub mod kernel;
pub mod normalizer;
pub mod operator;
pub mod quad;
pub mod special;

pub use error::{Error, Result};
pub use kernel::{Kernel, LogLogTable, ScalingFunction, WeakScalingCertificate};
pub use quad::{Enclosure, Estimate};
