//! Numerical simulation of conditional continuous-variable teleportation.
//!
//! States live in a truncated Fock basis. The crate covers the elementary
//! algebra ([`fock`]), the attenuation channels realised by gain-tuned and
//! conditional teleportation ([`channels`]), the teleporter itself with its
//! Bell-measurement conditioning ([`teleporter`]), simulated homodyne
//! tomography ([`tomography`]), Wigner-function diagnostics ([`analysis`])
//! and programmable conditional filters ([`filters`]).
//!
//! Quadratures follow `x = (a + a†)/√2`, `p = (a − a†)/(i√2)` with ħ = 1,
//! so the vacuum has quadrature variance 1/2.

pub mod analysis;
pub mod channels;
pub mod error;
pub mod filters;
pub mod fock;
pub mod teleporter;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{BellOutcome, DensityOperator, ModeOperator, StateVector, C64};
