//! Truncated Fock-space linear algebra.
//!
//! Single-mode objects use the basis `|0⟩..|dim−1⟩`. Two-mode objects use the
//! product basis with the first mode as the slow index: `|a, b⟩ ↦ a·dim_b + b`.

mod displacement;
mod ops;
mod state;

pub use displacement::{
    annihilation_matrix, displacement_block, displacement_deviation, displacement_elements,
    displacement_matrix, number_matrix, LnFactorials,
};
pub use ops::{
    binomial_loss_coefficients, fidelity, hermitian_eigen, hermitian_sqrt, kron, loss_channel,
    partial_trace, trace_distance, two_mode_squeezed_vacuum, TruncatedState,
};
pub use state::{
    BellOutcome, DensityOperator, ModeOperator, StateVector, TruncationAction, TruncationPolicy,
};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

/// Dense complex matrix.
pub type CMatrix = nalgebra::DMatrix<C64>;

/// Dense complex column vector.
pub type CVector = nalgebra::DVector<C64>;

/// Hermiticity tolerance used by [`DensityOperator::validate`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Most negative eigenvalue accepted by [`DensityOperator::validate`].
pub const PSD_TOL: f64 = -1e-9;
