//! Sparse polynomial chaos surrogates with iterative input rotation.
//!
//! Coefficients are recovered by nonconvex ADMM regression against an
//! orthonormal polynomial basis; the input space is then rotated along the
//! dominant directions of the surrogate gradient and the fit is repeated.

pub mod admm;
pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod numeric;
pub mod problems;
pub mod regularizers;
pub mod rotation;
pub mod surrogate;

pub use admm::{solve, solve_with_factor, AdmmConfig, IterationRecord, SolveResult, WoodburyFactor};
pub use basis::{
    basis_size, multi_indices, sample_inputs, BasisSet, MeasurementMatrix, MultiIndex,
    PolynomialFamily,
};
pub use diagnostics::{
    coherence, least_squares, relative_error, relative_error_of, sparsity_profile,
    SparsityProfile, ValidationSet,
};
pub use error::{Error, Result};
pub use problems::{kl_eigenpairs, KlExpansion, Problem, ProblemKind, ProblemSpec};
pub use regularizers::Regularizer;
pub use rotation::{
    gradient_matrix, iterate, iterate_into, rotation_from_svd, IterateOptions, IterationReport,
    RotationConfig, RotationState,
};
pub use surrogate::{rotate_samples, Surrogate};
