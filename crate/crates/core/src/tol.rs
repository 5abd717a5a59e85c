//! Centralized numeric tolerances.
//!
//! Every validation threshold used by the library lives here so that the
//! contracts stay consistent across modules.

/// Hermiticity check, relative to the largest entry magnitude.
pub const HERMITIAN: f64 = 1e-12;

/// Unitarity check on U†U − I in max-entry norm.
pub const UNITARY: f64 = 1e-10;

/// State-vector normalization.
pub const STATE_NORM: f64 = 1e-12;

/// Traceless test for control Hamiltonians.
pub const TRACELESS: f64 = 1e-12;

/// Relative spread below which a trio of eigenvalues is treated as confluent
/// in second-order divided differences (first-order differences use an exact
/// product form and need no threshold).
pub const DIVIDED_DIFF_CONFLUENT: f64 = 1e-5;

/// Residual admission threshold in the Lie-closure Gram–Schmidt sweep,
/// relative to the largest admitted norm.
pub const LARC_RESIDUAL: f64 = 1e-9;

/// Default tolerance for kinematic criticality tests.
pub const KINEMATIC: f64 = 1e-8;

/// Gradient norm below which a control is accepted as critical.
pub const CRITICAL_GRADIENT: f64 = 1e-8;

/// Hessian null band, relative to the largest eigenvalue magnitude.
pub const HESSIAN_NULL_BAND: f64 = 1e-7;

/// Definiteness margin band for discretized kernel operators, relative to the
/// matrix scale.
pub const DEFINITENESS_BAND: f64 = 1e-8;

/// DAE constraint residual allowed along the computed horizon.
pub const DAE_RESIDUAL: f64 = 1e-6;

/// Relative denominator floor at which the DAE integration halts.
pub const DAE_DENOMINATOR: f64 = 1e-6;

/// Off-diagonal floor for the Jacobi eigensolver, relative to the Frobenius
/// norm of the input.
pub const JACOBI_OFF: f64 = 1e-14;
