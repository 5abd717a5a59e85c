//! Control-landscape laboratory for bilinear Hamiltonian systems.
//!
//! The crate is organized around the chain
//!
//! ```text
//! ControlSystem + PiecewiseControl --propagate--> Trajectory --Objective--> fidelity
//! ```
//!
//! with exact first and second derivatives of every fidelity with respect to
//! the piecewise-constant control amplitudes (and an optional drift scale for
//! variable-time problems). On top of that sit
//!
//! * [`grouplandscape`] — critical-point classification of the fidelity as a
//!   function on U(N), SU(N) and PU(N),
//! * [`kernels`] — two-time integral-kernel operators and their projector
//!   series, including the closed-form Hessian operators of the registry
//!   examples,
//! * [`critical`] — verification/classification of control-space critical
//!   points, third-order probing, and the differential-algebraic generator of
//!   non-constant critical controls,
//! * [`optimize`] / [`trapscan`] — quasi-Newton and sequential-update pulse
//!   optimization, multi-start campaigns, and trap forensics.
//!
//! All numeric modules are I/O-free and deterministic given seeds.

pub mod critical;
pub mod error;
pub mod grouplandscape;
pub mod kernels;
pub mod optimize;
pub mod propagate;
pub mod qcore;
pub mod sysmodel;
pub mod tol;
pub mod trapscan;

pub use error::{Error, Result};
