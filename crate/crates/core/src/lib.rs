//! Proximal Gauss-Newton for penalized nonlinear least squares
//!
//! ```text
//! min_x  ½‖F(x)‖² + J(x)
//! ```
//!
//! with a smooth residual map `F` and a convex, possibly nonsmooth penalty
//! `J`. The iteration is
//!
//! ```text
//! x_{k+1} = prox_J^{H(x_k)}( x_k − F'(x_k)† F(x_k) ),   H(x) = F'(x)ᵀ F'(x)
//! ```
//!
//! Besides the solver, the crate computes local convergence certificates
//! from a majorant function of `F'` (Lipschitz and Smale-type models): the
//! radii `ν`, `ρ`, `r = min(ρ, δ)` and the per-step error recursion, and it
//! audits solver runs against those bounds.
//!
//! Modules:
//! - [`linalg`]: SVD-backed Moore-Penrose inverse, metric operator, norms.
//! - [`prox`]: proximity operators in the metric of an SPD operator.
//! - [`majorant`]: majorant models, radii and recursion coefficients.
//! - [`problems`]: polynomial residual maps, problem catalog, constants.
//! - [`solver`]: the outer iteration and the run verification harness.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod majorant;
pub mod problems;
pub mod prox;
pub mod solver;

pub use error::{Error, Result};
pub use linalg::{Matrix, Vector};
pub use majorant::{
    LocalConstants, MajorantModel, ModelKind, RadiusCertificate, RadiusMethod,
    RecursionCoefficients,
};
pub use problems::{catalog, Domain, GroundTruth, PolynomialMap, Problem, Term};
pub use prox::{ProxResult, ProxSpec};
pub use solver::{IterationRecord, RunReport, RunStatus, SolverConfig, VerificationReport};
