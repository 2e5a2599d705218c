//! Continuation and spectral analysis for the Gel'fand problem
//! `-Delta v = mu e^v` through its mean field reformulation
//! `-Delta psi = e^{lambda psi} / integral(e^{lambda psi})`.
//!
//! The crate computes the solution branch over `lambda in (-inf, 8*pi)`,
//! re-parametrizes it by the mean field energy, evaluates the constrained
//! spectrum of the linearized operator, and verifies the identities that
//! control the shape of the bifurcation diagram (energy monotonicity, the
//! first-order ODE satisfied by the diagram trigger `g`, and the integral
//! maximum principle). Closed-form radial solutions on the unit disk and
//! a Bessel-zero eigenvalue table serve as independent oracles.

pub mod diagnostics;
pub mod error;
pub mod grid;
mod linalg;
pub mod mfsolver;
pub mod oracles;
pub mod spectrum;

pub use diagnostics::{
    classify_domain, energy, energy_zero, find_lambda_star, functional_value, g_and_coeffs,
    mu_infty_diagram, mu_of, solve_eta, solve_w, solve_z, verify_branch, BranchPoint, CheckResult,
    DiagramPoint, DiagramSummary, KindEvidence, KindVerdict, VerificationReport,
};
pub use error::{Error, Result};
pub use grid::{build_mesh, Field, Mesh, MeshSpec};
pub use mfsolver::{
    continue_branch, density, newton_solve, Branch, ContinuationConfig, MeanFieldState,
    Termination,
};
pub use oracles::{
    appendix_eigenpairs, disk_e0, liouville_closed_form, AppendixEntry, LiouvilleParam,
    LiouvilleRecord,
};
pub use spectrum::{bessel_j, bessel_zero, constrained_spectrum, nu1, sigma_hat1, SpectrumResult};

/// The critical parameter 8*pi bounding the first-kind branch.
pub const LAMBDA_SUP: f64 = 8.0 * std::f64::consts::PI;
