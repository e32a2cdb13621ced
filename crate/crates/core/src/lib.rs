//! Spectral normal forms, exact small-divisor surveys, frequency-map
//! nondegeneracy checks, and a symplectic simulator for the generalized
//! BBM equation
//!
//! ```text
//! u_t − u_{xxt} + u_x + u⁴ u_x = 0
//! ```
//!
//! on the 2π-periodic circle with mean-zero data. The equation is the
//! Hamiltonian system u_t = −(1−∂xx)⁻¹ ∂x ∇H(u) for
//! H(u) = ½∫u² + (1/30)∫u⁶, and in the weighted Fourier frame
//!
//! ```text
//! u = Σ_{j≠0} δ_j z_j e^{ijx}/√(2π),   δ_j = √(|j|/(1+j²)),
//! ```
//!
//! it becomes H = Λ + G with Λ = Σ_{j≥1} λ_j z_j z_{−j}, λ_j = j/(1+j²),
//! and a sextic momentum-conserving polynomial G. The crate computes the
//! partial Birkhoff normal form of H around a two-mode tangential set
//! S = {±n₁, ±n₂} through orders 6, 10 and 14, proves the required
//! small-divisor estimates by exact rational enumeration, derives the
//! frequency-to-action map and its nondegeneracy data, and measures the
//! predicted nonlinear frequency shifts in direct simulation.
//!
//! Modules mirror the pipeline: [`spectral_core`] (coordinates and the
//! gradient of G), [`index_sets`] (resonance bookkeeping relative to S),
//! [`divisor_analysis`] (exact small-divisor surveys), [`normal_form`]
//! (symbolic Poisson-bracket engine and the order-6/10/14 corrections),
//! [`kam_check`] (frequency maps and nondegeneracy assumptions),
//! [`dynamics`] (dealiased symplectic integration and frequency
//! extraction), plus [`config`]/[`report`] for the CLI surface and
//! [`acceptance`] for the end-to-end verification suite.

pub mod acceptance;
pub mod config;
pub mod divisor_analysis;
pub mod dynamics;
pub mod index_sets;
pub mod kam_check;
pub mod normal_form;
pub mod report;
pub mod spectral_core;

use thiserror::Error;

/// Crate-wide error type. The CLI maps variants onto its exit codes:
/// configuration errors → 2, resource ceilings → 3, verification
/// failures → 4, non-convergence → 5.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("resource ceiling exceeded: {0}")]
    ResourceCeiling(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("iteration failed to converge: {0}")]
    NonConvergence(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
