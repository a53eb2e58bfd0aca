use thiserror::Error;

use crate::contextual::{Classification, Violation};

/// Errors produced by the analysis, representation, dynamics and simulation
/// operations. Reporting-style operations (validation) return violation lists
/// instead of failing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An interference denominator `2 sqrt(pb(y1)p(x|y1) pb(y2)p(x|y2))` is at
    /// or below the degeneracy floor, so the observables fail mutual
    /// incompatibility for this outcome and no interference analysis exists.
    #[error("degenerate interference denominator for a-outcome {outcome}: {value:e} (floor {floor:e})")]
    DegenerateDenominator {
        outcome: usize,
        value: f64,
        floor: f64,
    },

    /// A complex-amplitude operation was requested for a context that is not
    /// trigonometric.
    #[error("context is not trigonometric (classified {found:?})")]
    NotTrigonometric { found: Classification },

    /// A split-complex amplitude was requested for a context that is not
    /// hyperbolic.
    #[error("context is not hyperbolic (classified {found:?})")]
    NotHyperbolic { found: Classification },

    /// The symmetric operator representation of the second observable exists
    /// only for doubly stochastic transition matrices.
    #[error("transition matrix is not doubly stochastic (row sums {row_sums:?})")]
    NotDoublyStochastic { row_sums: [f64; 2] },

    /// Mixture weights are negative or do not sum to one.
    #[error("invalid mixture weights: {reason}")]
    BadWeights { reason: String },

    /// Superposition inputs are not orthonormal.
    #[error("states are not orthonormal: |(psi1, psi2)| = {overlap:e}")]
    NotOrthonormal { overlap: f64 },

    /// Superposition coefficients do not satisfy |k1|^2 + |k2|^2 = 1.
    #[error("invalid superposition coefficients: |k1|^2 + |k2|^2 = {norm}")]
    BadCoefficients { norm: f64 },

    /// A state map broke the norm-preservation contract during evolution.
    #[error("norm violated at step {step}: |psi| = {norm}")]
    NormViolation { step: usize, norm: f64 },

    /// A state vector failed its unit-norm invariant on construction.
    #[error("state norm {norm} deviates from 1 beyond {tol:e}")]
    NotNormalized { norm: f64, tol: f64 },

    /// A matrix that must be Hermitian is not.
    #[error("matrix is not Hermitian: asymmetry {defect:e}")]
    NonHermitian { defect: f64 },

    /// Filtration on an outcome with zero marginal probability.
    #[error("empty filtration: p(y{outcome}) = 0 under the ensemble")]
    EmptyFiltration { outcome: usize },

    /// A frequency estimate was requested from an empty count column.
    #[error("zero total for {which}")]
    ZeroTotal { which: String },

    /// Structural validation failed (invalid probabilities, labels, counts).
    #[error("invalid data: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.message.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}
