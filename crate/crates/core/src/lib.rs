//! Analysis toolkit for contextual probability data over two dichotomous
//! observables.
//!
//! Given the marginals of two observables under a context together with the
//! transition probabilities measured under filtration on the second
//! observable, the crate computes the interference coefficients of the
//! total-probability formula, classifies the context (trigonometric,
//! hyperbolic, or the mixed hyper-trigonometric case), reconstructs the
//! matching amplitude — complex for `|lambda| <= 1`, split-complex for
//! `|lambda| > 1` — builds observable operators and Bloch-ball geometry,
//! evolves states in time, and cross-checks every analytic result against a
//! seeded hidden-variable Monte Carlo simulator.
//!
//! Module map:
//!
//! - [`contextual`] — data model, validation, interference coefficients and
//!   classification.
//! - [`complex_repr`] — complex amplitudes, Born rule, observable operators,
//!   Bloch vectors and mixtures.
//! - [`hyperbolic`] — split-complex arithmetic and hyperbolic amplitudes.
//! - [`dynamics`] — Hamiltonians, exact two-level evolution, stationary
//!   states, superpositions, nonlinear step maps.
//! - [`ensemble`] — the Monte Carlo simulator, frequency estimation with
//!   standard errors, and the context-independence test for transition
//!   probabilities.

pub mod complex_repr;
pub mod contextual;
pub mod dynamics;
pub mod ensemble;
mod error;
pub mod hyperbolic;
pub mod linalg;

pub use error::Error;
