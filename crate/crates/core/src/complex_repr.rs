//! Complex amplitude reconstruction for trigonometric contexts, observable
//! operators, and the Bloch-ball state geometry.
//!
//! A trigonometric context maps to the amplitude
//!
//! ```text
//! psi(x) = sqrt(pb(y1) p(x|y1)) + e^{i theta(x)} sqrt(pb(y2) p(x|y2))
//! ```
//!
//! whose squared modulus is `pa(x)` by the elementary identity
//! `A + B + 2 sqrt(AB) cos(theta) = |sqrt(A) + e^{i theta} sqrt(B)|^2`. The
//! first observable acts as the multiplication operator in this basis; the
//! second admits a symmetric operator exactly when the transition matrix is
//! doubly stochastic.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contextual::{
    is_doubly_stochastic, Classification, ContextualData, InterferenceProfile, OutcomeSpace,
};
use crate::linalg::{inner, norm, Mat2, Vec2};
use crate::Error;

/// Unit-norm tolerance for state construction.
pub const STATE_NORM_TOL: f64 = 1e-12;
/// Componentwise tolerance under which two amplitudes count as the same
/// representation.
pub const COLLISION_TOL: f64 = 1e-10;

/// The phase choices `xi(x/y)` used when an amplitude was constructed:
/// `xi(x/y1) = 0` and `xi(x/y2) = theta(x)` up to the branch selected.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConvention {
    pub xi_y1: [f64; 2],
    pub xi_y2: [f64; 2],
}

impl PhaseConvention {
    fn unknown() -> Self {
        Self {
            xi_y1: [0.0; 2],
            xi_y2: [0.0; 2],
        }
    }
}

/// Unit-norm complex amplitude over the two a-outcomes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QLState {
    amplitudes: Vec2,
    phase_convention: PhaseConvention,
}

impl QLState {
    /// Wrap raw amplitudes, enforcing unit norm within [`STATE_NORM_TOL`].
    pub fn new(amplitudes: Vec2) -> Result<Self, Error> {
        Self::with_norm_tolerance(amplitudes, STATE_NORM_TOL)
    }

    /// Wrap raw amplitudes under a caller-chosen norm tolerance (nonlinear
    /// trajectories run under a looser contract than exact constructions).
    pub fn with_norm_tolerance(amplitudes: Vec2, tol: f64) -> Result<Self, Error> {
        let norm_sq = amplitudes[0].norm_sqr() + amplitudes[1].norm_sqr();
        if (norm_sq - 1.0).abs() > tol {
            return Err(Error::NotNormalized {
                norm: norm_sq.sqrt(),
                tol,
            });
        }
        Ok(Self {
            amplitudes,
            phase_convention: PhaseConvention::unknown(),
        })
    }

    pub fn amplitudes(&self) -> &Vec2 {
        &self.amplitudes
    }

    pub fn amplitude(&self, x: usize) -> Complex64 {
        self.amplitudes[x]
    }

    pub fn phase_convention(&self) -> &PhaseConvention {
        &self.phase_convention
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }
}

fn require_trigonometric(profile: &InterferenceProfile) -> Result<(), Error> {
    if profile.classification != Classification::Trigonometric {
        return Err(Error::NotTrigonometric {
            found: profile.classification,
        });
    }
    Ok(())
}

fn amplitude_with_phases(data: &ContextualData, xi_y2: [f64; 2]) -> Vec2 {
    let pb = data.pb();
    let mut amplitudes = [Complex64::ZERO; 2];
    for x in 0..2 {
        let root1 = (pb[0] * data.transitions.get(x, 0)).sqrt();
        let root2 = (pb[1] * data.transitions.get(x, 1)).sqrt();
        amplitudes[x] = Complex64::new(root1, 0.0)
            + Complex64::from_polar(root2, xi_y2[x]);
    }
    amplitudes
}

/// Construct the amplitude with principal-branch phases
/// `xi(x/y2) = theta(x) = arccos(lambda(x)) in [0, pi]`.
pub fn build_amplitude(
    data: &ContextualData,
    profile: &InterferenceProfile,
) -> Result<QLState, Error> {
    require_trigonometric(profile)?;
    let xi_y2 = profile.phases;
    let amplitudes = amplitude_with_phases(data, xi_y2);
    let mut state = QLState::new(amplitudes)?;
    state.phase_convention = PhaseConvention {
        xi_y1: [0.0; 2],
        xi_y2,
    };
    Ok(state)
}

/// Construct the amplitude on the branch `xi(x2/y2) = theta(x1) + pi` that
/// makes the second-observable eigenbasis orthonormal.
///
/// For doubly stochastic transitions `cos(theta(x1) + pi) = lambda(x2)`, so
/// Born probabilities agree with the principal branch, and expanding this
/// state in the `b`-eigenbasis reproduces the `b`-marginal exactly. Only
/// available in the doubly stochastic case.
pub fn build_amplitude_b_orthogonal(
    data: &ContextualData,
    profile: &InterferenceProfile,
    ds_tol: f64,
) -> Result<QLState, Error> {
    require_trigonometric(profile)?;
    require_doubly_stochastic(data, ds_tol)?;
    let xi_y2 = [profile.phases[0], profile.phases[0] + std::f64::consts::PI];
    let amplitudes = amplitude_with_phases(data, xi_y2);
    let mut state = QLState::new(amplitudes)?;
    state.phase_convention = PhaseConvention {
        xi_y1: [0.0; 2],
        xi_y2,
    };
    Ok(state)
}

/// Born rule: probability of a-outcome `x` is the squared modulus of the
/// component along the corresponding basis vector.
pub fn born_probability(state: &QLState, x: usize) -> f64 {
    state.amplitudes[x].norm_sqr()
}

/// Hermitian 2x2 observable in the a-basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservableOperator {
    matrix: Mat2,
}

impl ObservableOperator {
    /// Wrap a matrix, enforcing hermiticity within 1e-12.
    pub fn new(matrix: Mat2) -> Result<Self, Error> {
        let defect = matrix.hermiticity_defect();
        if defect > 1e-12 {
            return Err(Error::NonHermitian { defect });
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        self.matrix.eigh().values
    }
}

/// The first observable as the multiplication operator: `diag(a_values)` in
/// its own eigenbasis.
pub fn operator_a(space: &OutcomeSpace) -> ObservableOperator {
    ObservableOperator {
        matrix: Mat2::diag_re(space.a_values[0], space.a_values[1]),
    }
}

fn require_doubly_stochastic(data: &ContextualData, ds_tol: f64) -> Result<(), Error> {
    if !is_doubly_stochastic(&data.transitions, ds_tol) {
        return Err(Error::NotDoublyStochastic {
            row_sums: data.transitions.row_sums(),
        });
    }
    Ok(())
}

/// Orthonormal eigenbasis of the second observable in the a-basis:
/// `u_y1(x) = sqrt(p(x|y1))` and `u_y2(x) = e^{i xi(x)} sqrt(p(x|y2))` with
/// the branch `xi(x2) = theta(x1) + pi` forced by orthogonality.
pub fn b_eigenbasis(
    data: &ContextualData,
    profile: &InterferenceProfile,
    ds_tol: f64,
) -> Result<[Vec2; 2], Error> {
    require_trigonometric(profile)?;
    require_doubly_stochastic(data, ds_tol)?;

    let p = &data.transitions;
    let u1 = [
        Complex64::new(p.get(0, 0).sqrt(), 0.0),
        Complex64::new(p.get(1, 0).sqrt(), 0.0),
    ];
    let theta1 = profile.phases[0];
    let u2 = [
        Complex64::from_polar(p.get(0, 1).sqrt(), theta1),
        Complex64::from_polar(p.get(1, 1).sqrt(), theta1 + std::f64::consts::PI),
    ];
    Ok([u1, u2])
}

/// The second observable as a symmetric operator, assembled spectrally from
/// its eigenbasis so the eigenvalues equal `b_values` exactly.
pub fn operator_b(
    data: &ContextualData,
    profile: &InterferenceProfile,
    ds_tol: f64,
) -> Result<ObservableOperator, Error> {
    let [u1, u2] = b_eigenbasis(data, profile, ds_tol)?;
    let b = &data.space.b_values;
    let matrix = Mat2::outer(&u1).scale_re(b[0]) + Mat2::outer(&u2).scale_re(b[1]);
    ObservableOperator::new(matrix)
}

/// Expectation value `(op psi, psi)`; real for Hermitian operators.
pub fn expectation(op: &ObservableOperator, state: &QLState) -> f64 {
    inner(&op.matrix.mul_vec(&state.amplitudes), &state.amplitudes).re
}

/// Frobenius norm of the commutator `[op1, op2]`; zero iff they commute.
pub fn commutator_norm(op1: &ObservableOperator, op2: &ObservableOperator) -> f64 {
    (op1.matrix * op2.matrix - op2.matrix * op1.matrix).frobenius_norm()
}

/// Density state: Hermitian, positive, unit-trace matrix together with its
/// Bloch vector. Pure states sit on the unit sphere, mixtures inside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityState {
    matrix: Mat2,
    bloch: [f64; 3],
}

impl DensityState {
    pub fn matrix(&self) -> &Mat2 {
        &self.matrix
    }

    pub fn bloch(&self) -> [f64; 3] {
        self.bloch
    }

    pub fn bloch_norm(&self) -> f64 {
        self.bloch.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    /// `tr(rho^2) = (1 + |r|^2) / 2`.
    pub fn purity(&self) -> f64 {
        (self.matrix * self.matrix).trace().re
    }
}

/// Project a pure state onto the Bloch sphere. The z-axis is aligned with the
/// a-basis: `r = (2 Re(psi1 conj(psi2)), 2 Im(psi1 conj(psi2)), |psi1|^2 - |psi2|^2)`.
pub fn to_bloch(state: &QLState) -> DensityState {
    let [psi1, psi2] = state.amplitudes;
    let cross = psi1 * psi2.conj();
    DensityState {
        matrix: Mat2::outer(&state.amplitudes),
        bloch: [
            2.0 * cross.re,
            2.0 * cross.im,
            psi1.norm_sqr() - psi2.norm_sqr(),
        ],
    }
}

/// Convex mixture of density states; Bloch vectors mix linearly.
pub fn mix(states: &[DensityState], weights: &[f64]) -> Result<DensityState, Error> {
    if states.is_empty() || states.len() != weights.len() {
        return Err(Error::BadWeights {
            reason: format!(
                "{} states but {} weights",
                states.len(),
                weights.len()
            ),
        });
    }
    if let Some(w) = weights.iter().find(|w| **w < 0.0) {
        return Err(Error::BadWeights {
            reason: format!("negative weight {w}"),
        });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::BadWeights {
            reason: format!("weights sum to {total}"),
        });
    }

    let mut matrix = Mat2::zero();
    let mut bloch = [0.0; 3];
    for (state, &w) in states.iter().zip(weights) {
        matrix = matrix + state.matrix.scale_re(w);
        for (r, s) in bloch.iter_mut().zip(state.bloch) {
            *r += w * s;
        }
    }
    Ok(DensityState { matrix, bloch })
}

/// True iff the two contexts map to the same complex amplitude within
/// [`COLLISION_TOL`] componentwise — the representation is not injective, so
/// distinct contexts with equal probabilistic data collide.
pub fn representation_collision(
    d1: &ContextualData,
    d2: &ContextualData,
    tol: &crate::contextual::Tolerances,
) -> Result<bool, Error> {
    let p1 = crate::contextual::interference_profile(d1, tol)?;
    let p2 = crate::contextual::interference_profile(d2, tol)?;
    let psi1 = build_amplitude(d1, &p1)?;
    let psi2 = build_amplitude(d2, &p2)?;
    Ok((0..2).all(|x| (psi1.amplitude(x) - psi2.amplitude(x)).norm() <= COLLISION_TOL))
}
