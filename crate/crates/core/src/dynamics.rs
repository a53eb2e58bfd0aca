//! State evolution in the two-dimensional complex state space: a quadratic
//! Hamiltonian built from the observable operators, exact linear evolution
//! via the spectral form of `exp(-iHt)`, stationary states, superpositions,
//! and norm-preserving nonlinear step maps.

use num_complex::Complex64;

use crate::complex_repr::{ObservableOperator, QLState};
use crate::contextual::OutcomeSpace;
use crate::linalg::{add, inner, norm, scale, Mat2, Vec2};
use crate::Error;

/// Norm tolerance for linear trajectories.
pub const LINEAR_NORM_TOL: f64 = 1e-10;
/// Norm tolerance for accepted nonlinear trajectories (the contract a
/// supplied step map must satisfy).
pub const NONLINEAR_NORM_TOL: f64 = 1e-8;
/// Orthogonality tolerance for superposition inputs.
pub const ORTHOGONALITY_TOL: f64 = 1e-10;

/// Self-adjoint generator of the evolution, in units where hbar = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hamiltonian {
    matrix: Mat2,
}

impl Hamiltonian {
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
}

/// Evaluate a polynomial given by ascending coefficients.
fn eval_polynomial(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Assemble `H = b^2 / 2 + V(a)` where `V` is a polynomial in the first
/// observable, hence diagonal in the a-basis.
pub fn build_hamiltonian(
    b_op: &ObservableOperator,
    potential_coeffs: &[f64],
    space: &OutcomeSpace,
) -> Hamiltonian {
    let b = *b_op.matrix();
    let kinetic = (b * b).scale_re(0.5);
    let potential = Mat2::diag_re(
        eval_polynomial(potential_coeffs, space.a_values[0]),
        eval_polynomial(potential_coeffs, space.a_values[1]),
    );
    // Hermitian by construction: b^2 is Hermitian and the potential is real
    // diagonal.
    Hamiltonian {
        matrix: kinetic + potential,
    }
}

/// Propagator `exp(-iHt)` in spectral form, exact for Hermitian 2x2.
fn propagator(h: &Hamiltonian, t: f64) -> Mat2 {
    let eig = h.matrix.eigh();
    let mut u = Mat2::zero();
    for (j, &mu) in eig.values.iter().enumerate() {
        let phase = Complex64::from_polar(1.0, -mu * t);
        u = u + Mat2::outer(&eig.vectors[j]).scale(phase);
    }
    u
}

/// Evolve a state for time `t` under the linear Schrödinger equation
/// `i dpsi/dt = H psi`, using the exact matrix exponential.
pub fn evolve_linear(h: &Hamiltonian, psi0: &QLState, t: f64) -> QLState {
    let amplitudes = propagator(h, t).mul_vec(psi0.amplitudes());
    QLState::with_norm_tolerance(amplitudes, LINEAR_NORM_TOL)
        .expect("unitary propagation preserves the norm")
}

/// Eigenpairs of the Hamiltonian, sorted by ascending eigenvalue.
#[derive(Debug, Clone)]
pub struct StationaryStates {
    pub eigenpairs: [(f64, QLState); 2],
    /// Set when the spectrum is degenerate and the eigenbasis is an arbitrary
    /// orthonormal choice.
    pub degenerate: bool,
}

/// Orthonormal stationary states `H psi_j = mu_j psi_j`.
pub fn stationary_states(h: &Hamiltonian) -> StationaryStates {
    let eig = h.matrix.eigh();
    let states = eig.vectors.map(|v| {
        QLState::with_norm_tolerance(v, LINEAR_NORM_TOL)
            .expect("eigenvectors are normalized")
    });
    let [s0, s1] = states;
    StationaryStates {
        eigenpairs: [(eig.values[0], s0), (eig.values[1], s1)],
        degenerate: eig.degenerate,
    }
}

/// Superposition `k1 psi1 + k2 psi2` of two orthonormal states with
/// `|k1|^2 + |k2|^2 = 1`. The result is renormalized, a no-op up to rounding
/// for exactly orthonormal inputs.
pub fn superpose(
    psi1: &QLState,
    psi2: &QLState,
    k1: Complex64,
    k2: Complex64,
) -> Result<QLState, Error> {
    let overlap = inner(psi1.amplitudes(), psi2.amplitudes()).norm();
    if overlap > ORTHOGONALITY_TOL {
        return Err(Error::NotOrthonormal { overlap });
    }
    let coeff_norm = k1.norm_sqr() + k2.norm_sqr();
    if (coeff_norm - 1.0).abs() > 1e-12 {
        return Err(Error::BadCoefficients { norm: coeff_norm });
    }
    let raw = add(
        &scale(psi1.amplitudes(), k1),
        &scale(psi2.amplitudes(), k2),
    );
    let n = norm(&raw);
    QLState::new(scale(&raw, Complex64::new(1.0 / n, 0.0)))
}

/// Sampled evolution: states at increasing times, each within the norm
/// contract of the evolution that produced it.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<QLState>,
}

impl Trajectory {
    /// Largest deviation of any sampled norm from 1.
    pub fn norm_drift(&self) -> f64 {
        self.states
            .iter()
            .map(|s| (s.norm() - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Sample the linear evolution at `n_steps + 1` uniformly spaced times in
/// `[0, t_final]`, each computed from the exact propagator at that time.
pub fn sample_linear(h: &Hamiltonian, psi0: &QLState, t_final: f64, n_steps: usize) -> Trajectory {
    let n = n_steps.max(1);
    let mut times = Vec::with_capacity(n + 1);
    let mut states = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = t_final * k as f64 / n as f64;
        times.push(t);
        states.push(evolve_linear(h, psi0, t));
    }
    Trajectory { times, states }
}

/// Iterate a caller-supplied step map `psi -> step(psi, dt)`, enforcing the
/// norm-preservation contract after every step. Maps that drift beyond
/// [`NONLINEAR_NORM_TOL`] are rejected with [`Error::NormViolation`].
pub fn evolve_nonlinear<F>(
    mut step_map: F,
    psi0: &QLState,
    dt: f64,
    n_steps: usize,
) -> Result<Trajectory, Error>
where
    F: FnMut(&Vec2, f64) -> Vec2,
{
    let mut times = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    times.push(0.0);
    states.push(*psi0);

    let mut amplitudes = *psi0.amplitudes();
    for step in 1..=n_steps {
        amplitudes = step_map(&amplitudes, dt);
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NONLINEAR_NORM_TOL {
            return Err(Error::NormViolation { step, norm: n });
        }
        times.push(step as f64 * dt);
        states.push(QLState::with_norm_tolerance(amplitudes, NONLINEAR_NORM_TOL)?);
    }
    Ok(Trajectory { times, states })
}

/// One exact linear step `psi -> exp(-iH dt) psi`, packaged as a step map.
pub fn linear_step_map(h: &Hamiltonian) -> impl Fn(&Vec2, f64) -> Vec2 + '_ {
    move |amps, dt| propagator(h, dt).mul_vec(amps)
}

/// Reference nonlinear map: each component picks up a phase proportional to
/// its own intensity, `psi(x) -> exp(-i g |psi(x)|^2 dt) psi(x)`. Unimodular
/// factors preserve both the norm and the Born probabilities.
pub fn phase_rotation_map(g: f64) -> impl Fn(&Vec2, f64) -> Vec2 {
    move |amps, dt| {
        [
            amps[0] * Complex64::from_polar(1.0, -g * amps[0].norm_sqr() * dt),
            amps[1] * Complex64::from_polar(1.0, -g * amps[1].norm_sqr() * dt),
        ]
    }
}
