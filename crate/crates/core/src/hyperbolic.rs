//! Split-complex arithmetic and the hyperbolic amplitude representation for
//! contexts whose interference coefficients exceed 1 in absolute value.
//!
//! The algebra is the two-dimensional commutative ring generated by `j` with
//! `j^2 = +1`; the squared modulus `u^2 - v^2` plays the role the usual
//! norm-square plays for complex amplitudes.

use serde::{Deserialize, Serialize};

use crate::contextual::{Classification, ContextualData, InterferenceProfile, PhaseKind};
use crate::Error;

/// A split-complex number `u + j v` with `j^2 = +1`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HyperbolicNumber {
    pub u: f64,
    pub v: f64,
}

impl HyperbolicNumber {
    pub const ZERO: Self = Self { u: 0.0, v: 0.0 };
    pub const ONE: Self = Self { u: 1.0, v: 0.0 };
    pub const J: Self = Self { u: 0.0, v: 1.0 };

    pub const fn new(u: f64, v: f64) -> Self {
        Self { u, v }
    }

    /// Hyperbolic squared modulus `u^2 - v^2`; negative for elements outside
    /// the "time-like" cone and zero exactly on the null cone `u = ±v`.
    pub fn modulus_sq(&self) -> f64 {
        self.u * self.u - self.v * self.v
    }

    pub fn conj(&self) -> Self {
        Self::new(self.u, -self.v)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::new(self.u * c, self.v * c)
    }
}

impl std::ops::Add for HyperbolicNumber {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.u + rhs.u, self.v + rhs.v)
    }
}

impl std::ops::Sub for HyperbolicNumber {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.u - rhs.u, self.v - rhs.v)
    }
}

impl std::ops::Neg for HyperbolicNumber {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.u, -self.v)
    }
}

impl std::ops::Mul for HyperbolicNumber {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::new(
            self.u * rhs.u + self.v * rhs.v,
            self.u * rhs.v + self.v * rhs.u,
        )
    }
}

impl std::ops::Mul<f64> for HyperbolicNumber {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        self.scale(rhs)
    }
}

/// Hyperbolic exponential `exp(j theta) = cosh(theta) + j sinh(theta)`, a
/// unit-modulus element for every real `theta`.
pub fn hyp_exp(theta: f64) -> HyperbolicNumber {
    HyperbolicNumber::new(theta.cosh(), theta.sinh())
}

/// Split-complex amplitude over the two a-outcomes for a hyperbolic context,
/// together with the phases and signs it was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperbolicAmplitude {
    pub amplitudes: [HyperbolicNumber; 2],
    pub phases: [f64; 2],
    pub signs: [f64; 2],
}

impl HyperbolicAmplitude {
    /// Squared moduli of both components.
    pub fn moduli_sq(&self) -> [f64; 2] {
        [self.amplitudes[0].modulus_sq(), self.amplitudes[1].modulus_sq()]
    }
}

/// Build the split-complex amplitude
///
/// ```text
/// psi(x) = sqrt(pb(y1) p(x|y1)) + sign(lambda(x)) exp(j theta(x)) sqrt(pb(y2) p(x|y2))
/// ```
///
/// whose squared modulus expands to the total-probability formula with the
/// hyperbolic interference term `2 sign(x) cosh(theta(x)) sqrt(..)`, i.e. it
/// reproduces `pa(x)` exactly.
pub fn build_hyperbolic_amplitude(
    data: &ContextualData,
    profile: &InterferenceProfile,
) -> Result<HyperbolicAmplitude, Error> {
    if profile.classification != Classification::Hyperbolic {
        return Err(Error::NotHyperbolic {
            found: profile.classification,
        });
    }
    debug_assert!(profile.kinds.iter().all(|k| *k == PhaseKind::Hyperbolic));

    let pb = data.pb();
    let mut amplitudes = [HyperbolicNumber::ZERO; 2];
    for x in 0..2 {
        let root1 = (pb[0] * data.transitions.get(x, 0)).sqrt();
        let root2 = (pb[1] * data.transitions.get(x, 1)).sqrt();
        let phase = hyp_exp(profile.phases[x]).scale(profile.signs[x]);
        amplitudes[x] = HyperbolicNumber::new(root1, 0.0) + phase.scale(root2);
    }
    Ok(HyperbolicAmplitude {
        amplitudes,
        phases: profile.phases,
        signs: profile.signs,
    })
}

/// Hyperbolic Born rule: the squared modulus of component `x`.
pub fn hyp_born(amp: &HyperbolicAmplitude, x: usize) -> f64 {
    amp.amplitudes[x].modulus_sq()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contextual::{
        interference_profile, ContextProbabilities, OutcomeSpace, Tolerances, TransitionMatrix,
    };

    fn hyperbolic_data() -> ContextualData {
        ContextualData::new(
            "hyp",
            OutcomeSpace::dichotomous_default(),
            ContextProbabilities::new([0.95, 0.05], [0.5, 0.5]),
            TransitionMatrix::new([[0.9, 0.1], [0.1, 0.9]]),
        )
    }

    #[test]
    fn multiplication_identities() {
        let z = HyperbolicNumber::new(0.7, -1.3);
        assert_eq!(HyperbolicNumber::ONE * z, z);
        assert_eq!(HyperbolicNumber::J * HyperbolicNumber::J, HyperbolicNumber::ONE);
        // Null-cone elements are zero divisors.
        let a = HyperbolicNumber::new(1.0, 1.0);
        let b = HyperbolicNumber::new(1.0, -1.0);
        assert_eq!(a * b, HyperbolicNumber::ZERO);
    }

    #[test]
    fn exp_identities() {
        assert_eq!(hyp_exp(0.0), HyperbolicNumber::ONE);
        let theta = 1.5f64.acosh();
        let e = hyp_exp(theta);
        assert!((e.u - 1.5).abs() < 1e-12);
        assert!((e.v - 1.25f64.sqrt()).abs() < 1e-12);
        assert!((e.modulus_sq() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn amplitude_reproduces_marginal() {
        let data = hyperbolic_data();
        let profile = interference_profile(&data, &Tolerances::analytic()).unwrap();
        let amp = build_hyperbolic_amplitude(&data, &profile).unwrap();

        assert!((hyp_born(&amp, 0) - 0.95).abs() < 1e-12);
        assert!((hyp_born(&amp, 1) - 0.05).abs() < 1e-12);
        assert!((hyp_born(&amp, 0) + hyp_born(&amp, 1) - 1.0).abs() < 1e-12);

        // Frozen component check: psi(x2) = sqrt(0.05) - exp(j acosh 1.5) sqrt(0.45).
        let expected = HyperbolicNumber::new(0.05f64.sqrt(), 0.0)
            - hyp_exp(1.5f64.acosh()).scale(0.45f64.sqrt());
        assert!((amp.amplitudes[1].u - expected.u).abs() < 1e-14);
        assert!((amp.amplitudes[1].v - expected.v).abs() < 1e-14);
    }

    #[test]
    fn trigonometric_context_is_rejected() {
        let data = ContextualData::new(
            "trig",
            OutcomeSpace::dichotomous_default(),
            ContextProbabilities::new([0.75, 0.25], [0.5, 0.5]),
            TransitionMatrix::new([[0.5, 0.5], [0.5, 0.5]]),
        );
        let profile = interference_profile(&data, &Tolerances::analytic()).unwrap();
        match build_hyperbolic_amplitude(&data, &profile) {
            Err(Error::NotHyperbolic { found }) => {
                assert_eq!(found, Classification::Trigonometric)
            }
            other => panic!("expected NotHyperbolic, got {other:?}"),
        }
    }

    #[test]
    fn collinear_degenerate_phase() {
        // theta = 0 with positive sign gives modulus^2 = (sqrt A + sqrt B)^2.
        let a = 0.3f64;
        let b = 0.2f64;
        let psi = HyperbolicNumber::new(a.sqrt(), 0.0) + hyp_exp(0.0).scale(b.sqrt());
        let expected = (a.sqrt() + b.sqrt()).powi(2);
        assert!((psi.modulus_sq() - expected).abs() < 1e-14);
    }

    #[test]
    fn unit_modulus_scaling() {
        // (cosh t + j sinh t) * c has modulus^2 = c^2.
        let c = 0.37;
        let z = hyp_exp(0.8).scale(c);
        assert!((z.modulus_sq() - c * c).abs() < 1e-14);
    }
}
