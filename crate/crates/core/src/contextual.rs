//! Contextual probability data for a pair of dichotomous observables and the
//! scalar interference analysis built on it.
//!
//! A context is described by its probabilistic image: marginals `pa`, `pb`
//! for the two reference observables plus the transition matrix `p(x|y)`
//! measured under the two filtration contexts. The central statistic is the
//! interference coefficient
//!
//! ```text
//! lambda(x) = (pa(x) - sum_y pb(y) p(x|y)) / (2 sqrt(prod_y pb(y) p(x|y)))
//! ```
//!
//! the normalized deviation of `pa` from the classical total-probability
//! prediction. `|lambda| <= 1` for both outcomes admits a circular phase
//! `lambda = cos(theta)`; `|lambda| > 1` for both a hyperbolic one
//! `|lambda| = cosh(theta)`; the mixed case is classified but carries no
//! single amplitude representation.

use serde::{Deserialize, Serialize};

use crate::Error;

/// Probability-sum tolerance for exact (analytic) inputs.
pub const ANALYTIC_PROB_TOL: f64 = 1e-12;
/// Looser probability-sum tolerance for frequency (empirical) inputs.
pub const EMPIRICAL_PROB_TOL: f64 = 1e-6;
/// Half-width of the band around |lambda| = 1 still classified trigonometric.
pub const CLASSIFICATION_EPS: f64 = 1e-9;
/// Interference denominators at or below this floor are degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;

/// Whether probabilities are exact inputs or frequency estimates; selects the
/// probability-sum tolerance used during validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Analytic,
    Empirical,
}

/// Tolerance bundle threaded through validation and analysis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Allowed deviation of probability sums from 1.
    pub prob_sum: f64,
    /// Band around |lambda| = 1 classified as trigonometric.
    pub classification_eps: f64,
    /// Denominator floor below which interference is undefined.
    pub degeneracy_floor: f64,
}

impl Tolerances {
    pub const fn analytic() -> Self {
        Self {
            prob_sum: ANALYTIC_PROB_TOL,
            classification_eps: CLASSIFICATION_EPS,
            degeneracy_floor: DEGENERACY_FLOOR,
        }
    }

    pub const fn empirical() -> Self {
        Self {
            prob_sum: EMPIRICAL_PROB_TOL,
            classification_eps: CLASSIFICATION_EPS,
            degeneracy_floor: DEGENERACY_FLOOR,
        }
    }

    pub const fn for_provenance(provenance: Provenance) -> Self {
        match provenance {
            Provenance::Analytic => Self::analytic(),
            Provenance::Empirical => Self::empirical(),
        }
    }
}

/// Outcome labels and the real values assigned to them. The values become the
/// operator spectra, so they must be distinct within each observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeSpace {
    pub a_labels: [String; 2],
    pub b_labels: [String; 2],
    pub a_values: [f64; 2],
    pub b_values: [f64; 2],
}

impl OutcomeSpace {
    pub fn new(
        a_labels: [&str; 2],
        b_labels: [&str; 2],
        a_values: [f64; 2],
        b_values: [f64; 2],
    ) -> Self {
        Self {
            a_labels: a_labels.map(String::from),
            b_labels: b_labels.map(String::from),
            a_values,
            b_values,
        }
    }

    /// Generic two-outcome space with spectra +1/-1.
    pub fn dichotomous_default() -> Self {
        Self::new(["x1", "x2"], ["y1", "y2"], [1.0, -1.0], [1.0, -1.0])
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.a_labels[0] == self.a_labels[1] {
            out.push(Violation::new(
                "space.a_labels",
                format!("a-labels are not distinct: {:?}", self.a_labels[0]),
                0.0,
            ));
        }
        if self.b_labels[0] == self.b_labels[1] {
            out.push(Violation::new(
                "space.b_labels",
                format!("b-labels are not distinct: {:?}", self.b_labels[0]),
                0.0,
            ));
        }
        if self.a_values[0] == self.a_values[1] {
            out.push(Violation::new(
                "space.a_values",
                format!("a-values are not distinct: {}", self.a_values[0]),
                0.0,
            ));
        }
        if self.b_values[0] == self.b_values[1] {
            out.push(Violation::new(
                "space.b_values",
                format!("b-values are not distinct: {}", self.b_values[0]),
                0.0,
            ));
        }
        out
    }
}

/// Transition probabilities `p(x|y)` measured under the two filtration
/// contexts, indexed `entries[x][y]`. Each column is a conditional
/// distribution and must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionMatrix {
    pub entries: [[f64; 2]; 2],
}

impl TransitionMatrix {
    pub fn new(entries: [[f64; 2]; 2]) -> Self {
        Self { entries }
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[x][y]
    }

    pub fn column(&self, y: usize) -> [f64; 2] {
        [self.entries[0][y], self.entries[1][y]]
    }

    pub fn column_sums(&self) -> [f64; 2] {
        [
            self.entries[0][0] + self.entries[1][0],
            self.entries[0][1] + self.entries[1][1],
        ]
    }

    pub fn row_sums(&self) -> [f64; 2] {
        [
            self.entries[0][0] + self.entries[0][1],
            self.entries[1][0] + self.entries[1][1],
        ]
    }

    pub fn validate(&self, tol: &Tolerances) -> Vec<Violation> {
        let mut out = Vec::new();
        for (y, sum) in self.column_sums().iter().enumerate() {
            if (sum - 1.0).abs() > tol.prob_sum {
                out.push(Violation::new(
                    format!("transitions.column_y{}", y + 1),
                    format!("column y{} sums to {}", y + 1, sum),
                    (sum - 1.0).abs(),
                ));
            }
        }
        for x in 0..2 {
            for y in 0..2 {
                let p = self.entries[x][y];
                if !(-tol.prob_sum..=1.0 + tol.prob_sum).contains(&p) {
                    out.push(Violation::new(
                        format!("transitions[{x}][{y}]"),
                        format!("p(x{}|y{}) = {} outside [0, 1]", x + 1, y + 1, p),
                        if p < 0.0 { -p } else { p - 1.0 },
                    ));
                }
            }
        }
        out
    }
}

/// Marginal distributions of the two observables under the context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContextProbabilities {
    pub pa: [f64; 2],
    pub pb: [f64; 2],
}

impl ContextProbabilities {
    pub fn new(pa: [f64; 2], pb: [f64; 2]) -> Self {
        Self { pa, pb }
    }

    pub fn validate(&self, tol: &Tolerances) -> Vec<Violation> {
        let mut out = Vec::new();
        for (name, pair) in [("pa", &self.pa), ("pb", &self.pb)] {
            let sum = pair[0] + pair[1];
            if (sum - 1.0).abs() > tol.prob_sum {
                out.push(Violation::new(
                    format!("marginals.{name}"),
                    format!("{name} sums to {sum}"),
                    (sum - 1.0).abs(),
                ));
            }
            for (i, &p) in pair.iter().enumerate() {
                if !(-tol.prob_sum..=1.0 + tol.prob_sum).contains(&p) {
                    out.push(Violation::new(
                        format!("marginals.{name}[{i}]"),
                        format!("{name}[{i}] = {p} outside [0, 1]"),
                        if p < 0.0 { -p } else { p - 1.0 },
                    ));
                }
            }
        }
        out
    }
}

/// The full probabilistic image of one context: outcome space, marginals and
/// transition matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextualData {
    pub context_id: String,
    pub space: OutcomeSpace,
    pub marginals: ContextProbabilities,
    pub transitions: TransitionMatrix,
}

impl ContextualData {
    pub fn new(
        context_id: impl Into<String>,
        space: OutcomeSpace,
        marginals: ContextProbabilities,
        transitions: TransitionMatrix,
    ) -> Self {
        Self {
            context_id: context_id.into(),
            space,
            marginals,
            transitions,
        }
    }

    pub fn pa(&self) -> &[f64; 2] {
        &self.marginals.pa
    }

    pub fn pb(&self) -> &[f64; 2] {
        &self.marginals.pb
    }
}

/// One invariant violation found during validation, with the size of the
/// deviation where meaningful.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
    pub magnitude: f64,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>, magnitude: f64) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
            magnitude,
        }
    }
}

/// Check every structural invariant of the data; the report is empty iff the
/// data is valid under the given tolerances.
pub fn validate_data(data: &ContextualData, tol: &Tolerances) -> Vec<Violation> {
    let mut out = data.space.validate();
    out.extend(data.marginals.validate(tol));
    out.extend(data.transitions.validate(tol));
    out
}

/// Per-outcome phase regime of the interference coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseKind {
    /// |lambda| <= 1: lambda = cos(theta), theta in [0, pi].
    Trigonometric,
    /// |lambda| > 1: |lambda| = cosh(theta), theta >= 0, sign kept aside.
    Hyperbolic,
}

/// Overall context classification from the two per-outcome regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Trigonometric,
    Hyperbolic,
    HyperTrigonometric,
}

/// Interference coefficients, phases and classification for one context.
///
/// `phases[x]` is `arccos(lambda)` in radians for trigonometric outcomes and
/// `arccosh(|lambda|) >= 0` for hyperbolic ones, with `signs[x] = sign(lambda)`
/// recorded separately so the hyperbolic phase stays single-valued.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceProfile {
    pub lambda: [f64; 2],
    pub phases: [f64; 2],
    pub signs: [f64; 2],
    pub kinds: [PhaseKind; 2],
    pub classification: Classification,
}

/// Classical total probability: `q(x) = sum_y pb(y) p(x|y)`.
pub fn classical_ftp(pb: &[f64; 2], transitions: &TransitionMatrix) -> [f64; 2] {
    [
        pb[0] * transitions.get(0, 0) + pb[1] * transitions.get(0, 1),
        pb[0] * transitions.get(1, 0) + pb[1] * transitions.get(1, 1),
    ]
}

/// The deterministic term `sum_y pb(y) p(x|y)` and the geometric mean
/// `sqrt(prod_y pb(y) p(x|y))` for one a-outcome.
fn ftp_terms(data: &ContextualData, x: usize) -> (f64, f64) {
    let pb = data.pb();
    let term1 = pb[0] * data.transitions.get(x, 0);
    let term2 = pb[1] * data.transitions.get(x, 1);
    (term1 + term2, (term1 * term2).sqrt())
}

/// Interference coefficient for one a-outcome.
///
/// The deterministic term is assembled first and subtracted once, so that
/// reconstructing the marginal from the returned coefficient round-trips at
/// machine precision.
pub fn interference_coefficient(
    data: &ContextualData,
    x: usize,
    tol: &Tolerances,
) -> Result<f64, Error> {
    let (classical, geo_mean) = ftp_terms(data, x);
    let denominator = 2.0 * geo_mean;
    // NaN (negative probabilities fed in unvalidated) lands here as well.
    if denominator.is_nan() || denominator <= tol.degeneracy_floor {
        return Err(Error::DegenerateDenominator {
            outcome: x,
            value: denominator,
            floor: tol.degeneracy_floor,
        });
    }
    Ok((data.pa()[x] - classical) / denominator)
}

/// Compute both coefficients, their phases and the context classification.
pub fn interference_profile(
    data: &ContextualData,
    tol: &Tolerances,
) -> Result<InterferenceProfile, Error> {
    let mut lambda = [0.0; 2];
    let mut phases = [0.0; 2];
    let mut signs = [1.0; 2];
    let mut kinds = [PhaseKind::Trigonometric; 2];

    for x in 0..2 {
        let l = interference_coefficient(data, x, tol)?;
        lambda[x] = l;
        signs[x] = if l < 0.0 { -1.0 } else { 1.0 };
        if l.abs() <= 1.0 + tol.classification_eps {
            kinds[x] = PhaseKind::Trigonometric;
            phases[x] = l.clamp(-1.0, 1.0).acos();
        } else {
            kinds[x] = PhaseKind::Hyperbolic;
            phases[x] = l.abs().acosh();
        }
    }

    let classification = match kinds {
        [PhaseKind::Trigonometric, PhaseKind::Trigonometric] => Classification::Trigonometric,
        [PhaseKind::Hyperbolic, PhaseKind::Hyperbolic] => Classification::Hyperbolic,
        _ => Classification::HyperTrigonometric,
    };

    Ok(InterferenceProfile {
        lambda,
        phases,
        signs,
        kinds,
        classification,
    })
}

/// True iff every transition probability exceeds `floor`: the strict
/// positivity that makes the observables mutually incompatible and the
/// interference analysis well defined.
pub fn check_incompatibility(transitions: &TransitionMatrix, floor: f64) -> bool {
    transitions
        .entries
        .iter()
        .flatten()
        .all(|&p| p > floor)
}

/// True iff the rows also sum to 1 within `tol` (columns do by construction).
pub fn is_doubly_stochastic(transitions: &TransitionMatrix, tol: f64) -> bool {
    transitions
        .row_sums()
        .iter()
        .all(|s| (s - 1.0).abs() <= tol)
}

/// Rebuild the `a`-marginal from a profile: classical total probability plus
/// the interference term `2 lambda(x) sqrt(prod_y pb(y) p(x|y))`.
pub fn reconstruct_marginal(
    profile: &InterferenceProfile,
    pb: &[f64; 2],
    transitions: &TransitionMatrix,
) -> [f64; 2] {
    let mut pa = [0.0; 2];
    for x in 0..2 {
        let term1 = pb[0] * transitions.get(x, 0);
        let term2 = pb[1] * transitions.get(x, 1);
        pa[x] = (term1 + term2) + 2.0 * profile.lambda[x] * (term1 * term2).sqrt();
    }
    pa
}
