//! The analysis report: everything one context's pipeline produced, in a
//! stable JSON layout with full-precision numeric fields.

use serde::{Deserialize, Serialize};

use qlstat_core::complex_repr::{
    b_eigenbasis, born_probability, build_amplitude, build_amplitude_b_orthogonal, operator_a,
    operator_b, to_bloch,
};
use qlstat_core::contextual::{
    check_incompatibility, interference_profile, is_doubly_stochastic, validate_data,
    Classification, ContextualData, Provenance, Tolerances,
};
use qlstat_core::ensemble::StandardErrors;
use qlstat_core::hyperbolic::build_hyperbolic_amplitude;
use qlstat_core::linalg::inner;

use crate::errors::CliError;
use crate::io::{ComplexMatrixSchema, SpaceSchema};

/// Checksum and provenance of the input a report was computed from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
    pub provenance: Provenance,
}

/// Which amplitude representation the context admits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Representation {
    Complex,
    Hyperbolic,
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DataSection {
    pub pa: [f64; 2],
    pub pb: [f64; 2],
    pub transitions: [[f64; 2]; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Diagnostics {
    /// All transition probabilities strictly positive.
    pub incompatibility_ok: bool,
    pub doubly_stochastic: bool,
    pub doubly_stochastic_tolerance: f64,
    /// The second marginal recovered from the state in the b-eigenbasis,
    /// available when the operator representation exists.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_marginal_from_state: Option<[f64; 2]>,
    pub von_neumann_note: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub input: InputDigest,
    pub context_id: String,
    pub space: SpaceSchema,
    pub data: DataSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standard_errors: Option<StandardErrors>,
    pub classification: Classification,
    pub lambda: [f64; 2],
    pub theta: [f64; 2],
    pub signs: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sigma_lambda: Option<[f64; 2]>,
    pub representation: Representation,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub representation_note: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_re: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub psi_im: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub born: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyperbolic_u: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyperbolic_v: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_a: Option<ComplexMatrixSchema>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator_b: Option<ComplexMatrixSchema>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bloch: Option<[f64; 3]>,
    pub diagnostics: Diagnostics,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Everything `build_report` needs besides the data itself.
pub struct ReportRequest<'a> {
    pub data: &'a ContextualData,
    pub errors: Option<&'a StandardErrors>,
    pub sigma_lambda: Option<[f64; 2]>,
    pub provenance: Provenance,
    pub tolerances: Tolerances,
    pub allow_hyperbolic: bool,
    pub digest: InputDigest,
    pub seed: Option<u64>,
    pub von_neumann_note: String,
}

/// Run the full analysis pipeline on validated data and assemble the report.
///
/// Fails with the degeneracy exit class when the observables are not mutually
/// incompatible, and with the not-trigonometric class when the context has no
/// complex representation and `--allow-hyperbolic` was not given.
pub fn build_report(request: ReportRequest<'_>) -> Result<AnalysisReport, CliError> {
    let data = request.data;
    let tol = request.tolerances;

    let violations = validate_data(data, &tol);
    if !violations.is_empty() {
        return Err(CliError::schema(
            format!("input fails validation with {} violation(s)", violations.len()),
            violations,
        ));
    }
    if !check_incompatibility(&data.transitions, tol.degeneracy_floor) {
        return Err(CliError::degenerate(
            "a transition probability is zero: the observables are not mutually \
             incompatible and interference analysis is undefined",
        ));
    }

    let profile = interference_profile(data, &tol).map_err(CliError::from)?;

    // Empirical transition estimates never satisfy row sums exactly, so the
    // doubly-stochastic gate for the operator representation widens to three
    // combined standard errors of the worst row.
    let ds_tol = match (request.provenance, request.errors) {
        (Provenance::Empirical, Some(errors)) => {
            let row_sigma = |x: usize| -> f64 {
                (errors.transitions[x][0].powi(2) + errors.transitions[x][1].powi(2)).sqrt()
            };
            (3.0 * row_sigma(0).max(row_sigma(1))).max(1e-9)
        }
        _ => 1e-9,
    };
    let doubly_stochastic = is_doubly_stochastic(&data.transitions, ds_tol);
    // The orthogonality-branch state reproduces the b-marginal exactly only
    // when the row sums are exactly 1; frequency estimates are merely close,
    // so the diagnostic is restricted to the strict case.
    let strictly_doubly_stochastic = is_doubly_stochastic(&data.transitions, 1e-9);

    let mut report = AnalysisReport {
        input: request.digest,
        context_id: data.context_id.clone(),
        space: SpaceSchema::from_space(&data.space),
        data: DataSection {
            pa: *data.pa(),
            pb: *data.pb(),
            transitions: data.transitions.entries,
        },
        standard_errors: request.errors.cloned(),
        classification: profile.classification,
        lambda: profile.lambda,
        theta: profile.phases,
        signs: profile.signs,
        sigma_lambda: request.sigma_lambda,
        representation: Representation::None,
        representation_note: None,
        psi_re: None,
        psi_im: None,
        born: None,
        hyperbolic_u: None,
        hyperbolic_v: None,
        operator_a: None,
        operator_b: None,
        bloch: None,
        diagnostics: Diagnostics {
            incompatibility_ok: true,
            doubly_stochastic,
            doubly_stochastic_tolerance: ds_tol,
            b_marginal_from_state: None,
            von_neumann_note: request.von_neumann_note,
        },
        tolerances: tol,
        seed: request.seed,
    };

    match profile.classification {
        Classification::Trigonometric => {
            let psi = build_amplitude(data, &profile).map_err(CliError::from)?;
            report.representation = Representation::Complex;
            report.psi_re = Some([psi.amplitude(0).re, psi.amplitude(1).re]);
            report.psi_im = Some([psi.amplitude(0).im, psi.amplitude(1).im]);
            report.born = Some([born_probability(&psi, 0), born_probability(&psi, 1)]);
            report.bloch = Some(to_bloch(&psi).bloch());
            report.operator_a =
                Some(ComplexMatrixSchema::from_mat(operator_a(&data.space).matrix()));
            if doubly_stochastic {
                let b = operator_b(data, &profile, ds_tol).map_err(CliError::from)?;
                report.operator_b = Some(ComplexMatrixSchema::from_mat(b.matrix()));
            }
            if strictly_doubly_stochastic {
                let basis = b_eigenbasis(data, &profile, ds_tol).map_err(CliError::from)?;
                let branch_state =
                    build_amplitude_b_orthogonal(data, &profile, ds_tol).map_err(CliError::from)?;
                report.diagnostics.b_marginal_from_state = Some([
                    inner(branch_state.amplitudes(), &basis[0]).norm_sqr(),
                    inner(branch_state.amplitudes(), &basis[1]).norm_sqr(),
                ]);
            }
        }
        Classification::Hyperbolic => {
            if !request.allow_hyperbolic {
                return Err(CliError::not_trigonometric(
                    "context is hyperbolic (|lambda| > 1 for both outcomes); \
                     rerun with --allow-hyperbolic for the split-complex representation",
                ));
            }
            let amp = build_hyperbolic_amplitude(data, &profile).map_err(CliError::from)?;
            report.representation = Representation::Hyperbolic;
            report.hyperbolic_u = Some([amp.amplitudes[0].u, amp.amplitudes[1].u]);
            report.hyperbolic_v = Some([amp.amplitudes[0].v, amp.amplitudes[1].v]);
            report.born = Some(amp.moduli_sq());
            report.representation_note = Some(
                "split-complex amplitude over the algebra j^2 = +1; born entries are \
                 hyperbolic squared moduli"
                    .into(),
            );
        }
        Classification::HyperTrigonometric => {
            if !request.allow_hyperbolic {
                return Err(CliError::not_trigonometric(
                    "context is hyper-trigonometric (one outcome trigonometric, one \
                     hyperbolic); rerun with --allow-hyperbolic for the classification-only \
                     report",
                ));
            }
            report.representation = Representation::None;
            report.representation_note = Some(
                "hyper-trigonometric context: per-outcome coefficients and phases are \
                 reported, but no single amplitude representation exists for mixed \
                 phase regimes"
                    .into(),
            );
        }
    }

    Ok(report)
}

/// One-line human summary printed alongside a written report.
pub fn summarize(report: &AnalysisReport) -> String {
    let mut line = format!(
        "context `{}`: {:?}, lambda = [{:.6}, {:.6}]",
        report.context_id, report.classification, report.lambda[0], report.lambda[1]
    );
    if let Some(sigma) = report.sigma_lambda {
        line.push_str(&format!(" +- [{:.6}, {:.6}]", sigma[0], sigma[1]));
    }
    if let Some(born) = report.born {
        line.push_str(&format!(", born = [{:.6}, {:.6}]", born[0], born[1]));
    }
    line
}
