//! File schemas and loading: counts (JSON or CSV), probabilities, simulation
//! specs, Hamiltonian specs and states, plus atomic writes and input digests.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use qlstat_core::contextual::{
    ContextProbabilities, ContextualData, OutcomeSpace, Provenance, TransitionMatrix, Violation,
};
use qlstat_core::ensemble::{ContextTotals, CountTable, EnsembleSpec, FiltrationMode};
use qlstat_core::linalg::Mat2;

use crate::errors::CliError;

/// Outcome labels and values; omitted fields default to the generic
/// two-outcome space with spectra +1/-1.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceSchema {
    pub a_labels: [String; 2],
    pub b_labels: [String; 2],
    pub a_values: [f64; 2],
    pub b_values: [f64; 2],
}

impl Default for SpaceSchema {
    fn default() -> Self {
        Self::from_space(&OutcomeSpace::dichotomous_default())
    }
}

impl SpaceSchema {
    pub fn from_space(space: &OutcomeSpace) -> Self {
        Self {
            a_labels: space.a_labels.clone(),
            b_labels: space.b_labels.clone(),
            a_values: space.a_values,
            b_values: space.b_values,
        }
    }

    pub fn to_space(&self) -> OutcomeSpace {
        OutcomeSpace {
            a_labels: self.a_labels.clone(),
            b_labels: self.b_labels.clone(),
            a_values: self.a_values,
            b_values: self.b_values,
        }
    }
}

/// A complex 2x2 matrix as parallel real and imaginary parts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexMatrixSchema {
    pub re: [[f64; 2]; 2],
    pub im: [[f64; 2]; 2],
}

impl ComplexMatrixSchema {
    pub fn from_mat(m: &Mat2) -> Self {
        let mut re = [[0.0; 2]; 2];
        let mut im = [[0.0; 2]; 2];
        for i in 0..2 {
            for j in 0..2 {
                re[i][j] = m.e[i][j].re;
                im[i][j] = m.e[i][j].im;
            }
        }
        Self { re, im }
    }

    pub fn to_mat(&self) -> Mat2 {
        let mut m = Mat2::zero();
        for i in 0..2 {
            for j in 0..2 {
                m.e[i][j] = num_complex_new(self.re[i][j], self.im[i][j]);
            }
        }
        m
    }
}

fn num_complex_new(re: f64, im: f64) -> num_complex::Complex64 {
    num_complex::Complex64::new(re, im)
}

/// Counts under the context itself: both marginal measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextCounts {
    pub a: [u64; 2],
    pub b: [u64; 2],
}

/// Counts of the first observable under one filtration context.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiltrationCountsSchema {
    pub a: [u64; 2],
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsSection {
    pub context: ContextCounts,
    pub filtration_y1: FiltrationCountsSchema,
    pub filtration_y2: FiltrationCountsSchema,
}

/// Normative counts input: marginal counts under the context and transition
/// counts under both filtrations.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountsFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSchema>,
    pub counts: CountsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl CountsFile {
    pub fn from_table(
        table: &CountTable,
        space: &OutcomeSpace,
        context_id: Option<String>,
    ) -> Self {
        Self {
            context_id,
            space: Some(SpaceSchema::from_space(space)),
            counts: CountsSection {
                context: ContextCounts {
                    a: table.n_a,
                    b: table.n_b,
                },
                filtration_y1: FiltrationCountsSchema {
                    a: [table.n_a_given_y[0][0], table.n_a_given_y[1][0]],
                },
                filtration_y2: FiltrationCountsSchema {
                    a: [table.n_a_given_y[0][1], table.n_a_given_y[1][1]],
                },
            },
            seed: Some(table.seed),
        }
    }

    pub fn to_table(&self) -> CountTable {
        let c = &self.counts;
        CountTable {
            n_a: c.context.a,
            n_b: c.context.b,
            n_a_given_y: [
                [c.filtration_y1.a[0], c.filtration_y2.a[0]],
                [c.filtration_y1.a[1], c.filtration_y2.a[1]],
            ],
            totals: ContextTotals {
                context_a: c.context.a.iter().sum(),
                context_b: c.context.b.iter().sum(),
                filtration: [c.filtration_y1.a.iter().sum(), c.filtration_y2.a.iter().sum()],
            },
            seed: self.seed.unwrap_or(0),
        }
    }
}

/// Probabilities input: explicit marginals and transition matrix.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbabilitiesFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSchema>,
    pub pa: [f64; 2],
    pub pb: [f64; 2],
    /// `transitions[x][y] = p(x|y)`, columns summing to 1.
    pub transitions: [[f64; 2]; 2],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<Provenance>,
}

impl ProbabilitiesFile {
    pub fn to_data(&self) -> (ContextualData, Provenance) {
        let data = ContextualData::new(
            self.context_id.clone().unwrap_or_else(|| "context".into()),
            self.space.clone().unwrap_or_default().to_space(),
            ContextProbabilities::new(self.pa, self.pb),
            TransitionMatrix::new(self.transitions),
        );
        (data, self.provenance.unwrap_or(Provenance::Analytic))
    }
}

/// Simulation spec: hidden-variable joint table, disturbance kernel and
/// filtration mode, plus the outcome space used to analyze the samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpecFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceSchema>,
    /// `joint[x][y]`, summing to 1 over all four cells.
    pub joint: [[f64; 2]; 2],
    /// Column-stochastic kernel `q(x|y)` used by disturbing filtrations.
    pub disturbance: [[f64; 2]; 2],
    pub mode: FiltrationMode,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SimSpecFile {
    pub fn to_spec(&self) -> (EnsembleSpec, OutcomeSpace) {
        let spec = EnsembleSpec {
            context_id: self.context_id.clone().unwrap_or_else(|| "simulated".into()),
            joint: self.joint,
            disturbance: self.disturbance,
            mode: self.mode,
        };
        (spec, self.space.clone().unwrap_or_default().to_space())
    }
}

/// Hamiltonian spec: either an explicit Hermitian matrix, or a potential
/// polynomial plus the contextual data whose second-observable operator
/// supplies the kinetic part.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<ComplexMatrixSchema>,
    /// Ascending polynomial coefficients of the potential in the first
    /// observable's values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<ProbabilitiesFile>,
}

/// Any JSON object carrying a complex state as `psi_re`/`psi_im` arrays —
/// both explicit state files and analysis reports qualify.
#[derive(Debug, Clone, Deserialize)]
pub struct StateFile {
    pub psi_re: Option<[f64; 2]>,
    pub psi_im: Option<[f64; 2]>,
}

/// Input kinds accepted by `analyze`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum InputFormat {
    CountsJson,
    CountsCsv,
    ProbabilitiesJson,
}

/// A fully loaded analysis input.
pub enum LoadedInput {
    Counts {
        table: CountTable,
        space: OutcomeSpace,
        context_id: Option<String>,
        seed: Option<u64>,
    },
    Probabilities {
        data: ContextualData,
        provenance: Provenance,
    },
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, &e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub fn parse_json<T: serde::de::DeserializeOwned>(
    path: &Path,
    bytes: &[u8],
) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(|e| CliError::parse(path, e))
}

/// Load an analysis input, auto-detecting the format unless one is forced:
/// `.csv` means counts rows, a JSON object with a `counts` key is a counts
/// file, one with a `pa` key is a probabilities file.
pub fn load_input(
    path: &Path,
    bytes: &[u8],
    format: Option<InputFormat>,
) -> Result<LoadedInput, CliError> {
    let format = match format {
        Some(f) => f,
        None => detect_format(path, bytes)?,
    };
    match format {
        InputFormat::CountsCsv => {
            let table = parse_counts_csv(path, bytes)?;
            Ok(LoadedInput::Counts {
                table,
                space: OutcomeSpace::dichotomous_default(),
                context_id: None,
                seed: None,
            })
        }
        InputFormat::CountsJson => {
            let file: CountsFile = parse_json(path, bytes)?;
            let table = file.to_table();
            Ok(LoadedInput::Counts {
                space: file
                    .space
                    .clone()
                    .unwrap_or_default()
                    .to_space(),
                context_id: file.context_id.clone(),
                seed: file.seed,
                table,
            })
        }
        InputFormat::ProbabilitiesJson => {
            let file: ProbabilitiesFile = parse_json(path, bytes)?;
            let (data, provenance) = file.to_data();
            Ok(LoadedInput::Probabilities { data, provenance })
        }
    }
}

fn detect_format(path: &Path, bytes: &[u8]) -> Result<InputFormat, CliError> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        return Ok(InputFormat::CountsCsv);
    }
    let value: serde_json::Value = serde_json::from_slice(bytes)
        .map_err(|e| CliError::parse(path, e))?;
    let object = value
        .as_object()
        .ok_or_else(|| CliError::parse(path, "expected a JSON object"))?;
    if object.contains_key("counts") {
        Ok(InputFormat::CountsJson)
    } else if object.contains_key("pa") {
        Ok(InputFormat::ProbabilitiesJson)
    } else {
        Err(CliError::parse(
            path,
            "cannot detect input format: expected a `counts` or `pa` key (or use --input-format)",
        ))
    }
}

#[derive(Debug, Deserialize)]
struct CountsCsvRow {
    context: String,
    observable: String,
    outcome: String,
    count: i64,
}

/// Parse the eight-row counts CSV: columns context, observable, outcome,
/// count, with contexts `context`/`filtration_y1`/`filtration_y2`, observable
/// `a` or `b`, and outcomes `x1`/`x2`/`y1`/`y2`.
fn parse_counts_csv(path: &Path, bytes: &[u8]) -> Result<CountTable, CliError> {
    let mut reader = csv::Reader::from_reader(bytes);
    let mut cells: [[Option<u64>; 2]; 4] = [[None; 2]; 4]; // [slot][outcome]
    const SLOT_NAMES: [&str; 4] = [
        "context/a",
        "context/b",
        "filtration_y1/a",
        "filtration_y2/a",
    ];

    for (i, row) in reader.deserialize::<CountsCsvRow>().enumerate() {
        let line = i + 2; // header is line 1
        let row = row.map_err(|e| {
            CliError::schema(
                format!("{}: row {line}: {e}", path.display()),
                vec![Violation::new(format!("row {line}"), e.to_string(), 0.0)],
            )
        })?;
        if row.count < 0 {
            return Err(CliError::schema(
                format!(
                    "{}: row {line}: negative count {}",
                    path.display(),
                    row.count
                ),
                vec![Violation::new(
                    format!("row {line}"),
                    format!("negative count {}", row.count),
                    -row.count as f64,
                )],
            ));
        }
        let slot = match (row.context.as_str(), row.observable.as_str()) {
            ("context", "a") => 0,
            ("context", "b") => 1,
            ("filtration_y1", "a") => 2,
            ("filtration_y2", "a") => 3,
            _ => {
                return Err(CliError::schema(
                    format!(
                        "{}: row {line}: unsupported context/observable pair `{}`/`{}`",
                        path.display(),
                        row.context,
                        row.observable
                    ),
                    vec![Violation::new(
                        format!("row {line}"),
                        "unsupported context/observable pair".to_string(),
                        0.0,
                    )],
                ));
            }
        };
        let expected = if row.observable == "a" { ["x1", "x2"] } else { ["y1", "y2"] };
        let outcome = expected
            .iter()
            .position(|o| *o == row.outcome)
            .ok_or_else(|| {
                CliError::schema(
                    format!(
                        "{}: row {line}: unknown outcome `{}` for observable `{}`",
                        path.display(),
                        row.outcome,
                        row.observable
                    ),
                    vec![Violation::new(
                        format!("row {line}"),
                        "unknown outcome".to_string(),
                        0.0,
                    )],
                )
            })?;
        if cells[slot][outcome].is_some() {
            return Err(CliError::schema(
                format!(
                    "{}: row {line}: duplicate cell {}[{}]",
                    path.display(),
                    SLOT_NAMES[slot],
                    row.outcome
                ),
                vec![Violation::new(
                    format!("row {line}"),
                    "duplicate cell".to_string(),
                    0.0,
                )],
            ));
        }
        cells[slot][outcome] = Some(row.count as u64);
    }

    let mut filled = [[0u64; 2]; 4];
    for (slot, pair) in cells.iter().enumerate() {
        for (outcome, cell) in pair.iter().enumerate() {
            filled[slot][outcome] = cell.ok_or_else(|| {
                CliError::schema(
                    format!(
                        "{}: missing cell {}[{}]",
                        path.display(),
                        SLOT_NAMES[slot],
                        outcome + 1
                    ),
                    vec![Violation::new(SLOT_NAMES[slot], "missing cell", 0.0)],
                )
            })?;
        }
    }

    Ok(CountTable {
        n_a: filled[0],
        n_b: filled[1],
        n_a_given_y: [
            [filled[2][0], filled[3][0]],
            [filled[2][1], filled[3][1]],
        ],
        totals: ContextTotals {
            context_a: filled[0].iter().sum(),
            context_b: filled[1].iter().sum(),
            filtration: [filled[2].iter().sum(), filled[3].iter().sum()],
        },
        seed: 0,
    })
}

/// Write through a temporary sibling and rename, so partially written output
/// never lands at the destination path.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".into(),
    });
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, &e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, &e))
}

/// Serialize as pretty JSON with a trailing newline. serde_json emits the
/// shortest decimal that round-trips each f64, so numeric fields are
/// preserved exactly across serialize/load cycles.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serialization cannot fail");
    bytes.push(b'\n');
    bytes
}
