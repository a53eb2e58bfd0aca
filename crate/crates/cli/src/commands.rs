//! The four subcommands: analyze, simulate, evolve, sweep.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::{Deserialize, Serialize};

use qlstat_core::complex_repr::{born_probability, expectation, ObservableOperator, QLState};
use qlstat_core::contextual::{
    interference_profile, validate_data, ContextProbabilities, ContextualData, OutcomeSpace,
    Provenance, Tolerances, TransitionMatrix,
};
use qlstat_core::dynamics::{build_hamiltonian, sample_linear, Hamiltonian};
use qlstat_core::ensemble::{
    delta_method_sigma_lambda, estimate_data, two_scale_collect, FiltrationMode,
};

use crate::errors::CliError;
use crate::io::{
    atomic_write, load_input, parse_json, read_bytes, sha256_hex, to_json_bytes,
    ComplexMatrixSchema, CountsFile, HamiltonianFile, InputFormat, LoadedInput,
    ProbabilitiesFile, SimSpecFile, StateFile,
};
use crate::report::{build_report, summarize, AnalysisReport, InputDigest, ReportRequest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

fn write_or_print(output: Option<&Path>, bytes: &[u8], summary: Option<&str>) -> Result<(), CliError> {
    match output {
        Some(path) => {
            atomic_write(path, bytes)?;
            if let Some(line) = summary {
                println!("{line}");
            }
            println!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{}", String::from_utf8_lossy(bytes));
            Ok(())
        }
    }
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Input file: counts (JSON or CSV) or probabilities (JSON).
    #[arg(long)]
    pub input: PathBuf,

    /// Force the input format instead of auto-detecting it.
    #[arg(long, value_enum)]
    pub input_format: Option<InputFormat>,

    /// Report destination; the report goes to stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Report format: full JSON or a flat CSV summary row.
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,

    /// Override the probability-sum tolerance for this input.
    #[arg(long)]
    pub tolerance: Option<f64>,

    /// Produce split-complex or classification-only reports for
    /// non-trigonometric contexts instead of failing with exit code 4.
    #[arg(long)]
    pub allow_hyperbolic: bool,
}

const SINGLE_CONTEXT_NOTE: &str = "single-context data: context-independence of the transition \
     probabilities is assumed, not testable here; simulate several contexts sharing a kernel to \
     test it";

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<(), CliError> {
    let bytes = read_bytes(&args.input)?;
    let sha256 = sha256_hex(&bytes);
    let input = load_input(&args.input, &bytes, args.input_format)?;

    let (data, errors, sigma_lambda, provenance, seed) = match input {
        LoadedInput::Counts {
            table,
            space,
            context_id,
            seed,
        } => {
            let violations = table.validate();
            if !violations.is_empty() {
                return Err(CliError::schema(
                    format!("{}: inconsistent counts", args.input.display()),
                    violations,
                ));
            }
            let (mut data, errors) = estimate_data(&table, &space).map_err(CliError::from)?;
            if let Some(id) = context_id {
                data.context_id = id;
            }
            let sigma = delta_method_sigma_lambda(&data, &errors, &Tolerances::empirical()).ok();
            (data, Some(errors), sigma, Provenance::Empirical, seed)
        }
        LoadedInput::Probabilities { data, provenance } => (data, None, None, provenance, None),
    };

    let mut tolerances = Tolerances::for_provenance(provenance);
    if let Some(t) = args.tolerance {
        tolerances.prob_sum = t;
    }

    let report = build_report(ReportRequest {
        data: &data,
        errors: errors.as_ref(),
        sigma_lambda,
        provenance,
        tolerances,
        allow_hyperbolic: args.allow_hyperbolic,
        digest: InputDigest {
            path: args.input.display().to_string(),
            sha256,
            provenance,
        },
        seed,
        von_neumann_note: SINGLE_CONTEXT_NOTE.into(),
    })?;

    let summary = summarize(&report);
    let bytes = match args.format {
        OutputFormat::Json => to_json_bytes(&report),
        OutputFormat::Csv => reports_to_csv(&[(None, &report)])?,
    };
    write_or_print(args.output.as_deref(), &bytes, Some(&summary))
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Simulation spec file (joint table, disturbance kernel, mode).
    #[arg(long)]
    pub spec: PathBuf,

    /// Observations per sampling stage (and per coarse step).
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,

    /// Seed; defaults to the spec file's seed, then 0.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Number of coarse time steps to collect.
    #[arg(long, default_value_t = 1)]
    pub steps: usize,

    /// Combined counts + analysis report destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Also write the raw counts alone, in the counts-json input schema
    /// (single-step runs only).
    #[arg(long)]
    pub counts_output: Option<PathBuf>,

    /// Report format: full JSON or one flat CSV row per step.
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,

    /// Allow non-trigonometric contexts in the analysis stage.
    #[arg(long)]
    pub allow_hyperbolic: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimulationStep {
    pub step: usize,
    pub counts: CountsFile,
    pub analysis: AnalysisReport,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub samples: u64,
    pub seed: u64,
    pub steps: Vec<SimulationStep>,
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let bytes = read_bytes(&args.spec)?;
    let sha256 = sha256_hex(&bytes);
    let file: SimSpecFile = parse_json(&args.spec, &bytes)?;
    let (spec, space) = file.to_spec();

    let violations: Vec<_> = spec
        .validate()
        .into_iter()
        .chain(space.validate())
        .collect();
    if !violations.is_empty() {
        return Err(CliError::schema(
            format!("{}: invalid simulation spec", args.spec.display()),
            violations,
        ));
    }
    if args.steps == 0 {
        return Err(CliError::invalid("--steps must be at least 1"));
    }
    if args.counts_output.is_some() && args.steps != 1 {
        return Err(CliError::invalid(
            "--counts-output applies to single-step runs only",
        ));
    }

    let seed = args.seed.or(file.seed).unwrap_or(0);
    let mode_note = match spec.mode {
        FiltrationMode::Disturbing => {
            "disturbing mode: filtration resamples the first observable from the kernel, so \
             transition probabilities depend only on the filtration outcome and \
             context-independence holds by construction"
        }
        FiltrationMode::NonDisturbing => {
            "non-disturbing mode: transition probabilities inherit the joint's conditionals \
             and may depend on the preceding context"
        }
    };

    let collected = two_scale_collect(&spec, &space, args.steps, args.samples, seed)
        .map_err(CliError::from)?;

    let mut steps = Vec::with_capacity(collected.len());
    let mut summaries = Vec::with_capacity(collected.len());
    for step in &collected {
        let exp = &step.experiment;
        let analysis = build_report(ReportRequest {
            data: &exp.data,
            errors: Some(&exp.errors),
            sigma_lambda: Some(exp.sigma_lambda),
            provenance: Provenance::Empirical,
            tolerances: Tolerances::empirical(),
            allow_hyperbolic: args.allow_hyperbolic,
            digest: InputDigest {
                path: args.spec.display().to_string(),
                sha256: sha256.clone(),
                provenance: Provenance::Empirical,
            },
            seed: Some(seed),
            von_neumann_note: mode_note.into(),
        })?;
        summaries.push(format!("step {}: {}", step.step, summarize(&analysis)));
        steps.push(SimulationStep {
            step: step.step,
            counts: CountsFile::from_table(&exp.counts, &space, Some(spec.context_id.clone())),
            analysis,
        });
    }

    if let Some(path) = &args.counts_output {
        atomic_write(path, &to_json_bytes(&steps[0].counts))?;
        println!("wrote {}", path.display());
    }

    let output = SimulationOutput {
        samples: args.samples,
        seed,
        steps,
    };
    let bytes = match args.format {
        OutputFormat::Json => to_json_bytes(&output),
        OutputFormat::Csv => {
            let rows: Vec<_> = output
                .steps
                .iter()
                .map(|s| (Some(s.step), &s.analysis))
                .collect();
            reports_to_csv(&rows)?
        }
    };
    write_or_print(args.output.as_deref(), &bytes, Some(&summaries.join("\n")))
}

// ---------------------------------------------------------------------------
// evolve

#[derive(Debug, Args)]
pub struct EvolveArgs {
    /// State file or analysis report carrying `psi_re`/`psi_im`.
    #[arg(long)]
    pub state: PathBuf,

    /// Hamiltonian spec: `{"matrix": {re, im}}`, or `{"potential": [..],
    /// "source": <probabilities object>}`.
    #[arg(long)]
    pub hamiltonian: PathBuf,

    /// Final time of the sampled trajectory.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t_final: f64,

    /// Number of sample intervals (the trajectory has steps + 1 points).
    #[arg(long, default_value_t = 100)]
    pub steps: usize,

    /// Trajectory destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,

    /// Output format: full JSON or one CSV row per sample.
    #[arg(long, value_enum, default_value = "json")]
    pub format: OutputFormat,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrajectoryReport {
    pub hamiltonian: ComplexMatrixSchema,
    pub times: Vec<f64>,
    pub psi_re: Vec<[f64; 2]>,
    pub psi_im: Vec<[f64; 2]>,
    pub born: Vec<[f64; 2]>,
    pub energy: Vec<f64>,
    pub norm_drift: f64,
}

fn load_state(path: &Path) -> Result<QLState, CliError> {
    let bytes = read_bytes(path)?;
    let file: StateFile = parse_json(path, &bytes)?;
    let (re, im) = match (file.psi_re, file.psi_im) {
        (Some(re), Some(im)) => (re, im),
        _ => {
            return Err(CliError::invalid(format!(
                "{}: no complex amplitude found (psi_re/psi_im); non-trigonometric reports \
                 carry none",
                path.display()
            )));
        }
    };
    QLState::new([
        num_complex::Complex64::new(re[0], im[0]),
        num_complex::Complex64::new(re[1], im[1]),
    ])
    .map_err(CliError::from)
}

fn load_hamiltonian(path: &Path) -> Result<Hamiltonian, CliError> {
    let bytes = read_bytes(path)?;
    let file: HamiltonianFile = parse_json(path, &bytes)?;
    match (&file.matrix, &file.potential, &file.source) {
        (Some(matrix), None, None) => {
            Hamiltonian::new(matrix.to_mat()).map_err(CliError::from)
        }
        (None, Some(potential), Some(source)) => {
            let (data, _) = source.to_data();
            let tol = Tolerances::analytic();
            let violations = validate_data(&data, &tol);
            if !violations.is_empty() {
                return Err(CliError::schema(
                    format!("{}: invalid hamiltonian source data", path.display()),
                    violations,
                ));
            }
            let profile = interference_profile(&data, &tol).map_err(CliError::from)?;
            let b = qlstat_core::complex_repr::operator_b(&data, &profile, 1e-9)
                .map_err(CliError::from)?;
            Ok(build_hamiltonian(&b, potential, &data.space))
        }
        _ => Err(CliError::invalid(format!(
            "{}: provide either `matrix`, or `potential` together with `source`",
            path.display()
        ))),
    }
}

pub fn cmd_evolve(args: &EvolveArgs) -> Result<(), CliError> {
    if args.t_final < 0.0 {
        return Err(CliError::invalid("--t-final must be nonnegative"));
    }
    let psi0 = load_state(&args.state)?;
    let hamiltonian = load_hamiltonian(&args.hamiltonian)?;
    let h_op = ObservableOperator::new(*hamiltonian.matrix()).map_err(CliError::from)?;

    let trajectory = sample_linear(&hamiltonian, &psi0, args.t_final, args.steps);
    let mut report = TrajectoryReport {
        hamiltonian: ComplexMatrixSchema::from_mat(hamiltonian.matrix()),
        times: trajectory.times.clone(),
        psi_re: Vec::with_capacity(trajectory.states.len()),
        psi_im: Vec::with_capacity(trajectory.states.len()),
        born: Vec::with_capacity(trajectory.states.len()),
        energy: Vec::with_capacity(trajectory.states.len()),
        norm_drift: trajectory.norm_drift(),
    };
    for state in &trajectory.states {
        report.psi_re.push([state.amplitude(0).re, state.amplitude(1).re]);
        report.psi_im.push([state.amplitude(0).im, state.amplitude(1).im]);
        report.born.push([born_probability(state, 0), born_probability(state, 1)]);
        report.energy.push(expectation(&h_op, state));
    }

    let summary = format!(
        "evolved to t = {} in {} samples; norm drift {:.3e}; final born = [{:.6}, {:.6}]",
        args.t_final,
        report.times.len(),
        report.norm_drift,
        report.born.last().unwrap()[0],
        report.born.last().unwrap()[1],
    );
    let bytes = match args.format {
        OutputFormat::Json => to_json_bytes(&report),
        OutputFormat::Csv => trajectory_to_csv(&report)?,
    };
    write_or_print(args.output.as_deref(), &bytes, Some(&summary))
}

fn trajectory_to_csv(report: &TrajectoryReport) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "t", "psi_re_x1", "psi_im_x1", "psi_re_x2", "psi_im_x2", "born_x1", "born_x2",
            "energy",
        ])
        .map_err(|e| CliError::invalid(e.to_string()))?;
    for (k, &t) in report.times.iter().enumerate() {
        writer
            .write_record([
                format!("{t}"),
                format!("{}", report.psi_re[k][0]),
                format!("{}", report.psi_im[k][0]),
                format!("{}", report.psi_re[k][1]),
                format!("{}", report.psi_im[k][1]),
                format!("{}", report.born[k][0]),
                format!("{}", report.born[k][1]),
                format!("{}", report.energy[k]),
            ])
            .map_err(|e| CliError::invalid(e.to_string()))?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::invalid(e.to_string()))
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum GridKind {
    /// Sweep the phase of the first outcome; the marginal follows from the
    /// interference formula.
    Theta,
    /// Sweep the first outcome's marginal directly.
    Pa,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Probabilities file supplying the fixed pb and transitions.
    #[arg(long, conflicts_with_all = ["pb", "transitions"])]
    pub input: Option<PathBuf>,

    /// Fixed second-observable marginal, e.g. `0.5,0.5`.
    #[arg(long, requires = "transitions")]
    pub pb: Option<String>,

    /// Fixed transition matrix rows by first-observable outcome, columns by
    /// filtration: `p11,p12;p21,p22`.
    #[arg(long, requires = "pb")]
    pub transitions: Option<String>,

    #[arg(long, value_enum)]
    pub grid: GridKind,

    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub from: f64,

    /// Grid end; defaults to pi for theta grids and 1 for marginal grids.
    #[arg(long, allow_negative_numbers = true)]
    pub to: Option<f64>,

    #[arg(long, default_value_t = 50)]
    pub points: usize,

    /// CSV destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_pair(text: &str, what: &str) -> Result<[f64; 2], CliError> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(CliError::invalid(format!(
            "{what}: expected two comma-separated numbers, got `{text}`"
        )));
    }
    let mut out = [0.0; 2];
    for (slot, part) in out.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|e| CliError::invalid(format!("{what}: `{part}`: {e}")))?;
    }
    Ok(out)
}

fn parse_matrix(text: &str) -> Result<[[f64; 2]; 2], CliError> {
    let rows: Vec<&str> = text.split(';').map(str::trim).collect();
    if rows.len() != 2 {
        return Err(CliError::invalid(format!(
            "--transitions: expected two `;`-separated rows, got `{text}`"
        )));
    }
    Ok([
        parse_pair(rows[0], "--transitions row 1")?,
        parse_pair(rows[1], "--transitions row 2")?,
    ])
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<(), CliError> {
    let (pb, transitions, space) = match (&args.input, &args.pb, &args.transitions) {
        (Some(path), None, None) => {
            let bytes = read_bytes(path)?;
            let file: ProbabilitiesFile = parse_json(path, &bytes)?;
            let (data, _) = file.to_data();
            (*data.pb(), data.transitions, data.space)
        }
        (None, Some(pb), Some(transitions)) => (
            parse_pair(pb, "--pb")?,
            TransitionMatrix::new(parse_matrix(transitions)?),
            OutcomeSpace::dichotomous_default(),
        ),
        _ => {
            return Err(CliError::invalid(
                "provide either --input, or both --pb and --transitions",
            ));
        }
    };

    let fixed = ContextualData::new(
        "sweep",
        space,
        ContextProbabilities::new([0.5, 0.5], pb),
        transitions,
    );
    let violations = validate_data(&fixed, &Tolerances::analytic());
    if !violations.is_empty() {
        return Err(CliError::schema(
            "fixed sweep parameters fail validation",
            violations,
        ));
    }

    if args.points == 0 {
        return Err(CliError::invalid("--points must be at least 1"));
    }
    let to = args.to.unwrap_or(match args.grid {
        GridKind::Theta => std::f64::consts::PI,
        GridKind::Pa => 1.0,
    });

    // Per-outcome classical terms and geometric means.
    let term = |x: usize| -> (f64, f64) {
        let t1 = pb[0] * transitions.get(x, 0);
        let t2 = pb[1] * transitions.get(x, 1);
        (t1 + t2, (t1 * t2).sqrt())
    };
    let (q1, g1) = term(0);
    let (q2, g2) = term(1);
    if 2.0 * g1 <= 1e-12 || 2.0 * g2 <= 1e-12 {
        return Err(CliError::degenerate(
            "fixed pb and transitions give a degenerate interference denominator",
        ));
    }

    let mut writer = csv::Writer::from_writer(Vec::new());
    let grid_name = match args.grid {
        GridKind::Theta => "theta_x1",
        GridKind::Pa => "pa_x1",
    };
    writer
        .write_record([
            grid_name,
            "lambda_x1",
            "lambda_x2",
            "pa_x1",
            "pa_x2",
            "classification",
            "in_bounds",
        ])
        .map_err(|e| CliError::invalid(e.to_string()))?;

    for k in 0..args.points {
        let fraction = if args.points == 1 {
            0.0
        } else {
            k as f64 / (args.points - 1) as f64
        };
        let value = args.from + (to - args.from) * fraction;

        let (pa1, lambda1) = match args.grid {
            GridKind::Theta => {
                let lambda1 = value.cos();
                (q1 + 2.0 * lambda1 * g1, lambda1)
            }
            GridKind::Pa => (value, (value - q1) / (2.0 * g1)),
        };
        let pa2 = 1.0 - pa1;
        let lambda2 = (pa2 - q2) / (2.0 * g2);
        let in_bounds = (-1e-12..=1.0 + 1e-12).contains(&pa1);

        let classification = if in_bounds {
            let data = ContextualData::new(
                "sweep",
                fixed.space.clone(),
                ContextProbabilities::new([pa1, pa2], pb),
                transitions,
            );
            match interference_profile(&data, &Tolerances::analytic()) {
                Ok(profile) => {
                    let value = serde_json::to_value(profile.classification)
                        .expect("classification serializes");
                    value.as_str().unwrap_or_default().to_string()
                }
                Err(_) => String::new(),
            }
        } else {
            String::new()
        };

        writer
            .write_record([
                format!("{value}"),
                format!("{lambda1}"),
                format!("{lambda2}"),
                format!("{pa1}"),
                format!("{pa2}"),
                classification,
                format!("{in_bounds}"),
            ])
            .map_err(|e| CliError::invalid(e.to_string()))?;
    }

    let bytes = writer
        .into_inner()
        .map_err(|e| CliError::invalid(e.to_string()))?;
    write_or_print(args.output.as_deref(), &bytes, Some("sweep complete"))
}

// ---------------------------------------------------------------------------
// shared CSV summary

fn csv_opt<T: std::fmt::Display>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

/// Flat one-row-per-report CSV used by `analyze` and per-step by `simulate`.
fn reports_to_csv(rows: &[(Option<usize>, &AnalysisReport)]) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "step",
            "context_id",
            "classification",
            "lambda_x1",
            "lambda_x2",
            "theta_x1",
            "theta_x2",
            "sigma_lambda_x1",
            "sigma_lambda_x2",
            "pa_x1",
            "pa_x2",
            "pb_y1",
            "pb_y2",
            "born_x1",
            "born_x2",
            "bloch_x",
            "bloch_y",
            "bloch_z",
        ])
        .map_err(|e| CliError::invalid(e.to_string()))?;

    for (step, report) in rows {
        let classification = serde_json::to_value(report.classification)
            .expect("classification serializes")
            .as_str()
            .unwrap_or_default()
            .to_string();
        writer
            .write_record([
                csv_opt(*step),
                report.context_id.clone(),
                classification,
                format!("{}", report.lambda[0]),
                format!("{}", report.lambda[1]),
                format!("{}", report.theta[0]),
                format!("{}", report.theta[1]),
                csv_opt(report.sigma_lambda.map(|s| s[0])),
                csv_opt(report.sigma_lambda.map(|s| s[1])),
                format!("{}", report.data.pa[0]),
                format!("{}", report.data.pa[1]),
                format!("{}", report.data.pb[0]),
                format!("{}", report.data.pb[1]),
                csv_opt(report.born.map(|b| b[0])),
                csv_opt(report.born.map(|b| b[1])),
                csv_opt(report.bloch.map(|r| r[0])),
                csv_opt(report.bloch.map(|r| r[1])),
                csv_opt(report.bloch.map(|r| r[2])),
            ])
            .map_err(|e| CliError::invalid(e.to_string()))?;
    }
    writer
        .into_inner()
        .map_err(|e| CliError::invalid(e.to_string()))
}
