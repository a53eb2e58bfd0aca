//! Hidden-variable Monte Carlo simulator: systems carry objective values for
//! both observables, contexts are ensembles described by a joint table, and
//! filtration on the second observable either preserves the stored value of
//! the first (classical conditioning) or resamples it through a disturbance
//! kernel. The disturbing mode is what produces nonzero interference, while
//! making the transition probabilities depend only on the filtration outcome.
//!
//! Everything is driven by a seeded, streamed generator: identical
//! `(spec, n, seed)` triples produce bit-identical count tables, and distinct
//! sampling stages draw from distinct streams so composed experiments stay
//! reproducible stage by stage.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contextual::{
    interference_profile, ContextProbabilities, ContextualData, InterferenceProfile,
    OutcomeSpace, Tolerances, TransitionMatrix, Violation,
};
use crate::Error;

/// Stream ids for the sampling stages of one experiment.
const STREAM_CONTEXT_A: u64 = 0;
const STREAM_CONTEXT_B: u64 = 1;
const STREAM_FILTRATION: u64 = 2; // + y
/// Streams consumed per experiment; time-series steps advance by this much.
const STREAMS_PER_EXPERIMENT: u64 = 4;

/// How a filtration measurement treats the stored value of the first
/// observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiltrationMode {
    /// Filtration destroys the memory of the preceding context: the
    /// a-value is resampled from the disturbance kernel column of the
    /// filtration outcome.
    Disturbing,
    /// Classical conditioning: stored a-values are kept as they are.
    NonDisturbing,
}

/// Hidden-variable model of one context: a joint table over the objective
/// `(a, b)` values, a disturbance kernel `q(x|y)`, and the filtration mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub context_id: String,
    /// `joint[x][y]` = probability that a system carries `a = x, b = y`.
    pub joint: [[f64; 2]; 2],
    /// Column-stochastic kernel `q(x|y)` applied by disturbing filtrations.
    pub disturbance: [[f64; 2]; 2],
    pub mode: FiltrationMode,
}

impl EnsembleSpec {
    /// Build a spec whose joint is the product of the target marginals, so
    /// the analytic image has exactly these `pa`, `pb` and (in disturbing
    /// mode) the kernel as transition matrix.
    pub fn from_marginals(
        context_id: impl Into<String>,
        pa: [f64; 2],
        pb: [f64; 2],
        kernel: [[f64; 2]; 2],
        mode: FiltrationMode,
    ) -> Self {
        let mut joint = [[0.0; 2]; 2];
        for x in 0..2 {
            for y in 0..2 {
                joint[x][y] = pa[x] * pb[y];
            }
        }
        Self {
            context_id: context_id.into(),
            joint,
            disturbance: kernel,
            mode,
        }
    }

    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let sum: f64 = self.joint.iter().flatten().sum();
        if (sum - 1.0).abs() > 1e-12 {
            out.push(Violation::new(
                "joint",
                format!("joint table sums to {sum}"),
                (sum - 1.0).abs(),
            ));
        }
        for x in 0..2 {
            for y in 0..2 {
                if self.joint[x][y] < 0.0 {
                    out.push(Violation::new(
                        format!("joint[{x}][{y}]"),
                        format!("negative joint probability {}", self.joint[x][y]),
                        -self.joint[x][y],
                    ));
                }
            }
        }
        for y in 0..2 {
            let col = self.disturbance[0][y] + self.disturbance[1][y];
            if (col - 1.0).abs() > 1e-12 {
                out.push(Violation::new(
                    format!("disturbance.column_y{}", y + 1),
                    format!("disturbance column y{} sums to {col}", y + 1),
                    (col - 1.0).abs(),
                ));
            }
        }
        out
    }

    /// Marginal of the first observable (row sums of the joint).
    pub fn pa(&self) -> [f64; 2] {
        [
            self.joint[0][0] + self.joint[0][1],
            self.joint[1][0] + self.joint[1][1],
        ]
    }

    /// Marginal of the second observable (column sums of the joint).
    pub fn pb(&self) -> [f64; 2] {
        [
            self.joint[0][0] + self.joint[1][0],
            self.joint[0][1] + self.joint[1][1],
        ]
    }

    /// Conditional distribution of `a` in the subensemble `b = y`.
    pub fn conditional_a_given_b(&self, y: usize) -> Result<[f64; 2], Error> {
        let pb_y = self.pb()[y];
        if pb_y <= 0.0 {
            return Err(Error::EmptyFiltration { outcome: y });
        }
        Ok([self.joint[0][y] / pb_y, self.joint[1][y] / pb_y])
    }

    /// The transition matrix a filtration experiment measures: the kernel in
    /// disturbing mode, the classical conditionals otherwise.
    pub fn effective_transitions(&self) -> Result<TransitionMatrix, Error> {
        match self.mode {
            FiltrationMode::Disturbing => Ok(TransitionMatrix::new(self.disturbance)),
            FiltrationMode::NonDisturbing => {
                let c0 = self.conditional_a_given_b(0)?;
                let c1 = self.conditional_a_given_b(1)?;
                Ok(TransitionMatrix::new([[c0[0], c1[0]], [c0[1], c1[1]]]))
            }
        }
    }

    /// The exact contextual data this spec converges to — the analytic oracle
    /// for everything the sampler estimates.
    pub fn analytic_data(&self, space: &OutcomeSpace) -> Result<ContextualData, Error> {
        Ok(ContextualData::new(
            self.context_id.clone(),
            space.clone(),
            ContextProbabilities::new(self.pa(), self.pb()),
            self.effective_transitions()?,
        ))
    }
}

/// Objective state of one system: both values coexist prior to measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemState {
    pub a_val: usize,
    pub b_val: usize,
}

/// Per-context sample sizes of a count table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextTotals {
    pub context_a: u64,
    pub context_b: u64,
    pub filtration: [u64; 2],
}

/// Raw observation counts for one experiment: marginal counts under the
/// context, transition counts under both filtrations, sample sizes, and the
/// seed that produced them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountTable {
    pub n_a: [u64; 2],
    pub n_b: [u64; 2],
    /// `n_a_given_y[x][y]` = count of `a = x` under the `b = y` filtration.
    pub n_a_given_y: [[u64; 2]; 2],
    pub totals: ContextTotals,
    pub seed: u64,
}

impl CountTable {
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.n_a[0] + self.n_a[1] != self.totals.context_a {
            out.push(Violation::new(
                "n_a",
                format!(
                    "a-counts sum to {} but the context total is {}",
                    self.n_a[0] + self.n_a[1],
                    self.totals.context_a
                ),
                0.0,
            ));
        }
        if self.n_b[0] + self.n_b[1] != self.totals.context_b {
            out.push(Violation::new(
                "n_b",
                format!(
                    "b-counts sum to {} but the context total is {}",
                    self.n_b[0] + self.n_b[1],
                    self.totals.context_b
                ),
                0.0,
            ));
        }
        for y in 0..2 {
            let sum = self.n_a_given_y[0][y] + self.n_a_given_y[1][y];
            if sum != self.totals.filtration[y] {
                out.push(Violation::new(
                    format!("n_a_given_y[..][{y}]"),
                    format!(
                        "filtration y{} counts sum to {} but its total is {}",
                        y + 1,
                        sum,
                        self.totals.filtration[y]
                    ),
                    0.0,
                ));
            }
        }
        out
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draw index 0 with probability `p0`, else 1.
fn draw_binary(rng: &mut ChaCha8Rng, p0: f64) -> usize {
    usize::from(rng.random::<f64>() >= p0)
}

/// Draw one system from the joint table, walking cells in the fixed order
/// (a=0,b=0), (a=0,b=1), (a=1,b=0), (a=1,b=1).
fn draw_system(rng: &mut ChaCha8Rng, joint: &[[f64; 2]; 2]) -> SystemState {
    let u = rng.random::<f64>();
    let mut acc = 0.0;
    for x in 0..2 {
        for y in 0..2 {
            acc += joint[x][y];
            if u < acc {
                return SystemState { a_val: x, b_val: y };
            }
        }
    }
    SystemState { a_val: 1, b_val: 1 }
}

/// Observe both marginals under the context. Each marginal comes from its own
/// run of `n` freshly drawn systems (the two reference observables are never
/// measured on the same system), so the two estimates are independent.
pub fn sample_context(spec: &EnsembleSpec, n: u64, seed: u64) -> CountTable {
    sample_context_with_base(spec, n, seed, 0)
}

fn sample_context_with_base(spec: &EnsembleSpec, n: u64, seed: u64, base: u64) -> CountTable {
    let mut n_a = [0u64; 2];
    let mut rng = rng_for(seed, base + STREAM_CONTEXT_A);
    for _ in 0..n {
        n_a[draw_system(&mut rng, &spec.joint).a_val] += 1;
    }

    let mut n_b = [0u64; 2];
    let mut rng = rng_for(seed, base + STREAM_CONTEXT_B);
    for _ in 0..n {
        n_b[draw_system(&mut rng, &spec.joint).b_val] += 1;
    }

    CountTable {
        n_a,
        n_b,
        n_a_given_y: [[0; 2]; 2],
        totals: ContextTotals {
            context_a: n,
            context_b: n,
            filtration: [0; 2],
        },
        seed,
    }
}

/// Counts observed under one filtration context: the a-measurement and the
/// repeated b-measurement (which returns the filtration outcome with
/// frequency one in both modes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FiltrationCounts {
    pub a: [u64; 2],
    pub b_repeat: [u64; 2],
}

/// Select systems with `b = y` and measure `a` on each. In disturbing mode
/// the selection resamples the stored a-value from the kernel column; in
/// non-disturbing mode it is kept. The stored b-value is untouched either
/// way, which is what makes an immediate second b-measurement repeatable.
pub fn sample_filtration(
    spec: &EnsembleSpec,
    y: usize,
    n: u64,
    seed: u64,
) -> Result<FiltrationCounts, Error> {
    sample_filtration_with_base(spec, y, n, seed, 0)
}

fn sample_filtration_with_base(
    spec: &EnsembleSpec,
    y: usize,
    n: u64,
    seed: u64,
    base: u64,
) -> Result<FiltrationCounts, Error> {
    // Selection is rejection-free: drawing from the normalized y-column of
    // the joint is distributed identically to filtering the full ensemble.
    let conditional = spec.conditional_a_given_b(y)?;
    let mut rng = rng_for(seed, base + STREAM_FILTRATION + y as u64);
    let mut a = [0u64; 2];
    let mut b_repeat = [0u64; 2];
    for _ in 0..n {
        let mut system = SystemState {
            a_val: draw_binary(&mut rng, conditional[0]),
            b_val: y,
        };
        if spec.mode == FiltrationMode::Disturbing {
            system.a_val = draw_binary(&mut rng, spec.disturbance[0][y]);
        }
        a[system.a_val] += 1;
        b_repeat[system.b_val] += 1;
    }
    Ok(FiltrationCounts { a, b_repeat })
}

/// Binomial standard errors for every probability estimated from a count
/// table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardErrors {
    pub pa: [f64; 2],
    pub pb: [f64; 2],
    pub transitions: [[f64; 2]; 2],
}

fn binomial_se(p: f64, n: u64) -> f64 {
    (p * (1.0 - p) / n as f64).sqrt()
}

/// Turn counts into frequency probabilities with their standard errors.
pub fn estimate_data(
    table: &CountTable,
    space: &OutcomeSpace,
) -> Result<(ContextualData, StandardErrors), Error> {
    for (which, total) in [
        ("context a-counts", table.totals.context_a),
        ("context b-counts", table.totals.context_b),
        ("filtration y1", table.totals.filtration[0]),
        ("filtration y2", table.totals.filtration[1]),
    ] {
        if total == 0 {
            return Err(Error::ZeroTotal {
                which: which.into(),
            });
        }
    }

    let pa = table.n_a.map(|c| c as f64 / table.totals.context_a as f64);
    let pb = table.n_b.map(|c| c as f64 / table.totals.context_b as f64);
    let mut transitions = [[0.0; 2]; 2];
    for x in 0..2 {
        for y in 0..2 {
            transitions[x][y] = table.n_a_given_y[x][y] as f64 / table.totals.filtration[y] as f64;
        }
    }

    let errors = StandardErrors {
        pa: [
            binomial_se(pa[0], table.totals.context_a),
            binomial_se(pa[1], table.totals.context_a),
        ],
        pb: [
            binomial_se(pb[0], table.totals.context_b),
            binomial_se(pb[1], table.totals.context_b),
        ],
        transitions: [
            [
                binomial_se(transitions[0][0], table.totals.filtration[0]),
                binomial_se(transitions[0][1], table.totals.filtration[1]),
            ],
            [
                binomial_se(transitions[1][0], table.totals.filtration[0]),
                binomial_se(transitions[1][1], table.totals.filtration[1]),
            ],
        ],
    };

    let data = ContextualData::new(
        "empirical",
        space.clone(),
        ContextProbabilities::new(pa, pb),
        TransitionMatrix::new(transitions),
    );
    Ok((data, errors))
}

/// Everything one simulated interference experiment produces: the raw counts,
/// the estimated data with standard errors, and the empirical profile with
/// delta-method error bars on the interference coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterferenceExperiment {
    pub counts: CountTable,
    pub data: ContextualData,
    pub errors: StandardErrors,
    pub profile: InterferenceProfile,
    pub sigma_lambda: [f64; 2],
}

/// Interference coefficient as a function of the four free probabilities
/// `(pa(x1), pb(y1), p(x1|y1), p(x1|y2))`, used for error propagation.
fn lambda_of_params(
    space: &OutcomeSpace,
    params: &[f64; 4],
    x: usize,
    tol: &Tolerances,
) -> Result<f64, Error> {
    let data = ContextualData::new(
        "delta",
        space.clone(),
        ContextProbabilities::new([params[0], 1.0 - params[0]], [params[1], 1.0 - params[1]]),
        TransitionMatrix::new([
            [params[2], params[3]],
            [1.0 - params[2], 1.0 - params[3]],
        ]),
    );
    crate::contextual::interference_coefficient(&data, x, tol)
}

/// First-order (delta-method) standard errors of both interference
/// coefficients, propagating the independent binomial errors of the four
/// estimated probabilities through the coefficient formula.
pub fn delta_method_sigma_lambda(
    data: &ContextualData,
    errors: &StandardErrors,
    tol: &Tolerances,
) -> Result<[f64; 2], Error> {
    let params = [
        data.pa()[0],
        data.pb()[0],
        data.transitions.get(0, 0),
        data.transitions.get(0, 1),
    ];
    let variances = [
        errors.pa[0] * errors.pa[0],
        errors.pb[0] * errors.pb[0],
        errors.transitions[0][0] * errors.transitions[0][0],
        errors.transitions[0][1] * errors.transitions[0][1],
    ];

    let mut sigma = [0.0; 2];
    for x in 0..2 {
        let mut var = 0.0;
        for i in 0..4 {
            // Central difference with a step that keeps the probability
            // strictly inside (0, 1).
            let p = params[i];
            let h = 1e-6f64.min(0.5 * p.min(1.0 - p)).max(1e-12);
            let mut up = params;
            let mut down = params;
            up[i] = p + h;
            down[i] = p - h;
            let grad = (lambda_of_params(&data.space, &up, x, tol)?
                - lambda_of_params(&data.space, &down, x, tol)?)
                / (2.0 * h);
            var += grad * grad * variances[i];
        }
        sigma[x] = var.sqrt();
    }
    Ok(sigma)
}

/// Full pipeline: sample the context and both filtrations, estimate the
/// contextual data, and classify it with error bars on the coefficients.
pub fn run_interference_experiment(
    spec: &EnsembleSpec,
    space: &OutcomeSpace,
    n: u64,
    seed: u64,
) -> Result<InterferenceExperiment, Error> {
    run_experiment_with_base(spec, space, n, seed, 0)
}

fn run_experiment_with_base(
    spec: &EnsembleSpec,
    space: &OutcomeSpace,
    n: u64,
    seed: u64,
    base: u64,
) -> Result<InterferenceExperiment, Error> {
    let mut counts = sample_context_with_base(spec, n, seed, base);
    for y in 0..2 {
        let filtration = sample_filtration_with_base(spec, y, n, seed, base)?;
        for x in 0..2 {
            counts.n_a_given_y[x][y] = filtration.a[x];
        }
        counts.totals.filtration[y] = n;
    }

    let tol = Tolerances::empirical();
    let (data, errors) = estimate_data(&counts, space)?;
    let mut data = data;
    data.context_id = spec.context_id.clone();
    let profile = interference_profile(&data, &tol)?;
    let sigma_lambda = delta_method_sigma_lambda(&data, &errors, &tol)?;

    Ok(InterferenceExperiment {
        counts,
        data,
        errors,
        profile,
        sigma_lambda,
    })
}

/// Result of testing whether the transition probabilities measured after a
/// `b = y` filtration depend on the preceding context.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VonNeumannReport {
    /// Estimated `q(x|y)` column per spec.
    pub estimates: Vec<[f64; 2]>,
    /// Largest pairwise difference of the estimated columns.
    pub max_discrepancy: f64,
    /// Three combined standard errors of the maximizing pair.
    pub threshold: f64,
    pub pass: bool,
}

/// Estimate the post-filtration transition column under each preceding
/// context and compare them pairwise at the three-sigma level. Every spec is
/// sampled under the same seed and stream, so duplicated specs reproduce each
/// other exactly.
pub fn von_neumann_test(
    specs: &[EnsembleSpec],
    y: usize,
    n: u64,
    seed: u64,
) -> Result<VonNeumannReport, Error> {
    if specs.len() < 2 {
        return Err(Error::Invalid(vec![Violation::new(
            "specs",
            format!("need at least two ensemble specs, got {}", specs.len()),
            0.0,
        )]));
    }
    let mut estimates = Vec::with_capacity(specs.len());
    for spec in specs {
        let counts = sample_filtration(spec, y, n, seed)?;
        estimates.push([
            counts.a[0] as f64 / n as f64,
            counts.a[1] as f64 / n as f64,
        ]);
    }

    let mut max_discrepancy = 0.0;
    let mut threshold = f64::INFINITY;
    for i in 0..estimates.len() {
        for j in (i + 1)..estimates.len() {
            let d = (estimates[i][0] - estimates[j][0]).abs();
            if d >= max_discrepancy {
                max_discrepancy = d;
                let si = binomial_se(estimates[i][0], n);
                let sj = binomial_se(estimates[j][0], n);
                threshold = 3.0 * (si * si + sj * sj).sqrt();
            }
        }
    }
    Ok(VonNeumannReport {
        estimates,
        max_discrepancy,
        threshold,
        pass: max_discrepancy <= threshold,
    })
}

/// One step of a two-time-scale collection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoScaleStep {
    pub step: usize,
    pub experiment: InterferenceExperiment,
}

/// Collect statistics on the coarse time scale: at each step, a full
/// experiment of `samples_per_step` fine-scale observations is run and
/// summarized. A static spec yields a stationary series.
pub fn two_scale_collect(
    spec: &EnsembleSpec,
    space: &OutcomeSpace,
    n_ql_steps: usize,
    samples_per_step: u64,
    seed: u64,
) -> Result<Vec<TwoScaleStep>, Error> {
    let mut out = Vec::with_capacity(n_ql_steps);
    for step in 0..n_ql_steps {
        out.push(TwoScaleStep {
            step,
            experiment: run_experiment_with_base(
                spec,
                space,
                samples_per_step,
                seed,
                step as u64 * STREAMS_PER_EXPERIMENT,
            )?,
        });
    }
    Ok(out)
}

/// Two-time-scale collection over an explicit schedule of specs, one per
/// coarse step, for contexts that drift on the slow scale.
pub fn two_scale_collect_schedule(
    schedule: &[EnsembleSpec],
    space: &OutcomeSpace,
    samples_per_step: u64,
    seed: u64,
) -> Result<Vec<TwoScaleStep>, Error> {
    let mut out = Vec::with_capacity(schedule.len());
    for (step, spec) in schedule.iter().enumerate() {
        out.push(TwoScaleStep {
            step,
            experiment: run_experiment_with_base(
                spec,
                space,
                samples_per_step,
                seed,
                step as u64 * STREAMS_PER_EXPERIMENT,
            )?,
        });
    }
    Ok(out)
}
