//! Stationary-point refinement, second-order classification modulo the
//! rotation gauge, and seeded multistart surveys.
//!
//! Classification restricts the Hessian to the orthogonal complement of the
//! all-ones vector (the rotation direction that is always in the kernel) and
//! reads the verdict off the restricted spectrum. Newton refinement instead
//! pins θ₀, which leaves a square nonsingular system away from
//! degeneracies.
//!
//! Surveys draw each start from a ChaCha stream keyed by `(seed, start
//! index)`, so a report is a pure function of `(graph, n_starts, seed,
//! options)` no matter how the starts are scheduled; parallel drivers merge
//! outcomes back in start-index order.

use crate::dynamics::{self, FlowOptions, TerminationReason};
use crate::energy::{self, PhaseState, Strengths};
use crate::graph::Graph;
use crate::linalg;
use crate::Tolerances;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;
// Required for float math in pure no_std builds; test builds link std
// through dev-dependencies and shadow the trait, so the lint is silenced.
#[allow(unused_imports)]
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Second-order classification of a state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Gradient norm above the stationarity tolerance.
    NonStationary,
    /// Stationary with a restricted eigenvalue below −eig_tol.
    StrictSaddle,
    /// Second-order stationary and synchronized.
    SospSync,
    /// Second-order stationary but not synchronized.
    SospNonsync,
}

/// Which branch of the nodewise stability dichotomy a vertex satisfies:
/// its neighbor phasor sum is either (numerically) zero or points along the
/// vertex's own phasor. `Violated` can only appear away from second-order
/// stationary points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeCondition {
    ZeroSum,
    Aligned,
    Violated,
}

/// Refined classification of one state.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StationaryReport {
    pub state: PhaseState,
    pub grad_norm: f64,
    /// Eigenvalues of the Hessian restricted to the complement of the
    /// all-ones direction, sorted ascending (empty for n = 1).
    pub restricted_spectrum: Vec<f64>,
    pub verdict: Verdict,
    /// Set when the verdict is sosp_* and the smallest restricted
    /// eigenvalue lies within the PSD slack of zero, i.e. the second-order
    /// test was decided at its numerical boundary.
    pub degenerate: bool,
    pub strengths: Strengths,
    /// Per-node stability branch; a consistency cross-check on sosp verdicts.
    pub node_conditions: Vec<NodeCondition>,
}

/// Newton refinement failure: carries the last iterate and its residual.
#[derive(Debug, Clone)]
pub struct NewtonError {
    pub last: PhaseState,
    pub residual: f64,
    pub iterations: usize,
}

impl fmt::Display for NewtonError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Newton refinement stalled after {} iterations at gradient norm {:.3e}",
            self.iterations, self.residual
        )
    }
}

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_MAX_DAMPINGS: usize = 30;

/// Polishes a near-stationary state to gradient norm ≤ `tol` by damped
/// Newton on the first-order conditions with θ₀ pinned (the pinned system is
/// square and nonsingular away from degeneracies because the component sum
/// of the gradient vanishes identically).
///
/// Steps are damped by halving until either the energy or the residual
/// decreases; after 30 failed halvings a plain gradient step is taken
/// instead. Callers are expected to supply flow output or otherwise
/// reasonable seeds.
pub fn refine_newton(g: &Graph, s: &PhaseState, tol: f64) -> Result<PhaseState, NewtonError> {
    let n = g.n();
    let mut state = s.clone();
    let max_degree = (0..n).map(|v| g.degree(v)).max().unwrap_or(0);
    let fallback_step = 0.25 / (max_degree as f64 + 1.0);

    let mut grad = energy::gradient(g, &state).expect("length checked by caller");
    for _ in 0..NEWTON_MAX_ITER {
        let grad_norm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if grad_norm <= tol {
            return Ok(state);
        }

        let m = n - 1;
        let h = energy::hessian(g, &state).expect("length checked");
        let mut minor = Vec::with_capacity(m * m);
        for i in 1..n {
            for j in 1..n {
                minor.push(h[i * n + j]);
            }
        }
        let rhs: Vec<f64> = grad[1..].iter().map(|x| -x).collect();
        let delta = linalg::solve(minor, rhs, m);

        let residual_before = grad_norm;
        let energy_before = energy::energy(g, &state).expect("length checked");

        let mut moved = false;
        if let Some(delta) = delta {
            let mut lambda = 1.0f64;
            for _ in 0..NEWTON_MAX_DAMPINGS {
                let mut trial = state.clone();
                for i in 1..n {
                    trial.theta[i] += lambda * delta[i - 1];
                }
                let trial_grad = energy::gradient(g, &trial).expect("length checked");
                let trial_norm = trial_grad.iter().map(|x| x * x).sum::<f64>().sqrt();
                let trial_energy = energy::energy(g, &trial).expect("length checked");
                if trial_norm < residual_before || trial_energy < energy_before {
                    state = trial;
                    grad = trial_grad;
                    moved = true;
                    break;
                }
                lambda *= 0.5;
            }
        }
        if !moved {
            // Gradient fallback keeps making progress when the Newton
            // system is singular or the damping loop failed.
            for i in 1..n {
                state.theta[i] -= fallback_step * grad[i];
            }
            grad = energy::gradient(g, &state).expect("length checked");
        }
    }

    let residual = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
    Err(NewtonError {
        last: state,
        residual,
        iterations: NEWTON_MAX_ITER,
    })
}

/// Restricted spectrum and eigenvectors of the Hessian at `s`, on the
/// complement of the all-ones direction.
fn restricted_eigen(g: &Graph, s: &PhaseState) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = g.n();
    let h = energy::hessian(g, s).expect("length checked by caller");
    let restricted = linalg::restrict_to_ones_complement(&h, n);
    linalg::symmetric_eigen(restricted, n.saturating_sub(1))
}

/// Unit direction of most negative restricted curvature, lifted back to
/// angle space, together with its eigenvalue. `None` when the restricted
/// Hessian is positive semidefinite (or n = 1).
pub fn negative_curvature_direction(g: &Graph, s: &PhaseState) -> Option<(f64, Vec<f64>)> {
    let (values, vectors) = restricted_eigen(g, s);
    let min = *values.first()?;
    if min >= 0.0 {
        return None;
    }
    Some((min, linalg::lift_from_ones_complement(&vectors[0], g.n())))
}

/// Classifies a state: stationarity by gradient norm, then the sign of the
/// restricted spectrum, then synchronization. Non-stationary inputs are
/// labeled as such rather than rejected.
pub fn classify(g: &Graph, s: &PhaseState, tols: &Tolerances) -> StationaryReport {
    let grad_norm = energy::gradient_norm(g, s).expect("length checked by caller");
    let (restricted_spectrum, _) = restricted_eigen(g, s);
    let strengths = energy::strengths(g, s).expect("length checked");

    let node_conditions = (0..g.n())
        .map(|i| {
            let sum_norm =
                (strengths.mu[i].powi(2) + strengths.residual[i].powi(2)).sqrt();
            if sum_norm <= tols.zero_vec {
                NodeCondition::ZeroSum
            } else if strengths.residual[i] <= tols.residual && strengths.mu[i] > 0.0 {
                NodeCondition::Aligned
            } else {
                NodeCondition::Violated
            }
        })
        .collect();

    let min_eig = restricted_spectrum.first().copied().unwrap_or(f64::INFINITY);
    let stationary = grad_norm <= tols.grad;
    let verdict = if !stationary {
        Verdict::NonStationary
    } else if min_eig < -tols.eig {
        Verdict::StrictSaddle
    } else if energy::is_synchronized(s, tols.sync) {
        Verdict::SospSync
    } else {
        Verdict::SospNonsync
    };
    let degenerate = matches!(verdict, Verdict::SospSync | Verdict::SospNonsync)
        && min_eig.is_finite()
        && min_eig.abs() <= tols.eig;

    StationaryReport {
        state: s.clone(),
        grad_norm,
        restricted_spectrum,
        verdict,
        degenerate,
        strengths,
        node_conditions,
    }
}

/// Options for a multistart survey.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurveyOptions {
    pub flow: FlowOptions,
    pub tols: Tolerances,
    /// Distance stepped along the most negative restricted eigenvector when
    /// refinement lands on a strict saddle.
    pub escape_step: f64,
    /// Bound on such escapes per start.
    pub max_escapes: usize,
}

impl Default for SurveyOptions {
    fn default() -> Self {
        SurveyOptions {
            // The flow only needs to deliver a Newton-refinable seed, so it
            // may stop much earlier than the stationarity tolerance.
            flow: FlowOptions {
                grad_tol: 1e-5,
                max_time: 5e3,
                ..FlowOptions::default()
            },
            tols: Tolerances::default(),
            escape_step: 1e-2,
            max_escapes: 20,
        }
    }
}

/// Final category of one survey start.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StartVerdict {
    SospSync,
    SospNonsync,
    /// Still on a strict saddle after the escape budget.
    StrictSaddle,
    /// A budget ran out before stationarity.
    Undecided,
    /// A component error; counted separately, never aborts the survey.
    Failed,
}

/// Everything recorded about one start.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartOutcome {
    pub start_index: usize,
    pub verdict: StartVerdict,
    pub state: PhaseState,
    pub grad_norm: f64,
    pub min_restricted_eig: Option<f64>,
    pub aligned_deviation: f64,
    pub energy: f64,
    pub escapes_used: usize,
    pub error: Option<String>,
}

/// Uniform draw on [0, 2π)ⁿ from the stream keyed by `(seed, start index)`.
pub fn random_state(n: usize, seed: u64, start_index: usize) -> PhaseState {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(start_index as u64);
    let theta = (0..n)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            u * TAU
        })
        .collect();
    PhaseState::new(theta)
}

/// Runs one start of the survey pipeline: flow, Newton refinement,
/// classification, with bounded negative-curvature escapes from strict
/// saddles. Pure in `(g, seed, start_index, opts)`.
pub fn survey_single_start(
    g: &Graph,
    seed: u64,
    start_index: usize,
    opts: &SurveyOptions,
) -> StartOutcome {
    let mut state = random_state(g.n(), seed, start_index);
    let mut escapes = 0usize;

    let outcome = |verdict: StartVerdict,
                   state: PhaseState,
                   escapes: usize,
                   error: Option<String>| {
        let grad_norm = energy::gradient_norm(g, &state).unwrap_or(f64::NAN);
        let (spec, _) = restricted_eigen(g, &state);
        StartOutcome {
            start_index,
            verdict,
            grad_norm,
            min_restricted_eig: spec.first().copied(),
            aligned_deviation: energy::aligned_deviation(&state),
            energy: energy::energy(g, &state).unwrap_or(f64::NAN),
            escapes_used: escapes,
            error,
            state,
        }
    };

    loop {
        let traj = match dynamics::integrate(g, &state, &opts.flow) {
            Ok(t) => t,
            Err(e) => {
                return outcome(
                    StartVerdict::Failed,
                    state,
                    escapes,
                    Some(alloc::format!("{e}")),
                )
            }
        };
        if traj.termination_reason != TerminationReason::Converged {
            return outcome(StartVerdict::Undecided, traj.terminal, escapes, None);
        }
        let refined = match refine_newton(g, &traj.terminal, opts.tols.newton) {
            Ok(s) => s,
            Err(e) if e.residual <= opts.tols.grad => e.last,
            Err(e) => return outcome(StartVerdict::Undecided, e.last, escapes, None),
        };
        let report = classify(g, &refined, &opts.tols);
        match report.verdict {
            Verdict::SospSync => return outcome(StartVerdict::SospSync, refined, escapes, None),
            Verdict::SospNonsync => {
                return outcome(StartVerdict::SospNonsync, refined, escapes, None)
            }
            Verdict::NonStationary => {
                return outcome(StartVerdict::Undecided, refined, escapes, None)
            }
            Verdict::StrictSaddle => {
                if escapes >= opts.max_escapes {
                    return outcome(StartVerdict::StrictSaddle, refined, escapes, None);
                }
                let (_, direction) = negative_curvature_direction(g, &refined)
                    .expect("strict saddle has negative curvature");
                let mut next = refined;
                for (x, d) in next.theta.iter_mut().zip(&direction) {
                    *x += opts.escape_step * d;
                }
                state = next;
                escapes += 1;
            }
        }
    }
}

/// Verdict tallies of a survey; the five counts sum to `n_starts`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyCounts {
    pub sosp_sync: usize,
    pub sosp_nonsync: usize,
    pub strict_saddle: usize,
    pub undecided: usize,
    pub failed: usize,
}

impl SurveyCounts {
    pub fn total(&self) -> usize {
        self.sosp_sync + self.sosp_nonsync + self.strict_saddle + self.undecided + self.failed
    }
}

/// A non-synchronized second-order stationary point found by a survey,
/// stored in full for independent re-verification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NonsyncExemplar {
    pub start_index: usize,
    pub state: PhaseState,
    pub grad_norm: f64,
    pub min_restricted_eig: Option<f64>,
    pub aligned_deviation: f64,
    pub energy: f64,
}

/// Aggregated result of a multistart survey.
///
/// Wall time is measured by drivers for reporting but deliberately excluded
/// from serialization so that reports are byte-identical across reruns with
/// the same seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurveyReport {
    pub graph_id: String,
    pub n: usize,
    pub n_starts: usize,
    pub seed: u64,
    pub counts: SurveyCounts,
    pub nonsync_exemplars: Vec<NonsyncExemplar>,
    #[serde(skip)]
    pub wall_time_secs: f64,
}

/// Merges per-start outcomes into a report. Outcomes are reordered by start
/// index, so any parallel schedule yields the identical report.
pub fn aggregate_outcomes(
    graph_id: &str,
    n: usize,
    seed: u64,
    mut outcomes: Vec<StartOutcome>,
) -> SurveyReport {
    outcomes.sort_by_key(|o| o.start_index);
    let mut counts = SurveyCounts::default();
    let mut nonsync_exemplars = Vec::new();
    for o in &outcomes {
        match o.verdict {
            StartVerdict::SospSync => counts.sosp_sync += 1,
            StartVerdict::SospNonsync => {
                counts.sosp_nonsync += 1;
                nonsync_exemplars.push(NonsyncExemplar {
                    start_index: o.start_index,
                    state: o.state.clone(),
                    grad_norm: o.grad_norm,
                    min_restricted_eig: o.min_restricted_eig,
                    aligned_deviation: o.aligned_deviation,
                    energy: o.energy,
                });
            }
            StartVerdict::StrictSaddle => counts.strict_saddle += 1,
            StartVerdict::Undecided => counts.undecided += 1,
            StartVerdict::Failed => counts.failed += 1,
        }
    }
    SurveyReport {
        graph_id: String::from(graph_id),
        n,
        n_starts: outcomes.len(),
        seed,
        counts,
        nonsync_exemplars,
        wall_time_secs: 0.0,
    }
}

/// Serial multistart survey: `n_starts` independent pipelines seeded by
/// `(seed, k)`, aggregated in start order.
pub fn multistart_survey(
    g: &Graph,
    graph_id: &str,
    n_starts: usize,
    seed: u64,
    opts: &SurveyOptions,
) -> SurveyReport {
    let outcomes: Vec<StartOutcome> = (0..n_starts)
        .map(|k| survey_single_start(g, seed, k, opts))
        .collect();
    aggregate_outcomes(graph_id, g.n(), seed, outcomes)
}
