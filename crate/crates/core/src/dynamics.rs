//! Numerical integration of the gradient flow dθ/dt = −∇E(θ).
//!
//! The vector field is smooth and bounded by the maximum degree, so a
//! classical fourth-order Runge–Kutta scheme is used, with one safeguard:
//! a step that increases the energy beyond rounding slack is retried at
//! half the step size. This keeps recorded trajectories monotone without
//! any stiffness machinery. The integrator never injects noise; escaping
//! saddles is the landscape module's job.

use crate::energy::{self, EnergyError, PhaseState};
use crate::graph::Graph;
use crate::landscape;
use crate::Tolerances;
use alloc::vec::Vec;
use core::fmt;
// Required for float math in pure no_std builds; test builds link std
// through dev-dependencies and shadow the trait, so the lint is silenced.
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

/// Budget and tolerance knobs for [`integrate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlowOptions {
    /// Integration stops once this much model time has elapsed.
    pub max_time: f64,
    /// Initial and maximal step size; adaptive halving only shrinks it.
    pub dt_initial: f64,
    /// Gradient norm below which the flow counts as converged.
    pub grad_tol: f64,
    /// Hard cap on accepted steps.
    pub max_steps: usize,
    /// A sample is recorded every this many accepted steps.
    pub record_every: usize,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            max_time: 1e4,
            dt_initial: 0.2,
            grad_tol: 1e-8,
            max_steps: 1_000_000,
            record_every: 100,
        }
    }
}

impl FlowOptions {
    fn validate(&self) -> Result<(), FlowError> {
        let ok = self.max_time > 0.0
            && self.dt_initial > 0.0
            && self.grad_tol > 0.0
            && self.max_steps > 0
            && self.record_every > 0;
        if ok {
            Ok(())
        } else {
            Err(FlowError::InvalidOptions)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminationReason {
    Converged,
    MaxTime,
    MaxSteps,
}

/// One recorded point of a trajectory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub state: PhaseState,
    pub energy: f64,
}

/// Result of integrating the gradient flow.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub terminal: PhaseState,
    pub termination_reason: TerminationReason,
    pub steps: usize,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowError {
    Energy(EnergyError),
    /// A non-finite angle or energy appeared; impossible for this bounded
    /// field, so it is treated as an internal error.
    NonFinite { t: f64 },
    /// Some option was nonpositive.
    InvalidOptions,
}

impl fmt::Display for FlowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlowError::Energy(e) => write!(f, "{e}"),
            FlowError::NonFinite { t } => {
                write!(f, "non-finite state encountered at t = {t} (internal error)")
            }
            FlowError::InvalidOptions => write!(f, "flow options must all be positive"),
        }
    }
}

impl From<EnergyError> for FlowError {
    fn from(e: EnergyError) -> Self {
        FlowError::Energy(e)
    }
}

fn rk4_step(g: &Graph, s: &PhaseState, dt: f64) -> Result<PhaseState, EnergyError> {
    let n = s.len();
    let k1 = energy::kuramoto_rhs(g, s)?;
    let mut tmp = s.clone();
    for i in 0..n {
        tmp.theta[i] = s.theta[i] + 0.5 * dt * k1[i];
    }
    let k2 = energy::kuramoto_rhs(g, &tmp)?;
    for i in 0..n {
        tmp.theta[i] = s.theta[i] + 0.5 * dt * k2[i];
    }
    let k3 = energy::kuramoto_rhs(g, &tmp)?;
    for i in 0..n {
        tmp.theta[i] = s.theta[i] + dt * k3[i];
    }
    let k4 = energy::kuramoto_rhs(g, &tmp)?;
    for i in 0..n {
        tmp.theta[i] = s.theta[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    Ok(tmp)
}

/// Integrates the gradient flow from `s0` until the gradient norm drops
/// below `opts.grad_tol` or a budget runs out. Energy is nonincreasing along
/// accepted steps up to 1e-12 of slack each.
pub fn integrate(g: &Graph, s0: &PhaseState, opts: &FlowOptions) -> Result<Trajectory, FlowError> {
    opts.validate()?;
    let mut state = s0.clone();
    let mut e_cur = energy::energy(g, &state)?;
    let mut t = 0.0f64;
    let mut dt = opts.dt_initial;
    let dt_floor = opts.dt_initial * 1e-12;
    let mut steps = 0usize;

    let mut samples = Vec::new();
    samples.push(TrajectorySample {
        t,
        state: state.clone(),
        energy: e_cur,
    });

    let reason = loop {
        let grad = energy::gradient(g, &state)?;
        let grad_norm = grad.iter().map(|x| x * x).sum::<f64>().sqrt();
        if grad_norm <= opts.grad_tol {
            break TerminationReason::Converged;
        }
        if t >= opts.max_time {
            break TerminationReason::MaxTime;
        }
        if steps >= opts.max_steps {
            break TerminationReason::MaxSteps;
        }

        // Attempt a step, halving dt until energy does not increase beyond
        // rounding slack.
        loop {
            let trial = rk4_step(g, &state, dt)?;
            let e_trial = energy::energy(g, &trial)?;
            if !e_trial.is_finite() || trial.theta.iter().any(|x| !x.is_finite()) {
                return Err(FlowError::NonFinite { t });
            }
            if e_trial <= e_cur + 1e-12 || dt <= dt_floor {
                state = trial;
                e_cur = e_trial;
                t += dt;
                steps += 1;
                dt = (dt * 2.0).min(opts.dt_initial);
                break;
            }
            dt *= 0.5;
        }

        if steps.is_multiple_of(opts.record_every) {
            samples.push(TrajectorySample {
                t,
                state: state.clone(),
                energy: e_cur,
            });
        }
    };

    let last_recorded = samples.last().map(|s| s.t);
    if last_recorded != Some(t) {
        samples.push(TrajectorySample {
            t,
            state: state.clone(),
            energy: e_cur,
        });
    }

    Ok(Trajectory {
        samples,
        terminal: state,
        termination_reason: reason,
        steps,
        time: t,
    })
}

/// Trajectory-level outcome of a single flow: did it provably reach a
/// synchronized stationary state, a non-synchronized one, or run out of
/// budget first?
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowVerdict {
    Sync,
    NonsyncStationary,
    Undecided,
}

/// Integrates, refines the terminal state with Newton, and tests
/// synchronization. `Undecided` is returned only when budgets run out
/// before stationarity is established at `tols.grad`.
pub fn flow_to_verdict(
    g: &Graph,
    s0: &PhaseState,
    opts: &FlowOptions,
    tols: &Tolerances,
) -> Result<(FlowVerdict, PhaseState), FlowError> {
    let traj = integrate(g, s0, opts)?;
    if traj.termination_reason != TerminationReason::Converged {
        return Ok((FlowVerdict::Undecided, traj.terminal));
    }
    let refined = match landscape::refine_newton(g, &traj.terminal, tols.newton) {
        Ok(s) => s,
        Err(e) => e.last,
    };
    let grad_norm = energy::gradient_norm(g, &refined)?;
    if grad_norm > tols.grad {
        return Ok((FlowVerdict::Undecided, refined));
    }
    if energy::is_synchronized(&refined, tols.sync) {
        Ok((FlowVerdict::Sync, refined))
    } else {
        Ok((FlowVerdict::NonsyncStationary, refined))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::TAU;

    #[test]
    fn equilibrium_is_fixed() {
        let g = Graph::complete(3).unwrap();
        let s0 = PhaseState::constant(3, 0.8);
        let traj = integrate(&g, &s0, &FlowOptions::default()).unwrap();
        assert_eq!(traj.termination_reason, TerminationReason::Converged);
        assert_eq!(traj.time, 0.0);
        assert_eq!(traj.terminal, s0);
    }

    #[test]
    fn k2_converges_to_sync() {
        let g = Graph::complete(2).unwrap();
        let s0 = PhaseState::new(alloc::vec![0.0, 0.1]);
        let opts = FlowOptions {
            grad_tol: 1e-10,
            ..FlowOptions::default()
        };
        let traj = integrate(&g, &s0, &opts).unwrap();
        assert_eq!(traj.termination_reason, TerminationReason::Converged);
        let e = energy::energy(&g, &traj.terminal).unwrap();
        assert!(e < 1e-18, "energy {e}");
        assert!(energy::aligned_deviation(&traj.terminal) < 1e-9);
    }

    #[test]
    fn twisted_cycle_state_is_stationary() {
        let g = Graph::cycle(5).unwrap();
        let s0 = PhaseState::new((0..5).map(|j| TAU * j as f64 / 5.0).collect());
        let traj = integrate(&g, &s0, &FlowOptions::default()).unwrap();
        assert_eq!(traj.termination_reason, TerminationReason::Converged);
        assert_eq!(traj.time, 0.0, "twisted state is a fixed point");
        assert!(energy::aligned_deviation(&traj.terminal) > 1.0);
    }

    #[test]
    fn saddle_below_tolerance_is_a_fixed_point() {
        // Even an unstable stationary point must not move: the gradient
        // test runs before any step is taken.
        let g = Graph::path(3).unwrap();
        let saddle = PhaseState::new(alloc::vec![0.0, core::f64::consts::PI, 0.0]);
        assert!(energy::gradient_norm(&g, &saddle).unwrap() < 1e-12);
        let traj = integrate(&g, &saddle, &FlowOptions::default()).unwrap();
        assert_eq!(traj.termination_reason, TerminationReason::Converged);
        for (a, b) in traj.terminal.theta.iter().zip(&saddle.theta) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn energy_monotone_along_samples() {
        let g = Graph::cycle(6).unwrap();
        let s0 = PhaseState::new(alloc::vec![2.9, -0.6, 1.7, 0.2, -2.4, 1.1]);
        let opts = FlowOptions {
            record_every: 5,
            ..FlowOptions::default()
        };
        let traj = integrate(&g, &s0, &opts).unwrap();
        for pair in traj.samples.windows(2) {
            assert!(pair[1].energy <= pair[0].energy + 1e-9);
            assert!(pair[1].t > pair[0].t);
        }
    }

    #[test]
    fn budget_exhaustion_reports_reason() {
        let g = Graph::cycle(6).unwrap();
        let s0 = PhaseState::new(alloc::vec![2.9, -0.6, 1.7, 0.2, -2.4, 1.1]);
        let opts = FlowOptions {
            max_steps: 1,
            ..FlowOptions::default()
        };
        let traj = integrate(&g, &s0, &opts).unwrap();
        assert_eq!(traj.termination_reason, TerminationReason::MaxSteps);

        let tols = Tolerances::default();
        let (verdict, _) = flow_to_verdict(&g, &s0, &opts, &tols).unwrap();
        assert_eq!(verdict, FlowVerdict::Undecided);
    }

    #[test]
    fn invalid_options_rejected() {
        let g = Graph::complete(2).unwrap();
        let s0 = PhaseState::constant(2, 0.0);
        let opts = FlowOptions {
            dt_initial: 0.0,
            ..FlowOptions::default()
        };
        assert_eq!(
            integrate(&g, &s0, &opts).unwrap_err(),
            FlowError::InvalidOptions
        );
    }

    #[test]
    fn verdicts_on_k2_and_c5() {
        let tols = Tolerances::default();
        let g = Graph::complete(2).unwrap();
        let (verdict, terminal) = flow_to_verdict(
            &g,
            &PhaseState::new(alloc::vec![0.0, 2.0]),
            &FlowOptions::default(),
            &tols,
        )
        .unwrap();
        assert_eq!(verdict, FlowVerdict::Sync);
        assert!(energy::gradient_norm(&g, &terminal).unwrap() <= tols.grad);

        let c5 = Graph::cycle(5).unwrap();
        let twisted = PhaseState::new((0..5).map(|j| TAU * j as f64 / 5.0).collect());
        let (verdict, _) =
            flow_to_verdict(&c5, &twisted, &FlowOptions::default(), &tols).unwrap();
        assert_eq!(verdict, FlowVerdict::NonsyncStationary);
    }

    #[test]
    fn gauge_equivariance_of_flow() {
        let g = Graph::path(3).unwrap();
        let s0 = PhaseState::new(alloc::vec![0.4, -0.9, 1.9]);
        let opts = FlowOptions {
            grad_tol: 1e-11,
            ..FlowOptions::default()
        };
        let c = 0.77;
        let t1 = integrate(&g, &s0, &opts).unwrap().terminal;
        let t2 = integrate(&g, &s0.rotated(c), &opts).unwrap().terminal;
        for i in 0..3 {
            let diff = energy::wrap_angle(t2.theta[i] - t1.theta[i] - c);
            assert!(diff.abs() < 1e-8, "component {i} differs by {diff}");
        }
    }
}
