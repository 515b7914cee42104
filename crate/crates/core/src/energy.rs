//! Energy, gradient, Hessian, phasors and nodewise strengths.
//!
//! The energy of a state θ on a graph G is
//!
//!   E_G(θ) = ½ Σ_{i,j} A_{ij} (1 − cos(θᵢ − θⱼ)),
//!
//! i.e. each unordered edge contributes 1 − cos of its phase difference.
//! Its gradient is (∇E)_j = Σ_i A_{ij} sin(θⱼ − θᵢ), the negated right-hand
//! side of the homogeneous Kuramoto model, and the Hessian has off-diagonal
//! entries −A_{ij} cos(θᵢ − θⱼ) with row sums zero. Adding a constant to all
//! angles changes nothing, so the all-ones direction is always in the
//! Hessian kernel: every spectral statement in this crate is made on its
//! orthogonal complement.
//!
//! Gradient and Hessian entries are accumulated per unordered edge from a
//! single trig evaluation, which makes the component-sum identities
//! (gradient·1 = 0, symmetric Hessian) hold to the last bit rather than up
//! to libm symmetry.

use crate::graph::Graph;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};
use core::fmt;
// Required for float math in pure no_std builds; test builds link std
// through dev-dependencies and shadow the trait, so the lint is silenced.
#[allow(unused_imports)]
use num_traits::Float;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnergyError {
    /// State length does not match the graph's vertex count.
    LengthMismatch { expected: usize, got: usize },
}

impl fmt::Display for EnergyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnergyError::LengthMismatch { expected, got } => {
                write!(f, "state has {got} angles but the graph has {expected} vertices")
            }
        }
    }
}

/// Wraps an angle to the canonical interval (−π, π].
pub fn wrap_angle(x: f64) -> f64 {
    let y = x - TAU * (x / TAU).floor();
    if y > PI {
        y - TAU
    } else {
        y
    }
}

/// Circular distance |a − b| measured on the circle, in [0, π].
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_angle(a - b).abs()
}

/// 2-vector helpers for phasors.
pub type Vec2 = [f64; 2];

pub fn dot(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub fn cross(a: Vec2, b: Vec2) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub fn norm(a: Vec2) -> f64 {
    dot(a, a).sqrt()
}

pub fn add(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn sub(a: Vec2, b: Vec2) -> Vec2 {
    [a[0] - b[0], a[1] - b[1]]
}

pub fn scale(s: f64, a: Vec2) -> Vec2 {
    [s * a[0], s * a[1]]
}

/// A state of the model: one angle per vertex, in radians.
///
/// Angles are kept as given; canonical wrapping to (−π, π] is applied only
/// at I/O boundaries via [`PhaseState::canonicalized`], never inside
/// integration, where wrapping would break the continuity the adaptive
/// stepping relies on.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub theta: Vec<f64>,
}

impl PhaseState {
    pub fn new(theta: Vec<f64>) -> Self {
        debug_assert!(theta.iter().all(|x| x.is_finite()), "non-finite angle");
        PhaseState { theta }
    }

    pub fn constant(n: usize, value: f64) -> Self {
        PhaseState::new(vec![value; n])
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    /// Unit phasor (cos θᵥ, sin θᵥ) of vertex `v`.
    pub fn phasor(&self, v: usize) -> Vec2 {
        let (s, c) = self.theta[v].sin_cos();
        [c, s]
    }

    /// Sum of phasors over a set of vertices.
    pub fn phasor_sum<I: IntoIterator<Item = usize>>(&self, vs: I) -> Vec2 {
        let mut acc = [0.0, 0.0];
        for v in vs {
            acc = add(acc, self.phasor(v));
        }
        acc
    }

    /// Copy with every angle wrapped to (−π, π].
    pub fn canonicalized(&self) -> Self {
        PhaseState::new(self.theta.iter().map(|&x| wrap_angle(x)).collect())
    }

    /// Copy with a constant added to every angle (a gauge rotation).
    pub fn rotated(&self, c: f64) -> Self {
        PhaseState::new(self.theta.iter().map(|&x| x + c).collect())
    }
}

fn check_len(g: &Graph, s: &PhaseState) -> Result<(), EnergyError> {
    if g.n() == s.len() {
        Ok(())
    } else {
        Err(EnergyError::LengthMismatch {
            expected: g.n(),
            got: s.len(),
        })
    }
}

/// Energy of a state: Σ over unordered edges of (1 − cos Δθ). Nonnegative,
/// zero exactly when all adjacent phases are equal.
///
/// Formulations that write the energy as −Σᵢⱼ A_{ij} cos(θᵢ − θⱼ) over
/// ordered pairs differ from this one by an additive constant and a factor
/// of two, so minimizers and stationary points coincide.
pub fn energy(g: &Graph, s: &PhaseState) -> Result<f64, EnergyError> {
    check_len(g, s)?;
    let mut e = 0.0;
    for i in 0..g.n() {
        for &j in g.neighbors(i) {
            if j > i {
                e += 1.0 - (s.theta[i] - s.theta[j]).cos();
            }
        }
    }
    Ok(e)
}

/// Gradient of the energy: (∇E)_j = Σ_i A_{ij} sin(θⱼ − θᵢ).
///
/// Accumulated per edge, so the components sum to zero exactly.
pub fn gradient(g: &Graph, s: &PhaseState) -> Result<Vec<f64>, EnergyError> {
    check_len(g, s)?;
    let mut grad = vec![0.0f64; g.n()];
    for i in 0..g.n() {
        for &j in g.neighbors(i) {
            if j > i {
                let sij = (s.theta[j] - s.theta[i]).sin();
                grad[j] += sij;
                grad[i] -= sij;
            }
        }
    }
    Ok(grad)
}

/// Right-hand side of the gradient flow dθ/dt = −∇E(θ); identical to the
/// negated [`gradient`] componentwise.
pub fn kuramoto_rhs(g: &Graph, s: &PhaseState) -> Result<Vec<f64>, EnergyError> {
    let mut grad = gradient(g, s)?;
    for x in grad.iter_mut() {
        *x = -*x;
    }
    Ok(grad)
}

pub fn gradient_norm(g: &Graph, s: &PhaseState) -> Result<f64, EnergyError> {
    let grad = gradient(g, s)?;
    Ok(grad.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Hessian of the energy as a dense row-major n×n buffer: off-diagonal
/// entries −A_{ij} cos(θᵢ − θⱼ), diagonal Σ_k A_{ik} cos(θᵢ − θₖ). Symmetric
/// with zero row sums at every state; at any constant state it equals the
/// combinatorial Laplacian entrywise.
pub fn hessian(g: &Graph, s: &PhaseState) -> Result<Vec<f64>, EnergyError> {
    check_len(g, s)?;
    let n = g.n();
    let mut h = vec![0.0f64; n * n];
    for i in 0..n {
        for &j in g.neighbors(i) {
            if j > i {
                let c = (s.theta[i] - s.theta[j]).cos();
                h[i * n + j] = -c;
                h[j * n + i] = -c;
                h[i * n + i] += c;
                h[j * n + j] += c;
            }
        }
    }
    Ok(h)
}

/// Nodewise strengths and equilibrium residuals.
///
/// At an equilibrium the neighbor phasor sum of every vertex is parallel to
/// its own phasor: Σ_{j∈N(i)} vⱼ = μᵢ vᵢ with μᵢ = Σ_{j∈N(i)} cos(θⱼ − θᵢ).
/// The residual is the distance from that identity, and it coincides with
/// |∂E/∂θᵢ|, so residuals vanish exactly at first-order stationary points.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Strengths {
    pub mu: Vec<f64>,
    pub residual: Vec<f64>,
}

pub fn strengths(g: &Graph, s: &PhaseState) -> Result<Strengths, EnergyError> {
    check_len(g, s)?;
    let n = g.n();
    let mut mu = vec![0.0f64; n];
    let mut residual = vec![0.0f64; n];
    for i in 0..n {
        let vi = s.phasor(i);
        let sum = s.phasor_sum(g.neighbors(i).iter().copied());
        let m = dot(sum, vi);
        mu[i] = m;
        residual[i] = norm(sub(sum, scale(m, vi)));
    }
    Ok(Strengths { mu, residual })
}

/// Sum of cos(θᵢ − θⱼ) over edges with exactly one endpoint in the marked
/// set. Equals the Hessian quadratic form on the set's indicator vector.
pub(crate) fn indicator_cut_sum(g: &Graph, s: &PhaseState, in_set: &[bool]) -> f64 {
    let mut acc = 0.0;
    for i in 0..g.n() {
        for &j in g.neighbors(i) {
            if j > i && in_set[i] != in_set[j] {
                acc += (s.theta[i] - s.theta[j]).cos();
            }
        }
    }
    acc
}

/// Maximum angular distance of any phase from the circular mean direction.
///
/// Gauge invariant by construction. When the mean phasor has zero magnitude
/// the direction is undefined and the deviation is reported as π (maximal);
/// this is a spread state, not an error.
pub fn aligned_deviation(s: &PhaseState) -> f64 {
    let n = s.len();
    assert!(n >= 1, "state must be nonempty");
    let mean = s.phasor_sum(0..n);
    if norm(mean) <= 1e-12 * n as f64 {
        return PI;
    }
    let psi = mean[1].atan2(mean[0]);
    s.theta
        .iter()
        .map(|&t| circular_distance(t, psi))
        .fold(0.0, f64::max)
}

/// Whether every phase lies within `tol` of the circular mean direction.
pub fn is_synchronized(s: &PhaseState, tol: f64) -> bool {
    aligned_deviation(s) <= tol
}

// State JSON: {"theta": [radians, ...]}.

impl Serialize for PhaseState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            theta: &'a [f64],
        }
        Repr { theta: &self.theta }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PhaseState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            theta: Vec<f64>,
        }
        let repr = Repr::deserialize(deserializer)?;
        if let Some(bad) = repr.theta.iter().position(|x| !x.is_finite()) {
            return Err(D::Error::custom(format!("non-finite angle at index {bad}")));
        }
        Ok(PhaseState::new(repr.theta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Graph {
        Graph::path(3).unwrap()
    }

    #[test]
    fn wrap_angle_canonical_interval() {
        assert!((wrap_angle(3.0 * PI) - PI).abs() < 1e-12);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-12);
        assert!(wrap_angle(0.3).abs() - 0.3 < 1e-15);
        assert!((wrap_angle(TAU + 0.25) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn energy_basic_values() {
        let k2 = Graph::complete(2).unwrap();
        let e = energy(&k2, &PhaseState::new(vec![0.0, PI])).unwrap();
        assert!((e - 2.0).abs() < 1e-15);

        // Two antipodal edges of P3.
        let e = energy(&p3(), &PhaseState::new(vec![0.0, PI, 0.0])).unwrap();
        assert!((e - 4.0).abs() < 1e-15);

        let e = energy(&p3(), &PhaseState::constant(3, 0.7)).unwrap();
        assert_eq!(e, 0.0);
    }

    #[test]
    fn length_mismatch_rejected() {
        let err = energy(&p3(), &PhaseState::constant(2, 0.0)).unwrap_err();
        assert_eq!(err, EnergyError::LengthMismatch { expected: 3, got: 2 });
        assert!(gradient(&p3(), &PhaseState::constant(4, 0.0)).is_err());
        assert!(hessian(&p3(), &PhaseState::constant(4, 0.0)).is_err());
    }

    #[test]
    fn gradient_zero_cases() {
        let g = p3();
        let grad = gradient(&g, &PhaseState::constant(3, 1.3)).unwrap();
        assert!(grad.iter().all(|&x| x == 0.0));

        // Antipodal symmetry: every component vanishes.
        let grad = gradient(&g, &PhaseState::new(vec![0.0, PI, 0.0])).unwrap();
        assert!(grad.iter().all(|&x| x.abs() < 1e-15));
    }

    #[test]
    fn rhs_is_negated_gradient() {
        let g = Graph::complete(2).unwrap();
        let s = PhaseState::new(vec![0.0, core::f64::consts::FRAC_PI_2]);
        let rhs = kuramoto_rhs(&g, &s).unwrap();
        assert!((rhs[0] - 1.0).abs() < 1e-15);
        let grad = gradient(&g, &s).unwrap();
        for (a, b) in rhs.iter().zip(&grad) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn hessian_is_laplacian_at_constant_states() {
        let g = Graph::from_edge_list(4, &[(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
        let h = hessian(&g, &PhaseState::constant(4, -2.1)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expect = if i == j {
                    g.degree(i) as f64
                } else if g.has_edge(i, j) {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(h[i * 4 + j], expect, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn hessian_rows_sum_to_zero_everywhere() {
        let g = Graph::cycle(5).unwrap();
        let s = PhaseState::new(vec![0.3, -1.2, 2.9, 0.01, -2.8]);
        let h = hessian(&g, &s).unwrap();
        for i in 0..5 {
            let row: f64 = (0..5).map(|j| h[i * 5 + j]).sum();
            assert!(row.abs() < 1e-14);
        }
    }

    #[test]
    fn strengths_examples() {
        let g = p3();
        let st = strengths(&g, &PhaseState::constant(3, 0.4)).unwrap();
        for i in 0..3 {
            assert!((st.mu[i] - g.degree(i) as f64).abs() < 1e-15);
            assert!(st.residual[i] < 1e-15);
        }

        let st = strengths(&g, &PhaseState::new(vec![0.0, PI, 0.0])).unwrap();
        assert!((st.mu[0] + 1.0).abs() < 1e-15, "antipodal leaf has mu = -1");
        assert!(st.residual.iter().all(|&r| r < 1e-15));
    }

    #[test]
    fn residual_equals_gradient_component() {
        let g = Graph::from_edge_list(5, &[(0, 1), (0, 2), (1, 2), (2, 3), (3, 4)]).unwrap();
        let s = PhaseState::new(vec![0.2, 1.9, -0.7, 2.4, -3.0]);
        let st = strengths(&g, &s).unwrap();
        let grad = gradient(&g, &s).unwrap();
        for i in 0..5 {
            assert!((st.residual[i] - grad[i].abs()).abs() < 1e-12);
        }
    }

    #[test]
    fn deviation_and_synchronization() {
        assert_eq!(aligned_deviation(&PhaseState::constant(4, 0.0)), 0.0);
        assert!(aligned_deviation(&PhaseState::constant(4, 1.0).rotated(2.5)) < 1e-12);
        assert!((aligned_deviation(&PhaseState::new(vec![0.0, PI])) - PI).abs() < 1e-12);
        assert!(is_synchronized(&PhaseState::constant(2, -0.3), 1e-6));
        assert!(!is_synchronized(&PhaseState::new(vec![0.0, 1.0]), 1e-6));
    }

    #[test]
    fn state_json_round_trip() {
        let s = PhaseState::new(vec![0.5, -0.25]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "{\"theta\":[0.5,-0.25]}");
        let back: PhaseState = serde_json::from_str(&json).unwrap();
        assert_eq!(s, back);

        let bad: Result<PhaseState, _> = serde_json::from_str("{\"theta\":[1e999]}");
        assert!(bad.is_err());
    }
}
