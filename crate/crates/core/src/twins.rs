//! Structural and geometric twin analysis.
//!
//! Two vertices are *structural open twins* when they share their whole
//! neighborhood and are non-adjacent, *structural closed twins* when they
//! share it after excluding each other and are adjacent. At an equilibrium
//! those pairs become *geometric* twins: their phasors satisfy
//!
//!   open:   q = μ_a v_a = μ_b v_b,
//!   closed: v_b + q = μ_a v_a  and  v_a + q = μ_b v_b
//!
//! for a common vector q, and the solutions fall into a synchronized, an
//! antipodal, and a degenerate case. The strengths are recovered by
//! least-squares projection (μ = ⟨target, v⟩ with unit v), which stays
//! robust near axis-aligned phasors, and the degenerate case is tested
//! before the line cases because the intersection points of the feasible
//! lines carry no phasor constraint.
//!
//! The two formation lemmas used by the certifier also live here:
//! benign extra neighbours (closed-twin formation with aligned extras) and
//! synchronous homogeneous extension (open-twin formation for a synchronized
//! block), the latter with its explicit Hessian-quadratic-form instability
//! witness.

use crate::energy::{self, add, cross, dot, norm, scale, sub, PhaseState, Vec2};
use crate::graph::Graph;
use crate::Tolerances;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwinKind {
    StructuralOpen,
    StructuralClosed,
    GeometricOpen,
    GeometricClosed,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TwinCase {
    Synchronized,
    Antipodal,
    Degenerate,
}

/// Classification record for a vertex pair. Structural records carry no
/// case or strengths; geometric ones carry the μ values and the common
/// vector they were checked against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TwinClassification {
    pub a: usize,
    pub b: usize,
    pub kind: TwinKind,
    pub case: Option<TwinCase>,
    pub mu_a: Option<f64>,
    pub mu_b: Option<f64>,
    pub q: Option<Vec2>,
}

impl TwinClassification {
    fn structural(a: usize, b: usize, kind: TwinKind) -> Self {
        TwinClassification {
            a,
            b,
            kind,
            case: None,
            mu_a: None,
            mu_b: None,
            q: None,
        }
    }

    fn rejected(a: usize, b: usize, mu_a: f64, mu_b: f64, q: Vec2) -> Self {
        TwinClassification {
            a,
            b,
            kind: TwinKind::None,
            case: None,
            mu_a: Some(mu_a),
            mu_b: Some(mu_b),
            q: Some(q),
        }
    }
}

/// All structural twin pairs of a graph, in lexicographic pair order.
pub fn structural_twins(g: &Graph) -> Vec<TwinClassification> {
    let n = g.n();
    let mut out = Vec::new();
    for a in 0..n {
        for b in (a + 1)..n {
            // N(a)\{b} == N(b)\{a}; for non-adjacent pairs this is exactly
            // N(a) == N(b).
            let same = (0..n)
                .filter(|&v| v != a && v != b)
                .all(|v| g.has_edge(a, v) == g.has_edge(b, v));
            if !same {
                continue;
            }
            let kind = if g.has_edge(a, b) {
                TwinKind::StructuralClosed
            } else {
                TwinKind::StructuralOpen
            };
            out.push(TwinClassification::structural(a, b, kind));
        }
    }
    out
}

/// Tests the open-twin relation q = μ_a v_a = μ_b v_b at a state and places
/// the pair in the trichotomy. Inputs that fail the defining equations
/// within `tol` yield kind `None`.
pub fn classify_geometric_open(
    s: &PhaseState,
    a: usize,
    b: usize,
    q: Vec2,
    tol: f64,
) -> TwinClassification {
    let va = s.phasor(a);
    let vb = s.phasor(b);
    let mu_a = dot(q, va);
    let mu_b = dot(q, vb);
    let res_a = norm(sub(q, scale(mu_a, va)));
    let res_b = norm(sub(q, scale(mu_b, vb)));
    if res_a > tol || res_b > tol {
        return TwinClassification::rejected(a, b, mu_a, mu_b, q);
    }

    // Degenerate corner first: at μ_a = μ_b = 0 the phasors are free.
    let case = if mu_a.abs() <= tol && mu_b.abs() <= tol {
        Some(TwinCase::Degenerate)
    } else if mu_a * mu_b > 0.0 && (mu_a - mu_b).abs() <= tol && norm(sub(va, vb)) <= tol {
        Some(TwinCase::Synchronized)
    } else if mu_a * mu_b < 0.0 && (mu_a + mu_b).abs() <= tol && norm(add(va, vb)) <= tol {
        Some(TwinCase::Antipodal)
    } else {
        None
    };
    match case {
        Some(case) => TwinClassification {
            a,
            b,
            kind: TwinKind::GeometricOpen,
            case: Some(case),
            mu_a: Some(mu_a),
            mu_b: Some(mu_b),
            q: Some(q),
        },
        None => TwinClassification::rejected(a, b, mu_a, mu_b, q),
    }
}

/// Tests the closed-twin relations v_b + q = μ_a v_a, v_a + q = μ_b v_b and
/// places the pair in the trichotomy (synchronized, antipodal with
/// μ_a + μ_b = −2, or the degenerate triangle μ_a = μ_b = −1 with
/// v_a + v_b + q = 0).
pub fn classify_geometric_closed(
    s: &PhaseState,
    a: usize,
    b: usize,
    q: Vec2,
    tol: f64,
) -> TwinClassification {
    let va = s.phasor(a);
    let vb = s.phasor(b);
    let mu_a = dot(add(vb, q), va);
    let mu_b = dot(add(va, q), vb);
    let res_a = norm(sub(add(vb, q), scale(mu_a, va)));
    let res_b = norm(sub(add(va, q), scale(mu_b, vb)));
    if res_a > tol || res_b > tol {
        return TwinClassification::rejected(a, b, mu_a, mu_b, q);
    }

    let case = if (mu_a + 1.0).abs() <= tol && (mu_b + 1.0).abs() <= tol {
        if norm(add(add(va, vb), q)) <= tol {
            Some(TwinCase::Degenerate)
        } else {
            None
        }
    } else if (mu_a - mu_b).abs() <= tol && norm(sub(va, vb)) <= tol {
        Some(TwinCase::Synchronized)
    } else if (mu_a + mu_b + 2.0).abs() <= tol && norm(add(va, vb)) <= tol {
        Some(TwinCase::Antipodal)
    } else {
        None
    };
    match case {
        Some(case) => TwinClassification {
            a,
            b,
            kind: TwinKind::GeometricClosed,
            case: Some(case),
            mu_a: Some(mu_a),
            mu_b: Some(mu_b),
            q: Some(q),
        },
        None => TwinClassification::rejected(a, b, mu_a, mu_b, q),
    }
}

/// Geometric classification of a structural twin pair at a state, using the
/// common-neighborhood phasor sum as the common vector: the full
/// neighborhood sum for open pairs, the sum excluding the pair for closed
/// ones. Pairs that are not structural twins yield kind `None`.
pub fn classify_structural_at_state(
    g: &Graph,
    s: &PhaseState,
    a: usize,
    b: usize,
    tol: f64,
) -> TwinClassification {
    let same_excluding = (0..g.n())
        .filter(|&v| v != a && v != b)
        .all(|v| g.has_edge(a, v) == g.has_edge(b, v));
    if !same_excluding {
        return TwinClassification::structural(a, b, TwinKind::None);
    }
    if g.has_edge(a, b) {
        let q = s.phasor_sum(g.neighbors(a).iter().copied().filter(|&v| v != b));
        classify_geometric_closed(s, a, b, q, tol)
    } else {
        let q = s.phasor_sum(g.neighbors(a).iter().copied());
        classify_geometric_open(s, a, b, q, tol)
    }
}

/// Why the benign-extra-neighbours lemma did not apply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenignExtraFailure {
    /// The pair must be adjacent.
    NotAdjacent,
    /// N(b) \ {a} must be contained in N(a); `missing` is a counterexample.
    NeighborhoodsNotNested { missing: usize },
    /// One endpoint is not at a nodewise stable equilibrium.
    NodeUnstable { node: usize, mu: f64, residual: f64 },
    /// An extra neighbour of `a` is not aligned with b's phasor.
    ExtraNotAligned { node: usize, distance: f64 },
}

impl fmt::Display for BenignExtraFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BenignExtraFailure::NotAdjacent => write!(f, "pair is not adjacent"),
            BenignExtraFailure::NeighborhoodsNotNested { missing } => {
                write!(f, "neighbor {missing} of b is not a neighbor of a")
            }
            BenignExtraFailure::NodeUnstable { node, mu, residual } => write!(
                f,
                "node {node} is not nodewise stable (mu = {mu:.3e}, residual = {residual:.3e})"
            ),
            BenignExtraFailure::ExtraNotAligned { node, distance } => write!(
                f,
                "T not aligned: extra neighbor {node} is {distance:.3e} away from b's phase"
            ),
        }
    }
}

/// Outcome of [`check_benign_extra`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenignExtraOutcome {
    /// All hypotheses verified and the pair is synchronized within tolerance.
    AppliesAndSyncs { mu_a: f64, mu_b: f64, gap: f64 },
    /// Some hypothesis failed; nothing is claimed.
    HypothesesFail { reason: BenignExtraFailure },
    /// Hypotheses verified yet the pair is not synchronized — this
    /// contradicts the lemma and indicates the tolerances disagree about
    /// the state, so it is reported loudly instead of as a hypothesis
    /// failure.
    ConclusionViolated { gap: f64 },
}

/// Closed-twin formation with benign extra neighbours: `a` and `b` are
/// adjacent, `b`'s other neighbors S are all shared with `a`, the extra
/// neighbors T = N(a) \ ({b} ∪ S) all carry b's phasor, and both endpoints
/// are nodewise stable. Under those hypotheses the pair must synchronize;
/// the check verifies each hypothesis numerically and then the conclusion.
pub fn check_benign_extra(
    g: &Graph,
    s: &PhaseState,
    a: usize,
    b: usize,
    tols: &Tolerances,
) -> BenignExtraOutcome {
    if !g.has_edge(a, b) {
        return BenignExtraOutcome::HypothesesFail {
            reason: BenignExtraFailure::NotAdjacent,
        };
    }
    // S = N(b) \ {a} must sit inside N(a).
    for &v in g.neighbors(b) {
        if v != a && !g.has_edge(a, v) {
            return BenignExtraOutcome::HypothesesFail {
                reason: BenignExtraFailure::NeighborhoodsNotNested { missing: v },
            };
        }
    }

    let strengths = energy::strengths(g, s).expect("length checked by caller");
    for node in [a, b] {
        let mu = strengths.mu[node];
        let residual = strengths.residual[node];
        if residual > tols.residual || mu < -tols.eig {
            return BenignExtraOutcome::HypothesesFail {
                reason: BenignExtraFailure::NodeUnstable { node, mu, residual },
            };
        }
    }

    // T: neighbors of a that are neither b nor neighbors of b.
    for &t in g.neighbors(a) {
        if t == b || g.has_edge(b, t) {
            continue;
        }
        let distance = energy::circular_distance(s.theta[t], s.theta[b]);
        if distance > tols.sync {
            return BenignExtraOutcome::HypothesesFail {
                reason: BenignExtraFailure::ExtraNotAligned { node: t, distance },
            };
        }
    }

    let gap = energy::circular_distance(s.theta[a], s.theta[b]);
    if gap <= tols.sync {
        BenignExtraOutcome::AppliesAndSyncs {
            mu_a: strengths.mu[a],
            mu_b: strengths.mu[b],
            gap,
        }
    } else {
        BenignExtraOutcome::ConclusionViolated { gap }
    }
}

/// Structural precondition failures of [`check_homogeneous_extension`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionError {
    EmptyBlock,
    Overlap { node: usize },
    /// A block node is missing an edge to an outer node.
    MissingCrossEdge { block_node: usize, outer_node: usize },
    /// A block node has a neighbor outside both the block and the outer set.
    NeighborhoodEscapes { block_node: usize, outside: usize },
    /// The block is not synchronized within tolerance.
    BlockNotSynchronized { node: usize, deviation: f64 },
}

impl fmt::Display for ExtensionError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtensionError::EmptyBlock => write!(f, "block Q must be nonempty"),
            ExtensionError::Overlap { node } => {
                write!(f, "node {node} appears in both Q and P")
            }
            ExtensionError::MissingCrossEdge { block_node, outer_node } => {
                write!(f, "node {block_node} in Q is not adjacent to {outer_node} in P")
            }
            ExtensionError::NeighborhoodEscapes { block_node, outside } => write!(
                f,
                "node {block_node} in Q has neighbor {outside} outside Q ∪ P"
            ),
            ExtensionError::BlockNotSynchronized { node, deviation } => write!(
                f,
                "node {node} deviates from Q's common phase by {deviation:.3e}"
            ),
        }
    }
}

/// Outcome of the synchronous-homogeneous-extension check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionOutcome {
    /// Σ_{i∈P} vᵢ points along the block's common phasor; carries the inner
    /// product (equal to ‖Σ_P v‖ when exactly aligned).
    Aligned { inner: f64 },
    /// Σ_{i∈P} vᵢ is numerically the zero vector.
    ZeroSum { sum_norm: f64 },
    /// Neither branch holds: perturbing the whole block witnesses
    /// instability. `quadratic_form` is xᵀHx for the block indicator x,
    /// negative exactly in the anti-aligned situation the lemma excludes.
    ViolationWitness { quadratic_form: f64, inner: f64 },
}

/// Checks the synchronous homogeneous extension property for a synchronized
/// block Q against its outer neighborhood P: under the structural
/// hypotheses (every Q-node sees all of P, and sees nothing outside Q ∪ P)
/// the outer phasor sum must align with the block's phasor or vanish.
/// Anything else yields the explicit instability witness.
pub fn check_homogeneous_extension(
    g: &Graph,
    s: &PhaseState,
    block: &[usize],
    outer: &[usize],
    tols: &Tolerances,
) -> Result<ExtensionOutcome, ExtensionError> {
    if block.is_empty() {
        return Err(ExtensionError::EmptyBlock);
    }
    let mut in_block = vec![false; g.n()];
    for &v in block {
        in_block[v] = true;
    }
    let mut in_outer = vec![false; g.n()];
    for &v in outer {
        if in_block[v] {
            return Err(ExtensionError::Overlap { node: v });
        }
        in_outer[v] = true;
    }
    for &i in block {
        for &p in outer {
            if !g.has_edge(i, p) {
                return Err(ExtensionError::MissingCrossEdge {
                    block_node: i,
                    outer_node: p,
                });
            }
        }
        for &u in g.neighbors(i) {
            if !in_block[u] && !in_outer[u] {
                return Err(ExtensionError::NeighborhoodEscapes {
                    block_node: i,
                    outside: u,
                });
            }
        }
    }
    let anchor = block[0];
    for &i in block {
        let deviation = energy::circular_distance(s.theta[i], s.theta[anchor]);
        if deviation > tols.sync {
            return Err(ExtensionError::BlockNotSynchronized { node: i, deviation });
        }
    }

    let outer_sum = s.phasor_sum(outer.iter().copied());
    let sum_norm = norm(outer_sum);
    if sum_norm <= tols.zero_vec {
        return Ok(ExtensionOutcome::ZeroSum { sum_norm });
    }
    // Common block direction from the (near-unit per node) phasor mean.
    let block_sum = s.phasor_sum(block.iter().copied());
    let block_dir = scale(1.0 / norm(block_sum), block_sum);
    let inner = dot(outer_sum, block_dir);
    let crossing = cross(outer_sum, block_dir);
    if inner > 0.0 && crossing.abs() <= tols.sync * sum_norm.max(1.0) {
        return Ok(ExtensionOutcome::Aligned { inner });
    }
    let quadratic_form = energy::indicator_cut_sum(g, s, &in_block);
    Ok(ExtensionOutcome::ViolationWitness {
        quadratic_form,
        inner,
    })
}
