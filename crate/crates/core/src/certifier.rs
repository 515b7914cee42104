//! Mechanized synchronization certificates for quasi-threshold graphs.
//!
//! Given a second-order stationary state on the comparability closure of a
//! rooted tree, the certifier runs the layer-by-layer induction that proves
//! such states are synchronized: nodes at the deepest layer are leaves; a
//! node whose children are all leaves or leaf-like is shown leaf-like by
//! three numerically verified steps
//!
//!   1. every child subtree's phasors align with the phasor sum over the
//!      node and its ancestors (the zero-sum alternative is excluded by an
//!      explicit negative cut-energy witness, which would contradict the
//!      second-order precondition);
//!   2. the children are pairwise geometric open twins in the synchronized
//!      case, hence mutually synchronized;
//!   3. each child synchronizes with the node via the benign-extra-neighbour
//!      check.
//!
//! Each lemma application re-checks its own hypotheses and fails loudly;
//! evidence records keep the raw vectors and strengths so certificates can
//! be audited externally. A certificate is `certified_sync` only if every
//! node ends up leaf or leaf-like and the state passes a direct
//! synchronization cross-check.

use crate::energy::{self, PhaseState, Vec2};
use crate::graph::Graph;
use crate::landscape::{self, Verdict};
use crate::skeleton::RootedForest;
use crate::twins::{self, BenignExtraOutcome, ExtensionOutcome, TwinCase};
use crate::Tolerances;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CutError {
    EmptySet,
    FullSet,
    InvalidNode { node: usize },
    DuplicateNode { node: usize },
}

impl fmt::Display for CutError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutError::EmptySet => write!(f, "cut set must be nonempty"),
            CutError::FullSet => write!(f, "cut set must be a proper subset"),
            CutError::InvalidNode { node } => write!(f, "cut set node {node} out of range"),
            CutError::DuplicateNode { node } => write!(f, "cut set repeats node {node}"),
        }
    }
}

/// Hessian quadratic form on the indicator vector of a vertex set, computed
/// as the bilinear cut sum Σ cos(θᵢ − θⱼ) over edges leaving the set. A
/// negative value witnesses instability of the state.
pub fn cut_energy(g: &Graph, s: &PhaseState, set: &[usize]) -> Result<f64, CutError> {
    if set.is_empty() {
        return Err(CutError::EmptySet);
    }
    let mut mask = vec![false; g.n()];
    for &v in set {
        if v >= g.n() {
            return Err(CutError::InvalidNode { node: v });
        }
        if mask[v] {
            return Err(CutError::DuplicateNode { node: v });
        }
        mask[v] = true;
    }
    if set.len() == g.n() {
        return Err(CutError::FullSet);
    }
    Ok(energy::indicator_cut_sum(g, s, &mask))
}

/// Whether every tree descendant of `v` shares its phase within `tol`
/// (circular distance). Vacuously true for leaves.
pub fn is_leaf_like(
    f: &RootedForest,
    s: &PhaseState,
    v: usize,
    tol: f64,
) -> Result<bool, crate::skeleton::ForestError> {
    let descendants = f.descendants(v)?;
    Ok(descendants
        .iter()
        .all(|&d| energy::circular_distance(s.theta[d], s.theta[v]) <= tol))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifyError {
    /// State length and graph size disagree.
    LengthMismatch { expected: usize, got: usize },
    /// The forest's comparability closure is not the given graph.
    ClosureMismatch,
    /// The forest has several trees; certificates are defined for connected
    /// graphs, i.e. single rooted trees.
    NotSingleTree { roots: Vec<usize> },
    /// The state is not stationary at the gradient tolerance.
    NotStationary { grad_norm_exponent: i32 },
    /// The state is stationary but has strictly negative restricted
    /// curvature, so it is not second-order stationary.
    NotSecondOrder,
}

impl fmt::Display for CertifyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CertifyError::LengthMismatch { expected, got } => {
                write!(f, "state has {got} angles but the graph has {expected} vertices")
            }
            CertifyError::ClosureMismatch => {
                write!(f, "closure mismatch: the forest's comparability closure is not the graph")
            }
            CertifyError::NotSingleTree { roots } => {
                write!(f, "forest has {} roots; certify needs a single rooted tree", roots.len())
            }
            CertifyError::NotStationary { grad_norm_exponent } => {
                write!(f, "state is not stationary (gradient norm ~1e{grad_norm_exponent})")
            }
            CertifyError::NotSecondOrder => {
                write!(f, "state is a strict saddle, not a second-order stationary point")
            }
        }
    }
}

/// Why a node failed its layer checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FailureReason {
    /// A node in this node's subtree already failed, so the inductive
    /// hypothesis is unavailable.
    ChildSubtreeFailed { node: usize },
    /// The node or one of its children is not nodewise stable.
    NodeUnstable { node: usize, mu: f64, residual: f64 },
    /// A homogeneous-extension hypothesis failed for a child subtree.
    ExtensionHypothesis { child: usize, detail: String },
    /// The phasor sum over the node and its ancestors vanished; the cut
    /// energy of the node's closed subtree is the (negative) instability
    /// witness contradicting the second-order precondition.
    AncestorSumZero { witness: f64 },
    /// A child subtree's phasors neither align with the ancestor sum nor
    /// see it vanish; carries the quadratic-form witness.
    ExtensionViolation { child: usize, witness: f64 },
    /// Two children are not synchronized geometric open twins.
    SiblingsNotSynchronized { first: usize, second: usize },
    /// The benign-extra-neighbour step failed between the node and a child.
    ParentChildNotSynchronized { child: usize, detail: String },
    /// Steps passed but the direct descendant-phase check failed.
    LeafLikeCheckFailed { deviation: f64 },
    /// All nodes passed but the state is not synchronized; the certificate
    /// is withheld for soundness.
    GlobalSyncCheckFailed { deviation: f64 },
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FailureReason::ChildSubtreeFailed { node } => {
                write!(f, "node {node} in the subtree already failed")
            }
            FailureReason::NodeUnstable { node, mu, residual } => write!(
                f,
                "node {node} not nodewise stable (mu = {mu:.3e}, residual = {residual:.3e})"
            ),
            FailureReason::ExtensionHypothesis { child, detail } => {
                write!(f, "extension hypothesis failed for child {child}: {detail}")
            }
            FailureReason::AncestorSumZero { witness } => write!(
                f,
                "ancestor phasor sum is zero; cut-energy witness {witness:.6e} contradicts \
                 second-order stationarity"
            ),
            FailureReason::ExtensionViolation { child, witness } => write!(
                f,
                "child {child} subtree misaligned with ancestor sum (witness {witness:.6e})"
            ),
            FailureReason::SiblingsNotSynchronized { first, second } => {
                write!(f, "children {first} and {second} are not synchronized open twins")
            }
            FailureReason::ParentChildNotSynchronized { child, detail } => {
                write!(f, "node does not synchronize with child {child}: {detail}")
            }
            FailureReason::LeafLikeCheckFailed { deviation } => {
                write!(f, "direct leaf-like check failed (deviation {deviation:.3e})")
            }
            FailureReason::GlobalSyncCheckFailed { deviation } => {
                write!(f, "global synchronization cross-check failed (deviation {deviation:.3e})")
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeVerdict {
    Leaf,
    LeafLike,
    Failed,
}

/// Branch taken by the homogeneous-extension check for one child subtree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExtensionBranch {
    Aligned,
    ZeroSum,
    Violation,
    HypothesisError,
}

/// Evidence of the homogeneous-extension check for one child subtree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubtreeCheck {
    pub child: usize,
    pub subtree_size: usize,
    /// Phasor sum over the child's closed subtree.
    pub subtree_sum: Vec2,
    pub branch: ExtensionBranch,
    /// Inner product with the ancestor sum (aligned / violation branches).
    pub inner: Option<f64>,
    /// Quadratic-form witness (violation branch).
    pub witness: Option<f64>,
}

/// Effective open-twin strength of one child against the ancestor sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildStrength {
    pub child: usize,
    pub mu_effective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParentChildCheck {
    pub child: usize,
    pub ok: bool,
    pub detail: Option<String>,
}

/// Full evidence for one node of the induction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NodeEvidence {
    pub node: usize,
    pub depth: usize,
    pub verdict: NodeVerdict,
    /// Nodewise strength μ and equilibrium residual at this node.
    pub mu: f64,
    pub residual: f64,
    /// Phasor sum over the node and its ancestors (the alignment target of
    /// step 1); absent for leaves, which run no steps.
    pub ancestor_sum: Option<Vec2>,
    pub subtree_checks: Vec<SubtreeCheck>,
    pub sibling_strengths: Vec<ChildStrength>,
    pub max_child_pair_distance: Option<f64>,
    pub parent_child: Vec<ParentChildCheck>,
    pub failure: Option<FailureReason>,
}

/// One processed depth layer, deepest first.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LayerReport {
    pub depth: usize,
    pub nodes: Vec<NodeEvidence>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Overall {
    CertifiedSync,
    FailedAt { node: usize, reason: FailureReason },
}

/// A checkable trace of the downward induction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SyncCertificate {
    pub tree: RootedForest,
    pub state: PhaseState,
    pub layers: Vec<LayerReport>,
    pub overall: Overall,
}

impl SyncCertificate {
    pub fn is_certified(&self) -> bool {
        matches!(self.overall, Overall::CertifiedSync)
    }
}

/// Certifies that a second-order stationary state on the comparability
/// closure of `f` is synchronized, by running the induction from the
/// deepest layer to the root. Preconditions (closure equality, single tree,
/// second-order stationarity at `tols`) are errors; per-node lemma failures
/// are recorded in the certificate instead.
pub fn certify(
    g: &Graph,
    f: &RootedForest,
    s: &PhaseState,
    tols: &Tolerances,
) -> Result<SyncCertificate, CertifyError> {
    run_certify(g, f, s, tols, true)
}

/// Diagnostic variant that skips the closure-equality precondition so the
/// induction can be exercised on mismatched graph/skeleton pairs (negative
/// controls). Never returns `certified_sync` unless every check passes.
pub fn certify_forced(
    g: &Graph,
    f: &RootedForest,
    s: &PhaseState,
    tols: &Tolerances,
) -> Result<SyncCertificate, CertifyError> {
    run_certify(g, f, s, tols, false)
}

fn run_certify(
    g: &Graph,
    f: &RootedForest,
    s: &PhaseState,
    tols: &Tolerances,
    check_closure: bool,
) -> Result<SyncCertificate, CertifyError> {
    let n = g.n();
    if s.len() != n {
        return Err(CertifyError::LengthMismatch {
            expected: n,
            got: s.len(),
        });
    }
    if f.len() != n || (check_closure && f.comparability_closure() != *g) {
        return Err(CertifyError::ClosureMismatch);
    }
    let roots = f.roots();
    if roots.len() != 1 {
        return Err(CertifyError::NotSingleTree { roots });
    }

    let report = landscape::classify(g, s, tols);
    match report.verdict {
        Verdict::NonStationary => {
            return Err(CertifyError::NotStationary {
                grad_norm_exponent: decimal_exponent(report.grad_norm),
            })
        }
        Verdict::StrictSaddle => return Err(CertifyError::NotSecondOrder),
        Verdict::SospSync | Verdict::SospNonsync => {}
    }
    let strengths = report.strengths;

    let height = f.height();
    let depths: Vec<usize> = (0..n).map(|v| f.depth(v).expect("valid node")).collect();
    let mut failed = vec![false; n];
    let mut first_failure: Option<(usize, FailureReason)> = None;
    let mut layers = Vec::with_capacity(height + 1);

    for depth in (0..=height).rev() {
        let mut nodes = Vec::new();
        for node in (0..n).filter(|&v| depths[v] == depth) {
            let evidence = check_node(g, f, s, tols, &strengths, node, depth, &failed);
            if evidence.verdict == NodeVerdict::Failed {
                failed[node] = true;
                if first_failure.is_none() {
                    first_failure = Some((
                        node,
                        evidence.failure.clone().expect("failed node carries a reason"),
                    ));
                }
            }
            nodes.push(evidence);
        }
        layers.push(LayerReport { depth, nodes });
    }

    let overall = match first_failure {
        Some((node, reason)) => Overall::FailedAt { node, reason },
        None => {
            // Soundness cross-check: the root being leaf-like must mean the
            // whole state is synchronized.
            let deviation = energy::aligned_deviation(s);
            if deviation <= tols.sync {
                Overall::CertifiedSync
            } else {
                Overall::FailedAt {
                    node: roots[0],
                    reason: FailureReason::GlobalSyncCheckFailed { deviation },
                }
            }
        }
    };

    Ok(SyncCertificate {
        tree: f.clone(),
        state: s.clone(),
        layers,
        overall,
    })
}

fn decimal_exponent(x: f64) -> i32 {
    // Order of magnitude for error messages; keeps CertifyError Eq-able.
    let mut e = 0i32;
    let mut v = x.abs();
    if v == 0.0 {
        return i32::MIN;
    }
    while v < 1.0 && e > -330 {
        v *= 10.0;
        e -= 1;
    }
    while v >= 10.0 && e < 330 {
        v /= 10.0;
        e += 1;
    }
    e
}

#[allow(clippy::too_many_arguments)]
fn check_node(
    g: &Graph,
    f: &RootedForest,
    s: &PhaseState,
    tols: &Tolerances,
    strengths: &energy::Strengths,
    node: usize,
    depth: usize,
    failed: &[bool],
) -> NodeEvidence {
    let children: Vec<usize> = f.children(node).expect("valid node").to_vec();
    let mut evidence = NodeEvidence {
        node,
        depth,
        verdict: NodeVerdict::Leaf,
        mu: strengths.mu[node],
        residual: strengths.residual[node],
        ancestor_sum: None,
        subtree_checks: Vec::new(),
        sibling_strengths: Vec::new(),
        max_child_pair_distance: None,
        parent_child: Vec::new(),
        failure: None,
    };
    if children.is_empty() {
        return evidence;
    }
    evidence.verdict = NodeVerdict::LeafLike;

    let fail = |evidence: &mut NodeEvidence, reason: FailureReason| {
        evidence.verdict = NodeVerdict::Failed;
        evidence.failure = Some(reason);
    };

    // Inductive hypothesis: every node strictly below must have passed.
    for &d in &f.descendants(node).expect("valid node") {
        if failed[d] {
            fail(&mut evidence, FailureReason::ChildSubtreeFailed { node: d });
            return evidence;
        }
    }

    // Step 0: nodewise stability of the node and its children (the lemma's
    // standing hypothesis).
    for &v in core::iter::once(&node).chain(&children) {
        if strengths.residual[v] > tols.residual || strengths.mu[v] < -tols.eig {
            fail(
                &mut evidence,
                FailureReason::NodeUnstable {
                    node: v,
                    mu: strengths.mu[v],
                    residual: strengths.residual[v],
                },
            );
            return evidence;
        }
    }

    // The alignment target: phasors of the node and all its ancestors.
    let mut outer = vec![node];
    outer.extend(f.ancestors(node).expect("valid node"));
    let ancestor_sum = s.phasor_sum(outer.iter().copied());
    evidence.ancestor_sum = Some(ancestor_sum);

    // Step 1: each child subtree aligns with the ancestor sum. The zero-sum
    // branch is excluded via the cut-energy witness of the node's own
    // closed subtree.
    for &child in &children {
        let mut block = vec![child];
        block.extend(f.descendants(child).expect("valid node"));
        let check = twins::check_homogeneous_extension(g, s, &block, &outer, tols);
        match check {
            Err(e) => {
                evidence.subtree_checks.push(SubtreeCheck {
                    child,
                    subtree_size: block.len(),
                    subtree_sum: s.phasor_sum(block.iter().copied()),
                    branch: ExtensionBranch::HypothesisError,
                    inner: None,
                    witness: None,
                });
                fail(
                    &mut evidence,
                    FailureReason::ExtensionHypothesis {
                        child,
                        detail: e.to_string(),
                    },
                );
                return evidence;
            }
            Ok(ExtensionOutcome::Aligned { inner }) => {
                evidence.subtree_checks.push(SubtreeCheck {
                    child,
                    subtree_size: block.len(),
                    subtree_sum: s.phasor_sum(block.iter().copied()),
                    branch: ExtensionBranch::Aligned,
                    inner: Some(inner),
                    witness: None,
                });
            }
            Ok(ExtensionOutcome::ZeroSum { .. }) => {
                let mut closed_subtree = vec![node];
                closed_subtree.extend(f.descendants(node).expect("valid node"));
                let witness = cut_energy(g, s, &closed_subtree).unwrap_or(f64::NAN);
                evidence.subtree_checks.push(SubtreeCheck {
                    child,
                    subtree_size: block.len(),
                    subtree_sum: s.phasor_sum(block.iter().copied()),
                    branch: ExtensionBranch::ZeroSum,
                    inner: None,
                    witness: Some(witness),
                });
                fail(&mut evidence, FailureReason::AncestorSumZero { witness });
                return evidence;
            }
            Ok(ExtensionOutcome::ViolationWitness { quadratic_form, inner }) => {
                evidence.subtree_checks.push(SubtreeCheck {
                    child,
                    subtree_size: block.len(),
                    subtree_sum: s.phasor_sum(block.iter().copied()),
                    branch: ExtensionBranch::Violation,
                    inner: Some(inner),
                    witness: Some(quadratic_form),
                });
                fail(
                    &mut evidence,
                    FailureReason::ExtensionViolation {
                        child,
                        witness: quadratic_form,
                    },
                );
                return evidence;
            }
        }
    }

    // Step 2: the children are pairwise synchronized geometric open twins
    // with respect to the ancestor sum.
    for &child in &children {
        evidence.sibling_strengths.push(ChildStrength {
            child,
            mu_effective: energy::dot(ancestor_sum, s.phasor(child)),
        });
    }
    let mut max_pair = 0.0f64;
    for (i, &p) in children.iter().enumerate() {
        for &q in &children[i + 1..] {
            let d = energy::circular_distance(s.theta[p], s.theta[q]);
            if d > max_pair {
                max_pair = d;
            }
            let class = twins::classify_geometric_open(s, p, q, ancestor_sum, tols.sync);
            if class.case != Some(TwinCase::Synchronized) {
                evidence.max_child_pair_distance = Some(max_pair);
                fail(
                    &mut evidence,
                    FailureReason::SiblingsNotSynchronized { first: p, second: q },
                );
                return evidence;
            }
        }
    }
    evidence.max_child_pair_distance = Some(max_pair);

    // Step 3: the node synchronizes with each child (benign extra
    // neighbours: the other children's subtrees are the aligned extras).
    for &child in &children {
        match twins::check_benign_extra(g, s, node, child, tols) {
            BenignExtraOutcome::AppliesAndSyncs { .. } => {
                evidence.parent_child.push(ParentChildCheck {
                    child,
                    ok: true,
                    detail: None,
                });
            }
            BenignExtraOutcome::HypothesesFail { reason } => {
                evidence.parent_child.push(ParentChildCheck {
                    child,
                    ok: false,
                    detail: Some(reason.to_string()),
                });
                fail(
                    &mut evidence,
                    FailureReason::ParentChildNotSynchronized {
                        child,
                        detail: reason.to_string(),
                    },
                );
                return evidence;
            }
            BenignExtraOutcome::ConclusionViolated { gap } => {
                evidence.parent_child.push(ParentChildCheck {
                    child,
                    ok: false,
                    detail: Some(format!("gap {gap:.3e}")),
                });
                fail(
                    &mut evidence,
                    FailureReason::ParentChildNotSynchronized {
                        child,
                        detail: format!("phase gap {gap:.3e}"),
                    },
                );
                return evidence;
            }
        }
    }

    // Direct check that the steps add up to the leaf-like property.
    let leaf_like = is_leaf_like(f, s, node, tols.sync).expect("valid node");
    if !leaf_like {
        let deviation = f
            .descendants(node)
            .expect("valid node")
            .iter()
            .map(|&d| energy::circular_distance(s.theta[d], s.theta[node]))
            .fold(0.0, f64::max);
        fail(&mut evidence, FailureReason::LeafLikeCheckFailed { deviation });
    }
    evidence
}
