//! Energy landscape of the homogeneous Kuramoto model on graphs.
//!
//! Each vertex of an undirected graph carries a phase θᵢ on the unit circle,
//! and adjacent phases are coupled through the energy
//!
//!   E(θ) = Σ_{(i,j) ∈ E} (1 − cos(θᵢ − θⱼ)),
//!
//! whose gradient flow is the homogeneous Kuramoto model
//! dθᵢ/dt = −Σⱼ Aᵢⱼ sin(θᵢ − θⱼ). A graph is *globally synchronizing* when
//! every second-order stationary point of E is a fully synchronized state.
//!
//! This crate provides the machinery to study that question numerically at
//! desk scale:
//!
//! - [`graph`]: dense undirected graphs, constructive families (threshold
//!   sequences, complete split / bipartite), and quasi-threshold recognition
//!   with an independent trivially-perfect oracle;
//! - [`skeleton`]: rooted forests, comparability closures, caterpillars from
//!   threshold sequences, and recovery of the tree skeleton of a
//!   quasi-threshold graph;
//! - [`energy`]: exact energy / gradient / Hessian / phasor strengths;
//! - [`dynamics`]: monotone RK4 integration of the gradient flow;
//! - [`landscape`]: Newton refinement, gauge-restricted second-order
//!   classification, and seeded multistart surveys;
//! - [`twins`]: structural and geometric twin detection with the
//!   instability-witness checks attached to them;
//! - [`certifier`]: the layer-by-layer leaf-like propagation argument, run
//!   numerically to certify that a second-order stationary point on a
//!   quasi-threshold graph is synchronized;
//! - [`linalg`]: the small dense symmetric eigensolver and LU solver backing
//!   the above.
//!
//! The crate is `no_std` (with `alloc`); all I/O, file formats and the CLI
//! live in the companion `syncscape` crate.

#![no_std]
// Dense numeric kernels index into row-major buffers throughout.
#![allow(clippy::needless_range_loop)]

extern crate alloc;

pub mod certifier;
pub mod dynamics;
pub mod energy;
pub mod graph;
pub mod landscape;
pub mod linalg;
pub mod skeleton;
pub mod twins;

pub use energy::PhaseState;
pub use graph::Graph;
pub use skeleton::RootedForest;

use serde::{Deserialize, Serialize};

/// Tolerance knobs shared by classification, refinement and certification.
///
/// The defaults are spaced roughly two orders of magnitude apart so that a
/// state passing a tighter test cannot be misread by a looser one:
/// `newton` < `grad` < `residual` < `eig` < `zero_vec` < `sync`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tolerances {
    /// Gradient-norm threshold below which a state counts as stationary.
    pub grad: f64,
    /// Slack on restricted-Hessian eigenvalues when testing positive
    /// semidefiniteness; eigenvalues in (−eig, eig) flag a degenerate case.
    pub eig: f64,
    /// Maximum angular deviation from the circular mean for a state to count
    /// as synchronized.
    pub sync: f64,
    /// Norm threshold under which a phasor sum counts as the zero vector in
    /// the case splits of the twin lemmas and the certifier.
    pub zero_vec: f64,
    /// Per-node equilibrium residual allowed when checking nodewise
    /// stability hypotheses.
    pub residual: f64,
    /// Target gradient norm for Newton refinement.
    pub newton: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            grad: 1e-10,
            eig: 1e-8,
            sync: 1e-6,
            zero_vec: 1e-7,
            residual: 1e-8,
            newton: 1e-12,
        }
    }
}
