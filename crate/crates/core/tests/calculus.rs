//! Finite-difference oracles and structural identities for the calculus.
//!
//! The gradient is checked against central differences of the energy and
//! the Hessian against central differences of the gradient, on seeded
//! random (graph, state) pairs. The identities (zero component sums, gauge
//! invariance, Laplacian at sync) are asserted both on those pairs and as
//! property tests.

#![allow(clippy::needless_range_loop)]

use proptest::prelude::*;
use syncscape_core::energy::{
    self, aligned_deviation, energy, gradient, hessian, kuramoto_rhs, strengths, PhaseState,
};
use syncscape_core::graph::Graph;
use syncscape_core::landscape::random_state;

/// Small deterministic generator for test graphs/states (no external deps).
struct Lcg(u64);

impl Lcg {
    fn next_u64(&mut self) -> u64 {
        self.0 = self
            .0
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        self.0
    }

    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    fn range(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo) as u64) as usize
    }
}

/// Random connected-ish graph on n in [2, 12]: G(n, p) plus a random
/// spanning path to avoid isolated vertices dominating.
fn random_graph(rng: &mut Lcg) -> Graph {
    let n = rng.range(2, 13);
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.range(0, i), i));
    }
    let p = 0.15 + 0.5 * rng.next_f64();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.next_f64() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edge_list(n, &edges).unwrap()
}

fn random_angles(rng: &mut Lcg, n: usize) -> PhaseState {
    PhaseState::new(
        (0..n)
            .map(|_| (rng.next_f64() - 0.5) * 2.0 * std::f64::consts::TAU)
            .collect(),
    )
}

#[test]
fn gradient_matches_central_finite_differences() {
    let mut rng = Lcg(0x5eed_0001);
    const STEP: f64 = 1e-5;
    for _ in 0..50 {
        let g = random_graph(&mut rng);
        let s = random_angles(&mut rng, g.n());
        let grad = gradient(&g, &s).unwrap();
        let scale = grad.iter().map(|x| x.abs()).fold(1.0, f64::max);
        for i in 0..g.n() {
            let mut plus = s.clone();
            plus.theta[i] += STEP;
            let mut minus = s.clone();
            minus.theta[i] -= STEP;
            let fd = (energy(&g, &plus).unwrap() - energy(&g, &minus).unwrap()) / (2.0 * STEP);
            let rel = (fd - grad[i]).abs() / scale;
            assert!(rel < 1e-6, "component {i}: fd {fd} vs grad {}", grad[i]);
        }
    }
}

#[test]
fn hessian_matches_finite_differences_of_gradient() {
    let mut rng = Lcg(0x5eed_0002);
    const STEP: f64 = 1e-5;
    for _ in 0..50 {
        let g = random_graph(&mut rng);
        let n = g.n();
        let s = random_angles(&mut rng, n);
        let h = hessian(&g, &s).unwrap();
        let scale = h.iter().map(|x| x.abs()).fold(1.0, f64::max);
        for j in 0..n {
            let mut plus = s.clone();
            plus.theta[j] += STEP;
            let mut minus = s.clone();
            minus.theta[j] -= STEP;
            let gp = gradient(&g, &plus).unwrap();
            let gm = gradient(&g, &minus).unwrap();
            for i in 0..n {
                let fd = (gp[i] - gm[i]) / (2.0 * STEP);
                let rel = (fd - h[i * n + j]).abs() / scale;
                assert!(rel < 1e-5, "entry ({i},{j}): fd {fd} vs {}", h[i * n + j]);
            }
        }
    }
}

#[test]
fn structural_identities_on_random_pairs() {
    let mut rng = Lcg(0x5eed_0003);
    for _ in 0..50 {
        let g = random_graph(&mut rng);
        let n = g.n();
        let s = random_angles(&mut rng, n);

        // gradient · 1 = 0 and Hessian row sums = 0.
        let grad = gradient(&g, &s).unwrap();
        assert!(grad.iter().sum::<f64>().abs() < 1e-12);
        let h = hessian(&g, &s).unwrap();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| h[i * n + j]).sum();
            assert!(row.abs() < 1e-12);
            for j in 0..n {
                assert_eq!(h[i * n + j], h[j * n + i], "Hessian symmetry");
            }
        }

        // Gauge invariance of the energy.
        let c = (rng.next_f64() - 0.5) * 20.0;
        let e0 = energy(&g, &s).unwrap();
        let e1 = energy(&g, &s.rotated(c)).unwrap();
        assert!((e0 - e1).abs() < 1e-12, "gauge shift changed energy by {}", e0 - e1);

        // Energy range.
        assert!(e0 >= 0.0);
        assert!(e0 <= 2.0 * g.edge_count() as f64 + 1e-12);

        // The rhs is the negated gradient to the bit.
        let rhs = kuramoto_rhs(&g, &s).unwrap();
        for (a, b) in rhs.iter().zip(&grad) {
            assert_eq!(*a, -*b);
        }
    }
}

#[test]
fn hessian_at_sync_is_laplacian_exactly() {
    let mut rng = Lcg(0x5eed_0004);
    for _ in 0..20 {
        let g = random_graph(&mut rng);
        let n = g.n();
        let value = (rng.next_f64() - 0.5) * 10.0;
        let h = hessian(&g, &PhaseState::constant(n, value)).unwrap();
        for i in 0..n {
            for j in 0..n {
                let lap = if i == j {
                    g.degree(i) as f64
                } else if g.has_edge(i, j) {
                    -1.0
                } else {
                    0.0
                };
                assert_eq!(h[i * n + j], lap, "entry ({i},{j}) at constant state");
            }
        }
    }
}

/// Both directions of the equilibrium dichotomy under matched tolerances:
/// the per-node residual is |(∇E)_i|, so residuals and gradient components
/// vanish together.
#[test]
fn equilibrium_residuals_match_gradient() {
    let mut rng = Lcg(0x5eed_0005);
    for trial in 0..30 {
        let g = random_graph(&mut rng);
        let s = if trial % 3 == 0 {
            // Exactly stationary: a synchronized state.
            PhaseState::constant(g.n(), rng.next_f64())
        } else {
            random_angles(&mut rng, g.n())
        };
        let st = strengths(&g, &s).unwrap();
        let grad = gradient(&g, &s).unwrap();
        for i in 0..g.n() {
            assert!(
                (st.residual[i] - grad[i].abs()).abs() < 1e-10,
                "residual {} vs |grad| {}",
                st.residual[i],
                grad[i].abs()
            );
        }
        let grad_small = grad.iter().all(|x| x.abs() < 1e-10);
        let residual_small = st.residual.iter().all(|&r| r < 1e-10);
        assert_eq!(grad_small, residual_small);
    }
}

#[test]
fn seeded_states_are_uniform_on_the_circle() {
    // Spot check the survey's uniform draw: all angles in [0, 2pi) and the
    // first moment roughly centered.
    let s = random_state(10_000, 99, 0);
    assert!(s.theta.iter().all(|&t| (0.0..std::f64::consts::TAU).contains(&t)));
    let mean: f64 = s.theta.iter().sum::<f64>() / 10_000.0;
    assert!((mean - std::f64::consts::PI).abs() < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn prop_energy_gauge_invariant(
        seed in any::<u64>(),
        c in -30.0f64..30.0,
    ) {
        let mut rng = Lcg(seed);
        let g = random_graph(&mut rng);
        let s = random_angles(&mut rng, g.n());
        let e0 = energy(&g, &s).unwrap();
        let e1 = energy(&g, &s.rotated(c)).unwrap();
        prop_assert!((e0 - e1).abs() < 1e-12);
    }

    #[test]
    fn prop_energy_zero_iff_components_synchronized(seed in any::<u64>()) {
        let mut rng = Lcg(seed);
        let g = random_graph(&mut rng);
        // Assign each connected component a common random phase.
        let mut theta = vec![0.0; g.n()];
        for comp in g.connected_components() {
            let phase = (rng.next_f64() - 0.5) * 6.0;
            for v in comp {
                theta[v] = phase;
            }
        }
        let e = energy(&g, &PhaseState::new(theta)).unwrap();
        prop_assert_eq!(e, 0.0);
    }

    #[test]
    fn prop_deviation_gauge_invariant(
        seed in any::<u64>(),
        c in -30.0f64..30.0,
    ) {
        let mut rng = Lcg(seed);
        let n = rng.range(1, 10);
        let s = random_angles(&mut rng, n);
        let d0 = aligned_deviation(&s);
        let d1 = aligned_deviation(&s.rotated(c));
        prop_assert!((d0 - d1).abs() < 1e-9);
    }

    #[test]
    fn prop_wrap_angle_is_canonical(x in -1e4f64..1e4) {
        let w = energy::wrap_angle(x);
        prop_assert!(w > -std::f64::consts::PI && w <= std::f64::consts::PI);
        // Same point on the circle.
        let diff = (x - w) / std::f64::consts::TAU;
        prop_assert!((diff - diff.round()).abs() < 1e-9);
    }
}
