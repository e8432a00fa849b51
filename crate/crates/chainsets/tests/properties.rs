//! Property-based and structural invariants of the library: algebraic
//! identities of the vector fields, geometry of the sphere embedding, and
//! monotonicity / symmetry / determinism of the transition-graph engine.

use chainsets::compactification::{
    antipode, embed_h, h_inverse, max_metric, sphere_field, sphere_integrate, sphere_metric,
    SpherePoint,
};
use chainsets::engine::{
    build_covering, build_transition_graph, chain_control_sets, projective_quotient, sphere_flow,
    strong_chain_ladder, AntipodalClass, DomainSpec, JumpSpec, TransitionGraph, Weight,
};
use chainsets::scenarios;
use chainsets::systems::{integrate, AffineSystem, ControlRange, ControlSignal};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

fn vec_strategy(n: usize, bound: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-bound..bound, n)
}

fn system_strategy(n: usize, m: usize) -> impl Strategy<Value = AffineSystem> {
    let mats = prop::collection::vec(vec_strategy(n * n, 2.0), m + 1);
    let offs = prop::collection::vec(vec_strategy(n, 2.0), m + 1);
    (mats, offs).prop_map(move |(mats, offs)| {
        let matrices = mats
            .into_iter()
            .map(|v| DMatrix::from_row_slice(n, n, &v))
            .collect();
        let offsets = offs.into_iter().map(DVector::from_vec).collect();
        let omega = ControlRange::new(vec![-1.0; m], vec![1.0; m]).unwrap();
        AffineSystem::new(matrices, offsets, omega).unwrap()
    })
}

fn sphere_point_strategy(dim: usize) -> impl Strategy<Value = SpherePoint> {
    vec_strategy(dim + 1, 1.0).prop_filter_map("nonzero", |v| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm < 1e-3 {
            None
        } else {
            SpherePoint::from_slice(&v).ok()
        }
    })
}

// ---------------------------------------------------------------------------
// Vector-field algebra
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// The control enters the right-hand side affinely: subtracting the
    /// drift, the field is additive in u.
    #[test]
    fn field_is_affine_in_the_control(
        sys in system_strategy(3, 2),
        x in vec_strategy(3, 3.0),
        u in vec_strategy(2, 1.0),
        v in vec_strategy(2, 1.0),
    ) {
        let x = DVector::from_vec(x);
        let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
        let f0 = sys.field(&x, &[0.0, 0.0]);
        let lhs = sys.field(&x, &sum) - &f0;
        let rhs = (sys.field(&x, &u) - &f0) + (sys.field(&x, &v) - &f0);
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }

    /// The extension appends a coordinate whose derivative vanishes, so the
    /// bilinear flow preserves the final coordinate of the initial point.
    #[test]
    fn extended_flow_preserves_last_coordinate(
        sys in system_strategy(2, 1),
        x in vec_strategy(2, 2.0),
        c in -2.0f64..2.0,
        u in -1.0f64..1.0,
    ) {
        let ext = sys.extend();
        let mut z = x.clone();
        z.push(c);
        let z0 = DVector::from_vec(z);
        let signal = ControlSignal::constant_unchecked(vec![u]);
        let z1 = integrate(&|p: &DVector<f64>, uu: &[f64]| ext.field(p, uu),
                           &z0, &signal, 0.0, 0.5, 1e-2).unwrap();
        prop_assert!((z1[2] - c).abs() < 1e-12);
    }

    /// Integrating over [0, T] equals integrating [0, T/2] then [T/2, T]
    /// when the step divides both halves.
    #[test]
    fn flow_is_consistent_under_splitting(
        sys in system_strategy(2, 1),
        x in vec_strategy(2, 2.0),
        u in -1.0f64..1.0,
    ) {
        let signal = ControlSignal::constant_unchecked(vec![u]);
        let f = |p: &DVector<f64>, uu: &[f64]| sys.field(p, uu);
        let x0 = DVector::from_vec(x);
        let whole = integrate(&f, &x0, &signal, 0.0, 1.0, 1.0 / 128.0).unwrap();
        let half = integrate(&f, &x0, &signal, 0.0, 0.5, 1.0 / 128.0).unwrap();
        let split = integrate(&f, &half, &signal, 0.5, 1.0, 1.0 / 128.0).unwrap();
        prop_assert!((whole - split).amax() < 1e-8);
    }
}

/// RK4 halving the step should shrink the error by roughly 2⁴ = 16.
/// Measured on ẋ = −x, x(0) = 1, whose time-1 value is e⁻¹.
#[test]
fn integrator_shows_fourth_order_convergence() {
    let sys = scalar_decay();
    let signal = ControlSignal::constant_unchecked(vec![0.0]);
    let f = |p: &DVector<f64>, u: &[f64]| sys.field(p, u);
    let x0 = DVector::from_element(1, 1.0);
    let exact = (-1.0f64).exp();
    let err = |h: f64| {
        (integrate(&f, &x0, &signal, 0.0, 1.0, h).unwrap()[0] - exact).abs()
    };
    let ratio = err(1.0 / 16.0) / err(1.0 / 32.0);
    assert!(
        (12.0..20.0).contains(&ratio),
        "error ratio {ratio} not consistent with fourth order"
    );
}

fn scalar_decay() -> AffineSystem {
    AffineSystem::new(
        vec![
            DMatrix::from_row_slice(1, 1, &[-1.0]),
            DMatrix::from_row_slice(1, 1, &[0.0]),
        ],
        vec![DVector::zeros(1), DVector::zeros(1)],
        ControlRange::new(vec![-1.0], vec![1.0]).unwrap(),
    )
    .unwrap()
}

// ---------------------------------------------------------------------------
// Sphere embedding geometry
// ---------------------------------------------------------------------------

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// The embedding into the open northern hemisphere is 2-Lipschitz from
    /// the max norm on the plane to the max-coordinate metric on the sphere.
    #[test]
    fn embedding_is_two_lipschitz(
        x in vec_strategy(3, 10.0),
        y in vec_strategy(3, 10.0),
    ) {
        let hx = embed_h(&DVector::from_vec(x.clone())).unwrap();
        let hy = embed_h(&DVector::from_vec(y.clone())).unwrap();
        let planar = max_metric(&x, &y);
        prop_assert!(sphere_metric(&hx, &hy) <= 2.0 * planar + 1e-12);
    }

    /// Leaving and re-entering the chart is the identity away from infinity.
    #[test]
    fn embedding_round_trips(x in vec_strategy(3, 50.0)) {
        let xv = DVector::from_vec(x);
        let back = h_inverse(&embed_h(&xv).unwrap()).unwrap();
        let scale = 1.0 + xv.amax();
        prop_assert!((back - &xv).amax() / scale < 1e-10);
    }

    /// The projected field is tangent to the sphere: orthogonal to s.
    #[test]
    fn projected_field_is_tangent(
        sys in system_strategy(2, 1),
        s in sphere_point_strategy(2),
        u in -1.0f64..1.0,
    ) {
        let ext = sys.extend();
        let f = sphere_field(&ext, &s, &[u]);
        prop_assert!(s.coords().dot(&f).abs() < 1e-12);
    }

    /// The field commutes with the antipodal map, bit for bit.
    #[test]
    fn projected_field_is_antipodally_equivariant(
        sys in system_strategy(2, 1),
        s in sphere_point_strategy(2),
        u in -1.0f64..1.0,
    ) {
        let ext = sys.extend();
        let f_plus = sphere_field(&ext, &s, &[u]);
        let f_minus = sphere_field(&ext, &antipode(&s), &[u]);
        for i in 0..f_plus.len() {
            prop_assert_eq!(f_plus[i], -f_minus[i]);
        }
    }

    /// Trajectories never cross the equator, so the hemisphere sign of the
    /// final coordinate is preserved along the flow.
    #[test]
    fn sphere_flow_preserves_hemisphere_sign(
        sys in system_strategy(2, 1),
        x in vec_strategy(2, 3.0),
        u in -1.0f64..1.0,
    ) {
        let ext = sys.extend();
        let s0 = embed_h(&DVector::from_vec(x)).unwrap();
        let signal = ControlSignal::constant_unchecked(vec![u]);
        let s1 = sphere_integrate(&ext, &s0, &signal, 0.0, 1.0, 1e-2).unwrap();
        prop_assert!(s1.coords()[2] >= -1e-9);
    }
}

// ---------------------------------------------------------------------------
// Engine invariants (deterministic; a shared small sphere graph)
// ---------------------------------------------------------------------------

fn shear_graph(eps: f64, depth: usize) -> TransitionGraph {
    let sc = scenarios::by_name("shear_flow").unwrap();
    let covering = build_covering(DomainSpec::Sphere { dim: 2 }, depth).unwrap();
    let ext = sc.system.extend();
    let flow = sphere_flow(&ext, sc.t_chain, 2e-2);
    build_transition_graph(
        &covering,
        &flow,
        sc.t_chain,
        &sc.system.omega().default_samples(),
        &JumpSpec::Constant(eps),
        5,
        0,
    )
    .unwrap()
}

/// Growing the jump radius only adds edges, and every chain set computed
/// with the smaller radius sits inside one computed with the larger radius.
#[test]
fn chain_sets_grow_monotonically_with_eps() {
    let small = shear_graph(0.05, 4);
    let large = shear_graph(0.2, 4);
    for (a, dests) in small.edges.iter().enumerate() {
        for &b in dests {
            assert!(large.has_edge(a, b), "edge {a}->{b} lost when eps grew");
        }
    }
    let sets_small = chain_control_sets(&small);
    let sets_large = chain_control_sets(&large);
    for s in &sets_small {
        let contained = sets_large
            .iter()
            .any(|t| s.boxes.iter().all(|b| t.boxes.binary_search(b).is_ok()));
        assert!(contained, "a small-eps chain set escaped every large-eps set");
    }
}

/// The same monotonicity holds for weighted jumps as δ decreases.
#[test]
fn weighted_edges_shrink_as_delta_shrinks() {
    let sc = scenarios::by_name("shear_flow").unwrap();
    let covering = build_covering(DomainSpec::Sphere { dim: 2 }, 4).unwrap();
    let ext = sc.system.extend();
    let flow = sphere_flow(&ext, sc.t_chain, 2e-2);
    let build = |delta: f64| {
        build_transition_graph(
            &covering,
            &flow,
            sc.t_chain,
            &sc.system.omega().default_samples(),
            &JumpSpec::Weighted {
                delta,
                weight: Weight::EquatorHeight,
            },
            5,
            0,
        )
        .unwrap()
    };
    let tight = build(0.1);
    let loose = build(0.3);
    for (a, dests) in tight.edges.iter().enumerate() {
        for &b in dests {
            assert!(loose.has_edge(a, b), "edge {a}->{b} lost when delta grew");
        }
    }
}

/// Refining the grid keeps the computed sets near the coarse ones: every box
/// of a refined chain set lies within one coarse-box diameter of a coarse set.
#[test]
fn refinement_stays_near_the_coarse_answer() {
    let sc = scenarios::by_name("scalar_hyperbolic").unwrap();
    let run = |depth: usize| {
        let covering = build_covering(DomainSpec::euclidean(&sc.window), depth).unwrap();
        let flow = chainsets::engine::euclidean_flow(&sc.system, sc.t_chain, 1e-2);
        let g = build_transition_graph(
            &covering,
            &flow,
            sc.t_chain,
            &sc.system.omega().default_samples(),
            &JumpSpec::Constant(sc.eps),
            3,
            0,
        )
        .unwrap();
        let sets = chain_control_sets(&g);
        (g, sets)
    };
    let (coarse_g, coarse_sets) = run(5);
    let (fine_g, fine_sets) = run(6);
    let slack = coarse_g.covering.max_diameter();
    for fs in &fine_sets {
        for &b in &fs.boxes {
            let center = &fine_g.covering.boxes[b].center;
            let near = coarse_sets.iter().flat_map(|s| &s.boxes).any(|&cb| {
                coarse_g.covering.boxes[cb].distance(center) <= slack
            });
            assert!(near, "refined box {b} drifted from the coarse sets");
        }
    }
}

/// On the full sphere the graph is exactly symmetric under the antipodal
/// involution of boxes.
#[test]
fn transition_graph_is_antipodally_symmetric() {
    let g = shear_graph(0.1, 4);
    for (a, dests) in g.edges.iter().enumerate() {
        let pa = g.covering.antipodal_pair(a).unwrap();
        for &b in dests {
            let pb = g.covering.antipodal_pair(b).unwrap();
            assert!(g.has_edge(pa, pb), "antipodal image of {a}->{b} missing");
        }
    }
}

/// Counting chain sets downstairs matches the antipodal classification
/// upstairs: each self-symmetric set descends to one projective set, each
/// symmetric pair descends to one.
#[test]
fn projective_quotient_set_count_matches_classification() {
    let g = shear_graph(0.1, 4);
    let mut sets = chain_control_sets(&g);
    for i in 0..sets.len() {
        let c = chainsets::engine::antipodal_classification(&g, &sets, i).unwrap();
        sets[i].antipodal_class = c;
    }
    let ones = sets
        .iter()
        .filter(|s| matches!(s.antipodal_class, AntipodalClass::One))
        .count();
    let twos = sets
        .iter()
        .filter(|s| matches!(s.antipodal_class, AntipodalClass::Two { .. }))
        .count();
    assert_eq!(twos % 2, 0, "paired sets must come in pairs");
    let q = projective_quotient(&g).unwrap();
    let q_sets = chain_control_sets(&q);
    assert_eq!(q_sets.len(), ones + twos / 2);
}

/// No box is a dead end: every source has an outgoing edge or escapes.
#[test]
fn every_box_has_an_outgoing_edge_or_a_sink_edge() {
    let g = shear_graph(0.1, 4);
    for (a, dests) in g.edges.iter().enumerate() {
        assert!(
            !dests.is_empty() || g.sink_edges.binary_search(&a).is_ok(),
            "box {a} has no successor and no sink edge"
        );
    }
}

/// The strong-chain ladder intersects components across levels, so every
/// survivor is contained in some single-level component at the tightest δ.
#[test]
fn ladder_survivors_sit_inside_the_tightest_level() {
    let sc = scenarios::by_name("shear_flow").unwrap();
    let covering = build_covering(DomainSpec::Sphere { dim: 2 }, 4).unwrap();
    let ext = sc.system.extend();
    let flow = sphere_flow(&ext, sc.t_chain, 2e-2);
    let samples = sc.system.omega().default_samples();
    let deltas = [0.5, 0.2, 0.1];
    let outcome = strong_chain_ladder(
        &covering,
        &flow,
        sc.t_chain,
        Weight::EquatorHeight,
        &deltas,
        &samples,
        5,
        0,
    )
    .unwrap();
    let tight = build_transition_graph(
        &covering,
        &flow,
        sc.t_chain,
        &samples,
        &JumpSpec::Weighted {
            delta: *deltas.last().unwrap(),
            weight: Weight::EquatorHeight,
        },
        5,
        0,
    )
    .unwrap();
    let tight_sets = chain_control_sets(&tight);
    for s in &outcome.survivors {
        let inside = tight_sets
            .iter()
            .any(|t| s.boxes.iter().all(|b| t.boxes.binary_search(b).is_ok()));
        assert!(inside, "a ladder survivor is not inside any tightest-level set");
    }
}

/// Graph construction is deterministic: one worker thread and eight worker
/// threads produce identical edges, witnesses, and chain sets.
#[test]
fn graph_is_identical_across_thread_counts() {
    let build_in_pool = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| shear_graph(0.1, 4))
    };
    let g1 = build_in_pool(1);
    let g8 = build_in_pool(8);
    assert_eq!(g1.edges, g8.edges);
    assert_eq!(g1.sink_edges, g8.sink_edges);
    assert_eq!(g1.sink_events, g8.sink_events);
    let s1: Vec<Vec<usize>> = chain_control_sets(&g1).into_iter().map(|s| s.boxes).collect();
    let s8: Vec<Vec<usize>> = chain_control_sets(&g8).into_iter().map(|s| s.boxes).collect();
    assert_eq!(s1, s8);
}
