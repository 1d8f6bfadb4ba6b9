use proptest::prelude::*;
use rand::Rng;

use spectral_scale::faces::{block_form, cut_down, minimal_exposed_chain, normal_cone};
use spectral_scale::oracle::hull::PointCloudHull;
use spectral_scale::oracle::{oracle_support, random_hermitian, random_unit_ball_element, sample_unit_ball, seeded_rng};
use spectral_scale::scale::{support_pair, SweepTable};
use spectral_scale::spectral::decompose_relative;
use spectral_scale::structure::swept_faces;
use spectral_scale::{
    analyze_face, extreme_point_cloud, interval_projections, scale_dimension, support_value, Block,
    DirectionSampling, FaceHandle, FiniteAlgebra, HermitianOperator, OperatorTuple, SpectralPair,
};

/// Random tuple over `⊕ M_{d_j}`; `commuting` makes every operator diagonal.
fn build(seed: u64, dims: &[usize], n: usize, commuting: bool) -> OperatorTuple {
    let mut rng = seeded_rng(seed);
    let raw: Vec<f64> = dims.iter().map(|_| rng.random_range(0.2..1.0)).collect();
    let mass: f64 = raw.iter().zip(dims).map(|(w, &d)| w * d as f64).sum();
    let blocks = raw
        .iter()
        .zip(dims)
        .map(|(w, &d)| Block {
            dim: d,
            weight: w / mass,
        })
        .collect();
    let alg = FiniteAlgebra::new(blocks).unwrap();
    let ops = (0..n)
        .map(|_| {
            if commuting {
                let total: usize = dims.iter().sum();
                let diag: Vec<f64> = (0..total).map(|_| rng.random_range(-2.0..2.0)).collect();
                HermitianOperator::from_real_diagonal(dims, &diag).unwrap()
            } else {
                random_hermitian(dims, &mut rng)
            }
        })
        .collect();
    OperatorTuple::new(alg, ops).unwrap()
}

fn tuples_up_to(max_n: usize) -> impl Strategy<Value = OperatorTuple> {
    (any::<u64>(), prop::collection::vec(1usize..=3, 1..=3), 1usize..=max_n, any::<bool>())
        .prop_map(|(seed, dims, n, commuting)| build(seed, &dims, n, commuting))
}

fn tuples() -> impl Strategy<Value = OperatorTuple> {
    tuples_up_to(3)
}

/// A pair whose `s` is an eigenvalue of `b_t`, so that `p⁻ ≠ p⁺`.
fn tuple_and_eigen_pair() -> impl Strategy<Value = (OperatorTuple, SpectralPair)> {
    tuples().prop_flat_map(|t| {
        let n = t.n();
        (Just(t), direction(n), 0.0f64..1.0).prop_map(|(t, dir, u)| {
            let bt = t.linear_combination(&dir).unwrap();
            let ev = decompose_relative(t.algebra(), &bt, t.tolerances()).unwrap().eigenvalues();
            let s = ev[((u * ev.len() as f64) as usize).min(ev.len() - 1)];
            (t, SpectralPair::new(s, dir).unwrap())
        })
    })
}

fn direction(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, n).prop_filter("nonzero", |t| t.iter().map(|v| v * v).sum::<f64>() > 1e-4)
}

fn tuple_and_pair() -> impl Strategy<Value = (OperatorTuple, SpectralPair)> {
    tuples().prop_flat_map(|t| {
        let n = t.n();
        (Just(t), direction(n), -3.0f64..3.0, any::<bool>()).prop_map(|(t, dir, s, at_eigen)| {
            let s = if at_eigen {
                let bt = t.linear_combination(&dir).unwrap();
                let ev = decompose_relative(t.algebra(), &bt, t.tolerances()).unwrap().eigenvalues();
                ev[((s + 3.0) / 6.0 * ev.len() as f64) as usize % ev.len()]
            } else {
                s
            };
            let pair = SpectralPair::new(s, dir).unwrap();
            (t, pair)
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn eigenprojections_resolve_the_identity((t, pair) in tuple_and_pair()) {
        let bt = t.linear_combination(&pair.t).unwrap();
        let info = decompose_relative(t.algebra(), &bt, t.tolerances()).unwrap();
        let mut sum = t.algebra().zero();
        for (i, c) in info.clusters().iter().enumerate() {
            prop_assert!(c.projection.is_projection(1e-8));
            for d in &info.clusters()[i + 1..] {
                prop_assert!(c.projection.sandwich(&d.projection).max_norm() <= 1e-8);
            }
            sum = sum.plus(&c.projection);
        }
        prop_assert!(sum.max_abs_diff(&t.algebra().identity()) <= 1e-8);
        prop_assert!(info.reconstruct().max_abs_diff(&bt) <= 1e-8);
    }

    #[test]
    fn interval_projections_commute_and_grow((t, pair) in tuple_and_pair(), ds in 0.0f64..2.0) {
        let bt = t.linear_combination(&pair.t).unwrap();
        let iv = interval_projections(&t, &pair).unwrap();
        prop_assert!(iv.lower.is_below(&iv.upper, 1e-8));
        prop_assert!(bt.commutator_norm(&iv.lower) <= 1e-8);
        prop_assert!(bt.commutator_norm(&iv.upper) <= 1e-8);
        let later = interval_projections(&t, &SpectralPair::new(pair.s + ds, pair.t.clone()).unwrap()).unwrap();
        prop_assert!(iv.upper.is_below(&later.upper, 1e-8));
    }

    #[test]
    fn positive_scaling_keeps_projections((t, pair) in tuple_and_pair(), mu in 0.1f64..10.0) {
        let a = interval_projections(&t, &pair).unwrap();
        let b = interval_projections(&t, &pair.scaled(mu)).unwrap();
        prop_assert!(a.approx_eq(&b, 1e-8));
    }

    #[test]
    fn support_touches_and_contains((t, pair) in tuple_and_pair(), seed in any::<u64>()) {
        let (plus, minus) = support_pair(&t, &pair).unwrap();
        prop_assert!((plus - minus).abs() <= 1e-8);
        let iv = interval_projections(&t, &pair).unwrap();
        let u = pair.normal();
        for p in [&iv.lower, &iv.upper] {
            let x = t.psi(p).unwrap();
            prop_assert!((x.dot(&u) - plus).abs() <= 1e-8);
        }
        for x in sample_unit_ball(&t, 200, seed) {
            prop_assert!(x.dot(&u) >= plus - 1e-8);
        }
        // −α(s, t) = h_B(s, −t)
        let neg: Vec<f64> = u.iter().map(|v| -v).collect();
        prop_assert!((oracle_support(&t, &neg).unwrap() + plus).abs() <= 1e-9);
    }

    #[test]
    fn cloud_satisfies_every_sampled_halfspace(t in tuples()) {
        let sampling = DirectionSampling::with_count(24);
        let table = SweepTable::build(&t, &sampling).unwrap();
        let cloud = extreme_point_cloud(&t, &sampling).unwrap();
        for pair in table.pairs().iter().step_by(3) {
            let alpha = support_value(&t, pair).unwrap();
            let u = pair.normal();
            for e in &cloud.points {
                prop_assert!(e.point.dot(&u) >= alpha - 1e-8);
            }
        }
    }

    #[test]
    fn cut_down_reconstructs((t, pair) in tuple_and_eigen_pair(), seed in any::<u64>()) {
        let iv = interval_projections(&t, &pair).unwrap();
        prop_assert!(!iv.is_point(1e-8));
        let cd = cut_down(&t, &iv).unwrap();
        prop_assert!((cd.tuple.algebra().trace(&cd.tuple.algebra().identity()).unwrap() - 1.0).abs() <= 1e-12);
        let mut rng = seeded_rng(seed);
        for _ in 0..20 {
            let x = random_unit_ball_element(&cd.tuple.algebra().dims(), &mut rng);
            let direct = t.psi(&iv.lower.plus(&cd.embed(&x))).unwrap();
            prop_assert!(cd.reconstruct(&x).max_abs_diff(&direct) <= 1e-8);
        }
    }

    #[test]
    fn face_analysis_invariants(t in tuples()) {
        let table = SweepTable::build(&t, &DirectionSampling::with_count(16)).unwrap();
        for f in swept_faces(&t, &table).into_iter().take(12) {
            let handle = FaceHandle::new(f.interval.clone());
            // degree bound, block form, centrality and gap soundness are
            // checked inside and reported as errors
            let r = analyze_face(&t, &handle, &table).unwrap();
            prop_assert!(r.degree + r.dimension <= t.n() + 1);
            for m in &r.cone.members {
                prop_assert!(block_form(&t, &f.interval, m).unwrap().holds(1e-7));
            }
            if r.centrality.detected {
                prop_assert!(r.centrality.commutator_norm() <= 1e-6);
                prop_assert!(r.dimension <= 1);
            }
            for g in &r.gaps {
                let bt = t.linear_combination(&g.t).unwrap();
                let ev = decompose_relative(t.algebra(), &bt, t.tolerances()).unwrap().eigenvalues();
                prop_assert!(ev.iter().all(|&l| l <= g.s1 + 1e-8 || l >= g.s2 - 1e-8));
                prop_assert_eq!(r.dimension, 0);
            }
        }
    }

    #[test]
    fn chains_are_nested(t in tuples()) {
        let sampling = DirectionSampling::with_count(16);
        let table = SweepTable::build(&t, &sampling).unwrap();
        for f in swept_faces(&t, &table).into_iter().take(6) {
            let chain = minimal_exposed_chain(&t, &f.interval, &sampling).unwrap();
            prop_assert!(chain.len() <= t.n() + 1);
            for w in chain.windows(2) {
                prop_assert!(w[0].interval.contains(&w[1].interval, 1e-8));
            }
            prop_assert!(chain.last().unwrap().interval.approx_eq(&f.interval, 1e-6));
        }
    }

    #[test]
    fn hull_contains_points_and_support_is_sublinear(t in tuples_up_to(2), seed in any::<u64>()) {
        let pts = sample_unit_ball(&t, 300, seed);
        let hull = PointCloudHull::new(pts).unwrap();
        prop_assert!(hull.max_violation() <= 1e-9);
        let mut rng = seeded_rng(seed ^ 7);
        for _ in 0..20 {
            let u: Vec<f64> = (0..=t.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let v: Vec<f64> = (0..=t.n()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let w: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
            prop_assert!(hull.support(&w) <= hull.support(&u) + hull.support(&v) + 1e-8);
            prop_assert!(hull.support(&u) <= oracle_support(&t, &u).unwrap() + 1e-9);
        }
    }

    #[test]
    fn affine_relations_flatten_the_scale(seed in any::<u64>(), a in -2.0f64..2.0, c in -2.0f64..2.0) {
        // b₂ = a·b₁ + c·1
        let base = build(seed, &[2, 1], 1, false);
        let b1 = base.operator(0).clone();
        let b2 = b1.scaled(a).plus(&base.algebra().identity().scaled(c));
        let t = OperatorTuple::new(base.algebra().clone(), vec![b1, b2]).unwrap();
        let dim = scale_dimension(&t).unwrap();
        prop_assert_eq!(dim.relations.len(), 1);
        prop_assert_eq!(dim.dimension, 2);
        let rel = &dim.relations[0];
        for sign in [1.0, -1.0] {
            let pair = SpectralPair::new(sign * rel.s, rel.t.iter().map(|v| sign * v).collect()).unwrap();
            let alpha = support_value(&t, &pair).unwrap();
            // B lies on the plane: the support value is zero on both sides
            prop_assert!(alpha.abs() <= 1e-8);
            let cone = normal_cone(&t, &interval_projections(&t, &pair).unwrap(), &SweepTable::build(&t, &DirectionSampling::with_count(8)).unwrap());
            prop_assert!(cone.is_err());
        }
    }
}
