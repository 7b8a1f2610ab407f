use lorentzdist::causal::{
    gradient_causal_check, gradient_steep_check, operator_causal_check, operator_steep_check,
    predicted_spectrum, BOUNDARY_BAND_FACTOR, NSD_TOL,
};
use lorentzdist::clifford::{ChiralitySign, CliffordModule};
use lorentzdist::distance::{
    analytic_distance, bounding_grid, oracle_distance, pos_part, riemannian_baseline,
    steep_family_distance, OracleSettings, SteepFamily, SteepSettings, DEFAULT_MAX_RAPIDITY,
    SANDWICH_EPS,
};
use lorentzdist::linalg::{hermitian_deviation, hermitian_eigenvalues};
use lorentzdist::spacetime::{CovectorClass, CovectorSample, ScaleFactor, SpacetimeModel};
use proptest::prelude::*;

fn model(n: usize, flrw: bool, slope: f64) -> SpacetimeModel {
    if flrw {
        SpacetimeModel::flrw(
            n,
            ScaleFactor::Linear {
                slope,
                intercept: 0.0,
            },
            0.5,
            4.0,
        )
        .unwrap()
    } else {
        SpacetimeModel::minkowski(n).unwrap()
    }
}

/// Dimension, model and a covector sample inside the model's domain.
fn sample_strategy() -> impl Strategy<Value = (usize, SpacetimeModel, CovectorSample)> {
    (2usize..=6, any::<bool>(), 0.5f64..2.0).prop_flat_map(|(n, flrw, slope)| {
        let m = model(n, flrw, slope);
        let t = if flrw { 0.5..4.0 } else { -5.0..5.0 };
        (
            Just(n),
            Just(m),
            t,
            prop::collection::vec(-5.0f64..5.0, n - 1),
            prop::collection::vec(-3.0f64..3.0, n),
        )
            .prop_map(|(n, m, t, x, df)| {
                let mut point = vec![t];
                point.extend(x);
                (n, m, CovectorSample::new(point, df).unwrap())
            })
    })
}

fn build(n: usize) -> CliffordModule {
    CliffordModule::build(n, ChiralitySign::Plus).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn clifford_action_is_hermitian((n, m, s) in sample_strategy()) {
        let frame = m.frame_at(&s.point).unwrap();
        let a = build(n).clifford_action(&frame, &s.components).unwrap();
        prop_assert!(hermitian_deviation(&a) <= 1e-12);
    }

    #[test]
    fn spectrum_law((n, m, s) in sample_strategy()) {
        let cliff = build(n);
        let frame = m.frame_at(&s.point).unwrap();
        let eig = hermitian_eigenvalues(&cliff.clifford_action(&frame, &s.components).unwrap());
        let want = predicted_spectrum(&m, &s, cliff.fiber_dim()).unwrap();
        for (a, b) in eig.iter().zip(&want) {
            prop_assert!((a - b).abs() <= 1e-9, "{eig:?} vs {want:?}");
        }
    }

    #[test]
    fn routes_agree_off_the_boundary((n, m, s) in sample_strategy()) {
        let cliff = build(n);
        let band = BOUNDARY_BAND_FACTOR * NSD_TOL;
        let g = gradient_causal_check(&m, &s, NSD_TOL).unwrap();
        let o = operator_causal_check(&cliff, &m, &s, NSD_TOL).unwrap();
        if (g.causal_margin - NSD_TOL).abs() > band && (o.causal_margin - NSD_TOL).abs() > band {
            prop_assert_eq!(g.causal, o.causal);
        }
        let g = gradient_steep_check(&m, &s, NSD_TOL).unwrap();
        let o = operator_steep_check(&cliff, &m, &s, NSD_TOL).unwrap();
        if (g.steep_margin - NSD_TOL).abs() > band && (o.steep_margin - NSD_TOL).abs() > band {
            prop_assert_eq!(g.steep, o.steep);
        }
    }

    #[test]
    fn steep_implies_causal((n, m, s) in sample_strategy()) {
        let cliff = build(n);
        let g = gradient_steep_check(&m, &s, NSD_TOL).unwrap();
        if g.steep {
            prop_assert!(g.causal);
        }
        let o = operator_steep_check(&cliff, &m, &s, NSD_TOL).unwrap();
        if o.steep {
            prop_assert!(operator_causal_check(&cliff, &m, &s, NSD_TOL).unwrap().causal);
        }
    }

    #[test]
    fn chirality_flip_keeps_steep_verdicts((n, m, s) in sample_strategy()) {
        let plus = build(n);
        let minus = plus.with_flipped_chirality();
        let a = operator_steep_check(&plus, &m, &s, NSD_TOL).unwrap();
        let b = operator_steep_check(&minus, &m, &s, NSD_TOL).unwrap();
        prop_assert_eq!(a.steep, b.steep);
        prop_assert!((a.steep_margin - b.steep_margin).abs() <= 1e-12);
    }

    #[test]
    fn negating_covector_flips_orientation_only((_n, m, s) in sample_strategy()) {
        let a = m.classify_covector(&s).unwrap();
        let b = m.classify_covector(&s.negated()).unwrap();
        match (a, b) {
            (CovectorClass::Zero, CovectorClass::Zero) => {}
            (
                CovectorClass::NonZero { character: ca, orientation: oa },
                CovectorClass::NonZero { character: cb, orientation: ob },
            ) => {
                prop_assert_eq!(ca, cb);
                prop_assert_eq!(oa.flipped(), ob);
            }
            _ => prop_assert!(false, "zero class changed under negation"),
        }
    }

    #[test]
    fn pos_part_is_max_with_zero(x in -1e6f64..1e6) {
        prop_assert_eq!(pos_part(x), x.max(0.0));
    }

    #[test]
    fn riemannian_baseline_is_euclidean(
        p in prop::collection::vec(-5.0f64..5.0, 3),
        q in prop::collection::vec(-5.0f64..5.0, 3),
    ) {
        let exact = p.iter().zip(&q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        prop_assert!((riemannian_baseline(&p, &q).unwrap().value - exact).abs() <= 1e-9);
    }
}

/// Minkowski pair `(p, q)` with `q - p` anywhere in a box around the cone.
fn minkowski_pair(n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (
        prop::collection::vec(-1.0f64..1.0, n),
        0.2f64..2.0,
        prop::collection::vec(-1.5f64..1.5, n - 1),
    )
        .prop_map(|(p, dt, dx)| {
            let mut q = p.clone();
            q[0] += dt;
            for (qi, d) in q[1..].iter_mut().zip(dx) {
                *qi += d;
            }
            (p, q)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sandwich_and_zero_on_spacelike((p, q) in minkowski_pair(3), seed in 0u64..1000) {
        let m = SpacetimeModel::minkowski(3).unwrap();
        let exact = analytic_distance(&m, &p, &q).unwrap().value;
        let oracle = oracle_distance(&m, &p, &q, OracleSettings { seed, segments: 32, ..Default::default() })
            .unwrap()
            .value;
        let family = SteepFamily::boost(3, DEFAULT_MAX_RAPIDITY, bounding_grid(&m, &p, &q, 1.0, 3)).unwrap();
        let steep = steep_family_distance(&m, &family, &p, &q, SteepSettings { seed, ..Default::default() })
            .unwrap()
            .value;
        prop_assert!(oracle <= steep + SANDWICH_EPS, "oracle {oracle} steep {steep}");
        prop_assert!(oracle <= exact + 1e-9);
        if exact == 0.0 {
            prop_assert_eq!(oracle, 0.0);
            // near-null pairs need rapidities beyond the box; only check clear ones
            let dx = p[1..].iter().zip(&q[1..]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            if dx > 1.05 * (q[0] - p[0]) {
                prop_assert_eq!(steep, 0.0);
            }
        }
    }

    #[test]
    fn oracle_refinement_is_monotone((p, q) in minkowski_pair(2)) {
        let m = SpacetimeModel::minkowski(2).unwrap();
        let mut last = f64::NEG_INFINITY;
        for segments in [4usize, 8, 16, 32] {
            let v = oracle_distance(&m, &p, &q, OracleSettings { segments, ..Default::default() })
                .unwrap()
                .value;
            prop_assert!(v >= last - 1e-9, "segments {segments}: {v} < {last}");
            last = v;
        }
    }

    #[test]
    fn per_function_bound_in_flrw(
        t0 in 0.6f64..1.5,
        ratio in 1.3f64..2.5,
        x0 in -1.0f64..1.0,
        dx in -0.2f64..0.2,
        bound in 0.0f64..0.5,
    ) {
        let m = model(2, true, 1.0);
        let (p, q) = (vec![t0, x0], vec![t0 * ratio, x0 + dx]);
        let oracle = oracle_distance(&m, &p, &q, OracleSettings { segments: 32, ..Default::default() })
            .unwrap()
            .value;
        let family = SteepFamily::milne_boost(DEFAULT_MAX_RAPIDITY, bounding_grid(&m, &p, &q, 0.5, 4)).unwrap();
        for beta in [-bound, 0.0, bound, x0, x0 + dx] {
            let theta = [beta];
            if family.is_grid_steep(&m, &theta).unwrap() {
                let f = pos_part(family.value(&theta, &q) - family.value(&theta, &p));
                prop_assert!(oracle <= f + 1e-3, "beta {beta}: oracle {oracle} > {f}");
            }
        }
    }
}
