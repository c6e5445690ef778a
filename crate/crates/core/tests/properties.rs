use ksplit_core::czd::cz_decompose;
use ksplit_core::ksplit::{majorant, split_inf, split_inf_traced, SplitConfig, SplitWeights};
use ksplit_core::oracle::{solve, OracleProblem, SolverSettings};
use ksplit_core::random::{random_instance, trial_rng, trig_poly_1d, trig_poly_2d, weight_1d, weight_2d, InstanceSpec};
use ksplit_core::spectral::{framed_project, project_cone, Frame, SpectralCone};
use ksplit_core::torus::Grid1D;
use ksplit_core::weights::{ap_constant, ArcFamily, Weight1D, Weight2D};
use ksplit_core::Complex64;
use proptest::prelude::*;

fn grid(n: usize) -> Grid1D {
    Grid1D::new(n).unwrap()
}

fn cone() -> impl Strategy<Value = SpectralCone> {
    (0..SpectralCone::ALL.len(), any::<bool>()).prop_map(|(i, c)| {
        let base = SpectralCone::ALL[i];
        if c {
            base.complemented()
        } else {
            base
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn projections_are_complementary(seed in any::<u64>(), c in cone()) {
        let g = grid(16);
        let f = trig_poly_2d(&mut trial_rng(seed, 0), g, g, 8, None);
        let p = project_cone(&f, c);
        let q = project_cone(&f, c.complemented());
        prop_assert!(project_cone(&p, c).max_diff(&p) <= 1e-12 * f.max_abs());
        prop_assert!((&p + &q).max_diff(&f) <= 1e-12 * f.max_abs());
    }

    #[test]
    fn framed_projection_is_idempotent(seed in any::<u64>()) {
        let g = grid(16);
        let f = trig_poly_2d(&mut trial_rng(seed, 0), g, g, 8, None);
        let u = Frame::from_weight(&weight_2d(&mut trial_rng(seed, 1), g, g, 3, 1.0));
        let once = framed_project(&f, &u, SpectralCone::P).unwrap();
        let twice = framed_project(&once, &u, SpectralCone::P).unwrap();
        prop_assert!(twice.max_diff(&once) <= 1e-10 * once.max_abs().max(1e-300));
    }

    #[test]
    fn cz_parts_add_up(seed in any::<u64>(), level in 0.2f64..8.0) {
        let g = grid(64);
        let f = trig_poly_1d(&mut trial_rng(seed, 0), g, 12, false);
        let w = weight_1d(&mut trial_rng(seed, 1), g, 4, 1.0);
        let res = cz_decompose(&f, &w, level * f.max_abs() / 4.0).unwrap();
        prop_assert!((&res.g0 + &res.g1).max_diff(&f) <= 1e-12 * f.max_abs());
        prop_assert!(res.constants.omega_measure <= 1.0 + 1e-10);
        let mask = res.omega_mask();
        for (i, v) in res.g1.values().iter().enumerate() {
            prop_assert!(mask[i] || *v == Complex64::new(0.0, 0.0));
        }
    }

    #[test]
    fn majorant_dominates(ys in proptest::collection::vec(0.0f64..10.0, 32)) {
        let m = majorant(&ys, 0.5, 1e-3).unwrap();
        for (v, y) in m.v.iter().zip(&ys) {
            prop_assert!(v >= y);
        }
    }

    #[test]
    fn ap_constant_is_scale_invariant(seed in any::<u64>(), c in 1e-3f64..1e3) {
        let g = grid(64);
        let w = weight_1d(&mut trial_rng(seed, 0), g, 5, 1.5);
        let cw = Weight1D::new(g, w.values().iter().map(|x| c * x).collect()).unwrap();
        let fam = ArcFamily::dyadic(64);
        let a = ap_constant(&w, 2.0, &fam).unwrap();
        let b = ap_constant(&cw, 2.0, &fam).unwrap();
        prop_assert!(a >= 1.0);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn split_is_exact_and_homogeneous(seed in any::<u64>(), scale in 0.1f64..10.0) {
        let g = grid(16);
        let w1 = weight_2d(&mut trial_rng(seed, 0), g, g, 2, 0.3);
        let w2 = weight_2d(&mut trial_rng(seed, 1), g, g, 2, 0.3);
        let spec = InstanceSpec {
            y1: SpectralCone::P.into(),
            y2: SpectralCone::P.into(),
            w1: &w1,
            w2: &w2,
            r: 1.0,
            p: 2.0,
            degree: 4,
        };
        let inst = random_instance(&mut trial_rng(seed, 2), g, g, &spec).unwrap();
        let weights = SplitWeights::reduce(&w1, &w2, None, None, 2.0).unwrap();
        let mut cfg = SplitConfig::new(2.0).unwrap();
        cfg.check_hypotheses = false;
        let (a, state) = split_inf_traced(&inst.f, &inst.g, &inst.h, &weights, &cfg).unwrap();
        prop_assert!(a.sum_error <= 1e-12);
        prop_assert!(a.leakage_g <= 1e-6 && a.leakage_h <= 1e-6);
        for l in &state.levels {
            prop_assert!(l.v.iter().zip(&l.y).all(|(v, y)| v >= y));
            prop_assert!(l.gamma.iter().all(|&x| x >= 1.0));
        }
        let c = Complex64::new(scale, 0.0);
        let b = split_inf(&inst.f.scale(c), &inst.g.scale(c), &inst.h.scale(c), &weights, &cfg).unwrap();
        prop_assert!((a.c1 - b.c1).abs() <= 1e-8 * a.c1.max(1.0));
        prop_assert!((a.c2 - b.c2).abs() <= 1e-8 * a.c2.max(1.0));
    }

    #[test]
    fn oracle_is_deterministic_and_below_identity(seed in any::<u64>()) {
        let g = grid(8);
        let ones = Weight2D::ones(g, g);
        let spec = InstanceSpec {
            y1: SpectralCone::QUADRANT.into(),
            y2: SpectralCone::QUADRANT.into(),
            w1: &ones,
            w2: &ones,
            r: 1.0,
            p: 2.0,
            degree: 3,
        };
        let inst = random_instance(&mut trial_rng(seed, 0), g, g, &spec).unwrap();
        let settings = SolverSettings { max_iter: 400, ..SolverSettings::default() };
        let prob = OracleProblem::new(inst.f, inst.g, inst.h, SpectralCone::QUADRANT, SpectralCone::QUADRANT, ones.clone(), ones, 1.0, 2.0)
            .unwrap()
            .with_settings(settings);
        let a = solve(&prob).unwrap();
        let b = solve(&prob).unwrap();
        prop_assert_eq!(&a, &b);
        prop_assert!(a.objective.is_finite());
        for w in a.history.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
    }
}
