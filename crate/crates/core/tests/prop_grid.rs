use std::f64::consts::TAU;
use std::sync::OnceLock;

use proptest::prelude::*;
use wavepath::grid::{build_field, log_radii, periodic_angles, PolarField};
use wavepath::path::PathOptions;
use wavepath::shear::builtin_profile;
use wavepath::spectral::CollocationOperator;

fn field() -> &'static PolarField<f64> {
    static FIELD: OnceLock<PolarField<f64>> = OnceLock::new();
    FIELD.get_or_init(|| {
        let mut p = builtin_profile::<f64>("UT", &[]).unwrap();
        p.uy = builtin_profile::<f64>("linear", &[]).unwrap().ux;
        let op = CollocationOperator::new(12, 1.0).unwrap();
        let ks = log_radii(0.5, 8.0, 6);
        build_field(&p, &op, &ks, &periodic_angles(8), 2.0, true, &PathOptions::new(1e-8)).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn queries_at_nodes_are_exact(i in 0usize..6, j in 0usize..8) {
        let f = field();
        let c = f.query(f.k_knots[i], f.theta_knots[j]).unwrap();
        prop_assert_eq!(c, f.node(i, j)[f.n_z]);
    }

    #[test]
    fn queries_at_knot_angles_follow_the_slice(j in 0usize..8, s in 0.0f64..=1.0) {
        let f = field();
        let k = 0.5 * 16f64.powf(s);
        prop_assume!(k <= 8.0);
        prop_assert_eq!(f.query(k, f.theta_knots[j]).unwrap(), f.radial_eval(j, k).unwrap()[f.n_z]);
    }

    #[test]
    fn queries_are_periodic(s in 0.0f64..=1.0, theta in 0.0f64..TAU, turns in -3i32..4) {
        let f = field();
        let k = 0.5 + 7.5 * s;
        let a = f.query(k, theta).unwrap();
        let b = f.query(k, theta + turns as f64 * TAU).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs(), "{} vs {}", a, b);
    }

    #[test]
    fn queries_stay_between_bracketing_slices_loosely(s in 0.0f64..=1.0, theta in 0.0f64..TAU) {
        // cubic Hermite may overshoot, but never far beyond the node range
        let f = field();
        let k = 0.5 + 7.5 * s;
        let c = f.query(k, theta).unwrap();
        let slice: Vec<f64> = (0..8).map(|j| f.radial_eval(j, k).unwrap()[f.n_z]).collect();
        let (lo, hi) = slice.iter().fold((f64::MAX, f64::MIN), |(a, b), &x| (a.min(x), b.max(x)));
        let pad = 0.1 * (hi - lo) + 1e-12;
        prop_assert!(c >= lo - pad && c <= hi + pad);
    }
}
