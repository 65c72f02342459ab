use proptest::prelude::*;
use wavepath::collocation::{solve_quadratic, QuadraticPencil};
use wavepath::depth::{solve_forward_truncated, DEFAULT_DELTA};
use wavepath::linalg::Mat;
use wavepath::shear::builtin_profile;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn selected_branch_is_real_and_above_the_current(lk in (0.025f64).ln()..(250.0f64).ln()) {
        let k = lk.exp();
        let prof = builtin_profile::<f64>("UT", &[]).unwrap().project(0.0);
        let sol = solve_forward_truncated(&prof, 64, k, DEFAULT_DELTA).unwrap();
        let (_, u_max) = prof.essential_range();
        prop_assert!(sol.c > u_max, "k = {}: c = {}", k, sol.c);
        prop_assert!(sol.w.iter().all(|z| z.im.abs() <= 1e-8));
        prop_assert!(sol.real_w().is_some());
    }

    #[test]
    fn prescribed_spectra_are_recovered(
        gaps in prop::collection::vec(0.2f64..1.0, 6),
        start in -3.0f64..0.0,
        t in prop::collection::vec(-0.3f64..0.3, 9),
        s in prop::collection::vec(-0.3f64..0.3, 9),
        order in prop::sample::subsequence((0..6).collect::<Vec<usize>>(), 6).prop_shuffle(),
    ) {
        // P(λ) = T (λI − D1)(λI − D2) S with a known, well separated spectrum
        let mut lam: Vec<f64> = gaps.iter().scan(start, |acc, g| { *acc += g; Some(*acc) }).collect();
        let perm: Vec<f64> = order.iter().map(|&i| lam[i]).collect();
        let d1 = Mat::diag(&perm[..3]);
        let d2 = Mat::diag(&perm[3..]);
        let near_id = |v: &[f64]| Mat::from_fn(3, 3, |i, j| if i == j { 1.0 } else { 0.0 } + v[3 * i + j]);
        let (tm, sm) = (near_id(&t), near_id(&s));
        let wrap = |m: &Mat<f64>| tm.matmul(m).matmul(&sm);
        let pencil = QuadraticPencil {
            a2: wrap(&Mat::identity(3)),
            a1: wrap(&d1.add(&d2).scale(-1.0)),
            a0: wrap(&d1.matmul(&d2)),
        };
        let mut got: Vec<f64> = solve_quadratic(&pencil, false).unwrap().iter().map(|p| {
            assert!(p.c.im.abs() < 1e-10);
            p.c.re
        }).collect();
        got.sort_by(f64::total_cmp);
        lam.sort_by(f64::total_cmp);
        prop_assert_eq!(got.len(), 6);
        for (a, b) in got.iter().zip(&lam) {
            prop_assert!((a - b).abs() < 1e-10 * b.abs().max(1.0), "{:?} vs {:?}", got, lam);
        }
    }
}
