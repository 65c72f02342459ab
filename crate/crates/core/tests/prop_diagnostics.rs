use num_complex::Complex;
use proptest::prelude::*;
use wavepath::collocation::{assemble_forward, solve_forward};
use wavepath::diagnostics::{backward_error_linear, backward_error_quadratic, median, normwise_error};
use wavepath::linalg::{lu, Mat};
use wavepath::shear::builtin_profile;
use wavepath::spectral::CollocationOperator;

fn values() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..10.0, 1..30)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn normwise_error_is_a_distance(r in values(), seed in prop::collection::vec(-1e-3f64..1e-3, 30)) {
        prop_assert_eq!(normwise_error(&r, &r).unwrap(), 0.0);
        let c: Vec<f64> = r.iter().zip(&seed).map(|(x, d)| x + d).collect();
        let e = normwise_error(&c, &r).unwrap();
        prop_assert!(e >= 0.0);
        prop_assert_eq!(e == 0.0, c == r);
    }

    #[test]
    fn median_is_order_invariant(mut v in values()) {
        let m = median(&v);
        v.reverse();
        prop_assert_eq!(median(&v), m);
        let below = v.iter().filter(|&&x| x < m).count();
        let above = v.iter().filter(|&&x| x > m).count();
        prop_assert!(below <= v.len() / 2 && above <= v.len() / 2);
    }

    #[test]
    fn exact_linear_solves_have_tiny_backward_error(n in 2usize..12, entries in prop::collection::vec(-1.0f64..1.0, 144), b in prop::collection::vec(-1.0f64..1.0, 12)) {
        // diagonally dominant, so the LU solve is backward stable
        let m = Mat::from_fn(n, n, |i, j| entries[i * 12 + j] + if i == j { n as f64 } else { 0.0 });
        let x = lu::solve(&m, &b[..n]).unwrap();
        prop_assert!(backward_error_linear(&m, &x, &b[..n]).unwrap() < 1e-14);
    }

    #[test]
    fn collocation_eigenpairs_have_tiny_backward_error(k in 0.1f64..30.0, n in 8usize..40) {
        let prof = builtin_profile::<f64>("UT", &[]).unwrap().project(0.0);
        let op = CollocationOperator::new(n, 1.0).unwrap();
        let sol = solve_forward(&prof, &op, k).unwrap();
        let pencil = assemble_forward(&prof, &op, k).unwrap();
        let eta = backward_error_quadratic(&pencil, Complex::new(sol.c, 0.0), &sol.w).unwrap();
        prop_assert!(eta < 1e-13, "eta = {}", eta);
    }
}
