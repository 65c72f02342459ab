use proptest::prelude::*;
use wavepath::collocation::solve_forward;
use wavepath::path::{export_seed, import_seed, pf_angular, pf_radial, PathOptions, PathSolution};
use wavepath::shear::{builtin_profile, ReducedProfile, ShearProfile};
use wavepath::spectral::CollocationOperator;

const NAMES: [&str; 3] = ["UT", "quiescent", "linear"];

fn reduced(which: usize) -> ReducedProfile<f64> {
    builtin_profile::<f64>(NAMES[which], &[]).unwrap().project(0.0)
}

fn two_component() -> ShearProfile<f64> {
    let mut p = builtin_profile::<f64>("UT", &[]).unwrap();
    p.uy = builtin_profile::<f64>("linear", &[]).unwrap().ux;
    p
}

fn check_tangency(path: &PathSolution<f64>) -> Result<(), TestCaseError> {
    let n = path.n_z;
    for j in 0..path.len() {
        let w = path.w(j);
        let dw = &path.dv[j][..n];
        let dot: f64 = w.iter().zip(dw).map(|(a, b)| a * b).sum();
        prop_assert!(dot.abs() <= 1e-10, "w . dw = {} at t = {}", dot, path.t[j]);
    }
    Ok(())
}

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (0.2f64..5.0, 1.2f64..4.0).prop_map(|(a, r)| (a, a * r))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn radial_paths_stay_tangent((ka, kb) in interval(), which in 0usize..3, s in 0.0f64..1.0, log in any::<bool>()) {
        let op = CollocationOperator::new(16, 1.0).unwrap();
        let seed = ka + s * (kb - ka);
        let path = pf_radial(&reduced(which), &op, (ka, kb), seed, &PathOptions::new(1e-8).log_param(log), None).unwrap();
        check_tangency(&path)?;
    }

    #[test]
    fn angular_paths_stay_tangent(k0 in 0.3f64..5.0, ta in -3.0f64..3.0, span in 0.2f64..3.0) {
        let op = CollocationOperator::new(16, 1.0).unwrap();
        let path = pf_angular(&two_component(), &op, k0, (ta, ta + span), ta, &PathOptions::new(1e-8), None).unwrap();
        check_tangency(&path)?;
    }

    #[test]
    fn dense_output_hits_nodes_exactly((ka, kb) in interval(), which in 0usize..3, pick in 0.0f64..1.0) {
        let op = CollocationOperator::new(16, 1.0).unwrap();
        let path = pf_radial(&reduced(which), &op, (ka, kb), ka, &PathOptions::new(1e-7), None).unwrap();
        let j = ((path.len() - 1) as f64 * pick) as usize;
        prop_assert_eq!(path.dense_eval(path.t[j]).unwrap(), path.c(j));
        prop_assert_eq!(path.dense_eval_full(path.t[j]).unwrap(), path.v[j].clone());
        let m = j.min(path.len() - 2);
        prop_assert_eq!(path.dense_eval(path.t_mid[m]).unwrap(), path.v_mid[m][16]);
        prop_assert_eq!(path.span(), (ka, kb));
    }

    #[test]
    fn direction_does_not_matter((ka, kb) in interval(), which in 0usize..3) {
        let tol = 1e-8;
        let op = CollocationOperator::new(16, 1.0).unwrap();
        let prof = reduced(which);
        let opts = PathOptions::new(tol);
        let fwd = pf_radial(&prof, &op, (ka, kb), ka, &opts, None).unwrap();
        let bwd = pf_radial(&prof, &op, (ka, kb), kb, &opts, None).unwrap();
        for i in 0..=20 {
            let k = if i == 20 { kb } else { ka + (kb - ka) * i as f64 / 20.0 };
            let (a, b) = (fwd.dense_eval(k).unwrap(), bwd.dense_eval(k).unwrap());
            prop_assert!((a - b).abs() <= 10.0 * tol * b.abs(), "k = {}: {} vs {}", k, a, b);
        }
    }

    #[test]
    fn seeds_round_trip(k in 0.1f64..20.0, n in 8usize..40, which in 0usize..3) {
        let prof = reduced(which);
        let op = CollocationOperator::new(n, 1.0).unwrap();
        let sol = solve_forward(&prof, &op, k).unwrap();
        let rec = export_seed(&sol, &op, &prof).unwrap();
        let json = serde_json::to_string(&rec).unwrap();
        let back = import_seed(&serde_json::from_str(&json).unwrap(), &op, &prof).unwrap();
        prop_assert_eq!(back.k.to_bits(), k.to_bits());
        prop_assert_eq!(back.c.to_bits(), sol.c.to_bits());
        prop_assert_eq!(back.real_w().unwrap(), sol.real_w().unwrap());
    }
}
