use wavepath::depth::{build_plan, pf_radial_adaptive, DEFAULT_C_MAX, DEFAULT_C_MIN, DEFAULT_DELTA};
use wavepath::collocation::solve_forward;
use wavepath::path::PathOptions;
use wavepath::shear::builtin_profile;
use wavepath::spectral::{series_convergence, CollocationOperator, ConvergenceConfig};

fn required_n(k: f64, depth: f64) -> Option<usize> {
    let prof = builtin_profile::<f64>("UT", &[]).unwrap().project(0.0);
    let op = CollocationOperator::new(96, depth).unwrap();
    let mut w = solve_forward(&prof, &op, k).unwrap().real_w().unwrap();
    w.push(0.0);
    let coeffs = op.chebyshev_coefficients(&w).unwrap();
    series_convergence(&coeffs, &ConvergenceConfig::default()).required_n
}

#[test]
fn truncated_depth_keeps_short_waves_resolved() {
    let plan = build_plan(DEFAULT_DELTA, DEFAULT_C_MIN, DEFAULT_C_MAX, 250.0).unwrap();
    let (j, _) = plan.weights(250.0).unwrap()[0];
    let long = required_n(2.5, 1.0).expect("k = 2.5 resolved");
    let short = required_n(250.0, plan.intervals[j].h).expect("k = 250 resolved on the truncated grid");
    assert!(short <= 2 * long, "k = 250 needs {short}, k = 2.5 needs {long}");
    // on the full depth the same grid does not even reach roundoff
    assert!(required_n(250.0, 1.0).map_or(true, |n| n > short));
}

#[test]
fn blended_curve_has_no_kinks() {
    let prof = builtin_profile::<f64>("UT", &[]).unwrap().project(0.0);
    let (lo, hi) = (0.025, 250.0);
    let path = pf_radial_adaptive(&prof, 48, (lo, hi), &PathOptions::new(1e-11).log_param(true), DEFAULT_DELTA, DEFAULT_C_MIN, DEFAULT_C_MAX)
        .unwrap();
    // second derivative in ln k; c'' in k decays too fast to compare across regions
    let d2 = |x: f64, h: f64| {
        let c = |x: f64| path.eval(x.exp()).unwrap();
        (c(x + h) - 2.0 * c(x) + c(x - h)) / (h * h)
    };
    let ivs = &path.plan.intervals;
    let h = 0.02;
    for j in 0..ivs.len() - 1 {
        let (a, b) = (ivs[j + 1].ka.ln(), ivs[j].kb.ln());
        let excl_lo = if j == 0 { lo.ln() } else { ivs[j - 1].kb.ln() };
        let excl_hi = if j + 2 < ivs.len() { ivs[j + 2].ka.ln() } else { hi.ln() };
        let sample = |x0: f64, x1: f64| {
            (1..40).map(|i| x0 + (x1 - x0) * i as f64 / 40.0).filter(|x| x - h > lo.ln() && x + h < hi.ln())
                .map(|x| d2(x, h).abs()).fold(0.0f64, f64::max)
        };
        let overlap = sample(a, b.min(hi.ln()));
        let exclusive = sample(excl_lo, a).max(sample(b, excl_hi));
        assert!(overlap <= 10.0 * exclusive, "overlap {j}: {overlap:e} vs exclusive {exclusive:e}");
    }
}

#[test]
fn plan_matches_reference_values() {
    let p = build_plan(1e-16, 0.3, 0.8, 500.0).unwrap();
    let l = 16.0 * 10f64.ln();
    assert!((p.intervals[0].kb - l / 0.8).abs() < 1e-12);
    assert!((p.intervals[1].ka - l).abs() < 1e-12 && (p.intervals[1].kb - l / 0.24).abs() < 1e-11);
    assert!((p.intervals[1].h - 0.62).abs() < 1e-15);
    assert!((p.intervals[2].ka - l / 0.3).abs() < 1e-11 && (p.intervals[2].h - 0.186).abs() < 1e-15);
    assert!(p.intervals[2].ka < p.intervals[1].kb);
}
