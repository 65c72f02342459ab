//! Accuracy, backward-error and conditioning measurements, plus the timing harness.

use std::time::Instant;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::collocation::{assemble_forward, select_branch, solve_forward, solve_quadratic, QuadraticPencil, DEFAULT_CUTOFF};
use crate::error::{invalid, Error, Result};
use crate::linalg::{cond_2, norm2, norm2_complex, norm_2, norm_inf, Lu, Mat};
use crate::path::{assemble_radial, pf_radial, PathOptions};
use crate::scalar::Real;
use crate::shear::ReducedProfile;
use crate::spectral::CollocationOperator;

type C<T> = Complex<T>;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AccuracyReport<T> {
    pub method: String,
    pub n_z: usize,
    /// Relative ∞-norm error.
    pub epsilon: T,
    /// `|c_cand − c_ref| / ‖c_ref‖∞` per point.
    pub errors: Vec<T>,
}

/// `‖c_cand − c_ref‖∞ / ‖c_ref‖∞`.
pub fn normwise_error<T: Real>(candidate: &[T], reference: &[T]) -> Result<T> {
    Ok(accuracy_report("", 0, candidate, reference)?.epsilon)
}

pub fn accuracy_report<T: Real>(method: &str, n_z: usize, candidate: &[T], reference: &[T]) -> Result<AccuracyReport<T>> {
    if candidate.len() != reference.len() {
        return Err(invalid(format!("length mismatch: {} candidate vs {} reference values", candidate.len(), reference.len())));
    }
    let scale = norm_inf(reference);
    if !(scale > T::zero()) {
        return Err(invalid("reference values are all zero"));
    }
    let errors: Vec<T> = candidate.iter().zip(reference).map(|(&a, &b)| (a - b).abs() / scale).collect();
    let epsilon = errors.iter().fold(T::zero(), |m, &e| m.max(e));
    Ok(AccuracyReport { method: method.into(), n_z, epsilon, errors })
}

/// `‖b − Mv‖₂ / (‖M‖₂‖v‖₂ + ‖b‖₂)`, zero when the denominator vanishes.
pub fn backward_error_linear<T: Real>(m: &Mat<T>, v: &[T], b: &[T]) -> Result<T> {
    if m.cols() != v.len() || m.rows() != b.len() {
        return Err(invalid("matrix, solution and right-hand side shapes disagree"));
    }
    let mv = m.matvec(v);
    let r: Vec<T> = b.iter().zip(&mv).map(|(&x, &y)| x - y).collect();
    let den = norm_2(m) * norm2(v) + norm2(b);
    Ok(if den > T::zero() { norm2(&r) / den } else { T::zero() })
}

fn pencil_scale<T: Real>(p: &QuadraticPencil<T>, c: C<T>) -> T {
    let a = c.norm();
    norm_2(&p.a2) * a * a + norm_2(&p.a1) * a + norm_2(&p.a0)
}

fn check_vec<T: Real>(p: &QuadraticPencil<T>, w: &[C<T>], what: &str) -> Result<()> {
    if w.len() != p.dim() {
        return Err(invalid(format!("{what} has length {}, pencil has dimension {}", w.len(), p.dim())));
    }
    if !(norm2_complex(w) > T::zero()) {
        return Err(invalid(format!("{what} is zero")));
    }
    Ok(())
}

/// Normwise backward error of an approximate quadratic eigenpair.
pub fn backward_error_quadratic<T: Real>(p: &QuadraticPencil<T>, c: C<T>, w: &[C<T>]) -> Result<T> {
    check_vec(p, w, "eigenvector")?;
    let r = p.apply(c, w);
    Ok(norm2_complex(&r) / (pencil_scale(p, c) * norm2_complex(w)))
}

/// Normwise condition number of a simple quadratic eigenvalue.
pub fn condition_quadratic<T: Real>(p: &QuadraticPencil<T>, c: C<T>, w: &[C<T>], left: &[C<T>]) -> Result<T> {
    check_vec(p, w, "eigenvector")?;
    check_vec(p, left, "left eigenvector")?;
    let two_c = c + c;
    let n = p.dim();
    let mut den = C::new(T::zero(), T::zero());
    for i in 0..n {
        let mut s = C::new(T::zero(), T::zero());
        for j in 0..n {
            s = s + (two_c * p.a2[(i, j)] + p.a1[(i, j)]) * w[j];
        }
        den = den + left[i].conj() * s;
    }
    let den = c.norm() * den.norm();
    if !(den > T::zero()) {
        return Err(Error::DegenerateEigenvalue(format!(
            "|c w_l* P'(c) w| vanishes at c = {}",
            c.re.to_f64_lossy()
        )));
    }
    Ok(pencil_scale(p, c) * norm2_complex(left) * norm2_complex(w) / den)
}

/// Spectral condition number; infinite for numerically singular `M`.
pub fn condition_linear<T: Real>(m: &Mat<T>) -> T {
    cond_2(m)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityPoint<T> {
    pub k: T,
    pub c: T,
    pub eta_l: T,
    pub eta_q: T,
    pub kappa_l: T,
    pub kappa_q: T,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Aggregate<T> {
    pub median: T,
    pub max: T,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport<T> {
    pub n_z: usize,
    pub points: Vec<StabilityPoint<T>>,
    pub eta_l: Aggregate<T>,
    pub eta_q: Aggregate<T>,
    pub kappa_l: Aggregate<T>,
    pub kappa_q: Aggregate<T>,
    pub kappa_eta_l: Aggregate<T>,
    pub kappa_eta_q: Aggregate<T>,
}

pub fn median<T: Real>(values: &[T]) -> T {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = v.len();
    if n == 0 {
        return T::nan();
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / T::lit(2.0)
    }
}

fn aggregate<T: Real>(values: impl Iterator<Item = T>) -> Aggregate<T> {
    let v: Vec<T> = values.collect();
    Aggregate { median: median(&v), max: v.iter().fold(T::zero(), |m, &x| m.max(x)) }
}

/// Backward errors and condition numbers of the collocation eigensolve and
/// of the bordered linear solve used by path following, at each `k`.
pub fn stability_point<T: Real>(profile: &ReducedProfile<T>, op: &CollocationOperator<T>, k: T) -> Result<StabilityPoint<T>> {
    let pencil = assemble_forward(profile, op, k)?;
    let pairs = solve_quadratic(&pencil, true)?;
    let essential = profile.essential_range_on(-op.depth(), T::zero());
    let (i, _) = select_branch(&pairs, essential, T::lit(DEFAULT_CUTOFF))?;
    let pair = &pairs[i];
    let left = pair.left.as_ref().ok_or_else(|| Error::Solver("left eigenvector unavailable".into()))?;
    let eta_q = backward_error_quadratic(&pencil, pair.c, &pair.w)?;
    let kappa_q = condition_quadratic(&pencil, pair.c, &pair.w, left)?;

    let w: Vec<T> = pair.w.iter().map(|z| z.re).collect();
    let sys = assemble_radial(profile, op, k, pair.c.re, &w)?;
    let v = Lu::factor(&sys.m)?.solve(&sys.b);
    let eta_l = backward_error_linear(&sys.m, &v, &sys.b)?;
    let kappa_l = condition_linear(&sys.m);
    Ok(StabilityPoint { k, c: pair.c.re, eta_l, eta_q, kappa_l, kappa_q })
}

pub fn stability_sweep<T: Real>(profile: &ReducedProfile<T>, op: &CollocationOperator<T>, ks: &[T]) -> Result<StabilityReport<T>> {
    if ks.is_empty() {
        return Err(invalid("empty wavenumber list"));
    }
    let points = ks.iter().map(|&k| stability_point(profile, op, k)).collect::<Result<Vec<_>>>()?;
    Ok(StabilityReport {
        n_z: op.order(),
        eta_l: aggregate(points.iter().map(|p| p.eta_l)),
        eta_q: aggregate(points.iter().map(|p| p.eta_q)),
        kappa_l: aggregate(points.iter().map(|p| p.kappa_l)),
        kappa_q: aggregate(points.iter().map(|p| p.kappa_q)),
        kappa_eta_l: aggregate(points.iter().map(|p| p.kappa_l * p.eta_l)),
        kappa_eta_q: aggregate(points.iter().map(|p| p.kappa_q * p.eta_q)),
        points,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BenchMethod {
    /// One collocation eigensolve per query.
    Collocation,
    /// One path build, then dense-output queries.
    PathFollowing,
}

impl BenchMethod {
    pub fn label(self) -> &'static str {
        match self {
            BenchMethod::Collocation => "CL-c",
            BenchMethod::PathFollowing => "PF-R-r-c",
        }
    }

    pub fn phases(self) -> &'static [&'static str] {
        match self {
            BenchMethod::Collocation => &["solve"],
            BenchMethod::PathFollowing => &["build", "query"],
        }
    }
}

/// One line of the timing table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub method: String,
    #[serde(rename = "N_q")]
    pub n_q: usize,
    #[serde(rename = "N_z")]
    pub n_z: usize,
    pub target_eps: f64,
    pub phase: String,
    pub median_seconds: f64,
    pub reps: usize,
    pub variance: f64,
}

#[derive(Clone, Debug)]
pub struct BenchConfig<T> {
    pub profile: ReducedProfile<T>,
    pub k_range: (T, T),
    pub methods: Vec<BenchMethod>,
    pub n_q: Vec<usize>,
    pub targets: Vec<f64>,
    pub reps: usize,
    /// Candidate grid sizes, searched in order for the first meeting a target.
    pub n_z_ladder: Vec<usize>,
}

impl<T: Real> BenchConfig<T> {
    pub fn new(profile: ReducedProfile<T>, k_range: (T, T)) -> Self {
        Self {
            profile,
            k_range,
            methods: vec![BenchMethod::Collocation, BenchMethod::PathFollowing],
            n_q: vec![10, 30, 100, 300, 1000],
            targets: vec![1e-4, 1e-7],
            reps: 5,
            n_z_ladder: vec![8, 12, 16, 20, 24, 32, 40, 48, 64],
        }
    }
}

/// Deterministic low-discrepancy wavenumbers in `[lo, hi]`, log-uniform.
pub fn query_points<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    let g = 0.618_033_988_749_894_9_f64;
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            let u = T::lit((0.5 + i as f64 * g).fract());
            (a + (b - a) * u).exp().max(lo).min(hi)
        })
        .collect()
}

/// Smallest ladder entry whose collocation error against a grid of twice the
/// largest ladder size is within `target` at a handful of wavenumbers.
pub fn matched_n_z<T: Real>(profile: &ReducedProfile<T>, k_range: (T, T), target: f64, ladder: &[usize]) -> Result<usize> {
    let top = *ladder.iter().max().ok_or_else(|| invalid("empty grid ladder"))?;
    let ks = query_points(k_range.0, k_range.1, 5);
    let mut probe = ks.clone();
    probe.push(k_range.1);
    let reference_op = CollocationOperator::new(2 * top, T::one())?;
    let reference = probe.iter().map(|&k| Ok(solve_forward(profile, &reference_op, k)?.c)).collect::<Result<Vec<T>>>()?;
    for &n in ladder {
        let op = CollocationOperator::new(n, T::one())?;
        let cand = probe.iter().map(|&k| Ok(solve_forward(profile, &op, k)?.c)).collect::<Result<Vec<T>>>();
        let Ok(cand) = cand else { continue };
        if normwise_error(&cand, &reference)?.to_f64_lossy() <= target {
            return Ok(n);
        }
    }
    Ok(top)
}

fn time<R>(f: impl FnOnce() -> Result<R>) -> Result<(f64, R)> {
    let t0 = Instant::now();
    let r = f()?;
    Ok((t0.elapsed().as_secs_f64(), r))
}

fn summarise(samples: &[f64]) -> (f64, f64) {
    let med = median(samples);
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / samples.len().max(1) as f64;
    (med, var)
}

/// Wall-clock table: for each method, target and `N_q`, the median over
/// `reps` repetitions of each phase. Runs on the calling thread only.
pub fn benchmark<T: Real>(cfg: &BenchConfig<T>) -> Result<Vec<BenchRow>> {
    if cfg.reps == 0 {
        return Err(invalid("at least one repetition is required"));
    }
    let mut rows = Vec::new();
    for &target in &cfg.targets {
        let n_z = matched_n_z(&cfg.profile, cfg.k_range, target, &cfg.n_z_ladder)?;
        let op = CollocationOperator::new(n_z, T::one())?;
        let opts = PathOptions::new(T::lit(target / 2.0)).log_param(cfg.k_range.1 / cfg.k_range.0 > T::lit(100.0));
        for &method in &cfg.methods {
            for &n_q in &cfg.n_q {
                let ks = query_points(cfg.k_range.0, cfg.k_range.1, n_q);
                let mut per_phase = vec![Vec::with_capacity(cfg.reps); method.phases().len()];
                for _ in 0..cfg.reps {
                    match method {
                        BenchMethod::Collocation => {
                            let (s, _) = time(|| {
                                ks.iter().map(|&k| Ok(solve_forward(&cfg.profile, &op, k)?.c)).collect::<Result<Vec<T>>>()
                            })?;
                            per_phase[0].push(s);
                        }
                        BenchMethod::PathFollowing => {
                            let seed = (cfg.k_range.0 * cfg.k_range.1).sqrt();
                            let (sb, path) = time(|| pf_radial(&cfg.profile, &op, cfg.k_range, seed, &opts, None))?;
                            let (sq, _) = time(|| ks.iter().map(|&k| path.dense_eval(k)).collect::<Result<Vec<T>>>())?;
                            per_phase[0].push(sb);
                            per_phase[1].push(sq);
                        }
                    }
                }
                for (phase, samples) in method.phases().iter().zip(&per_phase) {
                    let (med, var) = summarise(samples);
                    rows.push(BenchRow {
                        method: method.label().into(),
                        n_q,
                        n_z,
                        target_eps: target,
                        phase: (*phase).into(),
                        median_seconds: med,
                        reps: cfg.reps,
                        variance: var,
                    });
                }
            }
        }
    }
    Ok(rows)
}

pub fn write_bench_csv(rows: &[BenchRow], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    w.flush()?;
    Ok(())
}

/// Least-squares line `y = a + b x`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Cost model extracted from a timing table at one accuracy target.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CostModel {
    pub target_eps: f64,
    /// Log-log slope of collocation time against `N_q`.
    pub collocation_slope: f64,
    pub collocation_per_point: f64,
    /// `σ_NI`: path build time.
    pub build: f64,
    /// `σ_Q`: marginal cost per path query.
    pub per_query: f64,
    /// Query count above which path following is cheaper; `None` if never.
    pub break_even: Option<f64>,
}

fn rows_for<'a>(rows: &'a [BenchRow], method: BenchMethod, phase: &str, target: f64) -> Vec<&'a BenchRow> {
    rows.iter()
        .filter(|r| r.method == method.label() && r.phase == phase && r.target_eps == target)
        .collect()
}

pub fn cost_model(rows: &[BenchRow], target: f64) -> Result<CostModel> {
    let cl = rows_for(rows, BenchMethod::Collocation, "solve", target);
    let build = rows_for(rows, BenchMethod::PathFollowing, "build", target);
    let query = rows_for(rows, BenchMethod::PathFollowing, "query", target);
    if cl.len() < 2 || build.is_empty() || query.len() < 2 {
        return Err(invalid(format!("timing table lacks rows for target {target:e}")));
    }
    let lx: Vec<f64> = cl.iter().map(|r| (r.n_q as f64).ln()).collect();
    let ly: Vec<f64> = cl.iter().map(|r| r.median_seconds.ln()).collect();
    let (_, slope) = fit_line(&lx, &ly);
    let x: Vec<f64> = cl.iter().map(|r| r.n_q as f64).collect();
    let y: Vec<f64> = cl.iter().map(|r| r.median_seconds).collect();
    let (_, cl_per) = fit_line(&x, &y);
    let qx: Vec<f64> = query.iter().map(|r| r.n_q as f64).collect();
    let qy: Vec<f64> = query.iter().map(|r| r.median_seconds).collect();
    let (_, q_per) = fit_line(&qx, &qy);
    let q_per = q_per.max(0.0);
    let b = median(&build.iter().map(|r| r.median_seconds).collect::<Vec<_>>());
    let break_even = (cl_per > q_per).then(|| b / (cl_per - q_per));
    Ok(CostModel {
        target_eps: target,
        collocation_slope: slope,
        collocation_per_point: cl_per,
        build: b,
        per_query: q_per,
        break_even,
    })
}
