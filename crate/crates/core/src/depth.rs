//! Depth truncation for large wavenumbers. Eigenfunctions decay like
//! `e^{kz}`, so beyond `h_δ(k) = −ln δ / k` the water column is numerically
//! irrelevant; the k-range is split into overlapping pieces, each solved on a
//! shallower grid, and blended with a smooth partition of unity.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collocation::{solve_forward, EigenSolution};
use crate::error::{invalid, Error, Result};
use crate::path::{pf_radial, PathOptions, PathSolution};
use crate::scalar::Real;
use crate::shear::ReducedProfile;
use crate::spectral::CollocationOperator;

/// `2⁻⁵²`
pub const DEFAULT_DELTA: f64 = f64::EPSILON;
pub const DEFAULT_C_MIN: f64 = 0.3;
pub const DEFAULT_C_MAX: f64 = 0.8;

/// Effective depth `min{1, −ln δ / k}`.
pub fn h_delta<T: Real>(k: T, delta: T) -> T {
    (-delta.ln() / k).min(T::one())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Subinterval<T> {
    pub ka: T,
    pub kb: T,
    pub h: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DepthPlan<T> {
    pub delta: T,
    pub c_min: T,
    pub c_max: T,
    pub intervals: Vec<Subinterval<T>>,
    /// Name of the blending ramp, recorded for output metadata.
    pub weight_function: String,
}

fn check_constants<T: Real>(delta: T, c_min: T, c_max: T) -> Result<()> {
    if !(delta > T::zero() && delta < T::one()) {
        return Err(invalid(format!("δ must lie in (0, 1), got {delta}")));
    }
    if !(c_min > T::zero() && c_min < c_max && c_max < T::one()) {
        return Err(invalid(format!("need 0 < C_min < C_max < 1, got {c_min}, {c_max}")));
    }
    Ok(())
}

/// Overlapping subintervals covering `[0, k_max]`.
pub fn build_plan<T: Real>(delta: T, c_min: T, c_max: T, k_max: T) -> Result<DepthPlan<T>> {
    check_constants(delta, c_min, c_max)?;
    if !(k_max > T::zero()) || !k_max.is_finite() {
        return Err(invalid(format!("k_max must be positive and finite, got {k_max}")));
    }
    let l = -delta.ln();
    let mut intervals = vec![Subinterval { ka: T::zero(), kb: l / c_max, h: T::one() }];
    let mut j = 1i32;
    while intervals.last().expect("nonempty").kb < k_max {
        let lo = c_min.powi(j - 1);
        let hi = c_min.powi(j) * c_max;
        intervals.push(Subinterval {
            ka: l / lo,
            kb: l / hi,
            h: ((lo + hi) / T::lit(2.0)).min(T::one()),
        });
        j += 1;
    }
    let last = intervals.last_mut().expect("nonempty");
    last.kb = last.kb.min(k_max);
    Ok(DepthPlan { delta, c_min, c_max, intervals, weight_function: "exp(-1/s) smooth step".into() })
}

/// C∞ step: 0 for `s ≤ 0`, 1 for `s ≥ 1`.
fn smooth_step<T: Real>(s: T) -> T {
    if s <= T::zero() {
        return T::zero();
    }
    if s >= T::one() {
        return T::one();
    }
    let f = |x: T| (-T::one() / x).exp();
    let a = f(s);
    a / (a + f(T::one() - s))
}

impl<T: Real> DepthPlan<T> {
    /// Upper end of the covered range.
    pub fn k_max(&self) -> T {
        self.intervals.last().expect("nonempty plan").kb
    }

    /// Nonzero partition-of-unity weights `(interval, weight)` at `k`.
    pub fn weights(&self, k: T) -> Result<Vec<(usize, T)>> {
        let n = self.intervals.len();
        if !(k >= self.intervals[0].ka && k <= self.k_max()) {
            return Err(Error::OutOfRange {
                value: k.to_f64_lossy(),
                lo: self.intervals[0].ka.to_f64_lossy(),
                hi: self.k_max().to_f64_lossy(),
            });
        }
        for j in 0..n {
            let iv = self.intervals[j];
            if k > iv.kb {
                continue;
            }
            // k lies in I_j; check for the overlap with I_{j+1}
            if j + 1 < n && k > self.intervals[j + 1].ka {
                let (a, b) = (self.intervals[j + 1].ka, iv.kb);
                let psi = smooth_step((k - a) / (b - a));
                if psi == T::zero() {
                    return Ok(vec![(j, T::one())]);
                }
                if psi == T::one() {
                    return Ok(vec![(j + 1, T::one())]);
                }
                return Ok(vec![(j, T::one() - psi), (j + 1, psi)]);
            }
            return Ok(vec![(j, T::one())]);
        }
        unreachable!("k within plan range")
    }

    /// Checks overlap of consecutive intervals and that each shallow
    /// interval contains some wavenumber with `C_min h ≤ h_δ(k) ≤ C_max h`.
    /// The last interval is exempt: truncation at `k_max` may cut that range off.
    pub fn validate(&self) -> Result<()> {
        for pair in self.intervals.windows(2) {
            if !(pair[0].kb > pair[1].ka) {
                return Err(invalid("consecutive subintervals do not overlap"));
            }
        }
        let l = -self.delta.ln();
        let n = self.intervals.len();
        for iv in self.intervals[..n - 1].iter().filter(|iv| iv.h < T::one()) {
            let (lo, hi) = (l / (self.c_max * iv.h), l / (self.c_min * iv.h));
            if !(lo.max(iv.ka) <= hi.min(iv.kb)) {
                return Err(invalid(format!("no admissible wavenumber in [{}, {}]", iv.ka, iv.kb)));
            }
        }
        Ok(())
    }
}

/// Blends per-interval path solutions at `k`; `solutions[j]` belongs to `plan.intervals[j]`.
pub fn pu_blend<T: Real>(solutions: &[Option<PathSolution<T>>], plan: &DepthPlan<T>, k: T) -> Result<T> {
    let mut c = T::zero();
    for (j, w) in plan.weights(k)? {
        let sol = solutions
            .get(j)
            .and_then(|s| s.as_ref())
            .ok_or_else(|| invalid(format!("no path for subinterval {j}")))?;
        c += w * sol.dense_eval(k)?;
    }
    Ok(c)
}

/// Dispersion curve assembled from per-depth paths.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AdaptivePath<T> {
    pub plan: DepthPlan<T>,
    pub k_interval: (T, T),
    /// One entry per plan interval; `None` where the interval misses `k_interval`.
    pub paths: Vec<Option<PathSolution<T>>>,
}

impl<T: Real> AdaptivePath<T> {
    pub fn eval(&self, k: T) -> Result<T> {
        let (lo, hi) = self.k_interval;
        if !(k >= lo && k <= hi) {
            return Err(Error::OutOfRange { value: k.to_f64_lossy(), lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
        }
        pu_blend(&self.paths, &self.plan, k)
    }
}

fn clip<T: Real>(iv: &Subinterval<T>, lo: T, hi: T) -> Option<(T, T)> {
    let a = iv.ka.max(lo);
    let b = iv.kb.min(hi);
    (a <= b).then_some((a, b))
}

/// Runs one radial path per subinterval (in parallel) on grids of depth `h_j`.
#[allow(clippy::too_many_arguments)]
pub fn pf_radial_adaptive<T: Real>(
    profile: &ReducedProfile<T>,
    n_z: usize,
    k_interval: (T, T),
    opts: &PathOptions<T>,
    delta: T,
    c_min: T,
    c_max: T,
) -> Result<AdaptivePath<T>> {
    let (lo, hi) = k_interval;
    if !(lo > T::zero() && lo <= hi) {
        return Err(invalid(format!("invalid interval [{lo}, {hi}]")));
    }
    let plan = build_plan(delta, c_min, c_max, hi)?;
    let paths = plan
        .intervals
        .par_iter()
        .map(|iv| {
            let Some((a, b)) = clip(iv, lo, hi) else {
                return Ok(None);
            };
            let op = CollocationOperator::new(n_z, iv.h)?;
            let seed = (a * b).sqrt();
            pf_radial(profile, &op, (a, b), seed, opts, None).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AdaptivePath { plan, k_interval, paths })
}

/// Collocation solve at `k` on a grid of depth `h_δ(k)`.
pub fn solve_forward_truncated<T: Real>(
    profile: &ReducedProfile<T>,
    n_z: usize,
    k: T,
    delta: T,
) -> Result<EigenSolution<T>> {
    let op = CollocationOperator::new(n_z, h_delta(k, delta))?;
    solve_forward(profile, &op, k)
}

/// Collocation reference that uses exactly the depths and weights a blended path uses at `k`.
pub fn solve_forward_blended<T: Real>(profile: &ReducedProfile<T>, n_z: usize, plan: &DepthPlan<T>, k: T) -> Result<T> {
    let mut c = T::zero();
    for (j, w) in plan.weights(k)? {
        let op = CollocationOperator::new(n_z, plan.intervals[j].h)?;
        c += w * solve_forward(profile, &op, k)?.c;
    }
    Ok(c)
}

/// Maps an eigenvector computed on `[-h, 0]` back onto `[-1, 0]`, zero below `-h`.
pub fn remap_to_full_depth<T: Real>(op: &CollocationOperator<T>, w: &[T], z: &[T]) -> Result<Vec<T>> {
    let mut full = w.to_vec();
    if full.len() == op.order() {
        full.push(T::zero());
    }
    let h = op.depth();
    let inside: Vec<T> = z.iter().map(|&x| x.max(-h)).collect();
    let vals = op.interpolate(&full, &inside)?;
    Ok(z.iter().zip(vals).map(|(&x, v)| if x < -h { T::zero() } else { v }).collect())
}
