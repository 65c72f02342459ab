//! Chebyshev–Gauss–Lobatto collocation on `[-h, 0]`.
//!
//! Nodes are stored surface first (`ζ_0 = 1`), so row 0 of every operator is
//! the free-surface row and the last row is the bottom.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::linalg::Mat;
use crate::scalar::Real;

/// Chebyshev–Gauss–Lobatto points `cos(jπ/N)`, `j = 0..=N`, descending.
pub fn cgl_points<T: Real>(n: usize) -> Result<Vec<T>> {
    if n < 1 {
        return Err(invalid("CGL order must be at least 1"));
    }
    let nf = T::from_usize_lossy(n);
    Ok((0..=n)
        .map(|j| {
            // sin form is symmetric about the midpoint and exact at j = N/2
            let arg = T::PI() * (nf - T::lit(2.0) * T::from_usize_lossy(j)) / (T::lit(2.0) * nf);
            arg.sin()
        })
        .collect())
}

/// Closed-form barycentric weights for CGL nodes: `(-1)^j`, halved at both ends.
pub fn cgl_weights<T: Real>(n: usize) -> Vec<T> {
    (0..=n)
        .map(|j| {
            let sign = if j % 2 == 0 { T::one() } else { -T::one() };
            if j == 0 || j == n {
                sign * T::lit(0.5)
            } else {
                sign
            }
        })
        .collect()
}

/// Barycentric weights `1 / Π_{k≠j}(x_j − x_k)` for arbitrary distinct
/// nodes, normalised to unit maximum magnitude.
pub fn barycentric_weights<T: Real>(nodes: &[T]) -> Result<Vec<T>> {
    check_distinct(nodes)?;
    // log domain keeps large node counts clear of under/overflow
    let logs: Vec<(T, bool)> = nodes
        .iter()
        .enumerate()
        .map(|(j, &xj)| {
            let mut log = T::zero();
            let mut neg = false;
            for (k, &xk) in nodes.iter().enumerate() {
                if k != j {
                    let d = xj - xk;
                    log -= d.abs().ln();
                    neg ^= d < T::zero();
                }
            }
            (log, neg)
        })
        .collect();
    let lmax = logs.iter().fold(T::neg_infinity(), |m, (l, _)| m.max(*l));
    Ok(logs
        .into_iter()
        .map(|(l, neg)| {
            let w = (l - lmax).exp();
            if neg {
                -w
            } else {
                w
            }
        })
        .collect())
}

fn check_distinct<T: Real>(nodes: &[T]) -> Result<()> {
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            if nodes[i] == nodes[j] {
                return Err(invalid(format!("duplicate node {} at positions {i} and {j}", nodes[i])));
            }
        }
    }
    Ok(())
}

/// Replaces the diagonal of `m` by the negated sum of the off-diagonal row
/// entries, accumulated from smallest to largest magnitude.
fn negative_sum_trick<T: Real>(m: &mut Mat<T>) {
    let n = m.rows();
    let mut off = Vec::with_capacity(n);
    for i in 0..n {
        off.clear();
        off.extend((0..n).filter(|&j| j != i).map(|j| m[(i, j)]));
        off.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(std::cmp::Ordering::Equal));
        let s: T = off.iter().fold(T::zero(), |acc, &x| acc + x);
        m[(i, i)] = -s;
    }
}

/// Row sum in the accumulation order used by the negative sum trick
/// (off-diagonals by increasing magnitude, diagonal last). Zero by construction.
pub fn canonical_row_sum<T: Real>(m: &Mat<T>, i: usize) -> T {
    let n = m.cols();
    let mut off: Vec<T> = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).collect();
    off.sort_by(|a, b| a.abs().partial_cmp(&b.abs()).unwrap_or(std::cmp::Ordering::Equal));
    off.iter().fold(T::zero(), |acc, &x| acc + x) + m[(i, i)]
}

fn diff_from_weights<T: Real>(
    n: usize,
    weights: &[T],
    diff: impl Fn(usize, usize) -> T,
) -> (Mat<T>, Mat<T>) {
    let mut d = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d[(i, j)] = (weights[j] / weights[i]) / diff(i, j);
            }
        }
    }
    negative_sum_trick(&mut d);
    let mut d2 = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                d2[(i, j)] = T::lit(2.0) * d[(i, j)] * (d[(i, i)] - T::one() / diff(i, j));
            }
        }
    }
    negative_sum_trick(&mut d2);
    (d, d2)
}

/// First and second spectral differentiation matrices on arbitrary distinct nodes.
pub fn diff_matrices<T: Real>(nodes: &[T]) -> Result<(Mat<T>, Mat<T>)> {
    if nodes.len() < 2 {
        return Err(invalid("differentiation needs at least two nodes"));
    }
    let w = barycentric_weights(nodes)?;
    Ok(diff_from_weights(nodes.len(), &w, |i, j| nodes[i] - nodes[j]))
}

/// Evaluates the interpolating polynomial through `(nodes, values)`.
pub fn barycentric_eval<T: Real>(nodes: &[T], values: &[T], queries: &[T]) -> Result<Vec<T>> {
    if nodes.len() != values.len() {
        return Err(invalid("nodes and values differ in length"));
    }
    let w = barycentric_weights(nodes)?;
    Ok(eval_with_weights(nodes, &w, values, queries))
}

fn eval_with_weights<T: Real>(nodes: &[T], weights: &[T], values: &[T], queries: &[T]) -> Vec<T> {
    queries
        .iter()
        .map(|&x| {
            let mut num = T::zero();
            let mut den = T::zero();
            for ((&xj, &wj), &fj) in nodes.iter().zip(weights).zip(values) {
                let d = x - xj;
                if d == T::zero() {
                    return fj;
                }
                let t = wj / d;
                num += t * fj;
                den += t;
            }
            num / den
        })
        .collect()
}

/// CGL collocation operator mapped onto `[-h, 0]`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CollocationOperator<T> {
    n: usize,
    h: T,
    zeta: Vec<T>,
    z: Vec<T>,
    weights: Vec<T>,
    d: Mat<T>,
    d2: Mat<T>,
}

impl<T: Real> CollocationOperator<T> {
    /// Reference operator of order `n` on `[-1, 1]` (`h = 2`, so `z = ζ − 1`).
    pub fn reference(n: usize) -> Result<Self> {
        let zeta = cgl_points::<T>(n)?;
        let weights = cgl_weights::<T>(n);
        let nf = T::from_usize_lossy(n);
        let two = T::lit(2.0);
        // ζ_i − ζ_j = 2 sin((i+j)π/2N) sin((j−i)π/2N), free of cancellation
        let diff = |i: usize, j: usize| {
            let a = T::PI() * T::from_usize_lossy(i + j) / (two * nf);
            let b = T::PI() * (T::from_usize_lossy(j) - T::from_usize_lossy(i)) / (two * nf);
            two * a.sin() * b.sin()
        };
        let (d, d2) = diff_from_weights(n + 1, &weights, diff);
        let z = zeta.iter().map(|&x| x - T::one()).collect();
        Ok(Self {
            n,
            h: two,
            zeta,
            z,
            weights,
            d,
            d2,
        })
    }

    /// Operator of order `n` on `[-h, 0]`.
    pub fn new(n: usize, h: T) -> Result<Self> {
        Self::reference(n)?.map_operator(h)
    }

    /// Re-maps onto `[-h, 0]` via `z = (h/2)(ζ − 1)`, scaling `D` by `2/h`
    /// and `D²` by `(2/h)²`; diagonals are re-derived by the negative sum trick.
    pub fn map_operator(&self, h: T) -> Result<Self> {
        if !(h > T::zero()) || !h.is_finite() {
            return Err(invalid(format!("depth must be positive, got {h}")));
        }
        let half = h / T::lit(2.0);
        // undo the current scaling back to [-1, 1], then apply the new one
        let s1 = (self.h / T::lit(2.0)) / half;
        let s2 = s1 * s1;
        let mut d = self.d.scale(s1);
        let mut d2 = self.d2.scale(s2);
        negative_sum_trick(&mut d);
        negative_sum_trick(&mut d2);
        let z = self.zeta.iter().map(|&x| half * (x - T::one())).collect();
        Ok(Self {
            n: self.n,
            h,
            zeta: self.zeta.clone(),
            z,
            weights: self.weights.clone(),
            d,
            d2,
        })
    }

    /// Polynomial order `N_z`; the grid has `N_z + 1` nodes.
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn depth(&self) -> T {
        self.h
    }

    pub fn zeta(&self) -> &[T] {
        &self.zeta
    }

    pub fn nodes(&self) -> &[T] {
        &self.z
    }

    pub fn d(&self) -> &Mat<T> {
        &self.d
    }

    pub fn d2(&self) -> &Mat<T> {
        &self.d2
    }

    /// First row of `D` without the bottom column.
    pub fn surface_row(&self) -> &[T] {
        &self.d.row(0)[..self.n]
    }

    /// Interpolates grid values (all `N_z + 1` nodes) at arbitrary depths.
    pub fn interpolate(&self, values: &[T], queries: &[T]) -> Result<Vec<T>> {
        if values.len() != self.n + 1 {
            return Err(invalid("value vector does not match the grid"));
        }
        Ok(eval_with_weights(&self.z, &self.weights, values, queries))
    }

    /// Chebyshev coefficients of the interpolant through grid values.
    pub fn chebyshev_coefficients(&self, values: &[T]) -> Result<Vec<T>> {
        if values.len() != self.n + 1 {
            return Err(invalid("value vector does not match the grid"));
        }
        Ok(chebyshev_coefficients(values))
    }
}

/// Chebyshev coefficients from values at descending CGL nodes (direct DCT-I).
pub fn chebyshev_coefficients<T: Real>(values: &[T]) -> Vec<T> {
    let m = values.len();
    if m < 2 {
        return values.to_vec();
    }
    let n = m - 1;
    let nf = T::from_usize_lossy(n);
    let half = T::lit(0.5);
    (0..=n)
        .map(|k| {
            let mut s = T::zero();
            for (j, &f) in values.iter().enumerate() {
                let w = if j == 0 || j == n { half } else { T::one() };
                let arg = T::PI() * T::from_usize_lossy((j * k) % (2 * n)) / nf;
                s += w * f * arg.cos();
            }
            let a = s * T::lit(2.0) / nf;
            if k == 0 || k == n {
                a * half
            } else {
                a
            }
        })
        .collect()
}

/// Parameters of the plateau detector used by [`series_convergence`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct ConvergenceConfig {
    /// Histogram bins across the log-magnitude range.
    pub bins: usize,
    /// Only bins starting at or below this quantile of log-magnitudes can hold the plateau.
    pub noise_floor_quantile: f64,
    /// Minimum decades between the largest and smallest envelope values.
    pub min_decades: f64,
    /// The plateau bin must hold at least this multiple of the mean occupied-bin count.
    pub dominance: f64,
    /// ... and at least this many entries.
    pub min_count: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        Self {
            bins: 16,
            noise_floor_quantile: 0.5,
            min_decades: 3.0,
            dominance: 2.0,
            min_count: 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesConvergence {
    pub converged: bool,
    /// First index at which the envelope enters the plateau.
    pub required_n: Option<usize>,
}

/// Detects a roundoff plateau in a Chebyshev coefficient sequence.
pub fn series_convergence<T: Real>(coefficients: &[T], cfg: &ConvergenceConfig) -> SeriesConvergence {
    let mags: Vec<f64> = coefficients.iter().map(|c| c.to_f64_lossy().abs()).collect();
    let top = mags.iter().fold(0.0f64, |m, &x| m.max(x));
    if top == 0.0 {
        return SeriesConvergence { converged: true, required_n: Some(0) };
    }
    let mut env = vec![0.0f64; mags.len()];
    let mut run = 0.0f64;
    for j in (0..mags.len()).rev() {
        run = run.max(mags[j] / top);
        env[j] = run;
    }
    // exact zeros in the tail: converged where they start
    if let Some(first_zero) = env.iter().position(|&e| e == 0.0) {
        return SeriesConvergence { converged: true, required_n: Some(first_zero) };
    }
    let logs: Vec<f64> = env.iter().map(|e| e.log10()).collect();
    let lmax = logs[0];
    let lmin = *logs.last().expect("nonempty");
    let no_plateau = SeriesConvergence { converged: false, required_n: None };
    if lmax - lmin < cfg.min_decades || cfg.bins == 0 {
        return no_plateau;
    }
    let width = (lmax - lmin) / cfg.bins as f64;
    let bin_of = |l: f64| (((l - lmin) / width) as usize).min(cfg.bins - 1);
    let mut counts = vec![0usize; cfg.bins];
    for &l in &logs {
        counts[bin_of(l)] += 1;
    }
    let mut sorted = logs.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let q = cfg.noise_floor_quantile.clamp(0.0, 1.0);
    let threshold = sorted[((sorted.len() - 1) as f64 * q).round() as usize];
    let candidates = (0..cfg.bins).filter(|&b| lmin + b as f64 * width <= threshold);
    let plateau = candidates.max_by_key(|&b| (counts[b], std::cmp::Reverse(b)));
    let Some(plateau) = plateau else {
        return no_plateau;
    };
    let occupied = counts.iter().filter(|&&c| c > 0).count().max(1);
    let mean = logs.len() as f64 / occupied as f64;
    let tail_in_plateau = bin_of(lmin) == plateau;
    if counts[plateau] < cfg.min_count || (counts[plateau] as f64) < cfg.dominance * mean || !tail_in_plateau {
        return no_plateau;
    }
    let entry = logs.iter().position(|&l| bin_of(l) == plateau);
    SeriesConvergence { converged: true, required_n: entry }
}
