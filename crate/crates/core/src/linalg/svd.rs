use crate::scalar::Real;

use super::mat::Mat;

/// Singular values by one-sided Jacobi rotations, in descending order.
pub fn singular_values<T: Real>(a: &Mat<T>) -> Vec<T> {
    // work on the orientation with at least as many rows as columns
    let work = if a.rows() >= a.cols() { a.clone() } else { a.transpose() };
    let (m, n) = (work.rows(), work.cols());
    // column-major copy
    let mut cols: Vec<Vec<T>> = (0..n).map(|j| work.col(j)).collect();
    let eps = T::epsilon();
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (T::zero(), T::zero(), T::zero());
                for i in 0..m {
                    let (x, y) = (cols[p][i], cols[q][i]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(q);
                let (cp, cq) = (&mut left[p], &mut right[0]);
                for i in 0..m {
                    let (x, y) = (cp[i], cq[i]);
                    cp[i] = c * x - s * y;
                    cq[i] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<T> = cols.iter().map(|c| super::mat::norm2(c)).collect();
    sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    sv
}

/// Spectral norm `σ_max`.
pub fn norm_2<T: Real>(a: &Mat<T>) -> T {
    singular_values(a).first().copied().unwrap_or_else(T::zero)
}

/// Spectral condition number `σ_max / σ_min`; infinite when `σ_min` is
/// below the roundoff level of `σ_max`.
pub fn cond_2<T: Real>(a: &Mat<T>) -> T {
    let sv = singular_values(a);
    match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > hi * T::epsilon() => hi / lo,
        _ => T::infinity(),
    }
}
