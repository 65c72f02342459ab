//! Bordered linear systems whose solution is the tangent `[ẇ; ċ]` of a
//! dispersion curve with respect to `k` (radial) or `θ` (angular).

use crate::error::{invalid, Error, Result};
use crate::linalg::{Lu, Mat};
use crate::scalar::Real;
use crate::shear::{sample, ReducedProfile, SampledProfile, ShearProfile};
use crate::spectral::CollocationOperator;

/// `M [ẇ; ċ] = b` with `M = [P, Q w; −wᵀ, 0]` and `b = [R w; 0]`.
#[derive(Clone, Debug)]
pub struct BlockSystem<T> {
    pub m: Mat<T>,
    pub b: Vec<T>,
    pub p: Mat<T>,
    pub q: Mat<T>,
    pub r: Mat<T>,
}

/// `P` and `Q` at `(k, c)`; shared by the radial and angular systems.
pub(crate) fn p_q<T: Real>(
    s: &SampledProfile<T>,
    op: &CollocationOperator<T>,
    inv_f2: T,
    k: T,
    c: T,
) -> (Mat<T>, Mat<T>) {
    let n = op.order();
    let df = op.surface_row();
    let d2 = op.d2();
    let k2 = k * k;
    let mut p = Mat::zeros(n, n);
    let mut q = Mat::zeros(n, n);
    let g0 = s.u[0] - c;
    for j in 0..n {
        p[(0, j)] = g0 * g0 * df[j];
        q[(0, j)] = -T::lit(2.0) * g0 * df[j];
    }
    p[(0, 0)] -= s.du[0] * g0 + inv_f2;
    q[(0, 0)] += s.du[0];
    for i in 1..n {
        let g = s.u[i] - c;
        for j in 0..n {
            p[(i, j)] = g * d2[(i, j)];
            q[(i, j)] = -d2[(i, j)];
        }
        p[(i, i)] -= s.d2u[i] + k2 * g;
        q[(i, i)] += k2;
    }
    (p, q)
}

fn border<T: Real>(p: Mat<T>, q: Mat<T>, r: Mat<T>, w: &[T]) -> BlockSystem<T> {
    let n = p.rows();
    let qw = q.matvec(w);
    let rw = r.matvec(w);
    let mut m = Mat::zeros(n + 1, n + 1);
    m.set_block(0, 0, &p);
    for i in 0..n {
        m[(i, n)] = qw[i];
        m[(n, i)] = -w[i];
    }
    let mut b = rw;
    b.push(T::zero());
    BlockSystem { m, b, p, q, r }
}

fn check_inputs<T: Real>(op: &CollocationOperator<T>, k: T, w: &[T]) -> Result<()> {
    if w.len() != op.order() {
        return Err(invalid("eigenvector length does not match the grid"));
    }
    if !(k > T::zero()) {
        return Err(invalid(format!("wavenumber must be positive, got {k}")));
    }
    if w.iter().all(|x| *x == T::zero()) {
        return Err(invalid("eigenvector is zero"));
    }
    Ok(())
}

pub(crate) fn radial_from_samples<T: Real>(
    s: &SampledProfile<T>,
    op: &CollocationOperator<T>,
    inv_f2: T,
    k: T,
    c: T,
    w: &[T],
) -> BlockSystem<T> {
    let n = op.order();
    let (p, q) = p_q(s, op, inv_f2, k, c);
    let mut r = Mat::zeros(n, n);
    for i in 1..n {
        r[(i, i)] = T::lit(2.0) * k * (s.u[i] - c);
    }
    border(p, q, r, w)
}

/// Tangent system along `k` at fixed direction.
pub fn assemble_radial<T: Real>(
    profile: &ReducedProfile<T>,
    op: &CollocationOperator<T>,
    k: T,
    c: T,
    w: &[T],
) -> Result<BlockSystem<T>> {
    check_inputs(op, k, w)?;
    let s = sample(profile, op);
    Ok(radial_from_samples(&s, op, profile.inv_froude2(), k, c, w))
}

pub(crate) fn angular_from_samples<T: Real>(
    s: &SampledProfile<T>,
    ds: &SampledProfile<T>,
    op: &CollocationOperator<T>,
    inv_f2: T,
    k0: T,
    c: T,
    w: &[T],
) -> BlockSystem<T> {
    let n = op.order();
    let (p, q) = p_q(s, op, inv_f2, k0, c);
    let df = op.surface_row();
    let d2 = op.d2();
    let mut r = Mat::zeros(n, n);
    let g0 = s.u[0] - c;
    for j in 0..n {
        r[(0, j)] = -T::lit(2.0) * g0 * ds.u[0] * df[j];
    }
    r[(0, 0)] += ds.u[0] * s.du[0] + ds.du[0] * g0;
    for i in 1..n {
        for j in 0..n {
            r[(i, j)] = -ds.u[i] * d2[(i, j)];
        }
        r[(i, i)] += ds.d2u[i] + k0 * k0 * ds.u[i];
    }
    border(p, q, r, w)
}

/// Tangent system along `θ` at fixed `k₀`.
pub fn assemble_angular<T: Real>(
    profile: &ShearProfile<T>,
    op: &CollocationOperator<T>,
    theta: T,
    k0: T,
    c: T,
    w: &[T],
) -> Result<BlockSystem<T>> {
    check_inputs(op, k0, w)?;
    let s = sample(&profile.project(theta), op);
    let ds = sample(&profile.angular_derivative(theta), op);
    Ok(angular_from_samples(&s, &ds, op, T::one() / profile.froude2, k0, c, w))
}

/// Solves the bordered system; `t` only labels a breakdown.
pub fn derivative<T: Real>(system: &BlockSystem<T>, t: T) -> Result<(Vec<T>, T)> {
    let lu = Lu::factor(&system.m)?;
    let cond = lu.cond_estimate();
    if !(cond * T::epsilon() < T::one()) {
        return Err(Error::ContinuationBreakdown {
            t: t.to_f64_lossy(),
            reason: format!("bordered system is numerically singular (condition estimate {:e})", cond.to_f64_lossy()),
            partial: Vec::new(),
        });
    }
    let mut x = lu.solve(&system.b);
    let c = x.pop().expect("nonempty system");
    Ok((x, c))
}

/// Angular tangent `[ẇ; ċ]` from the system of [`angular_from_samples`],
/// assembled straight into the bordered matrix without forming `P`, `Q`, `R`.
/// Skips the condition estimate; meant for repeated field queries.
#[allow(clippy::too_many_arguments)]
pub(crate) fn angular_tangent<T: Real>(
    s: &SampledProfile<T>,
    ds: &SampledProfile<T>,
    op: &CollocationOperator<T>,
    inv_f2: T,
    k0: T,
    c: T,
    w: &[T],
    theta: T,
) -> Result<Vec<T>> {
    let n = op.order();
    let df = op.surface_row();
    let d2 = op.d2();
    let k2 = k0 * k0;
    let two = T::lit(2.0);
    let mut m = Mat::zeros(n + 1, n + 1);
    let mut b = vec![T::zero(); n + 1];

    let g0 = s.u[0] - c;
    let dfw = df.iter().zip(w).fold(T::zero(), |acc, (a, x)| acc + *a * *x);
    for j in 0..n {
        m[(0, j)] = g0 * g0 * df[j];
    }
    m[(0, 0)] -= s.du[0] * g0 + inv_f2;
    m[(0, n)] = -two * g0 * dfw + s.du[0] * w[0];
    b[0] = -two * g0 * ds.u[0] * dfw + (ds.u[0] * s.du[0] + ds.du[0] * g0) * w[0];
    for i in 1..n {
        let g = s.u[i] - c;
        let d2row = &d2.row(i)[..n];
        let row = m.row_mut(i);
        let mut d2w = T::zero();
        for ((x, &d), &wj) in row[..n].iter_mut().zip(d2row).zip(w) {
            *x = g * d;
            d2w += d * wj;
        }
        row[i] -= s.d2u[i] + k2 * g;
        row[n] = -d2w + k2 * w[i];
        b[i] = -ds.u[i] * d2w + (ds.d2u[i] + k2 * ds.u[i]) * w[i];
    }
    for (x, &wj) in m.row_mut(n)[..n].iter_mut().zip(w) {
        *x = -wj;
    }
    let x = Lu::factor(&m)?.solve(&b);
    if !x.iter().all(|v| v.is_finite()) {
        return Err(Error::ContinuationBreakdown {
            t: theta.to_f64_lossy(),
            reason: "bordered system is singular".into(),
            partial: Vec::new(),
        });
    }
    Ok(x)
}
