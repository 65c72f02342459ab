//! Dormand–Prince RK5(4)7M with error-per-step control and Shampine's
//! quartic dense output.

use crate::error::{invalid, Error, Result};
use crate::linalg::norm2;
use crate::scalar::Real;

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];

/// Fifth-order minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Weights giving the solution at the step midpoint (Shampine).
const MID: [f64; 7] = [
    6025192743.0 / 30085553152.0 / 2.0,
    0.0,
    51252292925.0 / 65400821598.0 / 2.0,
    -2691868925.0 / 45128329728.0 / 2.0,
    187940372067.0 / 1594534317056.0 / 2.0,
    -1776094331.0 / 19743644256.0 / 2.0,
    11237099.0 / 235043384.0 / 2.0,
];

/// Result of one RK5(4) step.
#[derive(Clone, Debug)]
pub struct Step<T> {
    pub y: Vec<T>,
    /// Embedded error estimate (fifth minus fourth order).
    pub err: Vec<T>,
    /// `f(t + h, y)`, reused as the first stage of the next step.
    pub f_end: Vec<T>,
    /// Solution at `t + h/2` for the quartic interpolant.
    pub y_mid: Vec<T>,
}

fn axpy_stages<T: Real>(y: &[T], h: T, k: &[Vec<T>], w: &[f64]) -> Vec<T> {
    let mut out = y.to_vec();
    for (ki, &wi) in k.iter().zip(w) {
        if wi != 0.0 {
            let s = h * T::lit(wi);
            for (o, v) in out.iter_mut().zip(ki) {
                *o += s * *v;
            }
        }
    }
    out
}

/// One step from `(t, y)` with size `h`. `f0 = f(t, y)` may be supplied (FSAL).
pub fn dopri_step<T: Real, F>(f: &mut F, t: T, y: &[T], f0: Option<&[T]>, h: T) -> Result<Step<T>>
where
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
{
    if h == T::zero() {
        return Err(invalid("step size must be nonzero"));
    }
    let mut k: Vec<Vec<T>> = Vec::with_capacity(7);
    k.push(match f0 {
        Some(v) => v.to_vec(),
        None => f(t, y)?,
    });
    for s in 1..7 {
        let ys = axpy_stages(y, h, &k, &A[s][..s]);
        k.push(f(t + h * T::lit(C[s]), &ys)?);
    }
    // row 6 of A holds the fifth-order weights, so stage 7 is evaluated at y_next
    let y_next = axpy_stages(y, h, &k[..6], &A[6]);
    let zero = vec![T::zero(); y.len()];
    let err = axpy_stages(&zero, h, &k, &E);
    let y_mid = axpy_stages(y, h, &k, &MID);
    let f_end = k.pop().expect("seven stages");
    Ok(Step { y: y_next, err, f_end, y_mid })
}

/// Quartic through `y0, f0` at θ=0, `ym` at θ=1/2, `y1, f1` at θ=1, on a step of size `h`.
#[inline]
pub fn quartic_hermite<T: Real>(y0: T, f0: T, ym: T, y1: T, f1: T, h: T, theta: T) -> T {
    let a = y1 - y0 - h * f0;
    let b = h * f1 - h * f0;
    let c = ym - y0 - h * f0 / T::lit(2.0);
    let a2 = -T::lit(5.0) * a + b + T::lit(16.0) * c;
    let a3 = T::lit(14.0) * a - T::lit(3.0) * b - T::lit(32.0) * c;
    let a4 = T::lit(16.0) * c - T::lit(8.0) * a + T::lit(2.0) * b;
    (((a4 * theta + a3) * theta + a2) * theta + h * f0) * theta + y0
}

/// Cubic Hermite through `(y0, f0)` and `(y1, f1)` on a step of size `h`.
#[inline]
pub fn cubic_hermite<T: Real>(y0: T, f0: T, y1: T, f1: T, h: T, theta: T) -> T {
    let d = y1 - y0;
    let a2 = T::lit(3.0) * d - h * (T::lit(2.0) * f0 + f1);
    let a3 = h * (f0 + f1) - T::lit(2.0) * d;
    ((a3 * theta + a2) * theta + h * f0) * theta + y0
}

#[derive(Clone, Debug)]
pub struct IntegrateOptions<T> {
    pub tol: T,
    pub max_steps: usize,
    /// When set, the leading `n` components are rescaled to unit 2-norm
    /// after every accepted step (the system must be homogeneous in them).
    pub normalise_leading: Option<usize>,
}

impl<T: Real> IntegrateOptions<T> {
    pub fn new(tol: T) -> Self {
        Self { tol, max_steps: 100_000, normalise_leading: None }
    }
}

/// Accepted points of an integration, in integration order.
#[derive(Clone, Debug, Default)]
pub struct Trajectory<T> {
    pub t: Vec<T>,
    pub y: Vec<Vec<T>>,
    pub f: Vec<Vec<T>>,
    pub t_mid: Vec<T>,
    pub y_mid: Vec<Vec<T>>,
    pub rejected: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn accepted_steps(&self) -> usize {
        self.t.len().saturating_sub(1)
    }

    /// `(t, last component)` pairs, used to report partial progress.
    fn partial(&self) -> Vec<(f64, f64)> {
        self.t
            .iter()
            .zip(&self.y)
            .map(|(t, y)| (t.to_f64_lossy(), y.last().map_or(f64::NAN, |v| v.to_f64_lossy())))
            .collect()
    }
}

/// The embedded estimate bounds the step error only; the quartic interpolant
/// is a fourth-order midpoint away from it and runs up to ~30x larger, so
/// steps are controlled against `tol / DENSE_MARGIN`.
pub const DENSE_MARGIN: f64 = 10.0;

/// Scaled max-norm; an RMS norm would let the single `c` component drift by
/// a factor `sqrt(N_z)` more than the eigenvector entries.
fn error_norm<T: Real>(err: &[T], y0: &[T], y1: &[T], tol: T) -> T {
    err.iter().zip(y0.iter().zip(y1)).fold(T::zero(), |m, (e, (a, b))| {
        let sc = tol + tol * a.abs().max(b.abs());
        m.max(e.abs() / sc)
    })
}

fn initial_step<T: Real, F>(f: &mut F, t0: T, y0: &[T], f0: &[T], dir: T, tol: T) -> Result<T>
where
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
{
    let sc: Vec<T> = y0.iter().map(|y| tol + tol * y.abs()).collect();
    let rms = |v: &[T]| {
        let n = T::from_usize_lossy(v.len().max(1));
        (v.iter().zip(&sc).map(|(x, s)| (*x / *s) * (*x / *s)).sum::<T>() / n).sqrt()
    };
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < T::lit(1e-5) || d1 < T::lit(1e-5) { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    let y1: Vec<T> = y0.iter().zip(f0).map(|(y, f)| *y + dir * h0 * *f).collect();
    let f1 = f(t0 + dir * h0, &y1)?;
    let diff: Vec<T> = f1.iter().zip(f0).map(|(a, b)| *a - *b).collect();
    let d2 = rms(&diff) / h0;
    let m = d1.max(d2);
    let h1 = if m <= T::lit(1e-15) {
        (h0 * T::lit(1e-3)).max(T::lit(1e-6))
    } else {
        (T::lit(0.01) / m).powf(T::lit(0.2))
    };
    Ok((T::lit(100.0) * h0).min(h1))
}

fn normalise_leading<T: Real>(y: &mut [T], f: &mut [T], n: usize) {
    let nrm = norm2(&y[..n]);
    if nrm > T::zero() {
        for v in y[..n].iter_mut().chain(f[..n].iter_mut()) {
            *v /= nrm;
        }
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` with adaptive steps.
pub fn adaptive_integrate<T: Real, F>(mut f: F, t0: T, t1: T, y0: &[T], opts: &IntegrateOptions<T>) -> Result<Trajectory<T>>
where
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
{
    let tol = opts.tol;
    if !(tol >= T::lit(1e-15) && tol <= T::lit(1e-2)) {
        return Err(invalid(format!("tolerance {tol} outside [1e-15, 1e-2]")));
    }
    let mut y = y0.to_vec();
    let mut fy = f(t0, &y)?;
    if let Some(n) = opts.normalise_leading {
        normalise_leading(&mut y, &mut fy, n);
    }
    let mut traj = Trajectory { t: vec![t0], y: vec![y.clone()], f: vec![fy.clone()], ..Default::default() };
    let span = (t1 - t0).abs();
    if span == T::zero() {
        return Ok(traj);
    }
    let dir = if t1 > t0 { T::one() } else { -T::one() };
    let h_floor = T::lit(1e-14) * span;
    let mut t = t0;
    let mut h = initial_step(&mut f, t0, &y, &fy, dir, tol)
        .map_err(|e| with_partial(e, &traj))?
        .min(span);
    let mut reject_streak = false;
    loop {
        if traj.accepted_steps() + traj.rejected >= opts.max_steps {
            return Err(Error::Budget { max_steps: opts.max_steps, t: t.to_f64_lossy() });
        }
        let remaining = (t1 - t).abs();
        let last = h >= remaining;
        let h_eff = if last { remaining } else { h };
        let step = dopri_step(&mut f, t, &y, Some(&fy), dir * h_eff).map_err(|e| with_partial(e, &traj))?;
        let en = error_norm(&step.err, &y, &step.y, tol / T::lit(DENSE_MARGIN));
        if !en.is_finite() {
            return Err(Error::ContinuationBreakdown {
                t: t.to_f64_lossy(),
                reason: "non-finite error estimate".into(),
                partial: traj.partial(),
            });
        }
        if en <= T::one() {
            let t_new = if last { t1 } else { t + dir * h_eff };
            let mut y_new = step.y;
            let mut f_new = step.f_end;
            if let Some(n) = opts.normalise_leading {
                normalise_leading(&mut y_new, &mut f_new, n);
            }
            traj.t_mid.push(t + dir * h_eff / T::lit(2.0));
            traj.y_mid.push(step.y_mid);
            traj.t.push(t_new);
            traj.y.push(y_new.clone());
            traj.f.push(f_new.clone());
            if last {
                return Ok(traj);
            }
            t = t_new;
            y = y_new;
            fy = f_new;
            let mut fac = if en == T::zero() { T::lit(5.0) } else { T::lit(0.9) * en.powf(-T::lit(0.2)) };
            fac = fac.max(T::lit(0.2)).min(T::lit(5.0));
            if reject_streak {
                fac = fac.min(T::one());
            }
            reject_streak = false;
            h = h_eff * fac;
        } else {
            traj.rejected += 1;
            reject_streak = true;
            let fac = (T::lit(0.9) * en.powf(-T::lit(0.2))).max(T::lit(0.2)).min(T::one());
            h = h_eff * fac;
        }
        if h < h_floor {
            return Err(Error::ContinuationBreakdown {
                t: t.to_f64_lossy(),
                reason: format!("step size underflow (h = {:e})", h.to_f64_lossy()),
                partial: traj.partial(),
            });
        }
    }
}

fn with_partial<T: Real>(e: Error, traj: &Trajectory<T>) -> Error {
    match e {
        Error::ContinuationBreakdown { t, reason, partial } if partial.is_empty() => {
            Error::ContinuationBreakdown { t, reason, partial: traj.partial() }
        }
        other => other,
    }
}
