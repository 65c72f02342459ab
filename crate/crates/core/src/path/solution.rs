use serde::{Deserialize, Serialize};

use crate::collocation::{solve_forward, EigenSolution};
use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::shear::{sample, ReducedProfile, ShearProfile};
use crate::spectral::CollocationOperator;

use super::dopri::{adaptive_integrate, quartic_hermite, IntegrateOptions, Trajectory};
use super::system::{angular_from_samples, derivative, radial_from_samples};

/// What a path is parametrised by and the data it was built from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum PathSource<T> {
    /// `t = k` at a fixed direction.
    Radial { profile: ReducedProfile<T> },
    /// `t = θ` at fixed `k0`.
    Angular { profile: ShearProfile<T>, k0: T },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathOptions<T> {
    pub tol: T,
    pub max_steps: usize,
    /// Integrate in `ln k` instead of `k` (radial paths only).
    pub log_param: bool,
}

impl<T: Real> PathOptions<T> {
    pub fn new(tol: T) -> Self {
        Self { tol, max_steps: 100_000, log_param: false }
    }

    pub fn log_param(mut self, on: bool) -> Self {
        self.log_param = on;
        self
    }
}

impl<T: Real> Default for PathOptions<T> {
    fn default() -> Self {
        Self::new(T::lit(1e-11))
    }
}

/// Control points `v = [w; c]` along a dispersion curve with Shampine midpoints.
///
/// `x` is the integration variable (`t`, or `ln t` for log-parametrised
/// paths) and `dv` holds derivatives with respect to `x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PathSolution<T> {
    pub source: PathSource<T>,
    pub n_z: usize,
    pub depth: T,
    pub tol: T,
    pub log_param: bool,
    pub t_seed: T,
    pub t: Vec<T>,
    pub x: Vec<T>,
    pub v: Vec<Vec<T>>,
    pub dv: Vec<Vec<T>>,
    pub t_mid: Vec<T>,
    pub v_mid: Vec<Vec<T>>,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
}

impl<T: Real> PathSolution<T> {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn span(&self) -> (T, T) {
        (self.t[0], *self.t.last().expect("nonempty path"))
    }

    /// `c` at control point `j`.
    pub fn c(&self, j: usize) -> T {
        self.v[j][self.n_z]
    }

    pub fn w(&self, j: usize) -> &[T] {
        &self.v[j][..self.n_z]
    }

    fn to_x(&self, t: T) -> T {
        if self.log_param {
            t.ln()
        } else {
            t
        }
    }

    fn locate(&self, t: T) -> Result<Located<T>> {
        let (lo, hi) = self.span();
        if !(t >= lo && t <= hi) {
            return Err(Error::OutOfRange { value: t.to_f64_lossy(), lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
        }
        let j = self.t.partition_point(|&tj| tj <= t);
        let j = j.saturating_sub(1);
        if self.t[j] == t {
            return Ok(Located::Node(j));
        }
        if self.t_mid[j] == t {
            return Ok(Located::Mid(j));
        }
        let x = self.to_x(t);
        let h = self.x[j + 1] - self.x[j];
        let theta = ((x - self.x[j]) / h).max(T::zero()).min(T::one());
        Ok(Located::Inside(j, h, theta))
    }

    fn interp(&self, j: usize, h: T, theta: T, i: usize) -> T {
        quartic_hermite(self.v[j][i], self.dv[j][i], self.v_mid[j][i], self.v[j + 1][i], self.dv[j + 1][i], h, theta)
    }

    /// Phase velocity at `t`, interpolating the scalar component only.
    pub fn dense_eval(&self, t: T) -> Result<T> {
        let n = self.n_z;
        Ok(match self.locate(t)? {
            Located::Node(j) => self.v[j][n],
            Located::Mid(j) => self.v_mid[j][n],
            Located::Inside(j, h, theta) => self.interp(j, h, theta, n),
        })
    }

    /// Full state `[w; c]` at `t`.
    pub fn dense_eval_full(&self, t: T) -> Result<Vec<T>> {
        Ok(match self.locate(t)? {
            Located::Node(j) => self.v[j].clone(),
            Located::Mid(j) => self.v_mid[j].clone(),
            Located::Inside(j, h, theta) => (0..=self.n_z).map(|i| self.interp(j, h, theta, i)).collect(),
        })
    }

    /// Collocation operator matching the path's grid.
    pub fn operator(&self) -> Result<CollocationOperator<T>> {
        CollocationOperator::new(self.n_z, self.depth)
    }
}

enum Located<T> {
    Node(usize),
    Mid(usize),
    Inside(usize, T, T),
}

fn seed_state<T: Real>(seed: &EigenSolution<T>) -> Result<Vec<T>> {
    let mut v = seed
        .real_w()
        .ok_or_else(|| Error::InvalidSeed("seed eigenvector is not real".into()))?;
    v.push(seed.c);
    Ok(v)
}

fn map_partial(e: Error, log: bool) -> Error {
    match e {
        Error::ContinuationBreakdown { t, reason, partial } if log => Error::ContinuationBreakdown {
            t: t.exp(),
            reason,
            partial: partial.into_iter().map(|(x, c)| (x.exp(), c)).collect(),
        },
        Error::Budget { max_steps, t } if log => Error::Budget { max_steps, t: t.exp() },
        other => other,
    }
}

struct Halves<T> {
    down: Trajectory<T>,
    up: Trajectory<T>,
}

fn integrate_both_ways<T: Real, F>(
    mut f: F,
    x_seed: T,
    x_lo: T,
    x_hi: T,
    v0: &[T],
    n: usize,
    opts: &PathOptions<T>,
) -> Result<Halves<T>>
where
    F: FnMut(T, &[T]) -> Result<Vec<T>>,
{
    let io = IntegrateOptions { tol: opts.tol, max_steps: opts.max_steps, normalise_leading: Some(n) };
    let down = adaptive_integrate(&mut f, x_seed, x_lo, v0, &io).map_err(|e| map_partial(e, opts.log_param))?;
    let up = adaptive_integrate(&mut f, x_seed, x_hi, v0, &io).map_err(|e| map_partial(e, opts.log_param))?;
    Ok(Halves { down, up })
}

#[allow(clippy::too_many_arguments)]
fn assemble_solution<T: Real>(
    halves: Halves<T>,
    source: PathSource<T>,
    op: &CollocationOperator<T>,
    opts: &PathOptions<T>,
    interval: (T, T),
    t_seed: T,
) -> PathSolution<T> {
    let Halves { down, up } = halves;
    let to_t = |x: T| if opts.log_param { x.exp() } else { x };
    let mut sol = PathSolution {
        source,
        n_z: op.order(),
        depth: op.depth(),
        tol: opts.tol,
        log_param: opts.log_param,
        t_seed,
        t: vec![],
        x: vec![],
        v: vec![],
        dv: vec![],
        t_mid: vec![],
        v_mid: vec![],
        accepted_steps: down.accepted_steps() + up.accepted_steps(),
        rejected_steps: down.rejected + up.rejected,
    };
    let nd = down.t.len();
    for j in (0..nd).rev() {
        sol.x.push(down.t[j]);
        sol.v.push(down.y[j].clone());
        sol.dv.push(down.f[j].clone());
    }
    for j in (0..down.t_mid.len()).rev() {
        sol.t_mid.push(to_t(down.t_mid[j]));
        sol.v_mid.push(down.y_mid[j].clone());
    }
    for j in 1..up.t.len() {
        sol.x.push(up.t[j]);
        sol.v.push(up.y[j].clone());
        sol.dv.push(up.f[j].clone());
    }
    for j in 0..up.t_mid.len() {
        sol.t_mid.push(to_t(up.t_mid[j]));
        sol.v_mid.push(up.y_mid[j].clone());
    }
    sol.t = sol.x.iter().map(|&x| to_t(x)).collect();
    // pin the exact parameter values of the seed and both ends
    let last = sol.t.len() - 1;
    sol.t[0] = interval.0;
    sol.t[last] = interval.1;
    sol.t[nd - 1] = t_seed;
    sol
}

fn check_interval<T: Real>(lo: T, hi: T, seed: T) -> Result<()> {
    if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(invalid(format!("invalid interval [{lo}, {hi}]")));
    }
    if !(seed >= lo && seed <= hi) {
        return Err(Error::OutOfRange { value: seed.to_f64_lossy(), lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
    }
    Ok(())
}

fn check_seed_at<T: Real>(seed: &EigenSolution<T>, k: T) -> Result<()> {
    if (seed.k - k).abs() > T::lit(1e-12) * k.abs().max(T::one()) {
        return Err(Error::InvalidSeed(format!("seed computed at k = {} but path needs k = {k}", seed.k)));
    }
    Ok(())
}

/// Dispersion curve `c(k)` over `k_interval` by continuation from `k_seed`.
pub fn pf_radial<T: Real>(
    profile: &ReducedProfile<T>,
    op: &CollocationOperator<T>,
    k_interval: (T, T),
    k_seed: T,
    opts: &PathOptions<T>,
    seed: Option<&EigenSolution<T>>,
) -> Result<PathSolution<T>> {
    let (ka, kb) = k_interval;
    check_interval(ka, kb, k_seed)?;
    if !(ka > T::zero()) {
        return Err(invalid("wavenumbers must be positive"));
    }
    let seed = match seed {
        Some(s) => {
            check_seed_at(s, k_seed)?;
            s.clone()
        }
        None => solve_forward(profile, op, k_seed)?,
    };
    let v0 = seed_state(&seed)?;
    let n = op.order();
    let s = sample(profile, op);
    let inv_f2 = profile.inv_froude2();
    let log = opts.log_param;
    let rhs = |x: T, v: &[T]| -> Result<Vec<T>> {
        let k = if log { x.exp() } else { x };
        let sys = radial_from_samples(&s, op, inv_f2, k, v[n], &v[..n]);
        let (mut dw, dc) = derivative(&sys, k)?;
        dw.push(dc);
        if log {
            for d in dw.iter_mut() {
                *d *= k;
            }
        }
        Ok(dw)
    };
    let map = |k: T| if log { k.ln() } else { k };
    let halves = integrate_both_ways(rhs, map(k_seed), map(ka), map(kb), &v0, n, opts)?;
    let source = PathSource::Radial { profile: profile.clone() };
    Ok(assemble_solution(halves, source, op, opts, k_interval, k_seed))
}

/// Dispersion curve `c(θ)` at fixed `k0` over `theta_interval`.
pub fn pf_angular<T: Real>(
    profile: &ShearProfile<T>,
    op: &CollocationOperator<T>,
    k0: T,
    theta_interval: (T, T),
    theta_seed: T,
    opts: &PathOptions<T>,
    seed: Option<&EigenSolution<T>>,
) -> Result<PathSolution<T>> {
    let (ta, tb) = theta_interval;
    check_interval(ta, tb, theta_seed)?;
    if !(k0 > T::zero()) {
        return Err(invalid("wavenumber must be positive"));
    }
    let seed = match seed {
        Some(s) => {
            check_seed_at(s, k0)?;
            s.clone()
        }
        None => solve_forward(&profile.project(theta_seed), op, k0)?,
    };
    let v0 = seed_state(&seed)?;
    let n = op.order();
    let inv_f2 = T::one() / profile.froude2;
    let rhs = |theta: T, v: &[T]| -> Result<Vec<T>> {
        let s = sample(&profile.project(theta), op);
        let ds = sample(&profile.angular_derivative(theta), op);
        let sys = angular_from_samples(&s, &ds, op, inv_f2, k0, v[n], &v[..n]);
        let (mut dw, dc) = derivative(&sys, theta)?;
        dw.push(dc);
        Ok(dw)
    };
    let mut o = opts.clone();
    o.log_param = false;
    let halves = integrate_both_ways(rhs, theta_seed, ta, tb, &v0, n, &o)?;
    let source = PathSource::Angular { profile: profile.clone(), k0 };
    Ok(assemble_solution(halves, source, op, &o, theta_interval, theta_seed))
}
