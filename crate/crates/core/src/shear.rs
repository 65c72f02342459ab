//! Vertical shear profiles `U(z) = (U_x(z), U_y(z))` on `[-1, 0]` and their
//! projections onto a propagation direction.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::spectral::CollocationOperator;
use crate::scalar::Real;

/// One scalar velocity component as a function of depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProfileFn<T> {
    Zero,
    /// `(γ/2)(1 + δz) cos(β(−z)^α) + 1/2`
    Oscillatory { alpha: T, beta: T, gamma: T, delta: T },
    /// `a + b z`
    Linear { a: T, b: T },
    /// `Σ c_i z^i`, ascending powers
    Polynomial { coeffs: Vec<T> },
    Scaled { factor: T, inner: Box<ProfileFn<T>> },
}

impl<T: Real> ProfileFn<T> {
    /// `(f, f', f'')` at depth `z ≤ 0`.
    pub fn eval(&self, z: T) -> (T, T, T) {
        match self {
            ProfileFn::Zero => (T::zero(), T::zero(), T::zero()),
            ProfileFn::Oscillatory { alpha, beta, gamma, delta } => {
                let (a, b, g, d) = (*alpha, *beta, *gamma, *delta);
                let s = (-z).max(T::zero());
                let half_g = g / T::lit(2.0);
                let phase = b * s.powf(a);
                let dphase = -a * b * s.powf(a - T::one());
                let d2phase = a * (a - T::one()) * b * s.powf(a - T::lit(2.0));
                let (sn, cs) = phase.sin_cos();
                let lin = T::one() + d * z;
                let f = half_g * lin * cs + T::lit(0.5);
                let f1 = half_g * (d * cs - lin * sn * dphase);
                let f2 = half_g * (-T::lit(2.0) * d * sn * dphase - lin * (cs * dphase * dphase + sn * d2phase));
                (f, f1, f2)
            }
            ProfileFn::Linear { a, b } => (*a + *b * z, *b, T::zero()),
            ProfileFn::Polynomial { coeffs } => {
                let (mut p, mut dp, mut d2p) = (T::zero(), T::zero(), T::zero());
                for &c in coeffs.iter().rev() {
                    d2p = d2p * z + T::lit(2.0) * dp;
                    dp = dp * z + p;
                    p = p * z + c;
                }
                (p, dp, d2p)
            }
            ProfileFn::Scaled { factor, inner } => {
                let (f, f1, f2) = inner.eval(z);
                (*factor * f, *factor * f1, *factor * f2)
            }
        }
    }

    pub fn value(&self, z: T) -> T {
        self.eval(z).0
    }
}

/// Two-component current with its Froude number.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShearProfile<T> {
    pub name: String,
    pub ux: ProfileFn<T>,
    pub uy: ProfileFn<T>,
    /// Squared Froude number `F²`.
    pub froude2: T,
}

impl<T: Real> ShearProfile<T> {
    pub fn new(name: impl Into<String>, ux: ProfileFn<T>, uy: ProfileFn<T>, froude2: T) -> Result<Self> {
        if !(froude2 > T::zero()) || !froude2.is_finite() {
            return Err(invalid(format!("F² must be positive, got {froude2}")));
        }
        Ok(Self { name: name.into(), ux, uy, froude2 })
    }

    /// Component along `(cos θ, sin θ)`.
    pub fn project(&self, theta: T) -> ReducedProfile<T> {
        let (s, c) = theta.sin_cos();
        ReducedProfile::new(self, c, s, theta)
    }

    /// `∂/∂θ` of the projected component: `−sin θ U_x + cos θ U_y`.
    pub fn angular_derivative(&self, theta: T) -> ReducedProfile<T> {
        let (s, c) = theta.sin_cos();
        ReducedProfile::new(self, -s, c, theta)
    }
}

/// Scalar profile `wx U_x + wy U_y` seen by a wave along direction `theta`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedProfile<T> {
    pub name: String,
    ux: ProfileFn<T>,
    uy: ProfileFn<T>,
    wx: T,
    wy: T,
    pub theta: T,
    pub froude2: T,
}

impl<T: Real> ReducedProfile<T> {
    fn new(p: &ShearProfile<T>, wx: T, wy: T, theta: T) -> Self {
        Self { name: p.name.clone(), ux: p.ux.clone(), uy: p.uy.clone(), wx, wy, theta, froude2: p.froude2 }
    }

    /// One-dimensional profile `U(z)` (direction 0).
    pub fn scalar(u: ProfileFn<T>, froude2: T) -> Result<Self> {
        let p = ShearProfile::new("scalar", u, ProfileFn::Zero, froude2)?;
        Ok(p.project(T::zero()))
    }

    pub fn eval(&self, z: T) -> (T, T, T) {
        let mut out = (T::zero(), T::zero(), T::zero());
        for (f, w) in [(&self.ux, self.wx), (&self.uy, self.wy)] {
            if w != T::zero() {
                let (a, b, c) = f.eval(z);
                out.0 += w * a;
                out.1 += w * b;
                out.2 += w * c;
            }
        }
        out
    }

    pub fn value(&self, z: T) -> T {
        self.eval(z).0
    }

    /// `F⁻²`
    pub fn inv_froude2(&self) -> T {
        T::one() / self.froude2
    }

    /// `(min U, max U)` over `[lo, hi]`.
    pub fn essential_range_on(&self, lo: T, hi: T) -> (T, T) {
        essential_range_of(|z| self.value(z), lo, hi)
    }

    /// `(min U, max U)` over the full water column `[-1, 0]`.
    pub fn essential_range(&self) -> (T, T) {
        self.essential_range_on(-T::one(), T::zero())
    }

    /// Depth in `[lo, hi]` where `U` comes closest to `c`.
    pub fn closest_depth(&self, c: T, lo: T, hi: T) -> T {
        let n = 2000;
        let step = (hi - lo) / T::from_usize_lossy(n);
        (0..=n)
            .map(|i| lo + step * T::from_usize_lossy(i))
            .min_by(|a, b| {
                let da = (self.value(*a) - c).abs();
                let db = (self.value(*b) - c).abs();
                da.partial_cmp(&db).unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(hi)
    }
}

fn essential_range_of<T: Real>(f: impl Fn(T) -> T, lo: T, hi: T) -> (T, T) {
    let n = 10_000usize;
    let step = (hi - lo) / T::from_usize_lossy(n);
    let at = |i: usize| if i == n { hi } else { lo + step * T::from_usize_lossy(i) };
    let (mut imin, mut imax) = (0, 0);
    let (mut vmin, mut vmax) = (f(at(0)), f(at(0)));
    for i in 1..=n {
        let v = f(at(i));
        if v < vmin {
            vmin = v;
            imin = i;
        }
        if v > vmax {
            vmax = v;
            imax = i;
        }
    }
    let bracket = |i: usize| (at(i.saturating_sub(1)), at((i + 1).min(n)));
    let (a, b) = bracket(imin);
    let vmin = vmin.min(golden_extremum(&f, a, b, false));
    let (a, b) = bracket(imax);
    let vmax = vmax.max(golden_extremum(&f, a, b, true));
    (vmin, vmax)
}

fn golden_extremum<T: Real>(f: &impl Fn(T) -> T, mut a: T, mut b: T, maximise: bool) -> T {
    let sign = if maximise { -T::one() } else { T::one() };
    let g = |x: T| sign * f(x);
    let r = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..80 {
        if (b - a).abs() <= T::epsilon() * T::lit(4.0) {
            break;
        }
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2);
        }
    }
    sign * f1.min(f2)
}

/// Profile values sampled on a collocation grid.
#[derive(Clone, Debug)]
pub struct SampledProfile<T> {
    pub u: Vec<T>,
    pub du: Vec<T>,
    pub d2u: Vec<T>,
}

pub fn sample<T: Real>(profile: &ReducedProfile<T>, op: &CollocationOperator<T>) -> SampledProfile<T> {
    let mut s = SampledProfile { u: vec![], du: vec![], d2u: vec![] };
    for &z in op.nodes() {
        let (a, b, c) = profile.eval(z);
        s.u.push(a);
        s.du.push(b);
        s.d2u.push(c);
    }
    s
}

/// Named built-in currents.
///
/// * `UT`: oscillatory test profile, `α = 2, β = 4π, γ = 1, δ = 1/2`, `F² = 0.05`, along x.
/// * `quiescent`: no current, `F² = 0.05`.
/// * `linear`: `U = a(z + 1) + b` along x, defaults `a = 0.5, b = 0.5`, `F² = 0.05`.
/// * `polynomial`: `U = Σ c_i z^i` along x from parameters `c0, c1, …`, `F² = 0.05`.
/// * `CR`: illustrative degree-six river-like polynomial, `F² = 0.01`.
///
/// Numeric `params` override the defaults by name (`alpha`, `beta`, `gamma`,
/// `delta`, `a`, `b`, `c0`…, `F2`).
pub fn builtin_profile<T: Real>(name: &str, params: &[(&str, f64)]) -> Result<ShearProfile<T>> {
    let get = |key: &str, default: f64| {
        params.iter().rev().find(|(k, _)| *k == key).map(|(_, v)| *v).unwrap_or(default)
    };
    for (k, v) in params {
        if !v.is_finite() {
            return Err(invalid(format!("parameter {k} is not finite")));
        }
    }
    let f2 = |d: f64| T::lit(get("F2", d));
    match name {
        "UT" | "ut" => ShearProfile::new(
            "UT",
            ProfileFn::Oscillatory {
                alpha: T::lit(get("alpha", 2.0)),
                beta: T::lit(get("beta", 4.0 * std::f64::consts::PI)),
                gamma: T::lit(get("gamma", 1.0)),
                delta: T::lit(get("delta", 0.5)),
            },
            ProfileFn::Zero,
            f2(0.05),
        ),
        "quiescent" => ShearProfile::new("quiescent", ProfileFn::Zero, ProfileFn::Zero, f2(0.05)),
        "linear" => ShearProfile::new(
            "linear",
            {
                let (slope, offset) = (get("a", 0.5), get("b", 0.5));
                ProfileFn::Linear { a: T::lit(slope + offset), b: T::lit(slope) }
            },
            ProfileFn::Zero,
            f2(0.05),
        ),
        "polynomial" => {
            let mut coeffs = Vec::new();
            while let Some(&(_, c)) = params.iter().rev().find(|(k, _)| *k == format!("c{}", coeffs.len())) {
                coeffs.push(T::lit(c));
            }
            if coeffs.is_empty() {
                return Err(invalid("polynomial profile needs coefficients c0, c1, ..."));
            }
            ShearProfile::new("polynomial", ProfileFn::Polynomial { coeffs }, ProfileFn::Zero, f2(0.05))
        }
        "CR" | "cr" => ShearProfile::new(
            "CR",
            ProfileFn::Polynomial {
                coeffs: [1.0, 1.2, 1.1, 0.9, 0.6, 0.3, 0.1].iter().map(|&c| T::lit(c)).collect(),
            },
            ProfileFn::Zero,
            f2(0.01),
        ),
        other => Err(invalid(format!("unknown profile '{other}'"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ut() -> ShearProfile<f64> {
        builtin_profile("UT", &[]).unwrap()
    }

    #[test]
    fn ut_endpoint_values() {
        let r = ut().project(0.0);
        assert!((r.value(0.0) - 1.0).abs() < 1e-15);
        assert!((r.value(-1.0) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let r = ut().project(0.3);
        let h = 1e-5;
        for &z in &[-0.9, -0.5, -0.21, -0.05] {
            let (_, d1, d2) = r.eval(z);
            let fd1 = (r.value(z + h) - r.value(z - h)) / (2.0 * h);
            let fd2 = (r.value(z + h) - 2.0 * r.value(z) + r.value(z - h)) / (h * h);
            assert!((d1 - fd1).abs() < 1e-6, "{d1} {fd1}");
            assert!((d2 - fd2).abs() < 1e-3, "{d2} {fd2}");
        }
        let p = builtin_profile::<f64>("CR", &[]).unwrap().project(0.0);
        let (_, d1, d2) = p.eval(-0.4);
        let fd1 = (p.value(-0.4 + h) - p.value(-0.4 - h)) / (2.0 * h);
        let fd2 = (p.value(-0.4 + h) - 2.0 * p.value(-0.4) + p.value(-0.4 - h)) / (h * h);
        assert!((d1 - fd1).abs() < 1e-8);
        assert!((d2 - fd2).abs() < 1e-4);
    }

    #[test]
    fn projection_and_angular_derivative() {
        let p = ShearProfile::new(
            "xy",
            ProfileFn::Linear { a: 1.0, b: 0.0 },
            ProfileFn::Linear { a: 2.0, b: 0.0 },
            0.1,
        )
        .unwrap();
        let th = std::f64::consts::FRAC_PI_2;
        assert!((p.project(th).value(-0.3) - 2.0).abs() < 1e-15);
        assert!((p.angular_derivative(th).value(-0.3) + 1.0).abs() < 1e-15);
        assert!((p.project(0.0).value(-0.3) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn essential_range_of_ut() {
        let (lo, hi) = ut().project(0.0).essential_range();
        assert!((hi - 1.0).abs() < 1e-12);
        // interior minimum near z = -0.5, refined beyond the sampling grid
        let r = ut().project(0.0);
        let (a, b) = (-0.6, -0.4);
        let brute = (0..=200_000).map(|i| r.value(a + (b - a) * i as f64 / 200_000.0)).fold(f64::MAX, f64::min);
        assert!((lo - brute).abs() < 1e-12, "{lo} {brute}");
        assert!(lo > 0.1 && lo < 0.15);
    }

    #[test]
    fn quiescent_range_is_zero() {
        let q = builtin_profile::<f64>("quiescent", &[]).unwrap().project(1.0);
        assert_eq!(q.essential_range(), (0.0, 0.0));
    }

    #[test]
    fn unknown_names_and_bad_parameters() {
        assert!(builtin_profile::<f64>("nope", &[]).is_err());
        assert!(builtin_profile::<f64>("UT", &[("F2", -1.0)]).is_err());
        assert!(builtin_profile::<f64>("UT", &[("alpha", f64::NAN)]).is_err());
    }

    #[test]
    fn sampling_matches_eval() {
        let op = CollocationOperator::<f64>::new(8, 1.0).unwrap();
        let r = ut().project(0.0);
        let s = sample(&r, &op);
        assert_eq!(s.u.len(), 9);
        assert_eq!(s.u[0], r.value(0.0));
        assert_eq!(s.d2u[8], r.eval(-1.0).2);
    }
}
