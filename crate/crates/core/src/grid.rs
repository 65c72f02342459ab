//! Scattered `(k, θ)` evaluation from a polar field of radial path solutions.

use std::path::Path;
use std::sync::OnceLock;

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collocation::EigenSolution;
use crate::error::{invalid, Error, Result};
use crate::path::dopri::cubic_hermite;
use crate::path::system::{angular_tangent, derivative, radial_from_samples};
use crate::path::{pf_angular, pf_radial, PathOptions};
use crate::scalar::Real;
use crate::shear::{sample, SampledProfile, ShearProfile};
use crate::spectral::CollocationOperator;

pub const FIELD_FORMAT: &str = "wavepath-polar-field";
pub const FIELD_VERSION: u32 = 1;

/// Radial slices re-anchored at fixed radii, one per angle knot.
///
/// `values[j][i]` and `dk[j][i]` hold `[w; c]` and its `k`-derivative at
/// `(k_knots[i], theta_knots[j])`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Deserialize<'de>"))]
pub struct PolarField<T> {
    pub profile: ShearProfile<T>,
    pub n_z: usize,
    pub depth: T,
    pub tol: T,
    pub k0: T,
    pub periodic: bool,
    pub k_knots: Vec<T>,
    pub theta_knots: Vec<T>,
    pub values: Vec<Vec<Vec<T>>>,
    pub dk: Vec<Vec<Vec<T>>>,
    #[serde(skip)]
    op: OnceLock<CollocationOperator<T>>,
    #[serde(skip)]
    samples: OnceLock<Vec<(SampledProfile<T>, SampledProfile<T>)>>,
}

#[derive(Serialize, Deserialize)]
struct FieldFile<T> {
    format: String,
    version: u32,
    profile_hash: String,
    field: PolarField<T>,
}

/// 64-bit FNV-1a over the profile's JSON form.
pub fn profile_hash<T: Real>(profile: &ShearProfile<T>) -> String {
    let text = serde_json::to_string(profile).expect("profile serialises");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

/// `n` equispaced angles covering `[0, 2π)`.
pub fn periodic_angles<T: Real>(n: usize) -> Vec<T> {
    let step = T::TAU() / T::from_usize_lossy(n);
    (0..n).map(|j| T::from_usize_lossy(j) * step).collect()
}

/// `n` log-spaced radii from `lo` to `hi` inclusive, endpoints exact.
pub fn log_radii<T: Real>(lo: T, hi: T, n: usize) -> Vec<T> {
    if n < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let last = T::from_usize_lossy(n - 1);
    (0..n)
        .map(|i| match i {
            0 => lo,
            _ if i == n - 1 => hi,
            _ => (a + (b - a) * T::from_usize_lossy(i) / last).exp(),
        })
        .collect()
}

fn strictly_increasing<T: Real>(x: &[T]) -> bool {
    x.windows(2).all(|p| p[0] < p[1]) && x.iter().all(|v| v.is_finite())
}

/// Builds the field: an angular path at `k0`, then one radial path per angle.
///
/// `periodic` requires the angle knots to lie in `[θ₀, θ₀ + 2π)`; the angular
/// path then runs over the full turn so the wrap interval is covered.
pub fn build_field<T: Real>(
    profile: &ShearProfile<T>,
    op: &CollocationOperator<T>,
    k_knots: &[T],
    theta_knots: &[T],
    k0: T,
    periodic: bool,
    opts: &PathOptions<T>,
) -> Result<PolarField<T>> {
    if k_knots.len() < 2 || !strictly_increasing(k_knots) || !(k_knots[0] > T::zero()) {
        return Err(invalid("radius knots must be positive, finite and strictly increasing (at least two)"));
    }
    if theta_knots.is_empty() || !strictly_increasing(theta_knots) {
        return Err(invalid("angle knots must be finite and strictly increasing"));
    }
    let (k_lo, k_hi) = (k_knots[0], k_knots[k_knots.len() - 1]);
    if !(k0 >= k_lo && k0 <= k_hi) {
        return Err(Error::OutOfRange { value: k0.to_f64_lossy(), lo: k_lo.to_f64_lossy(), hi: k_hi.to_f64_lossy() });
    }
    let th0 = theta_knots[0];
    let th_end = if periodic {
        if !(theta_knots[theta_knots.len() - 1] < th0 + T::TAU()) {
            return Err(invalid("periodic angle knots must span less than a full turn"));
        }
        th0 + T::TAU()
    } else {
        theta_knots[theta_knots.len() - 1]
    };
    if theta_knots.len() < 2 && !periodic {
        return Err(invalid("non-periodic fields need at least two angles"));
    }

    let mut ang_opts = opts.clone();
    ang_opts.log_param = false;
    let ring = pf_angular(profile, op, k0, (th0, th_end), th0, &ang_opts, None)?;
    let n = op.order();
    let inv_f2 = T::one() / profile.froude2;

    let slices: Vec<std::result::Result<(Vec<Vec<T>>, Vec<Vec<T>>), T>> = theta_knots
        .par_iter()
        .map(|&theta| {
            let slice = || -> Result<(Vec<Vec<T>>, Vec<Vec<T>>)> {
                let state = ring.dense_eval_full(theta)?;
                let seed = EigenSolution {
                    k: k0,
                    c: state[n],
                    w: state[..n].iter().map(|&x| Complex::new(x, T::zero())).collect(),
                    warnings: Vec::new(),
                };
                let reduced = profile.project(theta);
                let path = pf_radial(&reduced, op, (k_lo, k_hi), k0, opts, Some(&seed))?;
                let s = sample(&reduced, op);
                let mut vals = Vec::with_capacity(k_knots.len());
                let mut ders = Vec::with_capacity(k_knots.len());
                for &k in k_knots {
                    let v = path.dense_eval_full(k)?;
                    let sys = radial_from_samples(&s, op, inv_f2, k, v[n], &v[..n]);
                    let (mut dv, dc) = derivative(&sys, k)?;
                    dv.push(dc);
                    vals.push(v);
                    ders.push(dv);
                }
                Ok((vals, ders))
            };
            slice().map_err(|_| theta)
        })
        .collect();

    let failed: Vec<f64> = slices.iter().filter_map(|r| r.as_ref().err().map(|t| t.to_f64_lossy())).collect();
    if !failed.is_empty() {
        return Err(Error::PartialField { failed });
    }
    let (values, dk) = slices.into_iter().map(|r| r.unwrap_or_else(|_| unreachable!())).unzip();
    Ok(PolarField {
        profile: profile.clone(),
        n_z: n,
        depth: op.depth(),
        tol: opts.tol,
        k0,
        periodic,
        k_knots: k_knots.to_vec(),
        theta_knots: theta_knots.to_vec(),
        values,
        dk,
        op: OnceLock::from(op.clone()),
        samples: OnceLock::new(),
    })
}

enum Bracket<T> {
    Knot(usize),
    Between(usize, usize, T, T),
}

impl<T: Real> PolarField<T> {
    pub fn operator(&self) -> Result<CollocationOperator<T>> {
        CollocationOperator::new(self.n_z, self.depth)
    }

    pub fn k_span(&self) -> (T, T) {
        (self.k_knots[0], self.k_knots[self.k_knots.len() - 1])
    }

    /// Wraps a periodic angle into `[θ₀, θ₀ + 2π)`.
    pub fn wrap(&self, theta: T) -> T {
        if !self.periodic {
            return theta;
        }
        let th0 = self.theta_knots[0];
        if theta >= th0 && theta < th0 + T::TAU() {
            return theta;
        }
        let d = theta - th0;
        let mut t = th0 + (d - T::TAU() * (d / T::TAU()).floor());
        if t >= th0 + T::TAU() {
            t = th0;
        }
        t
    }

    /// Node value `[w; c]` at `(k_knots[i], theta_knots[j])`.
    pub fn node(&self, i: usize, j: usize) -> &[T] {
        &self.values[j][i]
    }

    /// Cubic Hermite evaluation of slice `j` at radius `k`.
    pub fn radial_eval(&self, j: usize, k: T) -> Result<Vec<T>> {
        let (lo, hi) = self.k_span();
        if !(k >= lo && k <= hi) {
            return Err(Error::OutOfRange { value: k.to_f64_lossy(), lo: lo.to_f64_lossy(), hi: hi.to_f64_lossy() });
        }
        let m = self.k_knots.partition_point(|&ki| ki <= k).saturating_sub(1);
        if self.k_knots[m] == k {
            return Ok(self.values[j][m].clone());
        }
        let (k1, k2) = (self.k_knots[m], self.k_knots[m + 1]);
        let h = k2 - k1;
        let s = (k - k1) / h;
        let (v1, v2, d1, d2) = (&self.values[j][m], &self.values[j][m + 1], &self.dk[j][m], &self.dk[j][m + 1]);
        Ok((0..v1.len()).map(|r| cubic_hermite(v1[r], d1[r], v2[r], d2[r], h, s)).collect())
    }

    fn bracket(&self, theta: T) -> Result<Bracket<T>> {
        let th = self.wrap(theta);
        let knots = &self.theta_knots;
        let last = knots.len() - 1;
        let hi = if self.periodic { knots[0] + T::TAU() } else { knots[last] };
        if !(th >= knots[0] && th <= hi) {
            return Err(Error::OutOfRange { value: theta.to_f64_lossy(), lo: knots[0].to_f64_lossy(), hi: hi.to_f64_lossy() });
        }
        let l = knots.partition_point(|&t| t <= th).saturating_sub(1);
        if knots[l] == th {
            return Ok(Bracket::Knot(l));
        }
        if l == last {
            if !self.periodic {
                return Ok(Bracket::Knot(last));
            }
            return Ok(Bracket::Between(last, 0, knots[last], hi));
        }
        Ok(Bracket::Between(l, l + 1, knots[l], knots[l + 1]))
    }

    /// Profile samples `(U, ∂U/∂θ)` at each angle knot, built on first use.
    fn knot_samples(&self, op: &CollocationOperator<T>) -> &[(SampledProfile<T>, SampledProfile<T>)] {
        self.samples.get_or_init(|| {
            self.theta_knots
                .iter()
                .map(|&t| (sample(&self.profile.project(t), op), sample(&self.profile.angular_derivative(t), op)))
                .collect()
        })
    }

    fn angular_slope(&self, op: &CollocationOperator<T>, j: usize, k: T, v: &[T]) -> Result<Vec<T>> {
        let n = self.n_z;
        let (s, ds) = &self.knot_samples(op)[j];
        let inv_f2 = T::one() / self.profile.froude2;
        angular_tangent(s, ds, op, inv_f2, k, v[n], &v[..n], self.theta_knots[j])
    }

    /// Full state `[w; c]` at `(k, θ)`.
    pub fn query_full_with(&self, op: &CollocationOperator<T>, k: T, theta: T) -> Result<Vec<T>> {
        match self.bracket(theta)? {
            Bracket::Knot(j) => self.radial_eval(j, k),
            Bracket::Between(l, r, ta, tb) => {
                let va = self.radial_eval(l, k)?;
                let vb = self.radial_eval(r, k)?;
                let da = self.angular_slope(op, l, k, &va)?;
                let db = self.angular_slope(op, r, k, &vb)?;
                let h = tb - ta;
                let s = (self.wrap(theta) - ta) / h;
                Ok((0..va.len()).map(|i| cubic_hermite(va[i], da[i], vb[i], db[i], h, s)).collect())
            }
        }
    }

    /// Phase velocity at `(k, θ)`; `op` must be [`PolarField::operator`].
    pub fn query_with(&self, op: &CollocationOperator<T>, k: T, theta: T) -> Result<T> {
        match self.bracket(theta)? {
            Bracket::Knot(j) => Ok(self.radial_eval(j, k)?[self.n_z]),
            Bracket::Between(..) => Ok(self.query_full_with(op, k, theta)?[self.n_z]),
        }
    }

    pub fn query(&self, k: T, theta: T) -> Result<T> {
        self.query_with(self.cached_operator()?, k, theta)
    }

    fn cached_operator(&self) -> Result<&CollocationOperator<T>> {
        if let Some(op) = self.op.get() {
            return Ok(op);
        }
        let op = self.operator()?;
        Ok(self.op.get_or_init(|| op))
    }

    /// `∂c/∂θ` at a node from the angular tangent system.
    pub fn angular_derivative_at(&self, op: &CollocationOperator<T>, i: usize, j: usize) -> Result<T> {
        let v = &self.values[j][i];
        Ok(self.angular_slope(op, j, self.k_knots[i], v)?[self.n_z])
    }

    pub fn to_json(&self) -> Result<String> {
        let file = FieldFile {
            format: FIELD_FORMAT.into(),
            version: FIELD_VERSION,
            profile_hash: profile_hash(&self.profile),
            field: self.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: FieldFile<T> = serde_json::from_str(text)?;
        if file.format != FIELD_FORMAT || file.version != FIELD_VERSION {
            return Err(Error::Schema {
                field: "version".into(),
                message: format!("unsupported container {} v{}", file.format, file.version),
            });
        }
        if file.profile_hash != profile_hash(&file.field.profile) {
            return Err(Error::Schema { field: "profile_hash".into(), message: "does not match stored profile".into() });
        }
        let f = file.field;
        let shape_ok = f.values.len() == f.theta_knots.len()
            && f.dk.len() == f.theta_knots.len()
            && f.values.iter().chain(&f.dk).all(|s| {
                s.len() == f.k_knots.len() && s.iter().all(|v| v.len() == f.n_z + 1)
            });
        if !shape_ok {
            return Err(Error::Schema { field: "values".into(), message: "array shape does not match knots".into() });
        }
        Ok(f)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}
