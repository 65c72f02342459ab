//! Direct collocation solvers: phase velocity from wavenumber (quadratic
//! pencil in `c`) and wavenumber from phase velocity (generalised linear
//! problem in `k²`).
//!
//! Unknowns are the vertical velocity `w` at every node except the bottom,
//! where `w = 0`. Row 0 is the free-surface condition, rows `1..N` are the
//! interior Rayleigh equation.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::linalg::{norm2_complex, qz, Mat};
use crate::scalar::Real;
use crate::shear::{sample, ReducedProfile, SampledProfile, ShearProfile};
use crate::spectral::CollocationOperator;

type C<T> = Complex<T>;

/// Eigenvalues at or beyond this magnitude are treated as infinite.
pub const DEFAULT_CUTOFF: f64 = 1e8;

/// Gap below which `c` is reported as nearly touching the current.
pub const CRITICAL_GAP: f64 = 1e-6;

/// `(c² A2 + c A1 + A0) w = 0`
#[derive(Clone, Debug)]
pub struct QuadraticPencil<T> {
    pub a2: Mat<T>,
    pub a1: Mat<T>,
    pub a0: Mat<T>,
}

impl<T: Real> QuadraticPencil<T> {
    pub fn dim(&self) -> usize {
        self.a0.rows()
    }

    /// `Q(c) w`
    pub fn apply(&self, c: C<T>, w: &[C<T>]) -> Vec<C<T>> {
        let r2 = self.a2.matvec_complex(w);
        let r1 = self.a1.matvec_complex(w);
        let r0 = self.a0.matvec_complex(w);
        r2.iter().zip(&r1).zip(&r0).map(|((&x, &y), &z)| c * c * x + c * y + z).collect()
    }

    /// `‖Q(c) w‖∞ / ((‖A2‖∞|c|² + ‖A1‖∞|c| + ‖A0‖∞) ‖w‖∞)`
    pub fn relative_residual(&self, c: C<T>, w: &[C<T>]) -> T {
        let r = self.apply(c, w);
        let rn = r.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        let wn = w.iter().fold(T::zero(), |m, z| m.max(z.norm()));
        let a = c.norm();
        let scale = (self.a2.norm_inf() * a * a + self.a1.norm_inf() * a + self.a0.norm_inf()) * wn;
        if scale == T::zero() {
            rn
        } else {
            rn / scale
        }
    }
}

/// `A w = μ B w`
#[derive(Clone, Debug)]
pub struct LinearPencil<T> {
    pub a: Mat<T>,
    pub b: Mat<T>,
}

fn check_grid<T: Real>(op: &CollocationOperator<T>) -> Result<usize> {
    let n = op.order();
    if n < 2 {
        return Err(invalid("collocation needs N_z >= 2"));
    }
    Ok(n)
}

/// Quadratic pencil in `c` at wavenumber `k`.
pub fn assemble_forward<T: Real>(
    profile: &ReducedProfile<T>,
    op: &CollocationOperator<T>,
    k: T,
) -> Result<QuadraticPencil<T>> {
    let n = check_grid(op)?;
    if !(k > T::zero()) || !k.is_finite() {
        return Err(invalid(format!("wavenumber must be positive, got {k}")));
    }
    let s = sample(profile, op);
    Ok(forward_from_samples(&s, op, profile.inv_froude2(), k, n))
}

fn forward_from_samples<T: Real>(
    s: &SampledProfile<T>,
    op: &CollocationOperator<T>,
    inv_f2: T,
    k: T,
    n: usize,
) -> QuadraticPencil<T> {
    let df = op.surface_row();
    let d2 = op.d2();
    let k2 = k * k;
    let (u0, du0) = (s.u[0], s.du[0]);
    let mut a2 = Mat::zeros(n, n);
    let mut a1 = Mat::zeros(n, n);
    let mut a0 = Mat::zeros(n, n);
    for j in 0..n {
        a2[(0, j)] = df[j];
        a1[(0, j)] = -T::lit(2.0) * u0 * df[j];
        a0[(0, j)] = u0 * u0 * df[j];
    }
    a1[(0, 0)] += du0;
    a0[(0, 0)] -= du0 * u0 + inv_f2;
    for i in 1..n {
        for j in 0..n {
            let l = d2[(i, j)] - if i == j { k2 } else { T::zero() };
            a1[(i, j)] = -l;
            a0[(i, j)] = s.u[i] * l;
        }
        a0[(i, i)] -= s.d2u[i];
    }
    QuadraticPencil { a2, a1, a0 }
}

/// Generalised problem in `μ = k²` at phase velocity `c`.
pub fn assemble_backward<T: Real>(
    profile: &ReducedProfile<T>,
    op: &CollocationOperator<T>,
    c: T,
) -> Result<LinearPencil<T>> {
    let n = check_grid(op)?;
    if !c.is_finite() {
        return Err(invalid("phase velocity must be finite"));
    }
    let (lo, hi) = profile.essential_range_on(-op.depth(), T::zero());
    if c >= lo && c <= hi {
        let z = profile.closest_depth(c, -op.depth(), T::zero());
        return Err(Error::CriticalLayer { z: z.to_f64_lossy(), c: c.to_f64_lossy() });
    }
    let s = sample(profile, op);
    for i in 0..=n {
        if s.u[i] == c {
            return Err(Error::CriticalLayer { z: op.nodes()[i].to_f64_lossy(), c: c.to_f64_lossy() });
        }
    }
    let df = op.surface_row();
    let d2 = op.d2();
    let (u0, du0) = (s.u[0], s.du[0]);
    let mut a = Mat::zeros(n, n);
    let mut b = Mat::zeros(n, n);
    for j in 0..n {
        a[(0, j)] = (u0 - c) * (u0 - c) * df[j];
    }
    a[(0, 0)] -= (u0 - c) * du0 + profile.inv_froude2();
    for i in 1..n {
        for j in 0..n {
            a[(i, j)] = d2[(i, j)];
        }
        a[(i, i)] -= s.d2u[i] / (s.u[i] - c);
        b[(i, i)] = T::one();
    }
    Ok(LinearPencil { a, b })
}

/// One eigenpair of a quadratic pencil; `left` is present when requested.
#[derive(Clone, Debug)]
pub struct QuadraticEigenpair<T> {
    pub c: C<T>,
    pub w: Vec<C<T>>,
    pub left: Option<Vec<C<T>>>,
}

fn to_complex<T: Real>(m: &Mat<T>) -> Mat<C<T>> {
    m.map(|x| C::new(x, T::zero()))
}

/// Per-row factors bringing the largest entry across `mats` to one.
fn row_equilibration<T: Real>(mats: &[&Mat<T>]) -> Vec<T> {
    let n = mats[0].rows();
    (0..n)
        .map(|i| {
            let m = mats.iter().flat_map(|a| a.row(i).iter()).fold(T::zero(), |m, x| m.max(x.abs()));
            if m > T::zero() {
                T::one() / m
            } else {
                T::one()
            }
        })
        .collect()
}

fn scale_rows<T: Real>(m: &Mat<T>, s: &[T]) -> Mat<T> {
    Mat::from_fn(m.rows(), m.cols(), |i, j| m[(i, j)] * s[i])
}

/// All finite eigenpairs via the first companion linearisation
/// `[−A1 −A0; I 0] x = c [A2 0; 0 I] x`, `x = [c w; w]`.
///
/// Rows of the pencil are equilibrated first; the free-surface and interior
/// rows differ by several orders of magnitude at large `N_z`.
pub fn solve_quadratic<T: Real>(pencil: &QuadraticPencil<T>, want_left: bool) -> Result<Vec<QuadraticEigenpair<T>>> {
    let n = pencil.dim();
    if n == 0 || !pencil.a1.is_square() || pencil.a1.rows() != n || pencil.a2.rows() != n {
        return Err(invalid("pencil blocks must be square and of equal size"));
    }
    let rs = row_equilibration(&[&pencil.a2, &pencil.a1, &pencil.a0]);
    let pencil = &QuadraticPencil {
        a2: scale_rows(&pencil.a2, &rs),
        a1: scale_rows(&pencil.a1, &rs),
        a0: scale_rows(&pencil.a0, &rs),
    };
    let mut a = Mat::zeros(2 * n, 2 * n);
    let mut b = Mat::zeros(2 * n, 2 * n);
    a.set_block(0, 0, &pencil.a1.scale(-T::one()));
    a.set_block(0, n, &pencil.a0.scale(-T::one()));
    b.set_block(0, 0, &pencil.a2);
    for i in 0..n {
        a[(n + i, i)] = T::one();
        b[(n + i, n + i)] = T::one();
    }
    let schur = qz(&to_complex(&a), &to_complex(&b), want_left)?;
    let mut out = Vec::new();
    for idx in 0..2 * n {
        let c = schur.eigenvalue(idx);
        if !c.re.is_finite() || !c.im.is_finite() {
            continue;
        }
        let x = schur.right_vector(idx);
        // c w carries more digits when |c| > 1
        let w = if c.norm() > T::one() { x[..n].to_vec() } else { x[n..].to_vec() };
        let left = if want_left {
            schur.left_vector(idx).map(|y| y[..n].iter().zip(&rs).map(|(&v, &r)| v * r).collect())
        } else {
            None
        };
        out.push(QuadraticEigenpair { c, w: normalise(w), left: left.map(normalise) });
    }
    Ok(out)
}

/// Unit 2-norm with the surface entry (or the largest entry) real and non-negative.
pub fn normalise<T: Real>(mut w: Vec<C<T>>) -> Vec<C<T>> {
    let nrm = norm2_complex(&w);
    if nrm == T::zero() {
        return w;
    }
    let pivot = if w[0].norm() > nrm * T::lit(1e-8) {
        w[0]
    } else {
        *w.iter().max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal)).unwrap()
    };
    let phase = pivot.conj() / pivot.norm();
    for z in w.iter_mut() {
        *z = *z * phase / nrm;
    }
    w
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// The selected `c` lies inside the range of the current.
    InsideEssentialRange { c: f64, lo: f64, hi: f64 },
    /// `c − max U` is positive but below the critical gap.
    NearCriticalLayer { gap: f64 },
    /// More than one positive `k²` was found; the largest was kept.
    MultiplePositive { count: usize },
}

/// Solution of a dispersion problem at one `(k, c)` point.
#[derive(Clone, Debug)]
pub struct EigenSolution<T> {
    pub k: T,
    pub c: T,
    /// Vertical velocity on all nodes but the bottom, unit norm.
    pub w: Vec<C<T>>,
    pub warnings: Vec<Warning>,
}

impl<T: Real> EigenSolution<T> {
    /// Real part of `w` when the imaginary part is negligible.
    pub fn real_w(&self) -> Option<Vec<T>> {
        let tol = T::lit(1e-8);
        if self.w.iter().all(|z| z.im.abs() <= tol) {
            Some(self.w.iter().map(|z| z.re).collect())
        } else {
            None
        }
    }
}

/// Picks the fastest real finite eigenvalue. Returns its index in `pairs`.
pub fn select_branch<T: Real>(
    pairs: &[QuadraticEigenpair<T>],
    essential: (T, T),
    cutoff: T,
) -> Result<(usize, Vec<Warning>)> {
    let mut best: Option<usize> = None;
    for (i, p) in pairs.iter().enumerate() {
        let c = p.c;
        if !c.re.is_finite() || c.norm() >= cutoff {
            continue;
        }
        if c.im.abs() > T::lit(1e-6) * c.re.abs().max(T::one()) {
            continue;
        }
        if best.map_or(true, |b| c.re > pairs[b].c.re) {
            best = Some(i);
        }
    }
    let Some(i) = best else {
        return Err(Error::NoPropagatingMode("no finite real eigenvalue below the cutoff".into()));
    };
    let c = pairs[i].c.re;
    let (lo, hi) = essential;
    let mut warnings = Vec::new();
    if c >= lo && c <= hi {
        warnings.push(Warning::InsideEssentialRange {
            c: c.to_f64_lossy(),
            lo: lo.to_f64_lossy(),
            hi: hi.to_f64_lossy(),
        });
    } else if c > hi && c - hi < T::lit(CRITICAL_GAP) {
        warnings.push(Warning::NearCriticalLayer { gap: (c - hi).to_f64_lossy() });
    }
    Ok((i, warnings))
}

/// Phase velocity of the fastest downstream mode at wavenumber `k`.
pub fn solve_forward<T: Real>(
    profile: &ReducedProfile<T>,
    op: &CollocationOperator<T>,
    k: T,
) -> Result<EigenSolution<T>> {
    let pencil = assemble_forward(profile, op, k)?;
    let pairs = solve_quadratic(&pencil, false)?;
    let essential = profile.essential_range_on(-op.depth(), T::zero());
    let (i, warnings) = select_branch(&pairs, essential, T::lit(DEFAULT_CUTOFF))?;
    let p = &pairs[i];
    Ok(EigenSolution { k, c: p.c.re, w: p.w.clone(), warnings })
}

/// Wavenumber of the surface mode travelling at phase velocity `c`.
pub fn solve_backward<T: Real>(
    profile: &ReducedProfile<T>,
    op: &CollocationOperator<T>,
    c: T,
) -> Result<EigenSolution<T>> {
    let pencil = assemble_backward(profile, op, c)?;
    let rs = row_equilibration(&[&pencil.a, &pencil.b]);
    let schur = qz(&to_complex(&scale_rows(&pencil.a, &rs)), &to_complex(&scale_rows(&pencil.b, &rs)), false)?;
    let mut positive: Vec<(usize, T)> = Vec::new();
    for i in 0..schur.dim() {
        let mu = schur.eigenvalue(i);
        if !mu.re.is_finite() || mu.norm() >= T::lit(DEFAULT_CUTOFF) {
            continue;
        }
        if mu.re > T::zero() && mu.im.abs() <= T::lit(1e-8) * mu.re.max(T::one()) {
            positive.push((i, mu.re));
        }
    }
    let Some(&(idx, mu)) = positive.iter().max_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
    else {
        return Err(Error::NoPropagatingMode(format!("no positive k² at c = {c}")));
    };
    let mut warnings = Vec::new();
    if positive.len() > 1 {
        warnings.push(Warning::MultiplePositive { count: positive.len() });
    }
    Ok(EigenSolution { k: mu.sqrt(), c, w: normalise(schur.right_vector(idx)), warnings })
}

/// Velocity and pressure amplitudes of a mode, on every grid node.
#[derive(Clone, Debug)]
pub struct FlowField<T> {
    pub z: Vec<T>,
    pub u: Vec<C<T>>,
    pub v: Vec<C<T>>,
    pub w: Vec<C<T>>,
    pub p: Vec<C<T>>,
}

/// Reconstructs `(u, v, w, p)` for a mode with wave vector `(kx, ky)` from
/// its vertical velocity. The solution must come from the profile projected
/// onto `atan2(ky, kx)` on the same grid.
pub fn reconstruct_flow<T: Real>(
    profile: &ShearProfile<T>,
    kx: T,
    ky: T,
    solution: &EigenSolution<T>,
    op: &CollocationOperator<T>,
) -> Result<FlowField<T>> {
    let n = op.order();
    if solution.w.len() != n {
        return Err(invalid("solution does not match the grid"));
    }
    let k2 = kx * kx + ky * ky;
    if !(k2 > T::zero()) {
        return Err(invalid("wave vector must be nonzero"));
    }
    let omega = k2.sqrt() * solution.c;
    let mut w = solution.w.clone();
    w.push(C::new(T::zero(), T::zero()));
    let dw = op.d().matvec_complex(&w);
    let i = C::new(T::zero(), T::one());
    let mut out = FlowField { z: op.nodes().to_vec(), u: vec![], v: vec![], w: w.clone(), p: vec![] };
    for (j, &z) in op.nodes().iter().enumerate() {
        let (ux, dux, _) = profile.ux.eval(z);
        let (uy, duy, _) = profile.uy.eval(z);
        let ku = kx * ux + ky * uy;
        let kdu = kx * dux + ky * duy;
        let rel = ku - omega;
        if rel == T::zero() {
            return Err(Error::CriticalLayer { z: z.to_f64_lossy(), c: solution.c.to_f64_lossy() });
        }
        let x = w[j] * kdu - dw[j] * rel;
        let den = k2 * (-rel);
        out.p.push((dw[j] * rel - w[j] * kdu) / (i * k2));
        out.u.push((i * x * kx - i * w[j] * (k2 * dux)) / den);
        out.v.push((i * x * ky - i * w[j] * (k2 * duy)) / den);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shear::{builtin_profile, ProfileFn};

    fn quiescent_c(k: f64, f2: f64, h: f64) -> f64 {
        ((k * h).tanh() / (k * f2)).sqrt()
    }

    #[test]
    fn scalar_pencils() {
        let one = |x: f64| Mat::from_rows(1, 1, vec![x]);
        let p = QuadraticPencil { a2: one(1.0), a1: one(0.0), a0: one(-4.0) };
        let mut cs: Vec<f64> = solve_quadratic(&p, false).unwrap().iter().map(|e| e.c.re).collect();
        cs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((cs[0] + 2.0).abs() < 1e-14 && (cs[1] - 2.0).abs() < 1e-14);

        let p = QuadraticPencil { a2: one(0.0), a1: one(1.0), a0: one(-3.0) };
        let finite: Vec<_> = solve_quadratic(&p, false).unwrap().into_iter().filter(|e| e.c.norm() < 1e8).collect();
        assert_eq!(finite.len(), 1);
        assert!((finite[0].c.re - 3.0).abs() < 1e-14);
    }

    #[test]
    fn branch_selection() {
        let mk = |re: f64, im: f64| QuadraticEigenpair { c: C::new(re, im), w: vec![], left: None };
        let pairs = vec![mk(f64::INFINITY, 0.0), mk(3.2, 0.0), mk(-1.1, 0.0), mk(8e11, 0.0), mk(5.0, 1.0)];
        let (i, w) = select_branch(&pairs, (0.0, 1.0), 1e8).unwrap();
        assert_eq!(i, 1);
        assert!(w.is_empty());
        let none = vec![mk(f64::INFINITY, 0.0), mk(2e9, 0.0)];
        assert!(matches!(select_branch(&none, (0.0, 1.0), 1e8), Err(Error::NoPropagatingMode(_))));
        let (_, w) = select_branch(&[mk(1.0 + 1e-8, 0.0)], (0.0, 1.0), 1e8).unwrap();
        assert!(matches!(w[0], Warning::NearCriticalLayer { .. }));
    }

    #[test]
    fn quiescent_forward_matches_closed_form() {
        let prof = builtin_profile::<f64>("quiescent", &[]).unwrap().project(0.0);
        let op = CollocationOperator::new(64, 1.0).unwrap();
        for &k in &[0.1, 1.0, 5.0, 20.0] {
            let sol = solve_forward(&prof, &op, k).unwrap();
            let exact = quiescent_c(k, 0.05, 1.0);
            assert!((sol.c - exact).abs() / exact < 1e-12, "k={k}: {} vs {exact}", sol.c);
        }
    }

    #[test]
    fn constant_vorticity_forward() {
        // U = 1 + σ z  ->  c = U0 − σT/(2k) + sqrt(σ²T²/(4k²) + T/(F² k))
        let sigma = 0.8;
        let f2 = 0.05;
        let prof = ReducedProfile::scalar(ProfileFn::Linear { a: 1.0, b: sigma }, f2).unwrap();
        let op = CollocationOperator::new(48, 1.0).unwrap();
        for &k in &[0.5, 3.0, 12.0] {
            let t = (k as f64).tanh();
            let exact = 1.0 - sigma * t / (2.0 * k) + (sigma * sigma * t * t / (4.0 * k * k) + t / (f2 * k)).sqrt();
            let sol = solve_forward(&prof, &op, k).unwrap();
            assert!((sol.c - exact).abs() / exact < 1e-12, "k={k}: {} vs {exact}", sol.c);
        }
    }

    #[test]
    fn backward_inverts_forward_for_quiescent() {
        let prof = builtin_profile::<f64>("quiescent", &[]).unwrap().project(0.0);
        let op = CollocationOperator::new(48, 1.0).unwrap();
        let sol = solve_backward(&prof, &op, 2.0).unwrap();
        // tanh(k)/k = F² c² = 0.2
        let (mut lo, mut hi) = (1.0f64, 10.0f64);
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m.tanh() / m > 0.2 {
                lo = m;
            } else {
                hi = m;
            }
        }
        assert!((sol.k - lo).abs() < 1e-10, "{} {lo}", sol.k);
        assert!(matches!(solve_backward(&prof, &op, 0.0), Err(Error::CriticalLayer { .. })));
    }

    #[test]
    fn ut_backward_roundtrip() {
        let prof = builtin_profile::<f64>("UT", &[]).unwrap().project(0.0);
        let op = CollocationOperator::new(64, 1.0).unwrap();
        let fwd = solve_forward(&prof, &op, 5.0).unwrap();
        let back = solve_backward(&prof, &op, fwd.c).unwrap();
        assert!((back.k - 5.0).abs() < 1e-9, "{}", back.k);
        assert!(matches!(solve_backward(&prof, &op, 0.5), Err(Error::CriticalLayer { .. })));
    }

    #[test]
    fn flow_field_is_divergence_free() {
        let p = builtin_profile::<f64>("UT", &[]).unwrap();
        let (kx, ky) = (3.0f64, 4.0f64);
        let theta = ky.atan2(kx);
        let op = CollocationOperator::new(40, 1.0).unwrap();
        let sol = solve_forward(&p.project(theta), &op, 5.0).unwrap();
        let f = reconstruct_flow(&p, kx, ky, &sol, &op).unwrap();
        let dw = op.d().matvec_complex(&f.w);
        let i = C::new(0.0, 1.0);
        let scale = norm2_complex(&dw);
        for j in 0..f.u.len() {
            let r = i * kx * f.u[j] + i * ky * f.v[j] + dw[j];
            assert!(r.norm() < 1e-10 * scale, "{j}: {r}");
        }
    }
}
