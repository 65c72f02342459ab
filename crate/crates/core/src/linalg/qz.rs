//! Complex QZ: generalised Schur decomposition `A = Q S Z^H`, `B = Q T Z^H`
//! with `S`, `T` upper triangular.
//!
//! Single-shift implicit iteration after Hessenberg–triangular reduction,
//! with zero chasing for singular `B` so infinite eigenvalues deflate as
//! `beta = 0` instead of polluting the finite spectrum.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::mat::Mat;

type C<T> = Complex<T>;

#[inline]
fn abs1<T: Real>(z: C<T>) -> T {
    z.re.abs() + z.im.abs()
}

#[inline]
fn czero<T: Real>() -> C<T> {
    C::new(T::zero(), T::zero())
}

/// Plane rotation `[c s; -conj(s) c] [f; g] = [r; 0]` with real `c`.
fn lartg<T: Real>(f: C<T>, g: C<T>) -> (T, C<T>, C<T>) {
    if g == czero() {
        return (T::one(), czero(), f);
    }
    if f == czero() {
        let gn = g.norm();
        return (T::zero(), g.conj() / gn, C::new(gn, T::zero()));
    }
    let fa = f.norm();
    let ga = g.norm();
    let nrm = fa.hypot(ga);
    let phase = f / fa;
    let c = fa / nrm;
    let s = phase * g.conj() / nrm;
    (c, s, phase * nrm)
}

/// Rows `i`, `j` over columns `cols`: `x_i <- c x_i + s x_j`, `x_j <- c x_j - conj(s) x_i`.
fn rot_rows<T: Real>(m: &mut Mat<C<T>>, i: usize, j: usize, c: T, s: C<T>, cols: std::ops::Range<usize>) {
    let sc = s.conj();
    for k in cols {
        let x = m[(i, k)];
        let y = m[(j, k)];
        m[(i, k)] = x * c + s * y;
        m[(j, k)] = y * c - sc * x;
    }
}

/// Columns `i`, `j` over rows `rows`, same convention as [`rot_rows`].
fn rot_cols<T: Real>(m: &mut Mat<C<T>>, i: usize, j: usize, c: T, s: C<T>, rows: std::ops::Range<usize>) {
    let sc = s.conj();
    for k in rows {
        let x = m[(k, i)];
        let y = m[(k, j)];
        m[(k, i)] = x * c + s * y;
        m[(k, j)] = y * c - sc * x;
    }
}

fn fro<T: Real>(m: &Mat<C<T>>) -> T {
    m.as_slice().iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

/// Generalised Schur form of a square pencil.
#[derive(Clone, Debug)]
pub struct GeneralizedSchur<T> {
    s: Mat<C<T>>,
    t: Mat<C<T>>,
    q: Option<Mat<C<T>>>,
    z: Mat<C<T>>,
}

impl<T: Real> GeneralizedSchur<T> {
    pub fn dim(&self) -> usize {
        self.s.rows()
    }

    /// Eigenvalue numerators `alpha_i` (diagonal of `S`).
    pub fn alpha(&self, i: usize) -> C<T> {
        self.s[(i, i)]
    }

    /// Eigenvalue denominators `beta_i` (diagonal of `T`); zero for infinite eigenvalues.
    pub fn beta(&self, i: usize) -> C<T> {
        self.t[(i, i)]
    }

    /// `alpha_i / beta_i`, infinite when `beta_i = 0`.
    pub fn eigenvalue(&self, i: usize) -> C<T> {
        let b = self.beta(i);
        if b == czero() {
            C::new(T::infinity(), T::zero())
        } else {
            self.alpha(i) / b
        }
    }

    pub fn eigenvalues(&self) -> Vec<C<T>> {
        (0..self.dim()).map(|i| self.eigenvalue(i)).collect()
    }

    fn scaled_pair(&self, k: usize) -> (C<T>, C<T>) {
        let snorm = fro(&self.s).max(T::min_positive_value());
        let tnorm = fro(&self.t).max(T::min_positive_value());
        let (a, b) = (self.alpha(k), self.beta(k));
        let sc = (abs1(a) * tnorm).max(abs1(b) * snorm).max(T::min_positive_value());
        (a / sc, b / sc)
    }

    /// Right eigenvector `x` of `(A, B)` belonging to the `k`-th diagonal pair,
    /// `beta A x = alpha B x`.
    pub fn right_vector(&self, k: usize) -> Vec<C<T>> {
        let n = self.dim();
        let (a, b) = self.scaled_pair(k);
        let w = |i: usize, j: usize| self.s[(i, j)] * b - self.t[(i, j)] * a;
        let small = T::epsilon();
        let big = T::one() / T::epsilon().powi(4);
        let mut y = vec![czero::<T>(); k + 1];
        y[k] = C::new(T::one(), T::zero());
        for j in (0..k).rev() {
            let mut sum: C<T> = czero();
            for i in j + 1..=k {
                sum = sum + w(j, i) * y[i];
            }
            let mut d = w(j, j);
            if abs1(d) < small {
                d = C::new(small, T::zero());
            }
            y[j] = -sum / d;
            if abs1(y[j]) > big {
                for v in y.iter_mut() {
                    *v = *v / big;
                }
            }
        }
        (0..n)
            .map(|r| {
                let mut s: C<T> = czero();
                for (i, yi) in y.iter().enumerate() {
                    s = s + self.z[(r, i)] * *yi;
                }
                s
            })
            .collect()
    }

    /// Left eigenvector `y` with `y^H (beta A - alpha B) = 0`, available when
    /// the decomposition was computed with `want_left`.
    pub fn left_vector(&self, k: usize) -> Option<Vec<C<T>>> {
        let q = self.q.as_ref()?;
        let n = self.dim();
        let (a, b) = self.scaled_pair(k);
        let w = |i: usize, j: usize| (self.s[(i, j)] * b - self.t[(i, j)] * a).conj();
        let small = T::epsilon();
        let big = T::one() / T::epsilon().powi(4);
        let mut u = vec![czero::<T>(); n];
        u[k] = C::new(T::one(), T::zero());
        for j in k + 1..n {
            let mut sum: C<T> = czero();
            for i in k..j {
                sum = sum + w(i, j) * u[i];
            }
            let mut d = w(j, j);
            if abs1(d) < small {
                d = C::new(small, T::zero());
            }
            u[j] = -sum / d;
            if abs1(u[j]) > big {
                for v in u.iter_mut() {
                    *v = *v / big;
                }
            }
        }
        Some(
            (0..n)
                .map(|r| {
                    let mut s: C<T> = czero();
                    for (i, ui) in u.iter().enumerate().skip(k) {
                        s = s + q[(r, i)] * *ui;
                    }
                    s
                })
                .collect(),
        )
    }
}

fn identity<T: Real>(n: usize) -> Mat<C<T>> {
    let mut m = Mat::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = C::new(T::one(), T::zero());
    }
    m
}

/// Computes the generalised Schur form of `(A, B)`. `Z` is always
/// accumulated; `Q` only when `want_left` (needed for left eigenvectors).
pub fn qz<T: Real>(a: &Mat<C<T>>, b: &Mat<C<T>>, want_left: bool) -> Result<GeneralizedSchur<T>> {
    let n = a.rows();
    if !a.is_square() || !b.is_square() || b.rows() != n {
        return Err(Error::InvalidArgument("QZ needs two square matrices of equal size".into()));
    }
    if a.as_slice().iter().chain(b.as_slice()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Solver("non-finite entry in pencil".into()));
    }
    let mut h = a.clone();
    let mut t = b.clone();
    let mut q = want_left.then(|| identity::<T>(n));
    let mut z = identity::<T>(n);
    if n == 0 {
        return Ok(GeneralizedSchur { s: h, t, q, z });
    }

    // B <- upper triangular
    for j in 0..n {
        for i in (j + 1..n).rev() {
            if t[(i, j)] == czero() {
                continue;
            }
            let (c, s, r) = lartg(t[(i - 1, j)], t[(i, j)]);
            t[(i - 1, j)] = r;
            t[(i, j)] = czero();
            rot_rows(&mut t, i - 1, i, c, s, j + 1..n);
            rot_rows(&mut h, i - 1, i, c, s, 0..n);
            if let Some(q) = q.as_mut() {
                rot_cols(q, i - 1, i, c, s.conj(), 0..n);
            }
        }
    }

    // Hessenberg-triangular reduction
    for jcol in 0..n.saturating_sub(2) {
        for jrow in (jcol + 2..n).rev() {
            if h[(jrow, jcol)] == czero() {
                continue;
            }
            let (c, s, r) = lartg(h[(jrow - 1, jcol)], h[(jrow, jcol)]);
            h[(jrow - 1, jcol)] = r;
            h[(jrow, jcol)] = czero();
            rot_rows(&mut h, jrow - 1, jrow, c, s, jcol + 1..n);
            rot_rows(&mut t, jrow - 1, jrow, c, s, jrow - 1..n);
            if let Some(q) = q.as_mut() {
                rot_cols(q, jrow - 1, jrow, c, s.conj(), 0..n);
            }
            let (c, s, r) = lartg(t[(jrow, jrow)], t[(jrow, jrow - 1)]);
            t[(jrow, jrow)] = r;
            t[(jrow, jrow - 1)] = czero();
            rot_cols(&mut h, jrow, jrow - 1, c, s, 0..n);
            rot_cols(&mut t, jrow, jrow - 1, c, s, 0..jrow);
            rot_cols(&mut z, jrow, jrow - 1, c, s, 0..n);
        }
    }

    let ulp = T::epsilon();
    let safmin = T::min_positive_value();
    let bnorm = fro(&t);
    let btol = safmin.max(ulp * bnorm);
    let negligible = |h: &Mat<C<T>>, j: usize| {
        abs1(h[(j, j - 1)]) <= safmin.max(ulp * (abs1(h[(j, j)]) + abs1(h[(j - 1, j - 1)])))
    };

    enum Action {
        Deflate,
        ZeroAtBottom,
        Step(usize),
    }

    let mut ilast = n - 1;
    let mut iiter = 0usize;
    let mut eshift = czero::<T>();
    let maxit = 30 * n.max(1);
    let mut converged = false;
    for _ in 0..maxit {
        if ilast == 0 {
            converged = true;
            break;
        }
        let action = if negligible(&h, ilast) {
            h[(ilast, ilast - 1)] = czero();
            Action::Deflate
        } else if t[(ilast, ilast)].norm() <= btol {
            t[(ilast, ilast)] = czero();
            Action::ZeroAtBottom
        } else {
            let mut found = None;
            for j in (0..ilast).rev() {
                let ilazro = if j == 0 {
                    true
                } else if negligible(&h, j) {
                    h[(j, j - 1)] = czero();
                    true
                } else {
                    false
                };
                if t[(j, j)].norm() < btol {
                    t[(j, j)] = czero();
                    if ilazro {
                        let mut next = Action::ZeroAtBottom;
                        for jch in j..ilast {
                            let (c, s, r) = lartg(h[(jch, jch)], h[(jch + 1, jch)]);
                            h[(jch, jch)] = r;
                            h[(jch + 1, jch)] = czero();
                            rot_rows(&mut h, jch, jch + 1, c, s, jch + 1..n);
                            rot_rows(&mut t, jch, jch + 1, c, s, jch + 1..n);
                            if let Some(q) = q.as_mut() {
                                rot_cols(q, jch, jch + 1, c, s.conj(), 0..n);
                            }
                            if t[(jch + 1, jch + 1)].norm() >= btol {
                                next = if jch + 1 >= ilast {
                                    Action::Deflate
                                } else {
                                    Action::Step(jch + 1)
                                };
                                break;
                            }
                            t[(jch + 1, jch + 1)] = czero();
                        }
                        found = Some(next);
                    } else {
                        // chase the zero on the diagonal of T down to row ilast
                        for jch in j..ilast {
                            let (c, s, r) = lartg(t[(jch, jch + 1)], t[(jch + 1, jch + 1)]);
                            t[(jch, jch + 1)] = r;
                            t[(jch + 1, jch + 1)] = czero();
                            rot_rows(&mut t, jch, jch + 1, c, s, jch + 2..n);
                            rot_rows(&mut h, jch, jch + 1, c, s, jch - 1..n);
                            if let Some(q) = q.as_mut() {
                                rot_cols(q, jch, jch + 1, c, s.conj(), 0..n);
                            }
                            let (c, s, r) = lartg(h[(jch + 1, jch)], h[(jch + 1, jch - 1)]);
                            h[(jch + 1, jch)] = r;
                            h[(jch + 1, jch - 1)] = czero();
                            rot_cols(&mut h, jch, jch - 1, c, s, 0..jch + 1);
                            rot_cols(&mut t, jch, jch - 1, c, s, 0..jch);
                            rot_cols(&mut z, jch, jch - 1, c, s, 0..n);
                        }
                        found = Some(Action::ZeroAtBottom);
                    }
                    break;
                } else if ilazro {
                    found = Some(Action::Step(j));
                    break;
                }
            }
            found.ok_or_else(|| Error::Solver("QZ block search failed".into()))?
        };

        match action {
            Action::Deflate => {
                ilast -= 1;
                iiter = 0;
                eshift = czero();
            }
            Action::ZeroAtBottom => {
                let (c, s, r) = lartg(h[(ilast, ilast)], h[(ilast, ilast - 1)]);
                h[(ilast, ilast)] = r;
                h[(ilast, ilast - 1)] = czero();
                rot_cols(&mut h, ilast, ilast - 1, c, s, 0..ilast);
                rot_cols(&mut t, ilast, ilast - 1, c, s, 0..ilast);
                rot_cols(&mut z, ilast, ilast - 1, c, s, 0..n);
                ilast -= 1;
                iiter = 0;
                eshift = czero();
            }
            Action::Step(ifirst) => {
                iiter += 1;
                let l = ilast;
                let shift = if iiter % 10 != 0 {
                    wilkinson_shift(&h, &t, l)
                } else {
                    eshift = eshift + h[(l, l - 1)] / t[(l - 1, l - 1)];
                    eshift
                };
                let (mut c, mut s, _) =
                    lartg(h[(ifirst, ifirst)] - shift * t[(ifirst, ifirst)], h[(ifirst + 1, ifirst)]);
                for j in ifirst..l {
                    if j > ifirst {
                        let (c2, s2, r) = lartg(h[(j, j - 1)], h[(j + 1, j - 1)]);
                        h[(j, j - 1)] = r;
                        h[(j + 1, j - 1)] = czero();
                        c = c2;
                        s = s2;
                    }
                    rot_rows(&mut h, j, j + 1, c, s, j..n);
                    rot_rows(&mut t, j, j + 1, c, s, j..n);
                    if let Some(q) = q.as_mut() {
                        rot_cols(q, j, j + 1, c, s.conj(), 0..n);
                    }
                    let (c2, s2, r) = lartg(t[(j + 1, j + 1)], t[(j + 1, j)]);
                    t[(j + 1, j + 1)] = r;
                    t[(j + 1, j)] = czero();
                    rot_cols(&mut h, j + 1, j, c2, s2, 0..(j + 3).min(l + 1));
                    rot_cols(&mut t, j + 1, j, c2, s2, 0..j + 1);
                    rot_cols(&mut z, j + 1, j, c2, s2, 0..n);
                }
            }
        }
    }
    if !converged {
        return Err(Error::Solver(format!("QZ iteration did not converge in {maxit} sweeps")));
    }
    Ok(GeneralizedSchur { s: h, t, q, z })
}

fn wilkinson_shift<T: Real>(h: &Mat<C<T>>, t: &Mat<C<T>>, l: usize) -> C<T> {
    let half = T::lit(0.5);
    let u12 = t[(l - 1, l)] / t[(l, l)];
    let ad11 = h[(l - 1, l - 1)] / t[(l - 1, l - 1)];
    let ad21 = h[(l, l - 1)] / t[(l - 1, l - 1)];
    let ad12 = h[(l - 1, l)] / t[(l, l)];
    let ad22 = h[(l, l)] / t[(l, l)];
    let abi22 = ad22 - u12 * ad21;
    let abi12 = ad12 - u12 * ad11;
    let mut shift = abi22;
    let ctemp = abi12.sqrt() * ad21.sqrt();
    if ctemp != czero() {
        let x = (ad11 - shift) * half;
        let temp2 = abs1(x);
        let temp = abs1(ctemp).max(temp2);
        let mut y = ((x / temp) * (x / temp) + (ctemp / temp) * (ctemp / temp)).sqrt() * temp;
        if temp2 > T::zero() {
            let xs = x / temp2;
            if xs.re * y.re + xs.im * y.im < T::zero() {
                y = -y;
            }
        }
        shift = shift - ctemp * (ctemp / (x + y));
    }
    shift
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cmat(rows: usize, data: &[f64]) -> Mat<C<f64>> {
        Mat::from_rows(rows, data.len() / rows, data.iter().map(|&x| C::new(x, 0.0)).collect())
    }

    fn sorted_finite(s: &GeneralizedSchur<f64>) -> Vec<C<f64>> {
        let mut v: Vec<_> = s.eigenvalues().into_iter().filter(|z| z.re.is_finite() && z.norm() < 1e8).collect();
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        v
    }

    #[test]
    fn standard_problem_eigenvalues() {
        let a = cmat(3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let b = cmat(3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        let s = qz(&a, &b, true).unwrap();
        let ev = sorted_finite(&s);
        let expect = [3.0 - 3f64.sqrt(), 3.0, 3.0 + 3f64.sqrt()];
        for (e, x) in ev.iter().zip(expect) {
            assert!((e.re - x).abs() < 1e-13 && e.im.abs() < 1e-13, "{e} vs {x}");
        }
    }

    #[test]
    fn singular_b_gives_infinite_eigenvalue() {
        // det(A - lambda B) = (1 - lambda)(2) for B = diag(1, 0)
        let a = cmat(2, &[1.0, 5.0, 0.0, 2.0]);
        let b = cmat(2, &[1.0, 0.0, 0.0, 0.0]);
        let s = qz(&a, &b, false).unwrap();
        let ev = s.eigenvalues();
        assert_eq!(ev.iter().filter(|z| !z.re.is_finite()).count(), 1);
        let fin: Vec<_> = ev.iter().filter(|z| z.re.is_finite()).collect();
        assert!((fin[0].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn vectors_satisfy_pencil() {
        let a = cmat(4, &[
            1.0, 2.0, 0.0, -1.0, 0.5, -3.0, 1.0, 2.0, 0.0, 1.0, 4.0, 0.3, 2.0, 0.0, -1.0, 1.0,
        ]);
        let b = cmat(4, &[
            2.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.5, 1.0, 0.0, 3.0, 0.0, 0.0, 0.2, 0.0, 1.0,
        ]);
        let s = qz(&a, &b, true).unwrap();
        for k in 0..4 {
            let (al, be) = (s.alpha(k), s.beta(k));
            let x = s.right_vector(k);
            let y = s.left_vector(k).unwrap();
            let xn = x.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            let yn = y.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for i in 0..4 {
                let mut r = C::new(0.0, 0.0);
                let mut l = C::new(0.0, 0.0);
                for j in 0..4 {
                    r += (a[(i, j)] * be - b[(i, j)] * al) * x[j];
                    l += (a[(j, i)] * be - b[(j, i)] * al).conj() * y[j];
                }
                assert!(r.norm() < 1e-12 * xn * (al.norm() + be.norm()) * 10.0, "right residual {r}");
                assert!(l.norm() < 1e-12 * yn * (al.norm() + be.norm()) * 10.0, "left residual {l}");
            }
        }
    }
}
