//! Dense complex matrices and a Hessenberg/QR eigensolver.
//!
//! Dimensions in this crate stay below a few hundred, so everything is
//! dense and row-major.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    /// Exact (bitwise) complex symmetry: `m[i][j] == m[j][i]`, no conjugation.
    pub fn is_complex_symmetric(&self) -> bool {
        (0..self.dim).all(|i| {
            (i + 1..self.dim).all(|j| {
                let a = self[(i, j)];
                let b = self[(j, i)];
                a.re.to_bits() == b.re.to_bits() && a.im.to_bits() == b.im.to_bits()
            })
        })
    }

    pub fn is_real(&self) -> bool {
        self.data.iter().all(|z| z.im == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dim)
            .map(|i| self.row(i).iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn mul_vec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Adds `shift` to every diagonal entry.
    pub fn shift_diagonal(&mut self, shift: Complex64) {
        for i in 0..self.dim {
            self[(i, i)] += shift;
        }
    }

    /// `self + scale * other`.
    pub fn scaled_add(&self, scale: Complex64, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, other.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + scale * b)
                .collect(),
        }
    }

    /// Conjugates by a permutation: `out[i][j] = self[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> ComplexMatrix {
        assert_eq!(perm.len(), self.dim);
        ComplexMatrix::from_fn(self.dim, |i, j| self[(perm[i], perm[j])])
    }

    /// Principal sub-block on the given index set.
    pub fn submatrix(&self, idx: &[usize]) -> ComplexMatrix {
        ComplexMatrix::from_fn(idx.len(), |i, j| self[(idx[i], idx[j])])
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

#[inline]
fn abs1(z: Complex64) -> f64 {
    z.re.abs() + z.im.abs()
}

/// Non-conjugated bilinear product `x^T y`.
pub fn bilinear_dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Hermitian product `x^H y`.
pub fn hermitian_dot(x: &[Complex64], y: &[Complex64]) -> Complex64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm_inf_vec(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Upper Hessenberg reduction by Householder reflections.
///
/// Returns the accumulated unitary when `want_q` is set, so that
/// `A = Q H Q^H`.
fn hessenberg(a: &mut ComplexMatrix, want_q: bool) -> Option<ComplexMatrix> {
    let n = a.dim;
    let mut q = want_q.then(|| ComplexMatrix::identity(n));
    let mut v = vec![ZERO; n];
    for k in 0..n.saturating_sub(2) {
        let mut norm2 = 0.0;
        for i in k + 1..n {
            norm2 += a[(i, k)].norm_sqr();
        }
        let tail2: f64 = (k + 2..n).map(|i| a[(i, k)].norm_sqr()).sum();
        if tail2 == 0.0 {
            continue;
        }
        let norm = norm2.sqrt();
        let x0 = a[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { ONE } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        // v = x - alpha e1, normalised to unit length
        v[k + 1] = x0 - alpha;
        for i in k + 2..n {
            v[i] = a[(i, k)];
        }
        let vnorm: f64 = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        for vi in v.iter_mut().take(n).skip(k + 1) {
            *vi /= vnorm;
        }
        // left: rows k+1.., columns k..
        for j in k..n {
            let mut s = ZERO;
            for i in k + 1..n {
                s += v[i].conj() * a[(i, j)];
            }
            s *= 2.0;
            for i in k + 1..n {
                let vi = v[i];
                a[(i, j)] -= vi * s;
            }
        }
        // right: all rows, columns k+1..
        for i in 0..n {
            let mut s = ZERO;
            for j in k + 1..n {
                s += a[(i, j)] * v[j];
            }
            s *= 2.0;
            for j in k + 1..n {
                let vj = v[j];
                a[(i, j)] -= s * vj.conj();
            }
        }
        if let Some(q) = q.as_mut() {
            for i in 0..n {
                let mut s = ZERO;
                for j in k + 1..n {
                    s += q[(i, j)] * v[j];
                }
                s *= 2.0;
                for j in k + 1..n {
                    let vj = v[j];
                    q[(i, j)] -= s * vj.conj();
                }
            }
        }
        a[(k + 1, k)] = alpha;
        for i in k + 2..n {
            a[(i, k)] = ZERO;
        }
    }
    q
}

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` with `G [a; b] = [r; 0]`.
#[inline]
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

const MAX_SWEEPS_PER_EIGENVALUE: usize = 60;

/// Shifted QR iteration on an upper Hessenberg matrix.
///
/// With `z` present the iteration runs on the whole matrix and accumulates
/// Schur vectors, leaving `h` upper triangular; otherwise only the active
/// window is touched and just the eigenvalues are meaningful.
fn hessenberg_qr(h: &mut ComplexMatrix, mut z: Option<&mut ComplexMatrix>) -> Result<Vec<Complex64>> {
    let n = h.dim;
    let full = z.is_some();
    let mut eig = vec![ZERO; n];
    if n == 0 {
        return Ok(eig);
    }
    let eps = f64::EPSILON;
    let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(n);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[(0, 0)];
            break;
        }
        // deflation search
        let mut lo = hi;
        while lo > 0 {
            let sub = abs1(h[(lo, lo - 1)]);
            let mut s = abs1(h[(lo - 1, lo - 1)]) + abs1(h[(lo, lo)]);
            if s == 0.0 {
                s = (lo.saturating_sub(1)..=hi)
                    .map(|i| abs1(h[(i, i)]))
                    .sum::<f64>()
                    .max(f64::MIN_POSITIVE);
            }
            if sub <= eps * s {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eig[hi] = h[(hi, hi)];
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if iter > MAX_SWEEPS_PER_EIGENVALUE {
            let residual = abs1(h[(hi, hi - 1)]);
            return Err(Error::NoConvergence {
                iterations: total,
                residual,
            });
        }
        let shift = if iter.is_multiple_of(11) {
            // exceptional shift to break cycles
            h[(hi, hi)] + Complex64::new(0.75 * abs1(h[(hi, hi - 1)]), 0.0)
        } else {
            wilkinson_shift(
                h[(hi - 1, hi - 1)],
                h[(hi - 1, hi)],
                h[(hi, hi - 1)],
                h[(hi, hi)],
            )
        };
        let (col_end, row_start) = if full { (n, 0) } else { (hi + 1, lo) };
        for i in lo..=hi {
            h[(i, i)] -= shift;
        }
        rot.clear();
        for k in lo..hi {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            rot.push((c, s));
            for j in k..col_end {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            h[(k + 1, k)] = ZERO;
        }
        for (idx, &(c, s)) in rot.iter().enumerate() {
            let k = lo + idx;
            let row_end = (k + 2).min(hi + 1);
            for i in row_start..row_end {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = x * c + y * s.conj();
                h[(i, k + 1)] = -x * s + y * c;
            }
            if let Some(z) = z.as_deref_mut() {
                for i in 0..n {
                    let x = z[(i, k)];
                    let y = z[(i, k + 1)];
                    z[(i, k)] = x * c + y * s.conj();
                    z[(i, k + 1)] = -x * s + y * c;
                }
            }
        }
        for i in lo..=hi {
            h[(i, i)] += shift;
        }
    }
    Ok(eig)
}

/// Eigenvalue of the trailing 2x2 block closest to its last diagonal entry.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = 0.5 * (a - d);
    let disc = (half * half + b * c).sqrt();
    let l1 = d - b * c / (half + disc);
    let l2 = d - b * c / (half - disc);
    let pick = |l: Complex64| if l.re.is_finite() && l.im.is_finite() { Some(l) } else { None };
    match (pick(l1), pick(l2)) {
        (Some(x), Some(y)) => {
            if (x - d).norm() <= (y - d).norm() {
                x
            } else {
                y
            }
        }
        (Some(x), None) | (None, Some(x)) => x,
        (None, None) => d,
    }
}

/// All eigenvalues, unordered.
pub fn eigenvalues(m: &ComplexMatrix) -> Result<Vec<Complex64>> {
    check_input(m)?;
    let mut h = m.clone();
    hessenberg(&mut h, false);
    hessenberg_qr(&mut h, None)
}

/// Eigenvalues and right eigenvectors (unnormalised), unordered.
pub fn eigen_decomposition(m: &ComplexMatrix) -> Result<(Vec<Complex64>, Vec<Vec<Complex64>>)> {
    check_input(m)?;
    let n = m.dim;
    let mut t = m.clone();
    let mut z = hessenberg(&mut t, true).expect("requested Q");
    let values = hessenberg_qr(&mut t, Some(&mut z))?;
    let norm = m.norm_inf().max(f64::MIN_POSITIVE);
    let small = f64::EPSILON * norm;
    let mut vectors = Vec::with_capacity(n);
    let mut y = vec![ZERO; n];
    for k in 0..n {
        let lambda = t[(k, k)];
        y.iter_mut().for_each(|v| *v = ZERO);
        y[k] = ONE;
        for j in (0..k).rev() {
            let mut s = ZERO;
            for l in j + 1..=k {
                s += t[(j, l)] * y[l];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < small {
                d = Complex64::new(small, 0.0);
            }
            y[j] = -s / d;
        }
        let scale = norm_inf_vec(&y[..=k]);
        let v: Vec<Complex64> = (0..n)
            .map(|i| (0..=k).map(|l| z[(i, l)] * y[l]).sum::<Complex64>() / scale)
            .collect();
        vectors.push(v);
    }
    Ok((values, vectors))
}

fn check_input(m: &ComplexMatrix) -> Result<()> {
    if m.dim == 0 {
        return Err(Error::Domain("matrix dimension must be >= 1".into()));
    }
    if !m.is_finite() {
        return Err(Error::Domain("matrix has non-finite entries".into()));
    }
    Ok(())
}

/// LU factorisation with partial pivoting, used for inverse iteration.
pub struct Lu {
    lu: ComplexMatrix,
    piv: Vec<usize>,
}

impl Lu {
    /// Factorises `m`; exactly singular pivots are nudged to `tiny`.
    pub fn new(m: &ComplexMatrix, tiny: f64) -> Lu {
        let n = m.dim;
        let mut lu = m.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            let mut best = lu[(k, k)].norm();
            for i in k + 1..n {
                let v = lu[(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            if lu[(k, k)].norm() < tiny {
                lu[(k, k)] = Complex64::new(tiny, 0.0);
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let f = lu[(i, k)] / pivot;
                lu[(i, k)] = f;
                if f != ZERO {
                    for j in k + 1..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= f * u;
                    }
                }
            }
        }
        Lu { lu, piv }
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.lu.dim;
        let mut x: Vec<Complex64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[(i, j)] * x[j];
            }
            x[i] = s / self.lu[(i, i)];
        }
        x
    }
}

/// Eigenvector for a known eigenvalue by shifted inverse iteration.
///
/// Returns the vector scaled to unit infinity norm and its relative residual.
pub fn inverse_iteration(m: &ComplexMatrix, lambda: Complex64, sweeps: usize) -> (Vec<Complex64>, f64) {
    let n = m.dim;
    let norm = m.norm_inf().max(f64::MIN_POSITIVE);
    let mut shifted = m.clone();
    shifted.shift_diagonal(-lambda);
    let lu = Lu::new(&shifted, f64::EPSILON * norm);
    // deterministic, generic start vector
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + 0.1 * ((i * 7919) % 13) as f64, 0.0))
        .collect();
    let mut residual = f64::INFINITY;
    for _ in 0..sweeps.max(1) {
        v = lu.solve(&v);
        let s = norm_inf_vec(&v);
        if !(s.is_finite() && s > 0.0) {
            break;
        }
        v.iter_mut().for_each(|x| *x /= s);
        residual = relative_residual(m, lambda, &v);
        if residual <= 1e-13 {
            break;
        }
    }
    (v, residual)
}

/// `||H v - lambda v||_inf / (||H||_inf ||v||_inf)`.
pub fn relative_residual(m: &ComplexMatrix, lambda: Complex64, v: &[Complex64]) -> f64 {
    let hv = m.mul_vec(v);
    let r = hv
        .iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).norm())
        .fold(0.0, f64::max);
    r / (m.norm_inf().max(f64::MIN_POSITIVE) * norm_inf_vec(v).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn diagonal_and_triangular_inputs() {
        let d = ComplexMatrix::from_diagonal(&[c(3.0, -1.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let e = sorted(eigenvalues(&d).unwrap());
        assert_eq!(e, vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, -1.0)]);
        let mut t = ComplexMatrix::zeros(3);
        t[(0, 0)] = c(1.0, 1.0);
        t[(0, 2)] = c(5.0, 0.0);
        t[(1, 1)] = c(-2.0, 0.0);
        t[(1, 2)] = c(0.0, 3.0);
        t[(2, 2)] = c(4.0, 0.0);
        let e = sorted(eigenvalues(&t).unwrap());
        for (a, b) in e.iter().zip([c(-2.0, 0.0), c(1.0, 1.0), c(4.0, 0.0)]) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let mut m = ComplexMatrix::zeros(3);
        m[(0, 0)] = c(6.0, 0.0);
        m[(0, 1)] = c(-11.0, 0.0);
        m[(0, 2)] = c(6.0, 0.0);
        m[(1, 0)] = ONE;
        m[(2, 1)] = ONE;
        let e = sorted(eigenvalues(&m).unwrap());
        for (a, b) in e.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - c(b, 0.0)).norm() < 1e-12, "{a}");
        }
    }

    #[test]
    fn rotation_matrix_has_complex_pair() {
        let m = ComplexMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(-1.0, 0.0),
            (1, 0) => c(1.0, 0.0),
            _ => ZERO,
        });
        let e = sorted(eigenvalues(&m).unwrap());
        assert!((e[0] - c(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - c(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn decomposition_residuals_are_small() {
        let m = ComplexMatrix::from_fn(12, |i, j| {
            let x = ((i * 31 + j * 17) % 23) as f64 / 23.0 - 0.5;
            let y = ((i * 13 + j * 29) % 19) as f64 / 19.0 - 0.5;
            c(x, y)
        });
        let (vals, vecs) = eigen_decomposition(&m).unwrap();
        for (l, v) in vals.iter().zip(&vecs) {
            assert!(relative_residual(&m, *l, v) < 1e-12);
        }
        let tr: Complex64 = vals.iter().sum();
        assert!((tr - m.trace()).norm() < 1e-12 * m.norm_inf());
    }

    #[test]
    fn lu_solves_linear_system() {
        let m = ComplexMatrix::from_fn(5, |i, j| {
            if i == j {
                c(4.0, 1.0)
            } else {
                c(1.0 / (1.0 + i as f64 + j as f64), 0.2)
            }
        });
        let x: Vec<Complex64> = (0..5).map(|i| c(i as f64, -(i as f64) * 0.5)).collect();
        let b = m.mul_vec(&x);
        let got = Lu::new(&m, 1e-300).solve(&b);
        for (a, b) in got.iter().zip(&x) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn inverse_iteration_recovers_vector() {
        let m = ComplexMatrix::from_fn(6, |i, j| {
            if i == j {
                c(i as f64, -0.05 * i as f64)
            } else if i.abs_diff(j) == 1 {
                c(0.3, 0.0)
            } else {
                ZERO
            }
        });
        let vals = eigenvalues(&m).unwrap();
        for l in vals {
            let (v, res) = inverse_iteration(&m, l, 3);
            assert!(res < 1e-12, "{res}");
            assert!((norm_inf_vec(&v) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(eigenvalues(&ComplexMatrix::zeros(0)).is_err());
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = c(f64::NAN, 0.0);
        assert!(eigenvalues(&m).is_err());
    }
}
