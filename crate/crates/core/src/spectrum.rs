//! Eigenpairs of Hamiltonian blocks.
//!
//! Complex-symmetric matrices have right eigenvectors that are orthogonal
//! under the bilinear form `x^T y`, and that is the normalisation used here
//! whenever it is well defined. The Hermitian norm is available through
//! [`EigenPair::hermitian_normalized`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, bilinear_dot, hermitian_dot, ComplexMatrix};
use crate::params::Model;

/// Acceptance bound on `||H v - lambda v|| / (||H|| ||v||)`.
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normalization {
    /// `v^T v = 1`.
    Bilinear,
    /// `v^H v = 1`; used when `v^T v` is (numerically) zero or the matrix is
    /// not complex symmetric.
    Hermitian,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub value: Complex64,
    pub vector: Vec<Complex64>,
    pub normalization: Normalization,
}

impl EigenPair {
    pub fn bilinear_norm(&self) -> Complex64 {
        bilinear_dot(&self.vector, &self.vector)
    }

    pub fn hermitian_norm(&self) -> f64 {
        hermitian_dot(&self.vector, &self.vector).re
    }

    /// Copy of the vector scaled to unit Hermitian norm.
    pub fn hermitian_normalized(&self) -> Vec<Complex64> {
        let s = self.hermitian_norm().sqrt();
        self.vector.iter().map(|z| z / s).collect()
    }

    /// Bilinear expectation `v^T O v / v^T v`.
    pub fn bilinear_expectation(&self, op: &ComplexMatrix) -> Complex64 {
        bilinear_dot(&self.vector, &op.mul_vec(&self.vector)) / self.bilinear_norm()
    }

    /// Conjugated expectation `v^H O v / v^H v`.
    pub fn expectation(&self, op: &ComplexMatrix) -> Complex64 {
        hermitian_dot(&self.vector, &op.mul_vec(&self.vector)) / self.hermitian_norm()
    }
}

/// Branch of a dressed two-atom manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Lower,
    Center,
    Upper,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Sorted by ascending real part, ties by ascending imaginary part.
    pub pairs: Vec<EigenPair>,
    /// Branch of each pair, present for the closed-form two-atom spectrum.
    pub branches: Option<Vec<Branch>>,
}

impl Spectrum {
    pub fn values(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn branch(&self, b: Branch) -> Option<&EigenPair> {
        let branches = self.branches.as_ref()?;
        branches.iter().position(|&x| x == b).map(|i| &self.pairs[i])
    }
}

pub(crate) fn spectral_order(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Effective Rabi frequency `sqrt(8 (2n - 1) + (omega~/beta)^2)`, principal branch.
pub fn rabi_frequency(n: usize, omega_over_beta: Complex64) -> Complex64 {
    let base = 8.0 * (2.0 * n as f64 - 1.0);
    (omega_over_beta * omega_over_beta + base).sqrt()
}

/// Closed-form eigensystem of the bare two-atom block with `n >= 2`
/// excitations (chemical potential and mean-field shift excluded):
/// `E0 = n w`, `E± = ((2n + 1) w ± beta R) / 2`.
///
/// The center vector is `(-sqrt(n), 0, sqrt(n - 1)) / sqrt(2n - 1)` and the
/// side branches are `(sqrt(n - 1), x±, sqrt(n)) / sqrt(2n - 1 + x±^2)` with
/// `x± = (w/beta ± R) / (2 sqrt 2)`, in the manifold order `k = 2, 1, 0`.
pub fn two_tla_eigensystem(model: &Model, n: usize) -> Result<Spectrum> {
    let p = model.params();
    if p.n_atoms != 2 {
        return Err(Error::Domain(format!(
            "closed-form spectrum needs two atoms, got {}",
            p.n_atoms
        )));
    }
    model.require_resonance()?;
    if n < 2 {
        return Err(Error::Domain(format!(
            "manifold n = {n} is {}-dimensional; use the generic eigensolver",
            n + 1
        )));
    }
    let w = model.derived().omega_tilde;
    let beta = p.beta;
    let nf = n as f64;
    let r = rabi_frequency(n, w / beta);
    let center = EigenPair {
        value: w * nf,
        vector: vec![
            Complex64::new(-(nf.sqrt() / (2.0 * nf - 1.0).sqrt()), 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(((nf - 1.0) / (2.0 * nf - 1.0)).sqrt(), 0.0),
        ],
        normalization: Normalization::Bilinear,
    };
    let side = |sign: f64| {
        let x = (w / beta + sign * r) / (2.0 * 2f64.sqrt());
        let norm = (x * x + (2.0 * nf - 1.0)).sqrt();
        EigenPair {
            value: ((2.0 * nf + 1.0) * w + sign * beta * r) / 2.0,
            vector: vec![
                Complex64::new((nf - 1.0).sqrt(), 0.0) / norm,
                x / norm,
                Complex64::new(nf.sqrt(), 0.0) / norm,
            ],
            normalization: Normalization::Bilinear,
        }
    };
    let mut labelled = vec![
        (side(-1.0), Branch::Lower),
        (center, Branch::Center),
        (side(1.0), Branch::Upper),
    ];
    labelled.sort_by(|a, b| spectral_order(&a.0.value, &b.0.value));
    let (pairs, branches) = labelled.into_iter().unzip();
    Ok(Spectrum {
        pairs,
        branches: Some(branches),
    })
}

/// Full eigensystem of a dense matrix via Hessenberg reduction and shifted QR.
pub fn general_eigensystem(m: &ComplexMatrix) -> Result<Spectrum> {
    let (values, vectors) = linalg::eigen_decomposition(m)?;
    let symmetric = m.is_complex_symmetric();
    let mut pairs = Vec::with_capacity(values.len());
    let mut worst = 0.0f64;
    for (value, mut vector) in values.into_iter().zip(vectors) {
        let mut res = linalg::relative_residual(m, value, &vector);
        if res > RESIDUAL_TOLERANCE {
            // one polishing pass before giving up
            let (v, r) = linalg::inverse_iteration(m, value, 2);
            if r < res {
                vector = v;
                res = r;
            }
        }
        worst = worst.max(res);
        pairs.push(normalize(value, vector, symmetric));
    }
    if worst > RESIDUAL_TOLERANCE {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: worst,
        });
    }
    pairs.sort_by(|a, b| spectral_order(&a.value, &b.value));
    Ok(Spectrum {
        pairs,
        branches: None,
    })
}

fn normalize(value: Complex64, mut vector: Vec<Complex64>, symmetric: bool) -> EigenPair {
    let herm = hermitian_dot(&vector, &vector).re;
    let bil = bilinear_dot(&vector, &vector);
    let (scale, normalization) = if symmetric && bil.norm() > 1e-8 * herm {
        (bil.sqrt(), Normalization::Bilinear)
    } else {
        (Complex64::new(herm.sqrt(), 0.0), Normalization::Hermitian)
    };
    vector.iter_mut().for_each(|z| *z /= scale);
    EigenPair {
        value,
        vector,
        normalization,
    }
}

/// Pair with the smallest real part; ties go to the smaller `|Im|`.
pub fn ground_level(s: &Spectrum) -> Result<EigenPair> {
    let values = s.values();
    let i = ground_index(&values).ok_or(Error::EmptySpectrum)?;
    Ok(s.pairs[i].clone())
}

pub(crate) fn ground_index(values: &[Complex64]) -> Option<usize> {
    let min_re = values.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    if !min_re.is_finite() {
        return None;
    }
    let tol = 1e-12 * (1.0 + min_re.abs());
    values
        .iter()
        .enumerate()
        .filter(|(_, z)| z.re <= min_re + tol)
        .min_by(|a, b| a.1.im.abs().total_cmp(&b.1.im.abs()).then(a.1.re.total_cmp(&b.1.re)))
        .map(|(i, _)| i)
}

/// Ground eigenvalue and its bilinear-normalised vector, computed from the
/// eigenvalues alone plus inverse iteration.
pub fn ground_pair(m: &ComplexMatrix) -> Result<EigenPair> {
    let values = linalg::eigenvalues(m)?;
    let i = ground_index(&values).ok_or(Error::EmptySpectrum)?;
    let value = values[i];
    let (v, res) = linalg::inverse_iteration(m, value, 3);
    if res > RESIDUAL_TOLERANCE {
        return Err(Error::NoConvergence {
            iterations: 3,
            residual: res,
        });
    }
    Ok(normalize(value, v, m.is_complex_symmetric()))
}

/// Minimal real part of the spectrum.
pub fn ground_energy_of(m: &ComplexMatrix) -> Result<Complex64> {
    let values = linalg::eigenvalues(m)?;
    ground_index(&values)
        .map(|i| values[i])
        .ok_or(Error::EmptySpectrum)
}
