//! Dicke ⊗ Fock basis and the single-site mean-field Hamiltonian.
//!
//! A basis state `(k, p)` holds `k` collective atomic excitations (the Dicke
//! state `|j = N/2, m = k - N/2>`) and `p` photons. The atomic energy and the
//! chemical-potential term both multiply the operator `J+ J-`, whose eigenvalue
//! on `(k, p)` is `k (N - k + 1)`; the number operator coupled to `mu` is
//! `a† a + J+ J-`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::params::Model;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisState {
    pub k: usize,
    pub p: usize,
}

impl BasisState {
    pub fn excitations(&self) -> usize {
        self.k + self.p
    }
}

/// States with a fixed number of bare excitations `k + p = n`,
/// ordered by `k` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct Manifold {
    pub n: usize,
    pub states: Vec<BasisState>,
}

impl Manifold {
    pub fn new(n_atoms: usize, n: usize) -> Manifold {
        let states = (0..=n_atoms.min(n))
            .rev()
            .map(|k| BasisState { k, p: n - k })
            .collect();
        Manifold { n, states }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn check_k(n_atoms: usize, k: usize, min: usize) -> Result<()> {
    if k < min || k > n_atoms {
        return Err(Error::OutOfRange {
            what: "atomic excitation k",
            value: k as i64,
            min: min as i64,
            max: n_atoms as i64,
        });
    }
    Ok(())
}

/// Eigenvalue of `J+ J-` on the Dicke state with `k` excitations:
/// `j(j+1) - m(m-1)` with `j = N/2`, `m = k - N/2`, i.e. `k (N - k + 1)`.
pub fn ladder_quadratic(n_atoms: usize, k: usize) -> Result<f64> {
    check_k(n_atoms, k, 0)?;
    Ok(lambda(n_atoms, k))
}

/// Matrix element of `J-` taking `k` excitations to `k - 1`.
pub fn lowering_amplitude(n_atoms: usize, k: usize) -> Result<f64> {
    check_k(n_atoms, k, 1)?;
    Ok(lambda(n_atoms, k).sqrt())
}

#[inline]
fn lambda(n_atoms: usize, k: usize) -> f64 {
    (k * (n_atoms + 1 - k)) as f64
}

/// Diagonal element on `(k, p)` without the mean-field constant.
fn diagonal(model: &Model, s: BasisState) -> Complex64 {
    let d = model.derived();
    let mu = model.params().mu;
    let lam = lambda(model.params().n_atoms, s.k);
    let p = s.p as f64;
    d.omega_a_tilde() * lam + d.omega_c_tilde() * p - mu * (p + lam)
}

/// Atom-cavity coupling between `(k, p)` and `(k - 1, p + 1)`.
fn coupling(model: &Model, s: BasisState) -> f64 {
    let n_atoms = model.params().n_atoms;
    model.params().beta * ((s.p + 1) as f64).sqrt() * lambda(n_atoms, s.k).sqrt()
}

/// Block of the mean-field Hamiltonian on the manifold with `n` bare
/// excitations, including the constant `kappa |psi|^2` but not the drive.
pub fn build_manifold_matrix(model: &Model, n: usize, psi_abs: f64) -> ComplexMatrix {
    let manifold = Manifold::new(model.params().n_atoms, n);
    let shift = model.params().kappa * psi_abs * psi_abs;
    let dim = manifold.len();
    let mut m = ComplexMatrix::zeros(dim);
    for (i, &s) in manifold.states.iter().enumerate() {
        m[(i, i)] = diagonal(model, s) + shift;
        if i + 1 < dim {
            let g = Complex64::new(coupling(model, s), 0.0);
            m[(i, i + 1)] = g;
            m[(i + 1, i)] = g;
        }
    }
    m
}

/// Truncated basis `0 <= k <= N`, `0 <= p <= n_max`, ordered by `k`
/// descending then `p` ascending.
pub fn full_basis(n_atoms: usize, n_max: usize) -> Vec<BasisState> {
    (0..=n_atoms)
        .rev()
        .flat_map(|k| (0..=n_max).map(move |p| BasisState { k, p }))
        .collect()
}

/// Position of `(k, p)` in [`full_basis`].
pub fn full_index(n_atoms: usize, n_max: usize, s: BasisState) -> usize {
    (n_atoms - s.k) * (n_max + 1) + s.p
}

/// Mean-field Hamiltonian on the truncated space, drive `-kappa psi (a† + a)`
/// and constant `kappa |psi|^2` included.
pub fn build_full_matrix(model: &Model, psi: Complex64) -> ComplexMatrix {
    let kappa = model.params().kappa;
    let mut h = undriven_full_matrix(model);
    h.shift_diagonal(Complex64::new(kappa * psi.norm_sqr(), 0.0));
    let drive = -kappa * psi;
    let p = model.params();
    for s in full_basis(p.n_atoms, p.n_max) {
        if s.p < p.n_max {
            let i = full_index(p.n_atoms, p.n_max, s);
            let j = full_index(p.n_atoms, p.n_max, BasisState { k: s.k, p: s.p + 1 });
            let amp = drive * ((s.p + 1) as f64).sqrt();
            h[(i, j)] = amp;
            h[(j, i)] = amp;
        }
    }
    h
}

/// Full-space Hamiltonian at `psi = 0` (no drive, no constant).
pub fn undriven_full_matrix(model: &Model) -> ComplexMatrix {
    let p = model.params();
    let basis = full_basis(p.n_atoms, p.n_max);
    let mut h = ComplexMatrix::zeros(basis.len());
    for (i, &s) in basis.iter().enumerate() {
        h[(i, i)] = diagonal(model, s);
        if s.k >= 1 && s.p < p.n_max {
            let j = full_index(p.n_atoms, p.n_max, BasisState { k: s.k - 1, p: s.p + 1 });
            let g = Complex64::new(coupling(model, s), 0.0);
            h[(i, j)] = g;
            h[(j, i)] = g;
        }
    }
    h
}

/// Photon annihilation operator on the truncated space.
pub fn annihilation(n_atoms: usize, n_max: usize) -> ComplexMatrix {
    let dim = (n_atoms + 1) * (n_max + 1);
    let mut a = ComplexMatrix::zeros(dim);
    for s in full_basis(n_atoms, n_max) {
        if s.p >= 1 {
            let i = full_index(n_atoms, n_max, BasisState { k: s.k, p: s.p - 1 });
            let j = full_index(n_atoms, n_max, s);
            a[(i, j)] = Complex64::new((s.p as f64).sqrt(), 0.0);
        }
    }
    a
}

/// Permutation that lists the full basis manifold by manifold
/// (`n` ascending, `k` descending within a manifold). Manifolds cut by the
/// photon cutoff appear with their surviving states only.
pub fn manifold_order(n_atoms: usize, n_max: usize) -> Vec<(usize, Vec<usize>)> {
    (0..=n_atoms + n_max)
        .map(|n| {
            let idx = Manifold::new(n_atoms, n)
                .states
                .into_iter()
                .filter(|s| s.p <= n_max)
                .map(|s| full_index(n_atoms, n_max, s))
                .collect();
            (n, idx)
        })
        .collect()
}
