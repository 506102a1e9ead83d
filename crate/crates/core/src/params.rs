//! Physical inputs and the complex frequencies derived from them.
//!
//! Frequencies are in units of the atom-cavity coupling by convention
//! (`beta = 1` unless overridden) and `hbar = 1`. Dissipation enters only
//! through the complex frequencies `omega - i gamma`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw physical parameters of one cavity site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub omega_a: f64,
    pub omega_c: f64,
    pub gamma_a: f64,
    pub gamma_c: f64,
    pub beta: f64,
    pub kappa: f64,
    pub mu: f64,
    pub n_atoms: usize,
    pub n_max: usize,
}

impl SystemParams {
    /// Resonant, lossless system with `omega_a = omega_c = omega`.
    pub fn resonant(omega: f64, beta: f64, n_atoms: usize) -> Self {
        SystemParams {
            omega_a: omega,
            omega_c: omega,
            gamma_a: 0.0,
            gamma_c: 0.0,
            beta,
            kappa: 0.0,
            mu: 0.0,
            n_atoms,
            n_max: 8,
        }
    }

    /// Splits a total decay rate evenly between atoms and cavity.
    pub fn with_total_gamma(mut self, gamma: f64) -> Self {
        self.gamma_a = 0.5 * gamma;
        self.gamma_c = 0.5 * gamma;
        self
    }

    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa = kappa;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    /// Sets `mu = omega_c - epsilon`.
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.mu = self.omega_c - epsilon;
        self
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let reals = [
            ("omega_a", self.omega_a),
            ("omega_c", self.omega_c),
            ("gamma_a", self.gamma_a),
            ("gamma_c", self.gamma_c),
            ("beta", self.beta),
            ("kappa", self.kappa),
            ("mu", self.mu),
        ];
        for (name, value) in reals {
            if !value.is_finite() {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite, got {value}"),
                });
            }
        }
        if self.beta <= 0.0 {
            return Err(invalid("beta", "must be > 0", self.beta));
        }
        if self.gamma_a < 0.0 {
            return Err(invalid("gamma_a", "must be >= 0", self.gamma_a));
        }
        if self.gamma_c < 0.0 {
            return Err(invalid("gamma_c", "must be >= 0", self.gamma_c));
        }
        if self.kappa < 0.0 {
            return Err(invalid("kappa", "must be >= 0", self.kappa));
        }
        if self.n_atoms < 1 {
            return Err(invalid("n_atoms", "must be >= 1", self.n_atoms as f64));
        }
        if self.n_max < 1 {
            return Err(invalid("n_max", "must be >= 1", self.n_max as f64));
        }
        Ok(())
    }

    pub fn is_resonant(&self) -> bool {
        self.omega_a == self.omega_c
    }
}

fn invalid(name: &'static str, bound: &str, value: f64) -> Error {
    Error::InvalidParameter {
        name,
        reason: format!("{bound}, got {value}"),
    }
}

/// Quantities derived from [`SystemParams`].
///
/// `omega_tilde` is the cavity frequency carrying the total decay,
/// `omega_c - i (gamma_a + gamma_c)`; on resonance this is the common
/// complex frequency of atoms and cavity. Atoms and cavity both carry the
/// total decay rate, so only `gamma_a + gamma_c` is observable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedParams {
    pub omega_tilde: Complex64,
    pub gamma: f64,
    pub epsilon: f64,
    omega_a_tilde: Complex64,
    omega_c_tilde: Complex64,
}

impl DerivedParams {
    pub fn omega_a_tilde(&self) -> Complex64 {
        self.omega_a_tilde
    }

    pub fn omega_c_tilde(&self) -> Complex64 {
        self.omega_c_tilde
    }
}

/// Validates `params` and computes the complex frequencies.
pub fn derive(params: &SystemParams) -> Result<DerivedParams> {
    params.validate()?;
    let gamma = params.gamma_a + params.gamma_c;
    Ok(DerivedParams {
        omega_tilde: Complex64::new(params.omega_c, -gamma),
        gamma,
        epsilon: params.omega_c - params.mu,
        omega_a_tilde: Complex64::new(params.omega_a, -gamma),
        omega_c_tilde: Complex64::new(params.omega_c, -gamma),
    })
}

/// A validated parameter set together with its derived frequencies.
///
/// Every solver takes a `Model`, so validation happens once, here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Model {
    params: SystemParams,
    derived: DerivedParams,
}

impl Model {
    pub fn new(params: SystemParams) -> Result<Self> {
        let derived = derive(&params)?;
        Ok(Model { params, derived })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn derived(&self) -> &DerivedParams {
        &self.derived
    }

    /// Rebuilds the model with modified parameters.
    pub fn with(&self, f: impl FnOnce(&mut SystemParams)) -> Result<Self> {
        let mut params = self.params;
        f(&mut params);
        Model::new(params)
    }

    pub(crate) fn require_resonance(&self) -> Result<()> {
        if self.params.is_resonant() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "closed forms require omega_a == omega_c (got {} and {})",
                self.params.omega_a, self.params.omega_c
            )))
        }
    }
}
