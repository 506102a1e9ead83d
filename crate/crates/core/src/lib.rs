//! Mean-field model of a lattice of coupled cavities, each holding `N`
//! two-level atoms, with dissipation entering through complex frequencies.
//!
//! * [`params`]: physical inputs and derived complex frequencies
//! * [`hamiltonian`]: Dicke-state basis and single-site mean-field matrices
//! * [`spectrum`]: closed-form two-atom dressed states and a dense eigensolver
//! * [`perturbation`]: second-order energies and closed-form order parameters
//! * [`meanfield`]: self-consistent order parameter and phase diagrams

pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod meanfield;
pub mod params;
pub mod perturbation;
pub mod spectrum;

pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use num_complex::Complex64;
pub use params::{derive, DerivedParams, Model, SystemParams};
pub use spectrum::{EigenPair, Spectrum};
