use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes shared by every solver in the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter violates its bound.
    InvalidParameter { name: &'static str, reason: String },
    /// An integer index (excitation count, manifold number) is outside its range.
    OutOfRange {
        what: &'static str,
        value: i64,
        min: i64,
        max: i64,
    },
    /// The requested closed form does not apply to these inputs.
    Domain(String),
    /// The eigensolver ran out of iterations or produced an unacceptable residual.
    NoConvergence { iterations: usize, residual: f64 },
    EmptySpectrum,
    /// Perturbation theory breaks down: the energy denominators vanish.
    DegenerateDenominator { magnitude: f64 },
    /// The log argument of the critical-time formula is below one, so the
    /// system is already Mott-insulating at `t = 0`.
    NotSuperfluidAtStart { log_argument: f64 },
    /// Critical time requested without dissipation.
    ZeroDecay,
    /// A bracketing root search failed.
    RootFinding {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        iterations: usize,
    },
    /// The converged order parameter moved when the photon cutoff was raised.
    TruncationInadequate {
        n_max: usize,
        psi: f64,
        psi_check: f64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { name, reason } => {
                write!(f, "invalid parameter `{name}`: {reason}")
            }
            Error::OutOfRange {
                what,
                value,
                min,
                max,
            } => write!(f, "{what} = {value} outside [{min}, {max}]"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::NoConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "eigensolver did not converge within {iterations} iterations (worst residual {residual:e})"
            ),
            Error::EmptySpectrum => write!(f, "empty spectrum"),
            Error::DegenerateDenominator { magnitude } => write!(
                f,
                "perturbation denominator vanishes (eps^2 + gamma^2 = {magnitude:e})"
            ),
            Error::NotSuperfluidAtStart { log_argument } => write!(
                f,
                "system is not superfluid at t = 0 (log argument {log_argument} < 1)"
            ),
            Error::ZeroDecay => write!(f, "critical time is undefined without decay (gamma = 0)"),
            Error::RootFinding {
                lo,
                hi,
                f_lo,
                f_hi,
                iterations,
            } => write!(
                f,
                "root search failed after {iterations} iterations on [{lo:e}, {hi:e}] (f = {f_lo:e}, {f_hi:e})"
            ),
            Error::TruncationInadequate {
                n_max,
                psi,
                psi_check,
            } => write!(
                f,
                "photon cutoff n_max = {n_max} inadequate: psi* = {psi:e} moves to {psi_check:e} at n_max + 2"
            ),
        }
    }
}

impl std::error::Error for Error {}
