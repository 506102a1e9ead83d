//! Second-order perturbation theory in the mean-field drive for two atoms
//! on resonance, and the closed-form order parameters built on it.
//!
//! The drive `-kappa psi (a + a^dag)` couples the dressed center level
//! `|0,n>` to `|0,n-1>` and `|0,n+1>`. Energies carry the complex detuning
//! `epsilon - i gamma`, so a state with `n` excitations decays as
//! `exp(-n gamma t)`.
//!
//! Center-chain couplings follow the printed closed forms,
//! `c_m^2 = 4 m^3 / ((2m - 1)(2m + 1))`, which give the polynomial
//! coefficients `P`, `Q`, `R` below.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::Model;
use crate::spectrum::rabi_frequency;

/// Smallest accepted `epsilon^2 + gamma^2`.
pub const DENOMINATOR_FLOOR: f64 = 1e-14;

/// `8n^3 - 12n^2 - 4n + 4`.
pub fn coefficient_p(n: usize) -> f64 {
    let n = n as f64;
    8.0 * n.powi(3) - 12.0 * n * n - 4.0 * n + 4.0
}

/// `16n^4 - 32n^3 + 12n^2 + 4n - 4`.
pub fn coefficient_q(n: usize) -> f64 {
    let n = n as f64;
    16.0 * n.powi(4) - 32.0 * n.powi(3) + 12.0 * n * n + 4.0 * n - 4.0
}

/// `(2n - 1)(2n + 1)(2n - 3) = 8n^3 - 12n^2 - 2n + 3`.
pub fn coefficient_r(n: usize) -> f64 {
    let n = n as f64;
    (2.0 * n - 1.0) * (2.0 * n + 1.0) * (2.0 * n - 3.0)
}

/// Squared center-chain coupling between manifolds `m` and `m + 1`.
fn chain_coupling_sq(m: usize) -> f64 {
    let m = m as f64;
    4.0 * m.powi(3) / ((2.0 * m - 1.0) * (2.0 * m + 1.0))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CenterBranchResult {
    /// Real part of the corrected energy.
    pub e_s: f64,
    /// Decay part, `-Im E`; equals `n gamma` at `psi = 0`.
    pub e_gamma: f64,
    pub psi: f64,
    /// Amplitudes on `|0,n-1>`, `|0,n>`, `|0,n+1>`.
    pub state_amplitudes: [Complex64; 3],
    pub norm_constant: f64,
}

impl CenterBranchResult {
    pub fn energy(&self) -> Complex64 {
        Complex64::new(self.e_s, -self.e_gamma)
    }
}

fn require_two_atoms(model: &Model, n: usize, n_min: usize) -> Result<()> {
    if model.params().n_atoms != 2 {
        return Err(Error::Domain(format!(
            "perturbative closed forms need two atoms, got {}",
            model.params().n_atoms
        )));
    }
    model.require_resonance()?;
    if n < n_min {
        return Err(Error::OutOfRange {
            what: "n",
            value: n as i64,
            min: n_min as i64,
            max: i64::MAX,
        });
    }
    Ok(())
}

/// `epsilon - i gamma`, rejecting the degenerate point.
fn detuning(model: &Model) -> Result<Complex64> {
    let d = model.derived();
    let magnitude = d.epsilon * d.epsilon + d.gamma * d.gamma;
    if magnitude < DENOMINATOR_FLOOR {
        return Err(Error::DegenerateDenominator { magnitude });
    }
    Ok(Complex64::new(d.epsilon, -d.gamma))
}

/// Second-order energy of the center level `|0,n>` under the drive,
/// `E = n (eps - i gamma) + kappa psi^2 - (P / R) kappa^2 psi^2 / (eps - i gamma)`,
/// together with the first-order state.
pub fn second_order_energy_center(model: &Model, n: usize, psi: f64) -> Result<CenterBranchResult> {
    require_two_atoms(model, n, 2)?;
    let z = detuning(model)?;
    let kappa = model.params().kappa;
    let g2 = kappa * kappa * psi * psi;
    let e2 = -coefficient_p(n) / coefficient_r(n) * g2 / z;
    let energy = z * n as f64 + kappa * psi * psi + e2;
    let (state_amplitudes, norm_constant) = state_center(model, n, psi, z);
    Ok(CenterBranchResult {
        e_s: energy.re,
        e_gamma: -energy.im,
        psi,
        state_amplitudes,
        norm_constant,
    })
}

fn state_center(model: &Model, n: usize, psi: f64, z: Complex64) -> ([Complex64; 3], f64) {
    let kappa = model.params().kappa;
    let (c_lo, c_hi) = (chain_coupling_sq(n - 1).sqrt(), chain_coupling_sq(n).sqrt());
    let lower = -kappa * psi * c_lo / z;
    let upper = kappa * psi * c_hi / z;
    let s = coefficient_q(n) / coefficient_r(n);
    let norm = 1.0 + kappa * kappa * psi * psi * s / z.norm_sqr();
    ([lower, Complex64::new(1.0, 0.0), upper], norm)
}

/// First-order dressed state of `|0,n>` and its normalisation constant
/// `N~ = 1 + kappa^2 psi^2 (Q / R) / (eps^2 + gamma^2)`.
pub fn perturbed_state_center(model: &Model, n: usize, psi: f64) -> Result<([Complex64; 3], f64)> {
    require_two_atoms(model, n, 2)?;
    let z = detuning(model)?;
    Ok(state_center(model, n, psi, z))
}

/// Unnormalised `<a>` in the perturbed center state.
pub fn center_annihilation_expectation(model: &Model, n: usize, psi: f64) -> Result<Complex64> {
    let (amp, _) = perturbed_state_center(model, n, psi)?;
    let (c_lo, c_hi) = (chain_coupling_sq(n - 1).sqrt(), chain_coupling_sq(n).sqrt());
    Ok(amp[0].conj() * c_lo + amp[2] * c_hi)
}

/// Closed-form order parameter of the center branch at time `t`,
/// `psi_1 = exp(-n gamma t) sqrt(P eps / (Q kappa) - R (eps^2 + gamma^2) / (Q kappa^2 exp(-2 n gamma t)))`,
/// clamped to zero when the radicand is negative.
pub fn psi1(model: &Model, n: usize, t: f64) -> Result<f64> {
    require_two_atoms(model, n, 2)?;
    let kappa = positive_kappa(model)?;
    let d = model.derived();
    let decay = (-2.0 * n as f64 * d.gamma * t).exp();
    let (p, q, r) = (coefficient_p(n), coefficient_q(n), coefficient_r(n));
    let gain = p * d.epsilon / (q * kappa);
    let loss = r * (d.epsilon * d.epsilon + d.gamma * d.gamma) / (q * kappa * kappa * decay);
    let radicand = gain - loss;
    // below the rounding floor of the two terms the sign is undetermined
    let floor = ROUNDING_ULPS * f64::EPSILON * (gain.abs() + loss.abs());
    if radicand > floor && radicand.is_finite() {
        Ok(decay.sqrt() * radicand.sqrt())
    } else {
        Ok(0.0)
    }
}

fn positive_kappa(model: &Model) -> Result<f64> {
    let kappa = model.params().kappa;
    if kappa > 0.0 {
        Ok(kappa)
    } else {
        Err(Error::InvalidParameter {
            name: "kappa",
            reason: format!("must be > 0 here, got {kappa}"),
        })
    }
}

fn positive_epsilon(model: &Model) -> Result<f64> {
    let eps = model.derived().epsilon;
    if eps > 0.0 {
        Ok(eps)
    } else {
        Err(Error::Domain(format!("epsilon must be > 0, got {eps}")))
    }
}

/// Relative rounding allowance for cancelling closed-form terms.
const ROUNDING_ULPS: f64 = 8.0;

fn time_from_log_argument(n: usize, gamma: f64, arg: f64) -> Result<f64> {
    if arg < 1.0 - ROUNDING_ULPS * f64::EPSILON || arg.is_nan() {
        return Err(Error::NotSuperfluidAtStart { log_argument: arg });
    }
    Ok(arg.max(1.0).ln() / (2.0 * n as f64 * gamma))
}

fn critical_time_checks(model: &Model, n: usize) -> Result<(f64, f64, f64)> {
    require_two_atoms(model, n, 2)?;
    let kappa = positive_kappa(model)?;
    let eps = positive_epsilon(model)?;
    let gamma = model.derived().gamma;
    if gamma == 0.0 {
        return Err(Error::ZeroDecay);
    }
    Ok((kappa, eps, gamma))
}

/// Time at which `psi_1` vanishes:
/// `t_c = ln[(4n^2 - 4n - 4) kappa eps / ((4n^2 - 4n - 3)(eps^2 + gamma^2))] / (2 n gamma)`.
pub fn critical_time(model: &Model, n: usize) -> Result<f64> {
    let (kappa, eps, gamma) = critical_time_checks(model, n)?;
    let nf = n as f64;
    let arg = (4.0 * nf * nf - 4.0 * nf - 4.0) * kappa * eps
        / ((4.0 * nf * nf - 4.0 * nf - 3.0) * (eps * eps + gamma * gamma));
    time_from_log_argument(n, gamma, arg)
}

/// Critical time with `gamma^2` dropped against `eps^2`:
/// `t_c = ln[(4n^2 - 4n - 4) kappa / ((2n + 1)(2n - 3) eps)] / (2 n gamma)`.
pub fn critical_time_printed(model: &Model, n: usize) -> Result<f64> {
    let (kappa, eps, gamma) = critical_time_checks(model, n)?;
    let nf = n as f64;
    let arg = (4.0 * nf * nf - 4.0 * nf - 4.0) * kappa / ((2.0 * nf + 1.0) * (2.0 * nf - 3.0) * eps);
    time_from_log_argument(n, gamma, arg)
}

fn critical_hopping_checks(model: &Model, n: usize, t: f64) -> Result<f64> {
    require_two_atoms(model, n, 2)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    positive_epsilon(model)
}

/// Hopping at which `psi_1(t)` vanishes,
/// `kappa_c = R (eps^2 + gamma^2) exp(2 n gamma t) / (P eps)`.
pub fn critical_hopping(model: &Model, n: usize, t: f64) -> Result<f64> {
    let eps = critical_hopping_checks(model, n, t)?;
    let gamma = model.derived().gamma;
    let growth = (2.0 * n as f64 * gamma * t).exp();
    Ok(coefficient_r(n) * (eps * eps + gamma * gamma) * growth / (coefficient_p(n) * eps))
}

/// `kappa_c = R eps exp(2 n gamma t) / P`, the `gamma^2`-dropped form.
pub fn critical_hopping_printed(model: &Model, n: usize, t: f64) -> Result<f64> {
    let eps = critical_hopping_checks(model, n, t)?;
    let growth = (2.0 * n as f64 * model.derived().gamma * t).exp();
    Ok(coefficient_r(n) * eps * growth / coefficient_p(n))
}

/// Intermediate quantities of the lower-branch order parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativeBranchContext {
    /// `R_{n-1}`, `R_n`, `R_{n+1}` at `(omega - i gamma) / beta`.
    pub r_values: [Complex64; 3],
    /// Complex conjugates of `r_values`.
    pub r_conj: [Complex64; 3],
    pub a: Complex64,
    pub b: Complex64,
    /// Linear coefficient of the self-consistency condition, including the
    /// decay factor `exp(-2 n gamma t)`.
    pub linear_coefficient: f64,
}

impl NegativeBranchContext {
    /// `N' = 1 + 4 kappa^2 psi^2 (|A|^2 + |B|^2)`.
    pub fn norm_constant(&self, kappa: f64, psi: f64) -> f64 {
        1.0 + 4.0 * kappa * kappa * psi * psi * (self.a.norm_sqr() + self.b.norm_sqr())
    }
}

pub fn negative_branch_context(model: &Model, n: usize, t: f64) -> Result<NegativeBranchContext> {
    require_two_atoms(model, n, 3)?;
    let kappa = positive_kappa(model)?;
    let p = model.params();
    let d = model.derived();
    let beta = p.beta;
    let eps = d.epsilon;
    let g = d.gamma;
    let wp = Complex64::new(p.omega_c, g) / beta;
    let wm = Complex64::new(p.omega_c, -g) / beta;
    let r_values = [rabi_frequency(n - 1, wm), rabi_frequency(n, wm), rabi_frequency(n + 1, wm)];
    let r_conj = r_values.map(|r| r.conj());
    let [r_lo, r_n, r_hi] = r_values;
    let [rd_lo, rd_n, _] = r_conj;
    let nf = n as f64;
    let i = Complex64::i();
    let lo_core = 2.0 * (nf * (nf - 1.0) * (nf - 2.0)).sqrt();
    let hi_core = 2.0 * (nf * (nf - 1.0) * (nf + 1.0)).sqrt();

    let t1_num = lo_core + (nf - 1.0).sqrt() / 8.0 * (wp - rd_lo) * (wm - r_n);
    let t1_den = (2.0 * eps + 2.0 * i * g - beta * (rd_n - rd_lo))
        * (2.0 * nf - 1.0 + (wm - r_lo).powu(2) / 8.0)
        * (2.0 * nf - 3.0 + (wp - rd_lo).powu(2) / 8.0);
    let t2_num = hi_core + nf.sqrt() / 8.0 * (wp - rd_n) * (wm - r_hi);
    let t2_den = (-2.0 * eps + 2.0 * i * g - beta * (r_n - r_hi))
        * (2.0 * nf - 1.0 + (wp - rd_n).powu(2) / 8.0)
        * (2.0 * nf + 1.0 + (wm - r_hi).powu(2) / 8.0);
    let t_sum = 2.0 * t1_num * t1_num / t1_den + 2.0 * t2_num * t2_num / t2_den;
    let decay = (-2.0 * nf * g * t).exp();
    let linear_coefficient = -kappa * decay * t_sum.re;

    let side_n = 2.0 * nf - 1.0 + (wp - rd_n).powu(2) / 8.0;
    let a = (lo_core + (nf - 1.0).sqrt() / 8.0 * (wp - rd_n) * (wm - r_lo))
        / ((2.0 * eps - 2.0 * i * g - beta * (r_n - r_lo))
            * (side_n * (2.0 * nf - 3.0 + (wm - r_lo).powu(2) / 8.0)).sqrt());
    let b = (hi_core + nf.sqrt() / 8.0 * (wp - rd_n) * (wm - r_hi))
        / ((-2.0 * eps + 2.0 * i * g - beta * (r_n - r_hi))
            * (side_n * (2.0 * nf + 1.0 + (wm - r_hi).powu(2) / 8.0)).sqrt());
    Ok(NegativeBranchContext {
        r_values,
        r_conj,
        a,
        b,
        linear_coefficient,
    })
}

/// Order parameter of the lower branch `|-,n>` at time `t`.
///
/// The self-consistency reads `psi N'(psi) = K psi` with `K` the linear
/// coefficient, so a nontrivial root exists iff `K > 1`. The root is taken
/// in closed form, with bisection as a fallback if that is not finite.
pub fn psi2(model: &Model, n: usize, t: f64) -> Result<f64> {
    let ctx = negative_branch_context(model, n, t)?;
    let kappa = model.params().kappa;
    let k = ctx.linear_coefficient;
    if !(k > 1.0) {
        return Ok(0.0);
    }
    let weight = 4.0 * kappa * kappa * (ctx.a.norm_sqr() + ctx.b.norm_sqr());
    let closed = ((k - 1.0) / weight).sqrt();
    if closed.is_finite() {
        return Ok(closed);
    }
    // residual K / N'(psi) - 1 decreases in psi
    let f = |psi: f64| k / ctx.norm_constant(kappa, psi) - 1.0;
    bisect(f, 0.0, 1e6, 1e-10, 1e-12)
}

/// Bisection for a sign change of `f` on `[lo, hi]`.
pub(crate) fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, x_tol: f64, width_tol: f64) -> Result<f64> {
    let (mut f_lo, f_hi) = (f(lo), f(hi));
    if !(f_lo * f_hi <= 0.0) {
        return Err(Error::RootFinding {
            lo,
            hi,
            f_lo,
            f_hi,
            iterations: 0,
        });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
        if hi - lo < width_tol.max(x_tol * 1e-2) {
            return Ok(0.5 * (lo + hi));
        }
    }
    Err(Error::RootFinding {
        lo,
        hi,
        f_lo,
        f_hi: f(hi),
        iterations: 200,
    })
}
