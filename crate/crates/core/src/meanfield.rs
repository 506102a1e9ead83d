//! Self-consistent single-site mean-field solution on the truncated basis.
//!
//! The mean-field Hamiltonian is `H(psi) = H0 - kappa psi X + kappa psi^2`
//! with `X = a + a^dag`, so the ground energy is
//! `E(psi) = kappa psi^2 + f(kappa psi)` where `f(g)` is the smallest real
//! part in the spectrum of `H0 - g X`. The order parameter minimises
//! `E` on `[0, psi_hi]`.
//!
//! A coarse scan samples `f` on a global geometric lattice in `g`, so every
//! hopping value in a row of fixed chemical potential shares the same
//! diagonalisations. The minimum is then refined by a root search on the
//! Hellmann-Feynman gradient `dE/dpsi = 2 kappa (psi - Re <a>)`, with the
//! ground state tracked by Rayleigh-quotient iteration.

use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{annihilation, build_full_matrix, undriven_full_matrix};
use crate::linalg::{bilinear_dot, hermitian_dot, norm_inf_vec, relative_residual, ComplexMatrix, Lu};
use crate::params::{Model, SystemParams};
use crate::spectrum::{ground_energy_of, ground_pair};

/// Order parameters at or below this value count as Mott-insulating.
pub const PSI_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSettings {
    /// Scan samples including `psi = 0`.
    pub scan_samples: usize,
    /// Decades below `psi_hi` covered by the scan.
    pub scan_decades: f64,
    /// Absolute tolerance on the refined order parameter.
    pub psi_tolerance: f64,
    /// Allowed shift of `psi*` when `n_max` grows by two.
    pub truncation_tolerance: f64,
    pub check_truncation: bool,
    /// Offset from zero at which the Mott stability test probes the gradient.
    pub mott_probe: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            scan_samples: 64,
            scan_decades: 3.0,
            psi_tolerance: 1e-10,
            truncation_tolerance: 1e-6,
            check_truncation: true,
            mott_probe: 1e-6,
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if self.scan_samples < 3 {
            return Err(Error::InvalidParameter {
                name: "scan_samples",
                reason: format!("must be >= 3, got {}", self.scan_samples),
            });
        }
        let positive = [
            ("scan_decades", self.scan_decades),
            ("psi_tolerance", self.psi_tolerance),
            ("truncation_tolerance", self.truncation_tolerance),
            ("mott_probe", self.mott_probe),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be finite and > 0, got {v}"),
                });
            }
        }
        Ok(())
    }

    fn lattice_ratio(&self) -> f64 {
        10f64.powf(self.scan_decades / (self.scan_samples - 2) as f64)
    }
}

/// Upper end of the search interval, `sqrt(n_max) / 2`.
pub fn psi_upper_bound(n_max: usize) -> f64 {
    (n_max as f64).sqrt() / 2.0
}

/// Smallest real part of the spectrum of the full mean-field matrix.
pub fn ground_energy(model: &Model, psi: f64) -> Result<f64> {
    if !(psi >= 0.0 && psi.is_finite()) {
        return Err(Error::Domain(format!("psi must be finite and >= 0, got {psi}")));
    }
    Ok(ground_energy_of(&build_full_matrix(model, Complex64::new(psi, 0.0)))?.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub psi: f64,
    pub energy: f64,
}

/// Order parameter and ground energy at the model's `kappa` and `mu`.
///
/// With `check_truncation` the solve is repeated at `n_max + 2` and a shift
/// above `truncation_tolerance` is an error.
pub fn solve_order_parameter(model: &Model, settings: &SolverSettings) -> Result<Minimum> {
    settings.validate()?;
    let kappa = model.params().kappa;
    let found = RowSolver::new(model, settings)?.solve(kappa)?;
    if settings.check_truncation {
        let wider = model.with(|p| p.n_max += 2)?;
        let check = RowSolver::new(&wider, settings)?.solve(kappa)?;
        truncation_verdict(model.params().n_max, found.psi, check.psi, settings)?;
    }
    Ok(found)
}

fn truncation_verdict(n_max: usize, psi: f64, psi_check: f64, settings: &SolverSettings) -> Result<()> {
    if (psi - psi_check).abs() > settings.truncation_tolerance {
        return Err(Error::TruncationInadequate {
            n_max,
            psi,
            psi_check,
        });
    }
    Ok(())
}

/// Ground eigenpair tracked along `psi` at fixed `kappa`.
#[derive(Clone)]
struct Tracked {
    value: Complex64,
    vector: Vec<Complex64>,
}

/// Solver for one chemical potential; caches `f(g)` on the scan lattice.
struct RowSolver<'a> {
    h0: ComplexMatrix,
    x: ComplexMatrix,
    a: ComplexMatrix,
    psi_hi: f64,
    settings: &'a SolverSettings,
    ratio: f64,
    cache: HashMap<i64, f64>,
    origin: Option<(f64, Tracked)>,
}

impl<'a> RowSolver<'a> {
    fn new(model: &Model, settings: &'a SolverSettings) -> Result<Self> {
        let p = model.params();
        let a = annihilation(p.n_atoms, p.n_max);
        let dim = a.dim();
        let x = ComplexMatrix::from_fn(dim, |i, j| a[(i, j)] + a[(j, i)]);
        Ok(RowSolver {
            h0: undriven_full_matrix(model),
            x,
            a,
            psi_hi: psi_upper_bound(p.n_max),
            settings,
            ratio: settings.lattice_ratio(),
            cache: HashMap::new(),
            origin: None,
        })
    }

    fn matrix(&self, kappa: f64, psi: f64) -> ComplexMatrix {
        let mut h = self.h0.scaled_add(Complex64::new(-kappa * psi, 0.0), &self.x);
        h.shift_diagonal(Complex64::new(kappa * psi * psi, 0.0));
        h
    }

    fn lattice_energy(&mut self, m: i64) -> Result<f64> {
        if let Some(&f) = self.cache.get(&m) {
            return Ok(f);
        }
        let g = self.ratio.powi(m as i32);
        let h = self.h0.scaled_add(Complex64::new(-g, 0.0), &self.x);
        let f = ground_energy_of(&h)?.re;
        self.cache.insert(m, f);
        Ok(f)
    }

    fn origin(&mut self) -> Result<(f64, Tracked)> {
        if let Some(o) = &self.origin {
            return Ok(o.clone());
        }
        let pair = ground_pair(&self.h0)?;
        let o = (
            pair.value.re,
            Tracked {
                value: pair.value,
                vector: pair.vector,
            },
        );
        self.origin = Some(o.clone());
        Ok(o)
    }

    fn solve(&mut self, kappa: f64) -> Result<Minimum> {
        let (e0, origin) = self.origin()?;
        if kappa == 0.0 {
            return Ok(Minimum { psi: 0.0, energy: e0 });
        }
        // scan: psi = 0 plus lattice points g_m / kappa below psi_hi
        let top = ((kappa * self.psi_hi).ln() / self.ratio.ln()).floor() as i64;
        let count = self.settings.scan_samples as i64 - 1;
        let mut samples = vec![(0.0, e0)];
        for m in top - count + 1..=top {
            let psi = self.ratio.powi(m as i32) / kappa;
            let e = kappa * psi * psi + self.lattice_energy(m)?;
            samples.push((psi, e));
        }
        let best = samples
            .iter()
            .enumerate()
            .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
            .map(|(i, _)| i)
            .unwrap_or(0);

        let mut refiner = Refiner {
            solver: self,
            kappa,
            state: None,
        };
        let psi = if best == 0 {
            let delta = self.settings.mott_probe.min(0.5 * samples[1].0);
            refiner.state = Some(origin);
            let h_delta = refiner.gradient(delta)?;
            if h_delta >= 0.0 {
                0.0
            } else {
                // the origin is a local maximum; the minimum sits below the first sample
                let mut hi = 1;
                while hi + 1 < samples.len() && refiner.gradient(samples[hi].0)? < 0.0 {
                    hi += 1;
                }
                refiner.root(delta, h_delta, samples[hi].0)?
            }
        } else {
            let lo = samples[best - 1].0.max(samples[best].0 / self.ratio);
            let hi = if best + 1 < samples.len() {
                samples[best + 1].0
            } else {
                self.psi_hi
            };
            let mid = samples[best].0;
            refiner.state = Some(self.seed(kappa, mid)?);
            let h_mid = refiner.gradient(mid)?;
            if h_mid < 0.0 {
                refiner.root(mid, h_mid, hi)?
            } else if h_mid == 0.0 {
                mid
            } else {
                let h_lo = refiner.gradient(lo)?;
                if h_lo < 0.0 {
                    brent(|x| refiner.gradient(x), lo, h_lo, mid, h_mid, self.settings.psi_tolerance)?
                } else {
                    mid
                }
            }
        };
        let energy = self.confirm(kappa, psi)?;
        Ok(Minimum { psi, energy })
    }

    fn seed(&self, kappa: f64, psi: f64) -> Result<Tracked> {
        let pair = ground_pair(&self.matrix(kappa, psi))?;
        Ok(Tracked {
            value: pair.value,
            vector: pair.vector,
        })
    }

    /// Ground energy at the refined point from a full eigenvalue solve.
    fn confirm(&self, kappa: f64, psi: f64) -> Result<f64> {
        Ok(ground_energy_of(&self.matrix(kappa, psi))?.re)
    }
}

struct Refiner<'s, 'a> {
    solver: &'s RowSolver<'a>,
    kappa: f64,
    state: Option<Tracked>,
}

impl Refiner<'_, '_> {
    /// `psi - Re <a>` in the ground state at `psi`, positive where `E` rises.
    fn gradient(&mut self, psi: f64) -> Result<f64> {
        let h = self.solver.matrix(self.kappa, psi);
        let tracked = match self.state.as_ref().and_then(|s| rayleigh_quotient_iteration(&h, s)) {
            Some(t) if self.is_ground(&h, &t)? => t,
            _ => {
                let pair = ground_pair(&h)?;
                Tracked {
                    value: pair.value,
                    vector: pair.vector,
                }
            }
        };
        let v = &tracked.vector;
        let expect = bilinear_dot(v, &self.solver.a.mul_vec(v)) / bilinear_dot(v, v);
        self.state = Some(tracked);
        Ok(psi - expect.re)
    }

    /// Tracked pairs can jump branches at level crossings, so the branch is
    /// compared with a full eigenvalue solve whenever it moved noticeably.
    fn is_ground(&self, h: &ComplexMatrix, t: &Tracked) -> Result<bool> {
        let prev = self.state.as_ref().map(|s| s.value);
        let moved = prev.is_none_or(|p| (p - t.value).norm() > 0.05);
        if !moved {
            return Ok(true);
        }
        let g = ground_energy_of(h)?;
        Ok((g - t.value).norm() <= 1e-9 * (1.0 + g.norm()))
    }

    /// Brent root of the gradient on `[lo, hi]` given its value at `lo`.
    fn root(&mut self, lo: f64, h_lo: f64, hi: f64) -> Result<f64> {
        let h_hi = self.gradient(hi)?;
        if h_hi <= 0.0 {
            // the energy still falls at the upper end of the bracket
            return Ok(hi);
        }
        let tol = self.solver.settings.psi_tolerance;
        brent(|x| self.gradient(x), lo, h_lo, hi, h_hi, tol)
    }
}

fn rayleigh_quotient(h: &ComplexMatrix, v: &[Complex64]) -> Complex64 {
    let hv = h.mul_vec(v);
    let bil = bilinear_dot(v, v);
    let herm = hermitian_dot(v, v);
    if bil.norm() > 1e-8 * herm.re {
        bilinear_dot(v, &hv) / bil
    } else {
        hermitian_dot(v, &hv) / herm
    }
}

fn rayleigh_quotient_iteration(h: &ComplexMatrix, start: &Tracked) -> Option<Tracked> {
    let norm = h.norm_inf();
    let mut v = start.vector.clone();
    let mut value = rayleigh_quotient(h, &v);
    for _ in 0..8 {
        if relative_residual(h, value, &v) < 1e-13 {
            return Some(Tracked { value, vector: v });
        }
        let mut shifted = h.clone();
        shifted.shift_diagonal(-value);
        let w = Lu::new(&shifted, f64::EPSILON * norm).solve(&v);
        let s = norm_inf_vec(&w);
        if !(s.is_finite() && s > 0.0) {
            return None;
        }
        v = w.into_iter().map(|z| z / s).collect();
        value = rayleigh_quotient(h, &v);
    }
    (relative_residual(h, value, &v) < 1e-11).then_some(Tracked { value, vector: v })
}

/// Brent's method for a sign change on `[a, b]`.
fn brent(
    mut f: impl FnMut(f64) -> Result<f64>,
    mut a: f64,
    mut fa: f64,
    mut b: f64,
    mut fb: f64,
    tol: f64,
) -> Result<f64> {
    const MAX_ITER: usize = 100;
    if fa * fb > 0.0 {
        return Err(Error::RootFinding {
            lo: a,
            hi: b,
            f_lo: fa,
            f_hi: fb,
            iterations: 0,
        });
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..MAX_ITER {
        if fb * fc > 0.0 {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol;
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b)?;
    }
    Err(Error::RootFinding {
        lo: b.min(c),
        hi: b.max(c),
        f_lo: fb,
        f_hi: fc,
        iterations: MAX_ITER,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseLabel {
    Mott,
    Superfluid,
    /// The point failed to solve; see [`PhasePoint::error`].
    Undetermined,
}

impl PhaseLabel {
    pub fn classify(psi: f64) -> PhaseLabel {
        if psi.is_nan() {
            PhaseLabel::Undetermined
        } else if psi > PSI_THRESHOLD {
            PhaseLabel::Superfluid
        } else {
            PhaseLabel::Mott
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            PhaseLabel::Mott => "mott",
            PhaseLabel::Superfluid => "superfluid",
            PhaseLabel::Undetermined => "undetermined",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// `(mu - omega) / beta`.
    pub mu_rel: f64,
    /// `kappa / beta`.
    pub kappa: f64,
    pub psi_star: f64,
    pub energy: f64,
    pub phase: PhaseLabel,
    /// `psi*` recomputed at `n_max + 2`, when checked.
    pub psi_check: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagram {
    pub mu_rel: Vec<f64>,
    pub kappa: Vec<f64>,
    /// Row-major: `mu_rel` slowest.
    pub points: Vec<PhasePoint>,
    pub params: SystemParams,
    pub settings: SolverSettings,
}

impl PhaseDiagram {
    pub fn point(&self, i_mu: usize, i_kappa: usize) -> &PhasePoint {
        &self.points[i_mu * self.kappa.len() + i_kappa]
    }

    pub fn errors(&self) -> impl Iterator<Item = &PhasePoint> {
        self.points.iter().filter(|p| p.error.is_some())
    }
}

/// Solves every grid point. `mu_rel` and `kappa` are in units of `beta`;
/// `mu = omega_c + beta mu_rel`. Rows run in parallel on the current rayon
/// pool and the output does not depend on the number of threads.
pub fn compute_phase_diagram(
    params: &SystemParams,
    mu_rel: &[f64],
    kappa: &[f64],
    settings: &SolverSettings,
) -> Result<PhaseDiagram> {
    settings.validate()?;
    Model::new(*params)?;
    if mu_rel.is_empty() || kappa.is_empty() {
        return Err(Error::Domain("phase diagram needs nonempty axes".into()));
    }
    for &k in kappa {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "kappa",
                reason: format!("grid values must be finite and >= 0, got {k}"),
            });
        }
    }
    let rows: Vec<Vec<PhasePoint>> = mu_rel
        .par_iter()
        .map(|&m| solve_row(params, m, kappa, settings))
        .collect();
    Ok(PhaseDiagram {
        mu_rel: mu_rel.to_vec(),
        kappa: kappa.to_vec(),
        points: rows.into_iter().flatten().collect(),
        params: *params,
        settings: *settings,
    })
}

fn solve_row(params: &SystemParams, mu_rel: f64, kappa: &[f64], settings: &SolverSettings) -> Vec<PhasePoint> {
    let failed = |k: f64, e: &Error| PhasePoint {
        mu_rel,
        kappa: k,
        psi_star: f64::NAN,
        energy: f64::NAN,
        phase: PhaseLabel::Undetermined,
        psi_check: None,
        error: Some(e.to_string()),
    };
    let row_params = SystemParams {
        mu: params.omega_c + params.beta * mu_rel,
        ..*params
    };
    let model = match Model::new(row_params) {
        Ok(m) => m,
        Err(e) => return kappa.iter().map(|&k| failed(k, &e)).collect(),
    };
    let mut main = match RowSolver::new(&model, settings) {
        Ok(s) => s,
        Err(e) => return kappa.iter().map(|&k| failed(k, &e)).collect(),
    };
    let wider = model.with(|p| p.n_max += 2).ok();
    let mut check = match (&wider, settings.check_truncation) {
        (Some(w), true) => RowSolver::new(w, settings).ok(),
        _ => None,
    };
    kappa
        .iter()
        .map(|&k_rel| {
            let k = k_rel * params.beta;
            let found = match main.solve(k) {
                Ok(f) => f,
                Err(e) => return failed(k_rel, &e),
            };
            let mut point = PhasePoint {
                mu_rel,
                kappa: k_rel,
                psi_star: found.psi,
                energy: found.energy,
                phase: PhaseLabel::classify(found.psi),
                psi_check: None,
                error: None,
            };
            if let Some(c) = check.as_mut() {
                match c.solve(k) {
                    Ok(w) => {
                        point.psi_check = Some(w.psi);
                        if let Err(e) = truncation_verdict(params.n_max, found.psi, w.psi, settings) {
                            point.error = Some(e.to_string());
                        }
                    }
                    Err(e) => point.error = Some(e.to_string()),
                }
            }
            point
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lobe {
    /// Number of Mott cells in this connected region.
    pub cells: usize,
    /// Largest `kappa` reached by the region.
    pub tip_kappa: f64,
    pub mu_rel_min: f64,
    pub mu_rel_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LobeMetrics {
    /// Mott cell count times the cell measure.
    pub area: f64,
    pub cell_measure: f64,
    pub lobes: Vec<Lobe>,
}

fn axis_step(values: &[f64]) -> f64 {
    match values {
        [first, .., last] => (last - first).abs() / (values.len() - 1) as f64,
        _ => 1.0,
    }
}

/// Area and tips of the Mott regions. Cells are measured in
/// `mu_rel x log10(kappa)` when every hopping value is positive, otherwise
/// in `mu_rel x kappa`. Regions are 4-connected on the grid.
pub fn mott_lobe_metrics(d: &PhaseDiagram) -> LobeMetrics {
    let (nm, nk) = (d.mu_rel.len(), d.kappa.len());
    let kappa_axis: Vec<f64> = if d.kappa.iter().all(|&k| k > 0.0) {
        d.kappa.iter().map(|k| k.log10()).collect()
    } else {
        d.kappa.clone()
    };
    let cell_measure = axis_step(&d.mu_rel) * axis_step(&kappa_axis);
    let mott = |i: usize, j: usize| d.points[i * nk + j].phase == PhaseLabel::Mott;
    let mut seen = vec![false; nm * nk];
    let mut lobes = Vec::new();
    for i0 in 0..nm {
        for j0 in 0..nk {
            if seen[i0 * nk + j0] || !mott(i0, j0) {
                continue;
            }
            let mut lobe = Lobe {
                cells: 0,
                tip_kappa: f64::NEG_INFINITY,
                mu_rel_min: f64::INFINITY,
                mu_rel_max: f64::NEG_INFINITY,
            };
            let mut stack = vec![(i0, j0)];
            seen[i0 * nk + j0] = true;
            while let Some((i, j)) = stack.pop() {
                lobe.cells += 1;
                lobe.tip_kappa = lobe.tip_kappa.max(d.kappa[j]);
                lobe.mu_rel_min = lobe.mu_rel_min.min(d.mu_rel[i]);
                lobe.mu_rel_max = lobe.mu_rel_max.max(d.mu_rel[i]);
                let neighbours = [
                    (i.wrapping_sub(1), j),
                    (i + 1, j),
                    (i, j.wrapping_sub(1)),
                    (i, j + 1),
                ];
                for (a, b) in neighbours {
                    if a < nm && b < nk && !seen[a * nk + b] && mott(a, b) {
                        seen[a * nk + b] = true;
                        stack.push((a, b));
                    }
                }
            }
            lobes.push(lobe);
        }
    }
    let cells: usize = lobes.iter().map(|l| l.cells).sum();
    LobeMetrics {
        area: cells as f64 * cell_measure,
        cell_measure,
        lobes,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint {
    /// Complex order parameter; the imaginary part is the decay component.
    pub psi: Complex64,
    pub energy: Complex64,
    pub iterations: usize,
}

/// Iterates `psi <- <v|a|v> / <v|v>` in the ground state of `H(psi)` with
/// complex `psi`, accelerated by Aitken extrapolation every third step.
pub fn fixed_point_order_parameter(
    model: &Model,
    start: Complex64,
    tolerance: f64,
    max_iterations: usize,
) -> Result<FixedPoint> {
    let p = model.params();
    let a = annihilation(p.n_atoms, p.n_max);
    let step = |psi: Complex64| -> Result<(Complex64, Complex64)> {
        let pair = ground_pair(&build_full_matrix(model, psi))?;
        let v = &pair.vector;
        Ok((hermitian_dot(v, &a.mul_vec(v)) / hermitian_dot(v, v), pair.value))
    };
    let mut psi = start;
    let mut history: Vec<Complex64> = Vec::with_capacity(3);
    for it in 1..=max_iterations {
        let (next, energy) = step(psi)?;
        if (next - psi).norm() < tolerance {
            return Ok(FixedPoint {
                psi: next,
                energy,
                iterations: it,
            });
        }
        history.push(next);
        psi = next;
        if history.len() == 3 {
            let (x0, x1, x2) = (history[0], history[1], history[2]);
            let den = x2 - 2.0 * x1 + x0;
            if den.norm() > 1e-300 {
                let accel = x2 - (x2 - x1) * (x2 - x1) / den;
                if accel.is_finite() {
                    psi = accel;
                }
            }
            history.clear();
        }
    }
    let (next, _) = step(psi)?;
    Err(Error::NoConvergence {
        iterations: max_iterations,
        residual: (next - psi).norm(),
    })
}
