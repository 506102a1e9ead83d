//! Acceptance checks, one line per criterion.
//!
//! Exits 0 after printing every line so that the remaining test targets of
//! a workspace run still execute; set `DHL_ACCEPTANCE_STRICT=1` to exit 1
//! when any criterion fails.

use std::panic::{self, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use dhl_core::hamiltonian::{build_full_matrix, build_manifold_matrix};
use dhl_core::linalg::eigenvalues;
use dhl_core::meanfield::{compute_phase_diagram, mott_lobe_metrics, PhaseDiagram, SolverSettings};
use dhl_core::perturbation::{
    critical_hopping, critical_hopping_printed, critical_time, critical_time_printed, psi1,
    second_order_energy_center,
};
use dhl_core::spectrum::{general_eigensystem, two_tla_eigensystem};
use dhl_core::{Complex64, Model, SystemParams};

const EPS: f64 = 0.7836;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn two_atoms(gamma: f64, kappa: f64) -> Model {
    Model::new(
        SystemParams::resonant(10.0, 1.0, 2)
            .with_total_gamma(gamma)
            .with_kappa(kappa)
            .with_epsilon(EPS),
    )
    .unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for gamma in [0.0, 0.02, 0.05, 0.2] {
        let m = Model::new(SystemParams::resonant(10.0, 1.0, 2).with_total_gamma(gamma).with_mu(0.0)).unwrap();
        for n in 2..=12 {
            let closed = two_tla_eigensystem(&m, n).unwrap().values();
            let numeric = general_eigensystem(&build_manifold_matrix(&m, n, 0.0)).unwrap().values();
            for (a, b) in closed.iter().zip(&numeric) {
                worst = worst.max((a - b).norm() / a.norm());
            }
        }
    }
    let dt = start.elapsed();
    outcome(
        worst <= 1e-10 && dt < Duration::from_secs(1),
        format!("max relative eigenvalue error {worst:.2e} over n 2..12 x 4 gammas ({dt:.2?})"),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut worst_t: f64 = 0.0;
    let mut worst_k: f64 = 0.0;
    let ns: Vec<usize> = (2..12).collect();
    let times = linspace(0.0, 2.0, 10);
    let kappas = linspace(1.0, 2.0, 10);
    for &n in &ns {
        for &kappa in &kappas {
            let m = two_atoms(0.02, kappa);
            let tc = critical_time(&m, n).unwrap();
            worst_t = worst_t.max(psi1(&m, n, tc).unwrap());
            for &t2 in &times {
                let kc = critical_hopping(&m, n, t2).unwrap();
                let at = m.with(|p| p.kappa = kc).unwrap();
                worst_k = worst_k.max(psi1(&at, n, t2).unwrap());
            }
        }
    }
    let m = two_atoms(0.02, 1.2);
    let printed = critical_time_printed(&m, 3).unwrap();
    let exact = critical_time(&m, 3).unwrap();
    // Independent high-precision evaluation of both closed forms.
    let (printed_ref, exact_ref) = (3.14489987946895, 3.13947302129682);
    let dt = start.elapsed();
    let pass = worst_t <= 1e-9
        && worst_k <= 1e-9
        && (printed - printed_ref).abs() < 1e-4
        && (exact - exact_ref).abs() < 1e-4
        && dt < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "max psi1(t_c) {worst_t:.1e}, max psi1 at kappa_c {worst_k:.1e}; t_c printed {printed:.6} \
             (ref {printed_ref:.6}), exact {exact:.6} (ref {exact_ref:.6}) ({dt:.2?})"
        ),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let times = linspace(0.0, 6.0, 121);
    let ideal: Vec<f64> = times.iter().map(|&t| psi1(&two_atoms(0.0, 1.2), 3, t).unwrap()).collect();
    let constant = ideal.iter().all(|&p| p == ideal[0]) && ideal[0] > 0.0;
    let mut decreasing = true;
    for gamma in [0.02, 0.05] {
        let m = two_atoms(gamma, 1.2);
        let tc = critical_time(&m, 3).unwrap();
        let curve: Vec<f64> = times.iter().map(|&t| psi1(&m, 3, t).unwrap()).collect();
        for (w, t) in curve.windows(2).zip(&times[1..]) {
            let ok = if *t <= tc { w[1] < w[0] } else { w[1] == 0.0 };
            decreasing &= ok;
        }
        decreasing &= psi1(&m, 3, tc).unwrap() < 1e-9;
    }
    let psi0 = psi1(&two_atoms(0.0, 1.0), 3, 0.0).unwrap();
    let tcs: Vec<f64> = [3, 9, 12]
        .iter()
        .map(|&n| critical_time(&two_atoms(0.02, 1.2), n).unwrap())
        .collect();
    let steeper = tcs[0] > tcs[1] && tcs[1] > tcs[2];
    let dt = start.elapsed();
    let pass = constant && decreasing && (psi0 - 0.1592).abs() <= 1e-4 && steeper && dt < Duration::from_secs(1);
    outcome(
        pass,
        format!(
            "gamma=0 constant: {constant}; gamma>0 strictly decreasing to 0 at t_c: {decreasing}; \
             psi1(0) = {psi0:.6}; t_c(n=3,9,12) = {:.4}, {:.4}, {:.4} ({dt:.2?})",
            tcs[0], tcs[1], tcs[2]
        ),
    )
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let m = two_atoms(0.0, 1.0);
    let kc = critical_hopping(&m, 3, 0.0).unwrap();
    let ratio = kc / EPS;
    let below = psi1(&m.with(|p| p.kappa = 0.999 * kc).unwrap(), 3, 0.0).unwrap();
    let above = psi1(&m.with(|p| p.kappa = 1.001 * kc).unwrap(), 3, 0.0).unwrap();
    let onset = below == 0.0 && above > 0.0;
    let lossy = two_atoms(0.05, 1.0);
    let k: Vec<f64> = [3, 9, 12]
        .iter()
        .map(|&n| critical_hopping(&lossy, n, 0.3).unwrap())
        .collect();
    let kp: Vec<f64> = [3, 9, 12]
        .iter()
        .map(|&n| critical_hopping_printed(&lossy, n, 0.3).unwrap())
        .collect();
    let ordered = k[2] > k[1] && k[1] > k[0] && kp[2] > kp[1] && kp[1] > kp[0];
    let dt = start.elapsed();
    outcome(
        (ratio - 1.05).abs() <= 1e-12 && onset && ordered && dt < Duration::from_secs(1),
        format!(
            "kappa_c/eps = {ratio:.15}; onset at kappa_c: {onset}; kappa_c(n=3,9,12; gamma=0.05, t=0.3) = \
             {:.5}, {:.5}, {:.5} ({dt:.2?})",
            k[0], k[1], k[2]
        ),
    )
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut ratios = Vec::new();
    for n in [2, 3, 4] {
        let mut errors = Vec::new();
        for s in [0.04, 0.02, 0.01] {
            let m = Model::new(
                SystemParams::resonant(10.0, 1.0, 2)
                    .with_kappa(1.0)
                    .with_epsilon(EPS)
                    .with_n_max(n + 6),
            )
            .unwrap();
            let psi = s / m.params().kappa;
            let e = second_order_energy_center(&m, n, psi).unwrap().energy();
            let exact = eigenvalues(&build_full_matrix(&m, Complex64::new(psi, 0.0)))
                .unwrap()
                .into_iter()
                .min_by(|a, b| (a - e).norm().total_cmp(&(b - e).norm()))
                .unwrap();
            errors.push((exact - e).norm());
        }
        ratios.push(errors[0] / errors[1]);
        ratios.push(errors[1] / errors[2]);
    }
    let dt = start.elapsed();
    let pass = ratios.iter().all(|r| (12.0..=20.0).contains(r)) && dt < Duration::from_secs(5);
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.2}")).collect();
    outcome(
        pass,
        format!("error ratios per halving (n=2,3,4) [{}], required [12, 20] ({dt:.2?})", shown.join(", ")),
    )
}

struct Diagrams {
    /// `(n_atoms, ideal, dissipative)`.
    runs: Vec<(usize, PhaseDiagram, PhaseDiagram)>,
    elapsed: Duration,
}

fn diagrams() -> Diagrams {
    let start = Instant::now();
    let mu = linspace(-2.5, 0.5, 64);
    let kappa: Vec<f64> = (0..64).map(|i| 10f64.powf(-3.0 + 3.0 * i as f64 / 63.0)).collect();
    let settings = SolverSettings::default();
    let runs = [2, 4, 6]
        .iter()
        .map(|&n_atoms| {
            let base = SystemParams::resonant(10.0, 1.0, n_atoms).with_n_max(8);
            let ideal = compute_phase_diagram(&base, &mu, &kappa, &settings).unwrap();
            let lossy = compute_phase_diagram(&base.with_total_gamma(0.2), &mu, &kappa, &settings).unwrap();
            (n_atoms, ideal, lossy)
        })
        .collect();
    Diagrams {
        runs,
        elapsed: start.elapsed(),
    }
}

fn solver_failures(d: &PhaseDiagram) -> usize {
    d.points.iter().filter(|p| p.psi_star.is_nan()).count()
}

fn criterion_6(d: &Diagrams) -> Outcome {
    let flagged: usize = d.runs.iter().map(|(_, a, b)| a.errors().count() + b.errors().count()).sum();
    let failed: usize = d.runs.iter().map(|(_, a, b)| solver_failures(a) + solver_failures(b)).sum();
    let total: usize = d.runs.iter().map(|(_, a, b)| a.points.len() + b.points.len()).sum();
    outcome(
        flagged == 0 && d.elapsed < Duration::from_secs(600),
        format!(
            "six 64x64 diagrams: {flagged} of {total} points flagged ({failed} solver failures, the rest \
             photon-cutoff flags) ({:.1?})",
            d.elapsed
        ),
    )
}

fn criterion_6a(d: &Diagrams) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, ideal, lossy) in &d.runs {
        let delta = ideal
            .points
            .iter()
            .zip(&lossy.points)
            .map(|(a, b)| (a.psi_star - b.psi_star).abs())
            .filter(|x| x.is_finite())
            .fold(0.0, f64::max);
        pass &= delta > 1e-3;
        parts.push(format!("N={n}: {delta:.3e}"));
    }
    outcome(pass, format!("max |psi*(gamma=0.2) - psi*(0)|: {}", parts.join(", ")))
}

fn criterion_6b(d: &Diagrams) -> Outcome {
    let areas: Vec<f64> = d.runs.iter().map(|(_, ideal, _)| mott_lobe_metrics(ideal).area).collect();
    let pass = areas.windows(2).all(|w| w[1] < w[0]);
    outcome(
        pass,
        format!(
            "ideal Mott area (mu_rel x log10 kappa) N=2: {:.4}, N=4: {:.4}, N=6: {:.4}",
            areas[0], areas[1], areas[2]
        ),
    )
}

fn criterion_7(d: &Diagrams) -> Outcome {
    let mut worst: f64 = 0.0;
    let mut over = 0;
    let mut total = 0;
    for (_, a, b) in &d.runs {
        for p in a.points.iter().chain(&b.points) {
            total += 1;
            match p.psi_check {
                Some(c) if p.psi_star.is_finite() && c.is_finite() => {
                    let shift = (c - p.psi_star).abs();
                    worst = worst.max(shift);
                    over += usize::from(shift >= 1e-6);
                }
                _ => {
                    worst = f64::INFINITY;
                    over += 1;
                }
            }
        }
    }
    outcome(
        over == 0,
        format!("n_max 8 -> 10: {over} of {total} points shift by >= 1e-6; max shift {worst:.3e}"),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 4] = [
        &["spectrum", "--set", "manifolds=[0,1,2,5,12]", "--set", "gammas=[0,0.2]"],
        &["psi-time", "--set", "gammas=[0,0.02,0.05]", "--set", "manifolds=[3,9,12]", "--set", "kappa=1.2"],
        &["critical", "--set", "manifolds=[3,9,12]", "--set", "gamma=0.05"],
        &[
            "phase-diagram",
            "--set",
            r#"mu_rel={"start":-2.5,"stop":0.5,"count":12}"#,
            "--set",
            r#"kappa={"start":0.001,"stop":1,"count":12,"scale":"log"}"#,
            "--set",
            "gamma=0.2",
        ],
    ];
    let mut same = 0;
    for (i, args) in cases.iter().enumerate() {
        let outputs: Vec<Vec<u8>> = ["1", "8"]
            .iter()
            .map(|w| {
                let out = dir.path().join(format!("{i}-{w}.csv"));
                Command::new(env!("CARGO_BIN_EXE_dhl"))
                    .args(*args)
                    .args(["--workers", w, "--out", out.to_str().unwrap()])
                    .output()
                    .unwrap();
                std::fs::read(&out).unwrap_or_default()
            })
            .collect();
        if !outputs[0].is_empty() && outputs[0] == outputs[1] {
            same += 1;
        }
    }
    outcome(
        same == cases.len(),
        format!("{same} of {} CLI runs byte-identical for workers 1 and 8", cases.len()),
    )
}

fn guarded(f: impl FnOnce() -> Outcome) -> Outcome {
    match panic::catch_unwind(AssertUnwindSafe(f)) {
        Ok(o) => o,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        }
    }
}

fn main() {
    panic::set_hook(Box::new(|_| {}));
    let mut results: Vec<(&str, Outcome)> = vec![
        ("1", guarded(criterion_1)),
        ("2", guarded(criterion_2)),
        ("3", guarded(criterion_3)),
        ("4", guarded(criterion_4)),
        ("5", guarded(criterion_5)),
    ];
    for (k, o) in &results {
        report(k, o);
    }
    let later: Vec<(&str, Outcome)> = match panic::catch_unwind(diagrams) {
        Ok(d) => vec![
            ("6", guarded(|| criterion_6(&d))),
            ("6a", guarded(|| criterion_6a(&d))),
            ("6b", guarded(|| criterion_6b(&d))),
            ("7", guarded(|| criterion_7(&d))),
        ],
        Err(_) => ["6", "6a", "6b", "7"]
            .into_iter()
            .map(|k| (k, outcome(false, "phase diagrams could not be computed".into())))
            .collect(),
    };
    for (k, o) in &later {
        report(k, o);
    }
    let eight = guarded(criterion_8);
    report("8", &eight);
    results.extend(later);
    results.push(("8", eight));
    let passed = results.iter().filter(|(_, o)| o.pass).count();
    println!("acceptance: {passed} of {} checks passed", results.len());
    if passed < results.len() && std::env::var_os("DHL_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}

fn report(k: &str, o: &Outcome) {
    println!("[{}] criterion {k}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}
