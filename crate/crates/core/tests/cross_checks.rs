use dhl_core::hamiltonian::build_full_matrix;
use dhl_core::linalg::eigenvalues;
use dhl_core::meanfield::{
    compute_phase_diagram, fixed_point_order_parameter, solve_order_parameter, PhaseLabel, SolverSettings,
};
use dhl_core::perturbation::{critical_hopping, psi1, second_order_energy_center};
use dhl_core::spectrum::{general_eigensystem, two_tla_eigensystem};
use dhl_core::{hamiltonian, Complex64, Model, SystemParams};

fn lossless(mu_rel: f64, kappa: f64) -> Model {
    Model::new(SystemParams::resonant(10.0, 1.0, 2).with_mu(10.0 + mu_rel).with_kappa(kappa)).unwrap()
}

#[test]
fn minimisation_matches_fixed_point_on_a_grid() {
    let settings = SolverSettings {
        check_truncation: false,
        ..SolverSettings::default()
    };
    for i in 0..5 {
        let mu_rel = -0.95 + 0.04 * i as f64;
        for j in 0..5 {
            let kappa = 0.02 + 0.02 * j as f64;
            let m = lossless(mu_rel, kappa);
            let min = solve_order_parameter(&m, &settings).unwrap();
            let fp = fixed_point_order_parameter(&m, Complex64::new(0.7, 0.0), 1e-13, 20_000).unwrap();
            let psi_fp = fp.psi.norm();
            assert!(
                (psi_fp - min.psi).abs() < 1e-5,
                "mu_rel {mu_rel} kappa {kappa}: fixed point {psi_fp} vs minimum {}",
                min.psi
            );
            assert_eq!(PhaseLabel::classify(psi_fp), PhaseLabel::classify(min.psi));
        }
    }
}

#[test]
fn closed_form_levels_are_eigenvalues_of_the_manifold_block() {
    for gamma in [0.0, 0.05] {
        let m = Model::new(SystemParams::resonant(10.0, 1.0, 2).with_total_gamma(gamma).with_mu(0.0)).unwrap();
        for n in 2..8 {
            let closed = two_tla_eigensystem(&m, n).unwrap();
            let numeric = general_eigensystem(&hamiltonian::build_manifold_matrix(&m, n, 0.0)).unwrap();
            for (a, b) in closed.values().iter().zip(numeric.values()) {
                assert!((a - b).norm() < 1e-10 * a.norm());
            }
        }
    }
}

#[test]
fn second_order_energy_converges_to_the_exact_level() {
    let eps = 0.7836;
    for n in [2, 3, 4] {
        let m = Model::new(
            SystemParams::resonant(10.0, 1.0, 2)
                .with_epsilon(eps)
                .with_kappa(1.0)
                .with_n_max(n + 6),
        )
        .unwrap();
        let mut errors = Vec::new();
        for psi in [0.04, 0.02, 0.01] {
            let e = second_order_energy_center(&m, n, psi).unwrap().energy();
            let exact = eigenvalues(&build_full_matrix(&m, Complex64::new(psi, 0.0)))
                .unwrap()
                .into_iter()
                .min_by(|a, b| (a - e).norm().total_cmp(&(b - e).norm()))
                .unwrap();
            errors.push((exact - e).norm());
        }
        assert!(errors[0] / errors[1] > 3.0 && errors[1] / errors[2] > 3.0, "n {n}: {errors:?}");
        assert!(errors[2] < 1e-3, "n {n}: {errors:?}");
    }
}

#[test]
fn order_parameter_vanishes_at_the_critical_hopping() {
    for gamma in [0.0, 0.02, 0.05] {
        for n in [3, 9, 12] {
            for t in [0.0, 0.3, 1.0] {
                let base = Model::new(SystemParams::resonant(10.0, 1.0, 2).with_total_gamma(gamma).with_epsilon(0.7836))
                    .unwrap();
                let kc = critical_hopping(&base, n, t).unwrap();
                let at = base.with(|p| p.kappa = kc).unwrap();
                assert!(psi1(&at, n, t).unwrap() < 1e-9);
                let above = base.with(|p| p.kappa = 1.1 * kc).unwrap();
                assert!(psi1(&above, n, t).unwrap() > 1e-3);
            }
        }
    }
}

#[test]
fn small_diagram_is_reproducible() {
    let params = SystemParams::resonant(10.0, 1.0, 2).with_total_gamma(0.2);
    let mu = [-0.95, -0.9, -0.85];
    let kappa = [0.01, 0.05, 0.1];
    let settings = SolverSettings::default();
    let a = compute_phase_diagram(&params, &mu, &kappa, &settings).unwrap();
    let b = compute_phase_diagram(&params, &mu, &kappa, &settings).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.points.len(), 9);
    assert_eq!(a.point(0, 0).phase, PhaseLabel::Mott);
}
