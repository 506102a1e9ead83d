//! Sweep execution for each mode.

use std::fmt;
use std::fs;
use std::io::BufWriter;
use std::path::Path;

use dhl_core::meanfield::compute_phase_diagram;
use dhl_core::perturbation::{
    critical_hopping, critical_hopping_printed, critical_time, critical_time_printed, psi1, psi2,
};
use dhl_core::spectrum::{general_eigensystem, two_tla_eigensystem, Branch as Level};
use dhl_core::{hamiltonian, Error as CoreError, Model, SystemParams};
use rayon::prelude::*;
use serde_json::json;

use crate::config::{Branch, ConfigError, Mode, RunConfig};
use crate::table::{Cell, ResultTable};

pub const ARTIFACT_VERSION: &str = concat!("dhl ", env!("CARGO_PKG_VERSION"));

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// The table was built but some rows carry an error.
    Numerical { failed: usize, rows: usize, first: String },
    Io { path: String, message: String },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Numerical { .. } => 3,
            RunError::Io { .. } => 4,
        }
    }

    /// One-line JSON for stderr.
    pub fn summary(&self) -> String {
        let v = match self {
            RunError::Config(e) => json!({"status": "error", "kind": "config", "message": e.to_string()}),
            RunError::Numerical { failed, rows, first } => json!({
                "status": "error",
                "kind": "numerical",
                "failed_rows": failed,
                "rows": rows,
                "first_error": first,
            }),
            RunError::Io { path, message } => {
                json!({"status": "error", "kind": "io", "path": path, "message": message})
            }
        };
        v.to_string()
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Numerical { failed, rows, first } => {
                write!(f, "{failed} of {rows} rows failed; first: {first}")
            }
            RunError::Io { path, message } => write!(f, "cannot write {path}: {message}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

fn config_error(field: &str, message: impl Into<String>) -> RunError {
    RunError::Config(ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    })
}

fn model(system: SystemParams) -> Result<Model, RunError> {
    Model::new(system).map_err(|e| config_error("params", e.to_string()))
}

fn require_two_atom_resonance(config: &RunConfig) -> Result<(), RunError> {
    let p = config.params.system(0.0);
    if p.n_atoms != 2 {
        return Err(config_error(
            "params.n_atoms",
            format!("mode {} needs n_atoms = 2", config.mode.as_str()),
        ));
    }
    if !p.is_resonant() {
        return Err(config_error(
            "params.omega_a",
            format!("mode {} needs omega_a = omega_c", config.mode.as_str()),
        ));
    }
    Ok(())
}

fn error_text(e: Option<CoreError>) -> Cell {
    Cell::Text(e.map(|e| e.to_string()).unwrap_or_default())
}

/// Builds the table for `config` on the current rayon pool.
///
/// Per-point failures are recorded in the `error` column; only invalid
/// configs abort.
pub fn run(config: &RunConfig) -> Result<ResultTable, RunError> {
    let mut table = match config.mode {
        Mode::Spectrum => spectrum_table(config)?,
        Mode::PsiTime => psi_time_table(config)?,
        Mode::PsiHopping => psi_hopping_table(config)?,
        Mode::Critical => critical_table(config)?,
        Mode::PhaseDiagram => phase_diagram_table(config)?,
    };
    table.metadata = vec![
        ("version".into(), ARTIFACT_VERSION.into()),
        ("mode".into(), config.mode.as_str().into()),
        ("config".into(), config.echo()),
    ];
    Ok(table)
}

fn level_name(b: Level) -> &'static str {
    match b {
        Level::Lower => "lower",
        Level::Center => "center",
        Level::Upper => "upper",
    }
}

fn spectrum_table(config: &RunConfig) -> Result<ResultTable, RunError> {
    let jobs: Vec<(f64, usize)> = config
        .gammas()
        .iter()
        .flat_map(|&g| config.manifolds.iter().map(move |&n| (g, n)))
        .collect();
    let models = jobs
        .iter()
        .map(|&(g, _)| model(config.params.system(g)))
        .collect::<Result<Vec<_>, _>>()?;
    let blocks: Vec<Vec<Vec<Cell>>> = jobs
        .par_iter()
        .zip(models.par_iter())
        .map(|(&(gamma, n), m)| {
            let h = hamiltonian::build_manifold_matrix(m, n, 0.0);
            let s = match general_eigensystem(&h) {
                Ok(s) => s,
                Err(e) => {
                    return vec![vec![
                        gamma.into(),
                        n.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        f64::NAN.into(),
                        "".into(),
                        error_text(Some(e)),
                    ]]
                }
            };
            // The closed form omits the chemical potential.
            let shift = m.params().mu * n as f64;
            let labels = two_tla_eigensystem(m, n).ok().and_then(|c| c.branches.clone().map(|b| (c, b)));
            s.pairs
                .iter()
                .enumerate()
                .map(|(i, pair)| {
                    let label = labels
                        .as_ref()
                        .map(|(c, b)| {
                            let nearest = (0..c.pairs.len())
                                .min_by(|&x, &y| {
                                    let dx = (c.pairs[x].value - shift - pair.value).norm();
                                    let dy = (c.pairs[y].value - shift - pair.value).norm();
                                    dx.total_cmp(&dy)
                                })
                                .expect("nonempty closed form");
                            level_name(b[nearest])
                        })
                        .unwrap_or("");
                    vec![
                        gamma.into(),
                        n.into(),
                        i.into(),
                        pair.value.re.into(),
                        pair.value.im.into(),
                        label.into(),
                        "".into(),
                    ]
                })
                .collect()
        })
        .collect();
    let mut t = ResultTable::new(vec!["gamma", "n", "index", "energy_re", "energy_im", "branch", "error"]);
    t.rows = blocks.into_iter().flatten().collect();
    Ok(t)
}

fn branch_name(b: Branch) -> &'static str {
    match b {
        Branch::Center => "center",
        Branch::Negative => "negative",
    }
}

fn order_parameter(config: &RunConfig, m: &Model, n: usize, t: f64) -> Result<f64, CoreError> {
    match config.branch {
        Branch::Center => psi1(m, n, t),
        Branch::Negative => psi2(m, n, t),
    }
}

/// `(gamma, n, kappa)` models in output order.
fn models_by_gamma_n_kappa(config: &RunConfig) -> Result<Vec<(f64, usize, f64, Model)>, RunError> {
    let mut out = Vec::new();
    for &g in config.gammas() {
        for &n in &config.manifolds {
            for k in config.kappa_axis().values() {
                let mut s = config.params.system(g);
                s.kappa = k;
                out.push((g, n, k, model(s)?));
            }
        }
    }
    Ok(out)
}

fn psi_time_table(config: &RunConfig) -> Result<ResultTable, RunError> {
    require_two_atom_resonance(config)?;
    let times = config.time_axis().values();
    let jobs: Vec<_> = models_by_gamma_n_kappa(config)?
        .into_iter()
        .flat_map(|(g, n, k, m)| times.iter().map(move |&t| (g, n, k, m, t)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|(gamma, n, kappa, m, t)| {
            let (psi, err) = match order_parameter(config, m, *n, *t) {
                Ok(p) => (p, None),
                Err(e) => (f64::NAN, Some(e)),
            };
            vec![
                (*t).into(),
                psi.into(),
                branch_name(config.branch).into(),
                (*n).into(),
                (*gamma).into(),
                (*kappa).into(),
                error_text(err),
            ]
        })
        .collect();
    let mut table = ResultTable::new(vec!["t", "psi", "branch", "n", "gamma", "kappa", "error"]);
    table.rows = rows;
    Ok(table)
}

fn psi_hopping_table(config: &RunConfig) -> Result<ResultTable, RunError> {
    require_two_atom_resonance(config)?;
    let kappas = config.kappa_axis().values();
    let mut jobs = Vec::new();
    for &g in config.gammas() {
        for &n in &config.manifolds {
            for t in config.time_axis().values() {
                for &k in &kappas {
                    let mut s = config.params.system(g);
                    s.kappa = k;
                    jobs.push((g, n, t, k, s));
                }
            }
        }
    }
    let rows = jobs
        .par_iter()
        .map(|&(gamma, n, t, kappa, s)| {
            // psi vanishes identically without hopping.
            let result = if kappa == 0.0 {
                Model::new(s).map(|_| 0.0)
            } else {
                Model::new(s).and_then(|m| order_parameter(config, &m, n, t))
            };
            let (psi, err) = match result {
                Ok(p) => (p, None),
                Err(e) => (f64::NAN, Some(e)),
            };
            vec![kappa.into(), psi.into(), t.into(), n.into(), gamma.into(), error_text(err)]
        })
        .collect();
    let mut table = ResultTable::new(vec!["kappa", "psi", "t", "n", "gamma", "error"]);
    table.rows = rows;
    Ok(table)
}

fn critical_table(config: &RunConfig) -> Result<ResultTable, RunError> {
    require_two_atom_resonance(config)?;
    let mut jobs = Vec::new();
    for &g in config.gammas() {
        let m = model(config.params.system(g))?;
        for &n in &config.manifolds {
            for t in config.time_axis().values() {
                jobs.push((g, n, t, m));
            }
        }
    }
    // Without decay psi_1 never vanishes, so t_c is reported as +inf.
    let time = |r: Result<f64, CoreError>| match r {
        Err(CoreError::ZeroDecay) => Ok(f64::INFINITY),
        other => other,
    };
    let rows = jobs
        .par_iter()
        .map(|(gamma, n, t, m)| {
            let values = [
                critical_hopping_printed(m, *n, *t),
                critical_hopping(m, *n, *t),
                time(critical_time_printed(m, *n)),
                time(critical_time(m, *n)),
            ];
            let mut err = None;
            let mut row: Vec<Cell> = vec![(*n).into(), (*t).into()];
            for v in values {
                match v {
                    Ok(x) => row.push(x.into()),
                    Err(e) => {
                        err.get_or_insert(e);
                        row.push(f64::NAN.into());
                    }
                }
            }
            row.push((*gamma).into());
            row.push(error_text(err));
            row
        })
        .collect();
    let mut table = ResultTable::new(vec![
        "n",
        "t",
        "kappa_c_printed",
        "kappa_c_exact",
        "t_c_printed",
        "t_c_exact",
        "gamma",
        "error",
    ]);
    table.rows = rows;
    Ok(table)
}

fn phase_diagram_table(config: &RunConfig) -> Result<ResultTable, RunError> {
    let gammas = config.gammas();
    if gammas.len() != 1 {
        return Err(config_error("gammas", "phase-diagram takes a single gamma per table"));
    }
    let system = config.params.system(gammas[0]);
    model(system)?;
    let d = compute_phase_diagram(
        &system,
        &config.mu_rel_axis().values(),
        &config.kappa_axis().values(),
        &config.solver,
    )
    .map_err(|e| config_error("<phase-diagram>", e.to_string()))?;
    let mut table = ResultTable::new(vec!["mu_rel", "kappa", "psi_star", "energy", "phase", "error"]);
    table.rows = d
        .points
        .iter()
        .map(|p| {
            vec![
                p.mu_rel.into(),
                p.kappa.into(),
                p.psi_star.into(),
                p.energy.into(),
                p.phase.as_str().into(),
                p.error.clone().unwrap_or_default().into(),
            ]
        })
        .collect();
    Ok(table)
}

/// Runs `config` on a pool of `workers` threads and writes the CSV to `out`.
/// The file is written even when some rows failed.
pub fn execute(config: &RunConfig, out: &Path, workers: usize) -> Result<ResultTable, RunError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| config_error("workers", e.to_string()))?;
    let table = pool.install(|| run(config))?;
    let io_error = |e: std::io::Error| RunError::Io {
        path: out.display().to_string(),
        message: e.to_string(),
    };
    let file = fs::File::create(out).map_err(io_error)?;
    table.write_csv(BufWriter::new(file)).map_err(io_error)?;
    let failed: Vec<_> = table.error_rows().collect();
    if let Some(first) = failed.first() {
        let col = table.column("error").expect("error column");
        return Err(RunError::Numerical {
            failed: failed.len(),
            rows: table.rows.len(),
            first: first[col].as_str().unwrap_or_default().to_string(),
        });
    }
    Ok(table)
}
