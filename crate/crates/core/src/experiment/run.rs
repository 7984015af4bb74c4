use std::path::Path;
use std::time::Instant;

use log::info;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::{write_csv, write_json};
use crate::error::Result;
use crate::global_rbm::{collect_snapshots, global_basis, global_reduced_solve};
use crate::integrators::{full_order_solve, integrate_dynamical, RunOptions, StepReport};
use crate::models::Ensemble;
use crate::symplectic::{orthosymplectic_from_complex_svd, ReducedState, TOL_MANIFOLD};

pub const ERRORS_HEADER: [&str; 4] = ["method", "2k", "runtime_seconds", "frobenius_error_at_T"];
pub const DRIFT_HEADER: [&str; 5] = ["method", "2k", "time", "drift", "per_parameter_drift"];
pub const STEPS_HEADER: [&str; 11] = [
    "method",
    "2k",
    "step",
    "time",
    "dt",
    "orth_defect",
    "sympl_defect",
    "gram_smin",
    "gram_smax",
    "fixed_point_iters",
    "accepted",
];

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRow {
    pub method: String,
    pub two_k: usize,
    pub runtime_seconds: f64,
    pub frobenius_error_at_t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftRow {
    pub method: String,
    pub two_k: usize,
    pub time: f64,
    pub drift: f64,
    pub per_parameter_drift: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StepRow {
    pub method: String,
    pub two_k: usize,
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub orth_defect: f64,
    pub sympl_defect: f64,
    pub gram_smin: f64,
    pub gram_smax: f64,
    pub fixed_point_iters: usize,
    pub accepted: bool,
}

impl StepRow {
    fn new(method: &str, two_k: usize, r: &StepReport) -> Self {
        Self {
            method: method.to_string(),
            two_k,
            step: r.step,
            time: r.time,
            dt: r.dt,
            orth_defect: r.orth_defect,
            sympl_defect: r.sympl_defect,
            gram_smin: r.gram_smin,
            gram_smax: r.gram_smax,
            fixed_point_iters: r.fixed_point_iters,
            accepted: r.accepted,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SizeSummary {
    pub method: String,
    pub two_k: usize,
    pub frobenius_error_at_t: f64,
    /// `sqrt(dx)` times the Frobenius error (SWE only).
    pub frobenius_error_dx_weighted: Option<f64>,
    pub max_drift: f64,
    pub max_orth_defect: f64,
    pub max_sympl_defect: f64,
    pub initial_projection_defect: Option<f64>,
    pub leading_singular_values: Vec<f64>,
}

/// In-memory result of [`run_experiment`].
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub errors: Vec<ErrorRow>,
    pub drift: Vec<DriftRow>,
    #[serde(skip)]
    pub steps: Vec<StepRow>,
    pub sizes: Vec<SizeSummary>,
    pub full_order_runtime_seconds: f64,
    pub snapshot_runtime_seconds: Option<f64>,
    pub max_manifold_defect: f64,
    pub manifold_gate_passed: bool,
}

impl RunSummary {
    pub fn error_of(&self, method: &str, two_k: usize) -> Option<f64> {
        self.errors.iter().find(|r| r.method == method && r.two_k == two_k).map(|r| r.frobenius_error_at_t)
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    model: String,
    n_params: usize,
    conventions: Conventions,
    config: &'a ExperimentConfig,
    summary: &'a RunSummary,
}

#[derive(Serialize)]
struct Conventions {
    error_norm: &'static str,
    hamiltonian: &'static str,
    drift: &'static str,
    global_initial_condition: &'static str,
    global_runtime_includes_offline: bool,
}

/// Runs the full-order reference, the dynamical method and the global baseline for every
/// configured size and returns the collected rows.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunSummary> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let params = cfg.parameter_grid()?.points();
    let sys = Ensemble::new(model.as_ref(), &params);
    let (dt, t_final) = (cfg.time.dt, cfg.time.final_time);
    let n_steps = (t_final / dt).round() as usize;
    let dx_weight = (cfg.model.name == "swe").then(|| (2.0 * cfg.model.half_length / cfg.model.grid_points as f64).sqrt());

    info!("full-order reference: {} with p = {}", model.descriptor(), params.len());
    let clock = Instant::now();
    let reference = full_order_solve(model.as_ref(), &params, dt, t_final, n_steps, cfg.midpoint())?;
    let full_runtime = clock.elapsed().as_secs_f64();
    let r_ref = reference.final_state().clone();

    let want = |m: &str| cfg.reduction.methods.iter().any(|x| x == m);
    let snapshots = if want("global") {
        let train = cfg.training_grid()?.points();
        let clock = Instant::now();
        let s = collect_snapshots(model.as_ref(), &train, dt, t_final, cfg.training.stride)?;
        Some((s, clock.elapsed().as_secs_f64()))
    } else {
        None
    };

    let mut summary = RunSummary {
        errors: Vec::new(),
        drift: Vec::new(),
        steps: Vec::new(),
        sizes: Vec::new(),
        full_order_runtime_seconds: full_runtime,
        snapshot_runtime_seconds: snapshots.as_ref().map(|s| s.1),
        max_manifold_defect: 0.0,
        manifold_gate_passed: true,
    };

    for &two_k in &cfg.reduction.sizes {
        let k = two_k / 2;
        if want("dynamical") {
            let method = format!("dynamical-{}", cfg.reduction.basis_method);
            info!("{method}, 2k = {two_k}");
            let clock = Instant::now();
            let r0 = sys.initial_block();
            let (basis, coefficients, sv) = orthosymplectic_from_complex_svd(&r0, k, TOL_MANIFOLD)?;
            let state = ReducedState { basis, coefficients, time: 0.0 };
            let opts = RunOptions { dt, final_time: t_final, rank_tol: cfg.tolerance.rank_tol, midpoint: cfg.midpoint(), save_stride: cfg.time.save_stride };
            let run = integrate_dynamical(state, &sys, &cfg.scheme(k)?, opts)?;
            let runtime = clock.elapsed().as_secs_f64();
            let err = (&r_ref - run.final_state.reconstruct()).norm();
            summary.errors.push(ErrorRow { method: method.clone(), two_k, runtime_seconds: runtime, frobenius_error_at_t: err });
            summary.drift.extend(run.drift.iter().map(|d| DriftRow { method: method.clone(), two_k, time: d.time, drift: d.drift, per_parameter_drift: d.per_parameter }));
            summary.steps.extend(run.reports.iter().map(|r| StepRow::new(&method, two_k, r)));
            let worst = run.max_orth_defect.max(run.max_sympl_defect);
            summary.max_manifold_defect = summary.max_manifold_defect.max(worst);
            summary.sizes.push(SizeSummary {
                method,
                two_k,
                frobenius_error_at_t: err,
                frobenius_error_dx_weighted: dx_weight.map(|w| w * err),
                max_drift: run.drift.iter().map(|d| d.drift).fold(0.0, f64::max),
                max_orth_defect: run.max_orth_defect,
                max_sympl_defect: run.max_sympl_defect,
                initial_projection_defect: None,
                leading_singular_values: sv.into_iter().take(k + 1).collect(),
            });
        }
        if let Some((snaps, offline)) = &snapshots {
            info!("global, 2k = {two_k}");
            let clock = Instant::now();
            let (basis, sv) = global_basis(snaps, k)?;
            let run = global_reduced_solve(&basis, &sys, dt, t_final, cfg.time.save_stride)?;
            let runtime = clock.elapsed().as_secs_f64() + offline;
            let err = (&r_ref - run.reconstruct(&basis)).norm();
            let method = "global".to_string();
            summary.errors.push(ErrorRow { method: method.clone(), two_k, runtime_seconds: runtime, frobenius_error_at_t: err });
            summary.drift.extend(run.drift.iter().map(|d| DriftRow { method: method.clone(), two_k, time: d.time, drift: d.drift, per_parameter_drift: d.per_parameter }));
            let check = basis.check(f64::INFINITY);
            summary.sizes.push(SizeSummary {
                method,
                two_k,
                frobenius_error_at_t: err,
                frobenius_error_dx_weighted: dx_weight.map(|w| w * err),
                max_drift: run.drift.iter().map(|d| d.drift).fold(0.0, f64::max),
                max_orth_defect: check.orth_defect,
                max_sympl_defect: check.sympl_defect,
                initial_projection_defect: Some(run.initial_projection_defect),
                leading_singular_values: sv.into_iter().take(k + 1).collect(),
            });
        }
    }
    summary.manifold_gate_passed = summary.max_manifold_defect <= cfg.tolerance.manifold_gate;
    Ok(summary)
}

/// Writes `errors.csv`, `hamiltonian_drift.csv`, `steps.csv` and `meta.json` into `out`.
pub fn write_artifacts(cfg: &ExperimentConfig, summary: &RunSummary, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    write_csv(&out.join("errors.csv"), &summary.errors, &ERRORS_HEADER)?;
    write_csv(&out.join("hamiltonian_drift.csv"), &summary.drift, &DRIFT_HEADER)?;
    write_csv(&out.join("steps.csv"), &summary.steps, &STEPS_HEADER)?;
    let model = cfg.build_model()?;
    let meta = Meta {
        tool: "osdrb",
        version: env!("CARGO_PKG_VERSION"),
        seed: cfg.seed,
        model: model.descriptor(),
        n_params: cfg.parameter_grid()?.len(),
        conventions: Conventions {
            error_norm: "frobenius, unweighted (dx-weighted value in sizes[].frobenius_error_dx_weighted)",
            hamiltonian: "unweighted discrete sum",
            drift: "|sum_j (H_j(R(t)) - H_j(R(0)))|; per_parameter_drift: sum_j |H_j(R(t)) - H_j(R(0))|",
            global_initial_condition: "z0 = U^T u0(eta)",
            global_runtime_includes_offline: true,
        },
        config: cfg,
        summary,
    };
    write_json(&out.join("meta.json"), &meta)
}
