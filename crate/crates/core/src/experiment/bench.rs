use std::path::Path;
use std::time::Instant;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::output::write_csv;
use super::studies::loglog_slope;
use crate::error::Result;
use crate::integrators::{basis_step, BasisMethod, BasisScheme, ButcherTableau, FrozenCoefficients};
use crate::models::{Ensemble, ParameterGrid, SweConfig, SweModel};
use crate::symplectic::{orthosymplectic_from_complex_svd, TOL_MANIFOLD};

pub const SCALING_HEADER: [&str; 4] = ["m", "method", "median_ns", "iqr_ns"];

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub m: usize,
    pub method: String,
    pub median_ns: f64,
    pub iqr_ns: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingResult {
    pub rows: Vec<ScalingRow>,
    /// Fitted log-log slope of the median against `m`, per method.
    pub slopes: Vec<(String, f64)>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

/// Median and interquartile range of per-step basis update times on the SWE model with
/// `N = m` grid points, fixed `k` and `p`, warm-started along the trajectory.
pub fn run_scaling_bench(cfg: &ExperimentConfig) -> Result<ScalingResult> {
    cfg.validate()?;
    let sc = &cfg.scaling;
    let samples_beta = sc.p.div_ceil(2);
    let params: Vec<Vec<f64>> = ParameterGrid::new(vec![(0.1, 0.15), (0.2, 1.5)], vec![2, samples_beta])?
        .points()
        .into_iter()
        .take(sc.p)
        .collect();
    let tableau = ButcherTableau::by_name(&sc.tableau)?;
    let mut rows = Vec::new();
    for &m in &sc.m_values {
        let model = SweModel::new(SweConfig { grid_points: m, ..SweConfig::desk() })?;
        let sys = Ensemble::new(&model, &params);
        let (u0, z, _) = orthosymplectic_from_complex_svd(&sys.initial_block(), sc.k, TOL_MANIFOLD)?;
        let field = FrozenCoefficients::new(sys, &z, cfg.tolerance.rank_tol)?;
        for name in &sc.methods {
            let scheme = BasisScheme::new(BasisMethod::by_name(name)?, tableau.clone());
            let mut u = u0.clone();
            for _ in 0..sc.warmup {
                u = basis_step(&u, &field, cfg.time.dt, &scheme, None)?;
            }
            let mut times = Vec::with_capacity(sc.runs);
            for _ in 0..sc.runs {
                let clock = Instant::now();
                u = basis_step(&u, &field, cfg.time.dt, &scheme, None)?;
                times.push(clock.elapsed().as_nanos() as f64);
            }
            times.sort_by(|a, b| a.total_cmp(b));
            rows.push(ScalingRow {
                m,
                method: name.clone(),
                median_ns: quantile(&times, 0.5),
                iqr_ns: quantile(&times, 0.75) - quantile(&times, 0.25),
            });
        }
    }
    let slopes = sc
        .methods
        .iter()
        .map(|name| {
            let (ms, ts): (Vec<f64>, Vec<f64>) = rows.iter().filter(|r| &r.method == name).map(|r| (r.m as f64, r.median_ns)).unzip();
            let slope = if ms.len() >= 2 { loglog_slope(&ms, &ts) } else { f64::NAN };
            (name.clone(), slope)
        })
        .collect();
    Ok(ScalingResult { rows, slopes })
}

pub fn write_scaling(result: &ScalingResult, out: &Path) -> Result<()> {
    write_csv(&out.join("scaling.csv"), &result.rows, &SCALING_HEADER)
}
