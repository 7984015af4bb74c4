use log::debug;

use crate::error::{Error, Result};
use crate::flow::{coefficient_rhs_from_gradient, fullrank_monitor, velocity_from_gradient, GramS};
use crate::models::Ensemble;
use crate::symplectic::{CoefficientMatrix, OrthosymplecticBasis, ReducedState};
use crate::Mat;

use super::basis::{basis_step, BasisScheme, FrozenCoefficients, InterpolatedCoefficients};
use super::StepReport;

/// Fixed-point settings of the implicit midpoint solves.
#[derive(Debug, Clone, Copy)]
pub struct MidpointOptions {
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for MidpointOptions {
    fn default() -> Self {
        Self { tol: 1e-12, max_iters: 50 }
    }
}

/// Implicit midpoint step of `dZ/dt = Phi(Z)` for a frozen basis, solved by fixed-point
/// iteration from `Z_m`. Returns the new coefficients and the iteration count.
pub fn implicit_midpoint_z(
    u: &OrthosymplecticBasis,
    z: &CoefficientMatrix,
    sys: &Ensemble,
    dt: f64,
    opts: MidpointOptions,
) -> Result<(CoefficientMatrix, usize)> {
    if z.data().ncols() != u.full().ncols() || z.n_params() != sys.n_params() {
        return Err(Error::Dimension("coefficients do not match basis or parameter count".into()));
    }
    let um = u.full();
    let z0 = z.data();
    let rhs = |zm: &Mat| -> Result<Mat> {
        let y = sys.gradient_block(&(um * zm.transpose()))?;
        Ok(coefficient_rhs_from_gradient(um, &y))
    };
    let mut next = z0 + rhs(z0)? * dt;
    let mut residual = f64::INFINITY;
    for iter in 1..=opts.max_iters {
        let mid = (z0 + &next) * 0.5;
        let cand = z0 + rhs(&mid)? * dt;
        let scale = cand.norm().max(f64::MIN_POSITIVE);
        residual = (&cand - &next).norm() / scale;
        next = cand;
        if residual <= opts.tol || (&next - z0).norm() == 0.0 {
            return Ok((CoefficientMatrix(next), iter));
        }
    }
    Err(Error::NonConvergence { iters: opts.max_iters, residual })
}

/// Coupled step: half basis step with `Z_m`, implicit midpoint for `Z` on the half-step
/// basis, then the full basis step with stage coefficients interpolated between `Z_m`
/// and `Z_{m+1}`.
pub fn partitioned_step(
    state: &ReducedState,
    sys: &Ensemble,
    dt: f64,
    scheme: &BasisScheme,
    rank_tol: f64,
    midpoint: MidpointOptions,
) -> Result<(ReducedState, StepReport)> {
    let u = &state.basis;
    let z = &state.coefficients;
    let gram = GramS::new(z, rank_tol)?;
    let y = sys.gradient_block(&(u.full() * z.data().transpose()))?;
    let f1 = velocity_from_gradient(u.full(), z.data(), &y, &gram);

    let frozen = FrozenCoefficients::new(*sys, z, rank_tol)?;
    let u_half = basis_step(u, &frozen, 0.5 * dt, scheme, Some(&f1))?;
    let (z_next, iters) = implicit_midpoint_z(&u_half, z, sys, dt, midpoint)?;
    let field = InterpolatedCoefficients::new(*sys, z, &z_next, rank_tol);
    let u_next = basis_step(u, &field, dt, scheme, Some(&f1))?;

    let check = u_next.check(f64::INFINITY);
    let monitor = fullrank_monitor(&z_next, rank_tol);
    let report = StepReport {
        step: 0,
        time: state.time + dt,
        dt,
        orth_defect: check.orth_defect,
        sympl_defect: check.sympl_defect,
        gram_smin: monitor.smin,
        gram_smax: monitor.smax,
        fixed_point_iters: iters,
        accepted: true,
    };
    Ok((
        ReducedState { basis: u_next, coefficients: z_next, time: state.time + dt },
        report,
    ))
}

/// Time grid and tolerances of a dynamical run.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub dt: f64,
    pub final_time: f64,
    pub rank_tol: f64,
    pub midpoint: MidpointOptions,
    /// Record the drift every `save_stride` steps (the last step is always recorded).
    pub save_stride: usize,
}

/// Hamiltonian drift at one time: `drift = |sum_j (H_j(R(t)) - H_j(R(0)))|`, the quantity
/// conserved by the continuous reduced flow, and `per_parameter = sum_j |H_j(R(t)) - H_j(R(0))|`,
/// which also carries the projection error of each individual parameter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DriftSample {
    pub time: f64,
    pub drift: f64,
    pub per_parameter: f64,
}

impl DriftSample {
    pub fn new(time: f64, h: &[f64], h0: &[f64]) -> Self {
        let drift = h.iter().zip(h0).map(|(a, b)| a - b).sum::<f64>().abs();
        let per_parameter = h.iter().zip(h0).map(|(a, b)| (a - b).abs()).sum();
        Self { time, drift, per_parameter }
    }
}

/// Output of [`integrate_dynamical`].
#[derive(Debug, Clone)]
pub struct DynamicalRun {
    pub final_state: ReducedState,
    pub reports: Vec<StepReport>,
    pub drift: Vec<DriftSample>,
    pub max_orth_defect: f64,
    pub max_sympl_defect: f64,
}

pub(crate) fn step_count(dt: f64, final_time: f64) -> Result<usize> {
    if !(dt > 0.0) || !(final_time > 0.0) {
        return Err(Error::Config(format!("dt = {dt} and T = {final_time} must be positive")));
    }
    let n = (final_time / dt).round();
    if (n * dt - final_time).abs() > 1e-9 * final_time || n < 1.0 {
        return Err(Error::Config(format!("T = {final_time} is not an integer multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

/// Runs the partitioned scheme over `[t_0, t_0 + T]`.
///
/// A step failing for a step-size related reason is retried once as two half steps;
/// a second failure aborts with the step index.
pub fn integrate_dynamical(initial: ReducedState, sys: &Ensemble, scheme: &BasisScheme, opts: RunOptions) -> Result<DynamicalRun> {
    let n = step_count(opts.dt, opts.final_time)?;
    let stride = opts.save_stride.max(1);
    let h0 = sys.hamiltonians(&initial.reconstruct())?;
    let mut drift = vec![DriftSample { time: initial.time, drift: 0.0, per_parameter: 0.0 }];
    let mut reports = Vec::with_capacity(n);
    let mut state = initial;
    let (mut max_o, mut max_s) = (0.0f64, 0.0f64);
    let t0 = state.time;

    for step in 1..=n {
        let attempt = partitioned_step(&state, sys, opts.dt, scheme, opts.rank_tol, opts.midpoint);
        let (next, mut step_reports) = match attempt {
            Ok((next, rep)) => (next, vec![rep]),
            Err(e) if e.is_step_size_related() => {
                debug!("step {step} rejected ({e}); retrying with dt/2");
                let failed = StepReport {
                    step,
                    time: state.time,
                    dt: opts.dt,
                    orth_defect: f64::NAN,
                    sympl_defect: f64::NAN,
                    gram_smin: f64::NAN,
                    gram_smax: f64::NAN,
                    fixed_point_iters: 0,
                    accepted: false,
                };
                let half = 0.5 * opts.dt;
                let (mid, r1) = partitioned_step(&state, sys, half, scheme, opts.rank_tol, opts.midpoint).map_err(|e| e.at_step(step))?;
                let (next, r2) = partitioned_step(&mid, sys, half, scheme, opts.rank_tol, opts.midpoint).map_err(|e| e.at_step(step))?;
                (next, vec![failed, r1, r2])
            }
            Err(e) => return Err(e.at_step(step)),
        };
        for r in step_reports.iter_mut() {
            r.step = step;
            if r.accepted {
                max_o = max_o.max(r.orth_defect);
                max_s = max_s.max(r.sympl_defect);
            }
        }
        reports.extend(step_reports);
        state = next;
        state.time = t0 + step as f64 * opts.dt;
        if step % stride == 0 || step == n {
            let h = sys.hamiltonians(&state.reconstruct()).map_err(|e| e.at_step(step))?;
            let d = DriftSample::new(state.time, &h, &h0);
            if !d.per_parameter.is_finite() {
                return Err(Error::Model("non-finite Hamiltonian along the reduced trajectory".into()).at_step(step));
            }
            drift.push(d);
        }
    }
    Ok(DynamicalRun { final_state: state, reports, drift, max_orth_defect: max_o, max_sympl_defect: max_s })
}
