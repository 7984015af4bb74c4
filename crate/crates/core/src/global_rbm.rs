//! Global symplectic reduced basis baseline: snapshots of the full model on a
//! training grid, one orthosymplectic basis from their complex SVD, and a
//! reduced Hamiltonian solve with that fixed basis.

use crate::error::{Error, Result};
use crate::integrators::{full_order_solve, implicit_midpoint_z, DriftSample, MidpointOptions};
use crate::models::{Ensemble, HamiltonianModel};
use crate::symplectic::{complex_svd_truncated, complexify, realify, CoefficientMatrix, OrthosymplecticBasis, TOL_MANIFOLD};
use crate::Mat;

/// Snapshot matrix, columns in parameter-major, time-minor order.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotSet {
    pub matrix: Mat,
    pub stride: usize,
    pub n_times: usize,
    pub train_params: Vec<Vec<f64>>,
}

pub fn collect_snapshots(model: &dyn HamiltonianModel, train_params: &[Vec<f64>], dt: f64, final_time: f64, stride: usize) -> Result<SnapshotSet> {
    if train_params.is_empty() {
        return Err(Error::Config("training grid is empty".into()));
    }
    let traj = full_order_solve(model, train_params, dt, final_time, stride, MidpointOptions::default())?;
    let n_times = traj.times.len();
    let dim = model.dim();
    let p = train_params.len();
    let mut matrix = Mat::zeros(dim, p * n_times);
    for j in 0..p {
        for (t, state) in traj.states.iter().enumerate() {
            matrix.column_mut(j * n_times + t).copy_from(&state.column(j));
        }
    }
    if !matrix.iter().all(|x| x.is_finite()) {
        return Err(Error::Model("non-finite snapshot".into()));
    }
    Ok(SnapshotSet { matrix, stride: stride.max(1), n_times, train_params: train_params.to_vec() })
}

/// Orthosymplectic basis of `2k` columns from the complex SVD of the snapshots.
pub fn global_basis(snapshots: &SnapshotSet, k: usize) -> Result<(OrthosymplecticBasis, Vec<f64>)> {
    let c = complexify(&snapshots.matrix)?;
    let svd = complex_svd_truncated(&c, k)?;
    let basis = OrthosymplecticBasis::from_a_block(realify(&svd.left), TOL_MANIFOLD)?;
    Ok((basis, svd.singular_values))
}

/// Output of [`global_reduced_solve`].
#[derive(Debug, Clone)]
pub struct GlobalRun {
    pub final_coefficients: CoefficientMatrix,
    /// `||u_0 - U U^T u_0||_F` over the test parameters.
    pub initial_projection_defect: f64,
    pub drift: Vec<DriftSample>,
    pub max_fixed_point_iters: usize,
}

impl GlobalRun {
    pub fn reconstruct(&self, basis: &OrthosymplecticBasis) -> Mat {
        basis.full() * self.final_coefficients.data().transpose()
    }
}

/// Implicit midpoint on `dz_j/dt = J U^T grad H(U z_j; eta_j)` with `z_j(0) = U^T u_0(eta_j)`.
pub fn global_reduced_solve(basis: &OrthosymplecticBasis, sys: &Ensemble, dt: f64, final_time: f64, save_stride: usize) -> Result<GlobalRun> {
    let n = crate::integrators::coupled_step_count(dt, final_time)?;
    let stride = save_stride.max(1);
    let u = basis.full();
    let r0 = sys.initial_block();
    let z0 = r0.transpose() * u;
    let initial_projection_defect = (&r0 - u * z0.transpose()).norm();
    let mut z = CoefficientMatrix::new(z0)?;
    let h0 = sys.hamiltonians(&(u * z.data().transpose()))?;
    let mut drift = vec![DriftSample { time: 0.0, drift: 0.0, per_parameter: 0.0 }];
    let mut max_iters = 0;
    for step in 1..=n {
        let (next, iters) = implicit_midpoint_z(basis, &z, sys, dt, MidpointOptions::default()).map_err(|e| e.at_step(step))?;
        z = next;
        max_iters = max_iters.max(iters);
        if step % stride == 0 || step == n {
            let h = sys.hamiltonians(&(u * z.data().transpose()))?;
            drift.push(DriftSample::new(step as f64 * dt, &h, &h0));
        }
    }
    Ok(GlobalRun { final_coefficients: z, initial_projection_defect, drift, max_fixed_point_iters: max_iters })
}
