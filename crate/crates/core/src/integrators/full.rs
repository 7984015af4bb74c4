use crate::error::{Error, Result};
use crate::models::{col, HamiltonianModel};
use crate::symplectic::apply_j_unchecked;
use crate::Mat;

use super::coupled::{step_count, MidpointOptions};

/// Full-order states saved every `stride` steps, including `t = 0`.
#[derive(Debug, Clone)]
pub struct FullTrajectory {
    pub times: Vec<f64>,
    /// One `2m x p` block per saved time.
    pub states: Vec<Mat>,
}

impl FullTrajectory {
    pub fn final_state(&self) -> &Mat {
        self.states.last().expect("trajectory holds the initial state")
    }
}

fn field(model: &dyn HamiltonianModel, u: &[f64], eta: &[f64], grad: &mut [f64], out: &mut Mat) {
    model.gradient(u, eta, grad);
    let g = Mat::from_column_slice(u.len(), 1, grad);
    *out = apply_j_unchecked(&g, false);
}

/// Implicit midpoint for one parameter; returns the saved states.
fn solve_column(model: &dyn HamiltonianModel, eta: &[f64], u0: &[f64], dt: f64, n: usize, stride: usize, opts: MidpointOptions) -> Result<Vec<Vec<f64>>> {
    let dim = u0.len();
    let mut u = Mat::from_column_slice(dim, 1, u0);
    let mut grad = vec![0.0; dim];
    let mut f = Mat::zeros(dim, 1);
    let mut saved = vec![u0.to_vec()];
    for step in 1..=n {
        field(model, u.as_slice(), eta, &mut grad, &mut f);
        let mut next = &u + &f * dt;
        let mut converged = false;
        let mut residual = f64::INFINITY;
        for _ in 0..opts.max_iters {
            let mid = (&u + &next) * 0.5;
            field(model, mid.as_slice(), eta, &mut grad, &mut f);
            let cand = &u + &f * dt;
            residual = (&cand - &next).norm() / cand.norm().max(f64::MIN_POSITIVE);
            next = cand;
            if residual <= opts.tol {
                converged = true;
                break;
            }
        }
        if !converged || !next.iter().all(|x| x.is_finite()) {
            return Err(Error::NonConvergence { iters: opts.max_iters, residual }.at_step(step));
        }
        u = next;
        if step % stride == 0 || step == n {
            saved.push(u.as_slice().to_vec());
        }
    }
    Ok(saved)
}

/// Implicit midpoint on `du/dt = J grad H(u; eta_j)` for every parameter column.
pub fn full_order_solve(model: &dyn HamiltonianModel, params: &[Vec<f64>], dt: f64, final_time: f64, stride: usize, opts: MidpointOptions) -> Result<FullTrajectory> {
    let n = step_count(dt, final_time)?;
    let stride = stride.max(1);
    let r0 = crate::models::initial_block(model, params);
    let run = |j: usize| solve_column(model, &params[j], col(&r0, j), dt, n, stride, opts);

    #[cfg(feature = "parallel")]
    let columns: Vec<Result<Vec<Vec<f64>>>> = {
        use rayon::prelude::*;
        (0..params.len()).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let columns: Vec<Result<Vec<Vec<f64>>>> = (0..params.len()).map(run).collect();

    let columns: Vec<Vec<Vec<f64>>> = columns.into_iter().collect::<Result<_>>()?;
    let mut times: Vec<f64> = (0..=n).filter(|s| s % stride == 0 || *s == n).map(|s| s as f64 * dt).collect();
    times.dedup();
    let dim = model.dim();
    let states = (0..times.len())
        .map(|t| {
            let mut m = Mat::zeros(dim, params.len());
            for (j, c) in columns.iter().enumerate() {
                m.column_mut(j).copy_from_slice(&c[t]);
            }
            m
        })
        .collect();
    Ok(FullTrajectory { times, states })
}
