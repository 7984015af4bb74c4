//! Time integrators for the basis (RK-MK with Cayley or exponential coordinates,
//! retraction-based tangent RK), the coefficient system (implicit midpoint),
//! the coupled partitioned step and the full-order reference solver.

mod basis;
mod coupled;
mod full;

pub use basis::{
    basis_step, rkmk_cayley_step, rkmk_exp_step, tangent_rk_step, BasisField, BasisMethod, BasisScheme, FrozenCoefficients,
    InterpolatedCoefficients,
};
pub(crate) use coupled::step_count as coupled_step_count;
pub use coupled::{implicit_midpoint_z, integrate_dynamical, partitioned_step, DriftSample, DynamicalRun, MidpointOptions, RunOptions};
pub use full::{full_order_solve, FullTrajectory};

use serde::Serialize;

use crate::error::{Error, Result};

/// Explicit Runge-Kutta coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ButcherTableau {
    pub name: String,
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub order: usize,
}

impl ButcherTableau {
    pub fn new(name: &str, a: Vec<Vec<f64>>, b: Vec<f64>, order: usize) -> Result<Self> {
        let s = b.len();
        if s == 0 || a.len() != s || a.iter().any(|row| row.len() != s) {
            return Err(Error::Config(format!("tableau {name}: a must be {s} x {s}")));
        }
        if ((b.iter().sum::<f64>()) - 1.0).abs() > 1e-14 {
            return Err(Error::Config(format!("tableau {name}: weights do not sum to one")));
        }
        for (i, row) in a.iter().enumerate() {
            if row[i..].iter().any(|&x| x != 0.0) {
                return Err(Error::Config(format!("tableau {name} is not explicit")));
            }
        }
        let c = a.iter().map(|row| row.iter().sum()).collect();
        Ok(Self { name: name.into(), a, b, c, order })
    }

    pub fn euler() -> Self {
        Self::new("euler", vec![vec![0.0]], vec![1.0], 1).expect("valid")
    }

    pub fn explicit_midpoint() -> Self {
        Self::new("midpoint", vec![vec![0.0, 0.0], vec![0.5, 0.0]], vec![0.0, 1.0], 2).expect("valid")
    }

    pub fn heun() -> Self {
        Self::new("heun", vec![vec![0.0, 0.0], vec![1.0, 0.0]], vec![0.5, 0.5], 2).expect("valid")
    }

    pub fn rk4() -> Self {
        Self::new(
            "rk4",
            vec![
                vec![0.0, 0.0, 0.0, 0.0],
                vec![0.5, 0.0, 0.0, 0.0],
                vec![0.0, 0.5, 0.0, 0.0],
                vec![0.0, 0.0, 1.0, 0.0],
            ],
            vec![1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0],
            4,
        )
        .expect("valid")
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "euler" => Ok(Self::euler()),
            "midpoint" | "explicit-midpoint" => Ok(Self::explicit_midpoint()),
            "heun" => Ok(Self::heun()),
            "rk4" => Ok(Self::rk4()),
            other => Err(Error::Config(format!("unknown tableau '{other}' (expected euler, midpoint, heun or rk4)"))),
        }
    }

    pub fn stages(&self) -> usize {
        self.b.len()
    }
}

/// Diagnostics of one time step.
#[derive(Debug, Clone, Serialize)]
pub struct StepReport {
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
