//! Parameterized full-order Hamiltonian models `du/dt = J grad H(u; eta)`.

mod grid;
mod oscillator;
mod swe;

pub use grid::ParameterGrid;
pub use oscillator::LinearOscillator;
pub use swe::{SweConfig, SweModel};

use crate::error::{Error, Result};
use crate::symplectic::apply_j_unchecked;
use crate::Mat;

/// Full-order model with canonical symplectic structure on `R^{2m}`.
pub trait HamiltonianModel: Send + Sync {
    /// Full dimension `2m`.
    fn dim(&self) -> usize;
    fn hamiltonian(&self, u: &[f64], eta: &[f64]) -> f64;
    fn gradient(&self, u: &[f64], eta: &[f64], out: &mut [f64]);
    fn initial(&self, eta: &[f64]) -> Vec<f64>;
    fn descriptor(&self) -> String;
}

/// Column `j` of a column-major matrix.
pub(crate) fn col(m: &Mat, j: usize) -> &[f64] {
    let n = m.nrows();
    &m.as_slice()[j * n..(j + 1) * n]
}

fn check_rows(model: &dyn HamiltonianModel, r: &Mat, params: &[Vec<f64>]) -> Result<()> {
    if r.nrows() != model.dim() || r.ncols() != params.len() {
        return Err(Error::Dimension(format!(
            "state block is {}x{}, model expects {} rows and {} parameters",
            r.nrows(),
            r.ncols(),
            model.dim(),
            params.len()
        )));
    }
    Ok(())
}

/// `Y` with column `j = grad H(R_j; eta_j)`.
pub fn gradient_block(model: &dyn HamiltonianModel, r: &Mat, params: &[Vec<f64>]) -> Result<Mat> {
    check_rows(model, r, params)?;
    let n = r.nrows();
    let mut y = Mat::zeros(n, params.len());
    let fill = |(j, out): (usize, &mut [f64])| model.gradient(col(r, j), &params[j], out);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        if n * params.len() >= 1 << 14 {
            y.as_mut_slice().par_chunks_mut(n).enumerate().for_each(fill);
        } else {
            y.as_mut_slice().chunks_mut(n).enumerate().for_each(fill);
        }
    }
    #[cfg(not(feature = "parallel"))]
    y.as_mut_slice().chunks_mut(n).enumerate().for_each(fill);

    if !y.iter().all(|x| x.is_finite()) {
        return Err(Error::Model(format!("non-finite gradient from {}", model.descriptor())));
    }
    Ok(y)
}

/// Hamiltonian value per parameter column.
pub fn hamiltonians(model: &dyn HamiltonianModel, r: &Mat, params: &[Vec<f64>]) -> Result<Vec<f64>> {
    check_rows(model, r, params)?;
    Ok((0..params.len()).map(|j| model.hamiltonian(col(r, j), &params[j])).collect())
}

/// Full-order vector field `J grad H` per column.
pub fn vector_field(model: &dyn HamiltonianModel, r: &Mat, params: &[Vec<f64>]) -> Result<Mat> {
    Ok(apply_j_unchecked(&gradient_block(model, r, params)?, false))
}

/// Initial states `u_0(eta_j)` as columns.
pub fn initial_block(model: &dyn HamiltonianModel, params: &[Vec<f64>]) -> Mat {
    let n = model.dim();
    let mut r = Mat::zeros(n, params.len());
    for (j, eta) in params.iter().enumerate() {
        r.column_mut(j).copy_from_slice(&model.initial(eta));
    }
    r
}

/// Largest relative mismatch between `gradient` and central differences of `hamiltonian`
/// along `directions` random unit probes, with step `h = rel_step (1 + |u|)`.
pub fn gradient_fd_mismatch(model: &dyn HamiltonianModel, u: &[f64], eta: &[f64], directions: &[Vec<f64>], rel_step: f64) -> f64 {
    let n = u.len();
    let mut g = vec![0.0; n];
    model.gradient(u, eta, &mut g);
    let unorm = u.iter().map(|x| x * x).sum::<f64>().sqrt();
    let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    let h = rel_step * (1.0 + unorm);
    let mut worst: f64 = 0.0;
    for d in directions {
        let plus: Vec<f64> = u.iter().zip(d).map(|(a, b)| a + h * b).collect();
        let minus: Vec<f64> = u.iter().zip(d).map(|(a, b)| a - h * b).collect();
        let fd = (model.hamiltonian(&plus, eta) - model.hamiltonian(&minus, eta)) / (2.0 * h);
        let exact: f64 = g.iter().zip(d).map(|(a, b)| a * b).sum();
        let scale = gnorm.max(1e-12);
        worst = worst.max((fd - exact).abs() / scale);
    }
    worst
}

/// A model together with the parameter samples `eta_1..eta_p` it is evaluated on.
#[derive(Clone, Copy)]
pub struct Ensemble<'a> {
    pub model: &'a dyn HamiltonianModel,
    pub params: &'a [Vec<f64>],
}

impl<'a> Ensemble<'a> {
    pub fn new(model: &'a dyn HamiltonianModel, params: &'a [Vec<f64>]) -> Self {
        Self { model, params }
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn gradient_block(&self, r: &Mat) -> Result<Mat> {
        gradient_block(self.model, r, self.params)
    }

    pub fn hamiltonians(&self, r: &Mat) -> Result<Vec<f64>> {
        hamiltonians(self.model, r, self.params)
    }

    pub fn vector_field(&self, r: &Mat) -> Result<Mat> {
        vector_field(self.model, r, self.params)
    }

    pub fn initial_block(&self) -> Mat {
        initial_block(self.model, self.params)
    }
}
