//! Reduced dynamics on the orthosymplectic manifold: basis velocity, coefficient
//! right-hand side, symplectic tangent projection and conservation diagnostics.

use nalgebra::SymmetricEigen;
use serde::Serialize;

use crate::cayley::{SkewHamiltonianFactors, TangentFlavor, TangentVector};
use crate::error::{Error, Result};
use crate::models::Ensemble;
use crate::symplectic::{apply_j_right_unchecked, apply_j_unchecked, CoefficientMatrix, OrthosymplecticBasis, ReducedState};
use crate::Mat;

/// Extreme eigenvalues of `S = Z^T Z + J^T Z^T Z J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullRankMonitor {
    pub smin: f64,
    pub smax: f64,
    pub ok: bool,
}

fn gram_matrix(z: &Mat) -> Mat {
    let c = z.transpose() * z;
    let jc = apply_j_unchecked(&c, true);
    &c + apply_j_right_unchecked(&jc, false)
}

pub fn fullrank_monitor(z: &CoefficientMatrix, rank_tol: f64) -> FullRankMonitor {
    let s = gram_matrix(z.data());
    let eig = SymmetricEigen::new(s).eigenvalues;
    let smax = eig.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let smin = eig.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let smin = smin.max(0.0);
    FullRankMonitor { smin, smax, ok: smax > 0.0 && smin >= rank_tol * smax }
}

/// Factored Gram matrix `S`, checked against the full-rank condition.
#[derive(Debug, Clone)]
pub struct GramS {
    inverse: Mat,
    pub monitor: FullRankMonitor,
}

impl GramS {
    pub fn new(z: &CoefficientMatrix, rank_tol: f64) -> Result<Self> {
        let s = gram_matrix(z.data());
        let eig = SymmetricEigen::new(s);
        let smax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        let smin = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b)).max(0.0);
        let monitor = FullRankMonitor { smin, smax, ok: smax > 0.0 && smin >= rank_tol * smax };
        if !monitor.ok {
            return Err(Error::Overapproximation { ratio: if smax > 0.0 { smin / smax } else { 0.0 } });
        }
        let inv_diag = eig.eigenvalues.map(|l| 1.0 / l);
        let inverse = &eig.eigenvectors * Mat::from_diagonal(&inv_diag) * eig.eigenvectors.transpose();
        Ok(Self { inverse, monitor })
    }

    /// `B S^{-1}`.
    pub fn solve_right(&self, b: &Mat) -> Mat {
        b * &self.inverse
    }
}

/// Basis velocity from a precomputed gradient block `Y = grad H(U Z^T)`:
/// `F = (I - U U^T)(J Y Z - Y Z J^T) S^{-1}`.
pub fn velocity_from_gradient(u: &Mat, z: &Mat, y: &Mat, gram: &GramS) -> Mat {
    let yz = y * z;
    let b = apply_j_unchecked(&yz, false) - apply_j_right_unchecked(&yz, true);
    let b = &b - u * (u.transpose() * &b);
    gram.solve_right(&b)
}

fn check_pair(u: &OrthosymplecticBasis, z: &CoefficientMatrix, sys: &Ensemble) -> Result<()> {
    if z.data().ncols() != u.full().ncols() {
        return Err(Error::Dimension(format!("Z has {} columns, basis has {}", z.data().ncols(), u.full().ncols())));
    }
    if z.n_params() != sys.n_params() || u.full().nrows() != sys.dim() {
        return Err(Error::Dimension(format!(
            "state ({} x {}, p = {}) does not match model (2m = {}, p = {})",
            u.full().nrows(),
            u.full().ncols(),
            z.n_params(),
            sys.dim(),
            sys.n_params()
        )));
    }
    Ok(())
}

/// Horizontal basis velocity `F(U)` for fixed coefficients.
pub fn basis_velocity(u: &OrthosymplecticBasis, z: &CoefficientMatrix, sys: &Ensemble, rank_tol: f64) -> Result<TangentVector> {
    check_pair(u, z, sys)?;
    let gram = GramS::new(z, rank_tol)?;
    let y = sys.gradient_block(&(u.full() * z.data().transpose()))?;
    Ok(TangentVector::assume(velocity_from_gradient(u.full(), z.data(), &y, &gram), TangentFlavor::Horizontal))
}

/// Factors `gamma = [F | -U]`, `delta = [U | F]` of `L(U) = F U^T - U F^T`.
pub fn lie_algebra_field(u: &OrthosymplecticBasis, f: &TangentVector) -> Result<SkewHamiltonianFactors> {
    if f.flavor != TangentFlavor::Horizontal {
        return Err(Error::Flavor("lie_algebra_field needs a horizontal velocity".into()));
    }
    if f.data.shape() != u.full().shape() {
        return Err(Error::Dimension("velocity and basis shapes differ".into()));
    }
    Ok(lie_factors_raw(u.full(), &f.data))
}

pub(crate) fn lie_factors_raw(u: &Mat, f: &Mat) -> SkewHamiltonianFactors {
    let (n, c) = u.shape();
    let mut gamma = Mat::zeros(n, 2 * c);
    let mut delta = Mat::zeros(n, 2 * c);
    gamma.columns_mut(0, c).copy_from(f);
    gamma.columns_mut(c, c).copy_from(&(-u));
    delta.columns_mut(0, c).copy_from(u);
    delta.columns_mut(c, c).copy_from(f);
    SkewHamiltonianFactors { alpha: gamma, beta: delta }
}

/// Coefficient right-hand side from a gradient block: rows `(J U^T y_j)^T`.
pub fn coefficient_rhs_from_gradient(u: &Mat, y: &Mat) -> Mat {
    apply_j_right_unchecked(&(y.transpose() * u), true)
}

/// `dZ/dt` with row `j = (J_{2k} U^T grad H(U Z_j^T; eta_j))^T`.
pub fn coefficient_rhs(u: &OrthosymplecticBasis, z: &CoefficientMatrix, sys: &Ensemble) -> Result<Mat> {
    check_pair(u, z, sys)?;
    let y = sys.gradient_block(&(u.full() * z.data().transpose()))?;
    Ok(coefficient_rhs_from_gradient(u.full(), &y))
}

/// Symplectic projection of `w` (`2m x p`) onto the tangent space at `U Z^T`:
/// `(I - U U^T)(w Z + J w Z J^T) S^{-1} Z^T + U U^T w`.
pub fn tangent_projection(u: &OrthosymplecticBasis, z: &CoefficientMatrix, w: &Mat, rank_tol: f64) -> Result<Mat> {
    let um = u.full();
    if w.nrows() != um.nrows() || w.ncols() != z.n_params() || z.data().ncols() != um.ncols() {
        return Err(Error::Dimension(format!(
            "w is {}x{}, expected {}x{}",
            w.nrows(),
            w.ncols(),
            um.nrows(),
            z.n_params()
        )));
    }
    let gram = GramS::new(z, rank_tol)?;
    let wz = w * z.data();
    let b = &wz + apply_j_unchecked(&apply_j_right_unchecked(&wz, true), false);
    let b = &b - um * (um.transpose() * &b);
    Ok(gram.solve_right(&b) * z.data().transpose() + um * (um.transpose() * w))
}

/// `sum_j H(U Z_j^T; eta_j)`.
pub fn hamiltonian_sum(state: &ReducedState, sys: &Ensemble) -> Result<f64> {
    Ok(sys.hamiltonians(&state.reconstruct())?.iter().sum())
}

/// `sum_j <grad H_j, dR_j/dt>` along the coupled reduced flow.
pub fn energy_rate(state: &ReducedState, sys: &Ensemble, rank_tol: f64) -> Result<f64> {
    let u = state.basis.full();
    let z = state.coefficients.data();
    check_pair(&state.basis, &state.coefficients, sys)?;
    let gram = GramS::new(&state.coefficients, rank_tol)?;
    let y = sys.gradient_block(&(u * z.transpose()))?;
    let f = velocity_from_gradient(u, z, &y, &gram);
    let zdot = coefficient_rhs_from_gradient(u, &y);
    let rdot = f * z.transpose() + u * zdot.transpose();
    Ok(y.dot(&rdot))
}
