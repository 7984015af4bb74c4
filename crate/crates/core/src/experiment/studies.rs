//! Numerical studies shared by the CLI and the test suites: convergence orders,
//! the Euler equivalence of the two basis integrators, midpoint symplecticity
//! and Hamiltonian drift under refinement.

use serde::Serialize;

use crate::cayley::GaugeMatrix;
use crate::error::Result;
use crate::integrators::{
    basis_step, implicit_midpoint_z, integrate_dynamical, BasisMethod, BasisScheme, ButcherTableau, FrozenCoefficients, MidpointOptions,
    RunOptions,
};
use crate::models::{Ensemble, HamiltonianModel, LinearOscillator, ParameterGrid};
use crate::sampling::{random_matrix, random_orthosymplectic, rng};
use crate::symplectic::{j_dense, orthosymplectic_from_complex_svd, CoefficientMatrix, ReducedState, RANK_TOL, TOL_MANIFOLD};
use crate::Mat;

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Errors against a fine reference and the fitted order.
#[derive(Debug, Clone, Serialize)]
pub struct OrderStudy {
    pub label: String,
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    pub order: f64,
}

/// Step sizes `T 2^-e` for `e` in `exponents`.
pub fn dyadic_steps(final_time: f64, exponents: std::ops::RangeInclusive<u32>) -> Vec<f64> {
    exponents.map(|e| final_time / f64::from(1u32 << e)).collect()
}

/// Setup of the manufactured basis flow: a graded oscillator with coefficients frozen at
/// a random `Z`, starting from a random orthosymplectic basis.
pub struct ManufacturedFlow {
    pub model: LinearOscillator,
    pub params: Vec<Vec<f64>>,
    pub z: CoefficientMatrix,
    pub u0: crate::symplectic::OrthosymplecticBasis,
}

impl ManufacturedFlow {
    pub fn new(m: usize, k: usize, p: usize, seed: u64) -> Self {
        let mut r = rng(seed);
        let u0 = random_orthosymplectic(&mut r, 2 * m, k);
        let z = CoefficientMatrix(random_matrix(&mut r, p, 2 * k));
        let mut stiffness: Vec<f64> = (0..m).map(|i| 1.0 + 4.0 * i as f64 / m as f64).collect();
        stiffness.extend((0..m).map(|i| 5.0 - 3.0 * i as f64 / m as f64));
        let model = LinearOscillator::new(stiffness).expect("positive stiffness");
        Self { model, params: vec![Vec::new(); p], z, u0 }
    }

    pub fn solve(&self, scheme: &BasisScheme, dt: f64, final_time: f64) -> Result<Mat> {
        let sys = Ensemble::new(&self.model, &self.params);
        let field = FrozenCoefficients::new(sys, &self.z, RANK_TOL)?;
        let n = (final_time / dt).round() as usize;
        let mut u = self.u0.clone();
        for _ in 0..n {
            u = basis_step(&u, &field, dt, scheme, None)?;
        }
        Ok(u.into_full())
    }
}

/// Self-convergence of a basis scheme on the manufactured flow; the reference uses `dt_min / 64`.
pub fn basis_order_study(scheme: &BasisScheme, dts: &[f64], final_time: f64, seed: u64) -> Result<OrderStudy> {
    let flow = ManufacturedFlow::new(12, 2, 6, seed);
    let dt_min = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let reference = flow.solve(scheme, dt_min / 64.0, final_time)?;
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        errors.push((flow.solve(scheme, dt, final_time)? - &reference).norm());
    }
    Ok(OrderStudy {
        label: format!("{} {}", scheme.method.name(), scheme.tableau.name),
        dts: dts.to_vec(),
        order: loglog_slope(dts, &errors),
        errors,
    })
}

/// Oscillator parameter grid used by the coupled studies.
pub fn oscillator_grid() -> ParameterGrid {
    ParameterGrid::new(vec![(-0.5, 0.5), (2.0, 8.0)], vec![3, 3]).expect("valid grid")
}

/// Initial reduced state from the complex SVD of the initial block.
pub fn initial_reduced_state(sys: &Ensemble, k: usize) -> Result<ReducedState> {
    let r0 = sys.initial_block();
    let (basis, coefficients, _) = orthosymplectic_from_complex_svd(&r0, k, TOL_MANIFOLD)?;
    Ok(ReducedState { basis, coefficients, time: 0.0 })
}

fn coupled_final(sys: &Ensemble, k: usize, scheme: &BasisScheme, dt: f64, final_time: f64) -> Result<Mat> {
    let state = initial_reduced_state(sys, k)?;
    let opts = RunOptions { dt, final_time, rank_tol: RANK_TOL, midpoint: MidpointOptions::default(), save_stride: usize::MAX };
    Ok(integrate_dynamical(state, sys, scheme, opts)?.final_state.reconstruct())
}

/// Self-convergence of the partitioned coupled scheme on an oscillator, error in `R(T)`.
pub fn partitioned_order_study(scheme: &BasisScheme, dts: &[f64], final_time: f64) -> Result<OrderStudy> {
    let model = LinearOscillator::graded(12);
    let params = oscillator_grid().points();
    let sys = Ensemble::new(&model, &params);
    let k = 2;
    let dt_min = dts.iter().cloned().fold(f64::INFINITY, f64::min);
    let reference = coupled_final(&sys, k, scheme, dt_min / 64.0, final_time)?;
    let mut errors = Vec::with_capacity(dts.len());
    for &dt in dts {
        errors.push((coupled_final(&sys, k, scheme, dt, final_time)? - &reference).norm());
    }
    Ok(OrderStudy {
        label: format!("partitioned {} {}", scheme.method.name(), scheme.tableau.name),
        dts: dts.to_vec(),
        order: loglog_slope(dts, &errors),
        errors,
    })
}

/// Largest per-step Frobenius distance between the Cayley RK-MK and the tangent (gauge zero)
/// Euler basis trajectories of the coupled scheme on an oscillator.
pub fn euler_equivalence(steps: usize, dt: f64) -> Result<f64> {
    let model = LinearOscillator::graded(12);
    let params = oscillator_grid().points();
    let sys = Ensemble::new(&model, &params);
    let cay = BasisScheme::new(BasisMethod::RkmkCayley, ButcherTableau::euler());
    let mut tan = BasisScheme::new(BasisMethod::Tangent, ButcherTableau::euler());
    tan.gauge = Some(GaugeMatrix::zero(2));
    let mut a = initial_reduced_state(&sys, 2)?;
    let mut b = a.clone();
    let mut worst = 0.0f64;
    for _ in 0..steps {
        a = crate::integrators::partitioned_step(&a, &sys, dt, &cay, RANK_TOL, MidpointOptions::default())?.0;
        b = crate::integrators::partitioned_step(&b, &sys, dt, &tan, RANK_TOL, MidpointOptions::default())?.0;
        worst = worst.max((a.basis.full() - b.basis.full()).norm());
    }
    Ok(worst)
}

/// `||M^T J M - J||_F` for the one-step implicit midpoint map of the reduced oscillator
/// `dz/dt = J_{2k} z`, extracted column by column.
pub fn midpoint_symplecticity(k: usize, dt: f64, seed: u64) -> Result<f64> {
    let mut r = rng(seed);
    let m = 4 * k;
    let u = random_orthosymplectic(&mut r, 2 * m, k);
    let model = LinearOscillator::graded(m);
    let params = vec![Vec::new(); 2 * k];
    let sys = Ensemble::new(&model, &params);
    // rows of Z are the unit vectors, so row i of the update is the image of e_i
    let z = CoefficientMatrix(Mat::identity(2 * k, 2 * k));
    let (next, _) = implicit_midpoint_z(&u, &z, &sys, dt, MidpointOptions { tol: 1e-14, max_iters: 200 })?;
    let map = next.data().transpose();
    let j = j_dense(k);
    Ok((map.transpose() * &j * &map - &j).norm())
}

/// Maximum over the run of `|sum_j (H_j(R(t)) - H_j(R(0)))|`.
pub fn max_drift(model: &dyn HamiltonianModel, params: &[Vec<f64>], k: usize, scheme: &BasisScheme, dt: f64, final_time: f64) -> Result<f64> {
    let sys = Ensemble::new(model, params);
    let state = initial_reduced_state(&sys, k)?;
    let opts = RunOptions { dt, final_time, rank_tol: RANK_TOL, midpoint: MidpointOptions::default(), save_stride: 1 };
    let run = integrate_dynamical(state, &sys, scheme, opts)?;
    Ok(run.drift.iter().map(|d| d.drift).fold(0.0, f64::max))
}

