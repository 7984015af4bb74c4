//! Browser bindings: a shallow-water dynamical reduced basis run that can be
//! stepped interactively, a retraction Lipschitz probe, and the complex SVD
//! spectrum of the initial data.

use wasm_bindgen::prelude::*;

use osdrb::cayley::{retract, TangentFlavor, TangentVector};
use osdrb::experiment::gauge;
use osdrb::integrators::{full_order_solve, integrate_dynamical, BasisMethod, BasisScheme, ButcherTableau, DriftSample, MidpointOptions, RunOptions};
use osdrb::models::{Ensemble, HamiltonianModel, ParameterGrid, SweConfig, SweModel};
use osdrb::sampling::{random_horizontal, random_orthosymplectic, rng};
use osdrb::symplectic::{complexify, complex_svd_truncated, orthosymplectic_from_complex_svd, ReducedState, RANK_TOL, TOL_MANIFOLD};

fn js_err(e: osdrb::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn params(samples_beta: usize) -> Result<Vec<Vec<f64>>, JsError> {
    Ok(ParameterGrid::new(vec![(0.1, 0.15), (0.2, 1.5)], vec![2, samples_beta]).map_err(js_err)?.points())
}

/// Shallow-water run with the dynamical reduced basis, advanced in chunks.
#[wasm_bindgen]
pub struct SweDemo {
    model: SweModel,
    params: Vec<Vec<f64>>,
    state: ReducedState,
    reference: osdrb::Mat,
    scheme: BasisScheme,
    dt: f64,
    h0: Vec<f64>,
    drift: Vec<f64>,
    max_defect: f64,
}

#[wasm_bindgen]
impl SweDemo {
    /// `method` is `rkmk-cay`, `rkmk-exp` or `tangent`; `two_k` the reduced dimension.
    #[wasm_bindgen(constructor)]
    pub fn new(grid_points: usize, samples_beta: usize, two_k: usize, method: &str, dt: f64) -> Result<SweDemo, JsError> {
        let model = SweModel::new(SweConfig { grid_points, dt, ..SweConfig::desk() }).map_err(js_err)?;
        let params = params(samples_beta)?;
        let sys = Ensemble::new(&model, &params);
        let r0 = sys.initial_block();
        if two_k % 2 != 0 || two_k == 0 {
            return Err(JsError::new("2k must be even and positive"));
        }
        let k = two_k / 2;
        let (basis, coefficients, _) = orthosymplectic_from_complex_svd(&r0, k, TOL_MANIFOLD).map_err(js_err)?;
        let method = BasisMethod::by_name(method).map_err(js_err)?;
        let mut scheme = BasisScheme::new(method, ButcherTableau::explicit_midpoint());
        if method == BasisMethod::Tangent {
            scheme.gauge = Some(gauge(k, 0.0).map_err(js_err)?);
        }
        let state = ReducedState { basis, coefficients, time: 0.0 };
        let h0 = sys.hamiltonians(&state.reconstruct()).map_err(js_err)?;
        Ok(SweDemo {
            reference: r0,
            model,
            params,
            state,
            scheme,
            dt,
            h0,
            drift: vec![0.0],
            max_defect: 0.0,
        })
    }

    /// Advances both the reduced model and the full-order reference by `steps` steps.
    pub fn advance(&mut self, steps: usize) -> Result<(), JsError> {
        if steps == 0 {
            return Ok(());
        }
        let sys = Ensemble::new(&self.model, &self.params);
        let span = steps as f64 * self.dt;
        let opts = RunOptions { dt: self.dt, final_time: span, rank_tol: RANK_TOL, midpoint: MidpointOptions::default(), save_stride: steps };
        let run = integrate_dynamical(self.state.clone(), &sys, &self.scheme, opts).map_err(js_err)?;
        self.max_defect = self.max_defect.max(run.max_orth_defect).max(run.max_sympl_defect);
        self.state = run.final_state;

        // reference: continue from the current full state
        let shifted = ShiftedInitial { inner: &self.model, start: &self.reference };
        let idx: Vec<Vec<f64>> = (0..self.params.len()).map(|j| vec![j as f64]).collect();
        let traj = full_order_solve(&shifted, &idx, self.dt, span, steps, MidpointOptions::default()).map_err(js_err)?;
        self.reference = traj.final_state().clone();

        let h = sys.hamiltonians(&self.state.reconstruct()).map_err(js_err)?;
        self.drift.push(DriftSample::new(self.state.time, &h, &self.h0).drift);
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.state.time
    }

    /// Water height of parameter `j` from the reduced model.
    pub fn reduced_height(&self, j: usize) -> Vec<f64> {
        let n = self.model.config.grid_points;
        let r = self.state.basis.full() * self.state.coefficients.data().row(j).transpose();
        r.as_slice()[..n].to_vec()
    }

    /// Water height of parameter `j` from the full-order reference.
    pub fn reference_height(&self, j: usize) -> Vec<f64> {
        let n = self.model.config.grid_points;
        self.reference.column(j).as_slice()[..n].to_vec()
    }

    pub fn grid(&self) -> Vec<f64> {
        self.model.grid()
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    /// Frobenius error of `U Z^T` against the reference.
    pub fn error(&self) -> f64 {
        (&self.reference - self.state.reconstruct()).norm()
    }

    /// Hamiltonian drift after each `advance` call.
    pub fn drift(&self) -> Vec<f64> {
        self.drift.clone()
    }

    pub fn max_manifold_defect(&self) -> f64 {
        self.max_defect
    }
}

/// Model whose initial condition for "parameter" `j` is column `j` of a given block.
struct ShiftedInitial<'a> {
    inner: &'a SweModel,
    start: &'a osdrb::Mat,
}

impl HamiltonianModel for ShiftedInitial<'_> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn hamiltonian(&self, u: &[f64], eta: &[f64]) -> f64 {
        self.inner.hamiltonian(u, eta)
    }
    fn gradient(&self, u: &[f64], eta: &[f64], out: &mut [f64]) {
        self.inner.gradient(u, eta, out)
    }
    fn initial(&self, eta: &[f64]) -> Vec<f64> {
        self.start.column(eta[0] as usize).iter().copied().collect()
    }
    fn descriptor(&self) -> String {
        self.inner.descriptor()
    }
}

/// Largest ratio `||R_Q(V) - R_Q(W)|| / ||V - W||` over random horizontal pairs of size `scale`.
#[wasm_bindgen]
pub fn retraction_lipschitz(two_m: usize, k: usize, scale: f64, samples: usize, seed: u64) -> Result<f64, JsError> {
    if two_m % 2 != 0 || k == 0 || 2 * k > two_m {
        return Err(JsError::new("need even 2m and 1 <= k <= m"));
    }
    let mut r = rng(seed);
    let q = random_orthosymplectic(&mut r, two_m, k);
    let s = gauge(k, 0.0).map_err(js_err)?;
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let v = TangentVector::assume(random_horizontal(&mut r, &q, scale), TangentFlavor::Horizontal);
        let w = TangentVector::assume(random_horizontal(&mut r, &q, scale), TangentFlavor::Horizontal);
        let d = (retract(&q, &v, &s).map_err(js_err)?.full() - retract(&q, &w, &s).map_err(js_err)?.full()).norm();
        worst = worst.max(d / (&v.data - &w.data).norm());
    }
    Ok(worst)
}

/// Singular values (descending) of the complexified initial shallow-water states.
#[wasm_bindgen]
pub fn initial_spectrum(grid_points: usize, samples_beta: usize) -> Result<Vec<f64>, JsError> {
    let model = SweModel::new(SweConfig { grid_points, ..SweConfig::desk() }).map_err(js_err)?;
    let params = params(samples_beta)?;
    let r0 = Ensemble::new(&model, &params).initial_block();
    let c = complexify(&r0).map_err(js_err)?;
    Ok(complex_svd_truncated(&c, 1).map_err(js_err)?.singular_values)
}
