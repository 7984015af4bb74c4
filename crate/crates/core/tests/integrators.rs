use osdrb::cayley::{cayley_dense, GaugeMatrix};
use osdrb::experiment::studies::{basis_order_study, dyadic_steps, initial_reduced_state, oscillator_grid};
use osdrb::flow::basis_velocity;
use osdrb::integrators::*;
use osdrb::models::*;
use osdrb::sampling::*;
use osdrb::symplectic::*;
use osdrb::{Error, Mat};

struct ZeroField;

impl BasisField for ZeroField {
    fn velocity(&self, _c: f64, u: &OrthosymplecticBasis) -> osdrb::Result<Mat> {
        Ok(Mat::zeros(u.full().nrows(), u.full().ncols()))
    }
}

/// `H = 0`: no basis motion and no coefficient motion.
struct Still(usize);

impl HamiltonianModel for Still {
    fn dim(&self) -> usize {
        self.0
    }
    fn hamiltonian(&self, _: &[f64], _: &[f64]) -> f64 {
        0.0
    }
    fn gradient(&self, _: &[f64], _: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn initial(&self, _: &[f64]) -> Vec<f64> {
        vec![0.0; self.0]
    }
    fn descriptor(&self) -> String {
        "still".into()
    }
}

fn all_schemes() -> Vec<BasisScheme> {
    let mut out = Vec::new();
    for m in [BasisMethod::RkmkCayley, BasisMethod::RkmkExp, BasisMethod::Tangent] {
        for t in [ButcherTableau::euler(), ButcherTableau::explicit_midpoint(), ButcherTableau::rk4()] {
            out.push(BasisScheme::new(m, t));
        }
    }
    out
}

fn frozen_setup(seed: u64) -> (LinearOscillator, Vec<Vec<f64>>, OrthosymplecticBasis, CoefficientMatrix) {
    let mut r = rng(seed);
    let model = LinearOscillator::graded(10);
    let params = vec![Vec::new(); 6];
    let u = random_orthosymplectic(&mut r, 20, 2);
    let z = CoefficientMatrix(random_matrix(&mut r, 6, 4));
    (model, params, u, z)
}

#[test]
fn stationary_field_leaves_basis_unchanged() {
    let u = random_orthosymplectic(&mut rng(1), 16, 2);
    for scheme in all_schemes() {
        let next = basis_step(&u, &ZeroField, 0.1, &scheme, None).unwrap();
        assert_eq!(next.full(), u.full(), "{} {}", scheme.method.name(), scheme.tableau.name);
    }
}

#[test]
fn cayley_euler_matches_dense_oracle() {
    let (model, params, u, z) = frozen_setup(2);
    let sys = Ensemble::new(&model, &params);
    let dt = 0.05;
    let f = basis_velocity(&u, &z, &sys, RANK_TOL).unwrap().data;
    let l = &f * u.full().transpose() - u.full() * f.transpose();
    let want = cayley_dense(&(l * dt)).unwrap() * u.full();
    let got = rkmk_cayley_step(&u, &z, &sys, dt, &ButcherTableau::euler(), RANK_TOL).unwrap();
    assert!((got.full() - want).norm() <= 1e-12);
}

#[test]
fn tangent_euler_with_zero_gauge_equals_cayley_euler() {
    let (model, params, mut u, z) = frozen_setup(3);
    let sys = Ensemble::new(&model, &params);
    let mut v = u.clone();
    for _ in 0..50 {
        u = rkmk_cayley_step(&u, &z, &sys, 0.02, &ButcherTableau::euler(), RANK_TOL).unwrap();
        v = tangent_rk_step(&v, &z, &sys, 0.02, &ButcherTableau::euler(), &GaugeMatrix::zero(2), RANK_TOL).unwrap();
        assert!((u.full() - v.full()).norm() <= 1e-12);
    }
}

#[test]
fn exp_and_cayley_euler_differ_at_second_order() {
    let (model, params, u, z) = frozen_setup(4);
    let sys = Ensemble::new(&model, &params);
    let diff = |dt: f64| {
        let a = rkmk_cayley_step(&u, &z, &sys, dt, &ButcherTableau::euler(), RANK_TOL).unwrap();
        let b = rkmk_exp_step(&u, &z, &sys, dt, &ButcherTableau::euler(), 0, RANK_TOL).unwrap();
        (a.full() - b.full()).norm()
    };
    let (d1, d2) = (diff(0.02), diff(0.01));
    assert!(d1 > 1e-12, "maps should not coincide bitwise");
    let order = (d1 / d2).log2();
    assert!(order >= 1.8, "local difference order {order}");
}

#[test]
fn high_order_exp_agrees_with_cayley_at_scheme_order() {
    let (model, params, u, z) = frozen_setup(5);
    let sys = Ensemble::new(&model, &params);
    let rk4 = ButcherTableau::rk4();
    let diff = |dt: f64| {
        let a = rkmk_cayley_step(&u, &z, &sys, dt, &rk4, RANK_TOL).unwrap();
        let b = rkmk_exp_step(&u, &z, &sys, dt, &rk4, 8, RANK_TOL).unwrap();
        (a.full() - b.full()).norm()
    };
    let (d1, d2) = (diff(0.04), diff(0.02));
    assert!((d1 / d2).log2() >= 4.5, "one-step differences {d1:e} {d2:e}");
}

#[test]
fn basis_schemes_converge_at_tableau_order() {
    let dts = dyadic_steps(1.0, 5..=8);
    for (method, tableau, min) in [
        (BasisMethod::RkmkCayley, ButcherTableau::heun(), 1.8),
        (BasisMethod::RkmkExp, ButcherTableau::rk4(), 3.8),
        (BasisMethod::Tangent, ButcherTableau::rk4(), 3.8),
        (BasisMethod::RkmkCayley, ButcherTableau::euler(), 0.8),
    ] {
        let study = basis_order_study(&BasisScheme::new(method, tableau), &dts, 1.0, 11).unwrap();
        assert!(study.order >= min, "{}: order {} errors {:?}", study.label, study.order, study.errors);
    }
}

#[test]
fn manifold_defects_stay_small_over_long_runs() {
    let (model, params, u0, z) = frozen_setup(6);
    let sys = Ensemble::new(&model, &params);
    let field = FrozenCoefficients::new(sys, &z, RANK_TOL).unwrap();
    for scheme in [BasisScheme::new(BasisMethod::RkmkCayley, ButcherTableau::rk4()), BasisScheme::new(BasisMethod::Tangent, ButcherTableau::explicit_midpoint())] {
        let mut u = u0.clone();
        for step in 0..10_000 {
            u = basis_step(&u, &field, 1e-3, &scheme, None).unwrap();
            if step % 1000 == 0 {
                assert!(u.check(1e-9).pass);
            }
        }
        assert!(u.check(1e-7).pass, "{}", scheme.method.name());
    }
}

#[test]
fn midpoint_on_identity_oscillator_is_a_cayley_rotation() {
    let model = LinearOscillator::identity(8);
    let params = vec![Vec::new(); 5];
    let sys = Ensemble::new(&model, &params);
    let mut r = rng(7);
    let u = random_orthosymplectic(&mut r, 16, 2);
    let z = CoefficientMatrix(random_matrix(&mut r, 5, 4));
    let dt = 0.1;
    let (next, _) = implicit_midpoint_z(&u, &z, &sys, dt, MidpointOptions { tol: 1e-15, max_iters: 200 }).unwrap();
    let rot = cayley_dense(&(j_dense(2) * dt)).unwrap();
    let want = z.data() * rot.transpose();
    assert!((next.data() - want).norm() <= 1e-13);
}

#[test]
fn midpoint_map_is_symplectic_and_conserves_quadratic_invariants() {
    let model = LinearOscillator::graded(8);
    let params = vec![Vec::new(); 4];
    let sys = Ensemble::new(&model, &params);
    let mut r = rng(8);
    let k = 2;
    let u = random_orthosymplectic(&mut r, 16, k);
    let opts = MidpointOptions { tol: 1e-15, max_iters: 300 };
    // one-step map from the images of the unit rows
    let eye = CoefficientMatrix(Mat::identity(2 * k, 2 * k));
    let params_eye = vec![Vec::new(); 2 * k];
    let sys_eye = Ensemble::new(&model, &params_eye);
    let (img, _) = implicit_midpoint_z(&u, &eye, &sys_eye, 0.1, opts).unwrap();
    let m = img.data().transpose();
    let j = j_dense(k);
    assert!((m.transpose() * &j * &m - &j).norm() <= 1e-12);
    // reduced energy z^T (U^T K U) z / 2 is a quadratic invariant of the linear reduced system
    let kdiag = Mat::from_diagonal(&nalgebra::DVector::from_vec(model.stiffness().to_vec()));
    let kr = u.full().transpose() * kdiag * u.full();
    let energy = |z: &Mat| (0..z.nrows()).map(|i| (z.row(i) * &kr * z.row(i).transpose())[(0, 0)]).collect::<Vec<_>>();
    let mut z = CoefficientMatrix(random_matrix(&mut r, 4, 2 * k));
    let e0 = energy(z.data());
    for _ in 0..20 {
        z = implicit_midpoint_z(&u, &z, &sys, 0.05, opts).unwrap().0;
        for (a, b) in energy(z.data()).iter().zip(&e0) {
            assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0));
        }
    }
}

#[test]
fn midpoint_keeps_equilibrium() {
    let model = LinearOscillator::graded(6);
    let params = vec![Vec::new(); 3];
    let sys = Ensemble::new(&model, &params);
    let u = random_orthosymplectic(&mut rng(9), 12, 2);
    let z = CoefficientMatrix(Mat::zeros(3, 4));
    let (next, _) = implicit_midpoint_z(&u, &z, &sys, 0.1, MidpointOptions::default()).unwrap();
    assert_eq!(next.data(), z.data());
}

#[test]
fn partitioned_step_with_still_model_is_identity() {
    let model = Still(16);
    let params = vec![Vec::new(); 6];
    let sys = Ensemble::new(&model, &params);
    let mut r = rng(10);
    let state = ReducedState {
        basis: random_orthosymplectic(&mut r, 16, 2),
        coefficients: CoefficientMatrix(random_matrix(&mut r, 6, 4)),
        time: 0.0,
    };
    for scheme in all_schemes() {
        let (next, rep) = partitioned_step(&state, &sys, 0.1, &scheme, RANK_TOL, MidpointOptions::default()).unwrap();
        assert_eq!(next.basis.full(), state.basis.full());
        assert_eq!(next.coefficients.data(), state.coefficients.data());
        assert!(rep.accepted && rep.orth_defect <= 1e-14);
    }
}

#[test]
fn integrate_dynamical_records_reports_and_drift() {
    let model = LinearOscillator::graded(12);
    let params = oscillator_grid().points();
    let sys = Ensemble::new(&model, &params);
    let state = initial_reduced_state(&sys, 2).unwrap();
    let scheme = BasisScheme::new(BasisMethod::RkmkCayley, ButcherTableau::explicit_midpoint());
    let opts = RunOptions { dt: 0.01, final_time: 0.5, rank_tol: RANK_TOL, midpoint: MidpointOptions::default(), save_stride: 10 };
    let run = integrate_dynamical(state, &sys, &scheme, opts).unwrap();
    assert_eq!(run.reports.len(), 50);
    assert!(run.reports.iter().all(|r| r.accepted));
    assert_eq!(run.drift.len(), 6);
    assert!((run.final_state.time - 0.5).abs() < 1e-12);
    assert!(run.max_orth_defect <= 1e-12 && run.max_sympl_defect <= 1e-12);
    assert!(run.drift.iter().all(|d| d.drift <= d.per_parameter + 1e-15));
}

#[test]
fn failed_steps_are_retried_then_aborted() {
    let model = LinearOscillator::graded(12);
    let params = oscillator_grid().points();
    let sys = Ensemble::new(&model, &params);
    let scheme = BasisScheme::new(BasisMethod::RkmkCayley, ButcherTableau::explicit_midpoint());
    let run = |iters: usize| {
        let state = initial_reduced_state(&sys, 2).unwrap();
        let opts = RunOptions { dt: 0.05, final_time: 0.5, rank_tol: RANK_TOL, midpoint: MidpointOptions { tol: 1e-12, max_iters: iters }, save_stride: 1 };
        integrate_dynamical(state, &sys, &scheme, opts)
    };
    match run(1) {
        Err(Error::Step { index, source }) => {
            assert_eq!(index, 1);
            assert!(source.is_step_size_related());
        }
        other => panic!("expected an abort at step 1, got {other:?}"),
    }
    // some iteration cap fails at dt but succeeds at dt / 2
    let retried = (2..40).filter_map(|n| run(n).ok()).find(|r| r.reports.iter().any(|rep| !rep.accepted));
    let r = retried.expect("a cap that triggers a successful retry");
    let rejected = r.reports.iter().filter(|rep| !rep.accepted).count();
    assert_eq!(r.reports.len(), 10 + 2 * rejected);
}

#[test]
fn full_order_solver_cases() {
    let n = 32;
    let swe = SweModel::new(SweConfig { grid_points: n, ..SweConfig::desk() }).unwrap();
    let params = vec![vec![0.0, 1.0]];
    let dt = 1e-3;
    let one = full_order_solve(&swe, &params, dt, dt, 1, MidpointOptions::default()).unwrap();
    assert_eq!(one.times.len(), 2);
    let s = one.final_state();
    for i in 0..n {
        assert!((s[(i, 0)] - 1.0).abs() <= 1e-14);
        assert!((s[(n + i, 0)] + dt).abs() <= 1e-14);
    }

    let osc = LinearOscillator::graded(10);
    let ps = oscillator_grid().points();
    let traj = full_order_solve(&osc, &ps, 0.01, 1.0, 10, MidpointOptions { tol: 1e-15, max_iters: 200 }).unwrap();
    assert_eq!(traj.times.len(), 11);
    let h0 = hamiltonians(&osc, &traj.states[0], &ps).unwrap();
    let h1 = hamiltonians(&osc, traj.final_state(), &ps).unwrap();
    for (a, b) in h1.iter().zip(&h0) {
        assert!((a - b).abs() <= 1e-11 * b.abs().max(1.0));
    }

    let still = Still(8);
    let zp = vec![Vec::new(); 2];
    let t = full_order_solve(&still, &zp, 0.1, 1.0, 3, MidpointOptions::default()).unwrap();
    assert_eq!(t.final_state(), &Mat::zeros(8, 2));
    assert_eq!(t.times.len(), 5);
}

#[test]
fn tableau_validation_and_lookup() {
    for name in ["euler", "midpoint", "heun", "rk4"] {
        let t = ButcherTableau::by_name(name).unwrap();
        assert!((t.b.iter().sum::<f64>() - 1.0).abs() < 1e-15);
    }
    assert!(matches!(ButcherTableau::by_name("rk7"), Err(Error::Config(_))));
    assert!(ButcherTableau::new("bad", vec![vec![], vec![0.5]], vec![0.3, 0.3], 1).is_err());
    assert!(ButcherTableau::new("implicit", vec![vec![0.5]], vec![1.0], 1).is_err());
    assert!(matches!(BasisMethod::by_name("qr"), Err(Error::Config(_))));
    assert_eq!(BasisScheme::new(BasisMethod::RkmkExp, ButcherTableau::rk4()).q_bch, 3);
    assert_eq!(BasisScheme::new(BasisMethod::RkmkExp, ButcherTableau::euler()).q_bch, 1);
}
