use approx::assert_abs_diff_eq;
use osdrb::cayley::tangent_defects;
use osdrb::flow::*;
use osdrb::models::*;
use osdrb::sampling::*;
use osdrb::symplectic::*;
use osdrb::{Error, Mat};

fn params(p: usize) -> Vec<Vec<f64>> {
    (0..p).map(|j| vec![0.1 * j as f64, 2.0]).collect()
}

fn setup(m: usize, k: usize, p: usize, seed: u64) -> (OrthosymplecticBasis, CoefficientMatrix) {
    let mut r = rng(seed);
    (random_orthosymplectic(&mut r, 2 * m, k), CoefficientMatrix(random_matrix(&mut r, p, 2 * k)))
}

/// Random tangent vector at `U Z^T`: `V Z^T + U W^T` with horizontal `V`.
fn tangent_probe(r: &mut SeededRng, u: &OrthosymplecticBasis, z: &CoefficientMatrix) -> Mat {
    let v = random_horizontal(r, u, 1.0);
    let w = random_matrix(r, z.n_params(), u.full().ncols());
    v * z.data().transpose() + u.full() * w.transpose()
}

#[test]
fn basis_velocity_is_horizontal_for_swe_and_oscillator() {
    let swe = SweModel::new(SweConfig { grid_points: 40, ..SweConfig::desk() }).unwrap();
    let osc = LinearOscillator::graded(40);
    let ps = params(10);
    for model in [&swe as &dyn HamiltonianModel, &osc] {
        let sys = Ensemble::new(model, &ps);
        let (u, mut z) = setup(40, 3, 10, 1);
        z.0.add_scalar_mut(1.0);
        let v = basis_velocity(&u, &z, &sys, RANK_TOL).unwrap();
        let d = tangent_defects(&u, &v.data);
        assert!(d.vertical <= 1e-9 && d.commutation <= 1e-9, "{d:?}");
    }
}

#[test]
fn identity_oscillator_with_state_in_span_gives_zero_velocity() {
    // grad H = u = U Z^T so J Y Z - Y Z J^T lies in range(U)
    let model = LinearOscillator::identity(12);
    let ps = params(6);
    let sys = Ensemble::new(&model, &ps);
    let (u, z) = setup(12, 2, 6, 2);
    let v = basis_velocity(&u, &z, &sys, RANK_TOL).unwrap();
    assert!(v.data.norm() <= 1e-12);
}

#[test]
fn rank_deficient_coefficients_raise_overapproximation() {
    let model = LinearOscillator::identity(8);
    let ps = params(3);
    let sys = Ensemble::new(&model, &ps);
    let (u, _) = setup(8, 2, 3, 3);
    // one nonzero row: S = C + J^T C J has rank 2 < 2k = 4
    let mut z = Mat::zeros(3, 4);
    z[(0, 0)] = 1.0;
    z[(0, 1)] = 0.5;
    let err = basis_velocity(&u, &CoefficientMatrix(z), &sys, RANK_TOL).unwrap_err();
    assert!(matches!(err, Error::Overapproximation { .. }));
}

#[test]
fn lie_algebra_field_properties() {
    let mut r = rng(4);
    let u = random_orthosymplectic(&mut r, 16, 2);
    let zero = osdrb::cayley::TangentVector::horizontal(&u, Mat::zeros(16, 4), 1e-12).unwrap();
    assert!(lie_algebra_field(&u, &zero).unwrap().densify().norm() == 0.0);
    let f = osdrb::cayley::TangentVector::horizontal(&u, random_horizontal(&mut r, &u, 1.0), 1e-10).unwrap();
    let l = lie_algebra_field(&u, &f).unwrap();
    let d = l.densify();
    assert!((&d + d.transpose()).norm() <= 1e-12);
    assert!((&d * u.full() - &f.data).norm() <= 1e-11);
    let (skew, ham) = l.algebra_defects();
    assert!(skew <= 1e-12 && ham <= 1e-10);
}

#[test]
fn coefficient_rhs_for_identity_oscillator_is_canonical() {
    let model = LinearOscillator::identity(10);
    let ps = params(5);
    let sys = Ensemble::new(&model, &ps);
    let (u, z) = setup(10, 2, 5, 5);
    let rhs = coefficient_rhs(&u, &z, &sys).unwrap();
    // row j = (J z_j^T)^T = z_j J^T
    let want = z.data() * j_dense(2).transpose();
    assert!((rhs - want).norm() <= 1e-13);
    let zero = coefficient_rhs(&u, &CoefficientMatrix(Mat::zeros(5, 4)), &sys).unwrap();
    assert_eq!(zero.norm(), 0.0);
}

#[test]
fn coefficient_rhs_on_flat_swe_matches_projected_field() {
    let n = 32;
    let model = SweModel::new(SweConfig { grid_points: n, ..SweConfig::desk() }).unwrap();
    let ps = vec![vec![0.0, 1.0]; 3];
    let sys = Ensemble::new(&model, &ps);
    // flat state lies in span of the canonical embedding of the constant vector
    let mut a = Mat::zeros(2 * n, 1);
    a.view_mut((0, 0), (n, 1)).fill(1.0 / (n as f64).sqrt());
    let u = OrthosymplecticBasis::from_a_block(a, 1e-12).unwrap();
    let r0 = sys.initial_block();
    let z = CoefficientMatrix(r0.transpose() * u.full());
    assert!((u.full() * z.data().transpose() - &r0).norm() <= 1e-12);
    let rhs = coefficient_rhs(&u, &z, &sys).unwrap();
    let projected = (u.full().transpose() * sys.vector_field(&r0).unwrap()).transpose();
    assert!((rhs - projected).norm() <= 1e-12);
}

#[test]
fn tangent_projection_fixes_tangent_vectors_and_range() {
    let (u, z) = setup(15, 2, 8, 6);
    let mut r = rng(7);
    let w = tangent_probe(&mut r, &u, &z);
    assert!((tangent_projection(&u, &z, &w, RANK_TOL).unwrap() - &w).norm() <= 1e-10 * w.norm());
    let m = u.full() * random_matrix(&mut r, 4, 8);
    assert!((tangent_projection(&u, &z, &m, RANK_TOL).unwrap() - &m).norm() <= 1e-12 * m.norm());
}

#[test]
fn tangent_projection_is_idempotent_with_orthogonal_residual() {
    let (u, z) = setup(12, 2, 7, 8);
    let mut r = rng(9);
    let w = random_matrix(&mut r, 24, 7);
    let pw = tangent_projection(&u, &z, &w, RANK_TOL).unwrap();
    let ppw = tangent_projection(&u, &z, &pw, RANK_TOL).unwrap();
    assert!((&ppw - &pw).norm() <= 1e-9 * w.norm());
    let resid = &w - &pw;
    for _ in 0..50 {
        let t = tangent_probe(&mut r, &u, &z);
        assert!(resid.dot(&t).abs() <= 1e-9 * resid.norm() * t.norm());
    }
}

#[test]
fn fullrank_monitor_cases() {
    let z = CoefficientMatrix(Mat::from_row_slice(1, 2, &[1.0, 0.0]));
    let mon = fullrank_monitor(&z, RANK_TOL);
    assert!(mon.ok);
    assert_abs_diff_eq!(mon.smin, 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(mon.smax, 1.0, epsilon = 1e-15);
    // every column a multiple of one vector: rank one with 2k = 4
    let c = random_matrix(&mut rng(10), 5, 1);
    let z = CoefficientMatrix(Mat::from_fn(5, 4, |i, j| c[(i, 0)] * (j + 1) as f64));
    let mon = fullrank_monitor(&z, RANK_TOL);
    assert!(!mon.ok);
    assert!(mon.smin <= 1e-12 * mon.smax);
    let z = CoefficientMatrix(random_matrix(&mut rng(11), 12, 6));
    assert!(fullrank_monitor(&z, RANK_TOL).ok);
}

#[test]
fn hamiltonian_sum_cases() {
    let n = 20;
    let swe = SweModel::new(SweConfig { grid_points: n, ..SweConfig::desk() }).unwrap();
    let ps = vec![vec![0.0, 1.0]; 4];
    let sys = Ensemble::new(&swe, &ps);
    let mut a = Mat::zeros(2 * n, 1);
    a.view_mut((0, 0), (n, 1)).fill(1.0 / (n as f64).sqrt());
    let basis = OrthosymplecticBasis::from_a_block(a, 1e-12).unwrap();
    let z = CoefficientMatrix(sys.initial_block().transpose() * basis.full());
    let state = ReducedState { basis, coefficients: z, time: 0.0 };
    assert_abs_diff_eq!(hamiltonian_sum(&state, &sys).unwrap(), 4.0 * n as f64 / 2.0, epsilon = 1e-12);

    let osc = LinearOscillator::identity(9);
    let ps = params(5);
    let sys = Ensemble::new(&osc, &ps);
    let (basis, z) = setup(9, 2, 5, 12);
    let want = 0.5 * z.data().norm_squared();
    let state = ReducedState { basis, coefficients: z, time: 0.0 };
    assert_abs_diff_eq!(hamiltonian_sum(&state, &sys).unwrap(), want, epsilon = 1e-12);
    let zero = ReducedState { coefficients: CoefficientMatrix(Mat::zeros(5, 4)), ..state };
    assert_eq!(hamiltonian_sum(&zero, &sys).unwrap(), 0.0);
}

#[test]
fn coupled_field_conserves_the_summed_hamiltonian() {
    let swe = SweModel::new(SweConfig { grid_points: 48, ..SweConfig::desk() }).unwrap();
    let ps = ParameterGrid::default().points();
    let sys = Ensemble::new(&swe, &ps);
    let mut r = rng(13);
    for _ in 0..5 {
        let basis = random_orthosymplectic(&mut r, 96, 3);
        let mut z = random_matrix(&mut r, ps.len(), 6) * 0.3;
        z.column_mut(0).add_scalar_mut(8.0);
        let state = ReducedState { basis, coefficients: CoefficientMatrix(z), time: 0.0 };
        let rate = energy_rate(&state, &sys, RANK_TOL).unwrap();
        assert!(rate.abs() <= 1e-9, "rate {rate:e}");
    }
}

#[test]
fn gram_solve_inverts_s() {
    let z = CoefficientMatrix(random_matrix(&mut rng(14), 9, 4));
    let gram = GramS::new(&z, RANK_TOL).unwrap();
    let c = z.data().transpose() * z.data();
    let s = &c + j_dense(2).transpose() * &c * j_dense(2);
    let b = random_matrix(&mut rng(15), 6, 4);
    assert!((gram.solve_right(&b) * &s - &b).norm() <= 1e-12 * b.norm() * s.norm());
}
