//! Dense brute-force cross-checks of the low-rank kernels on random instances.

use rand::Rng;
use serde::Serialize;

use crate::bch::{dexp_inverse_dense, dexp_inverse_truncated, exp_apply_lowrank};
use crate::cayley::{cayley_apply_lowrank, cayley_dense, dcay_inverse_lowrank, inverse_tangent_map, retract, GaugeMatrix, TangentFlavor, TangentVector};
use crate::error::{Error, Result};
use crate::sampling::{random_algebra_factors, random_gauge, random_matrix, random_orthosymplectic, random_tangent, rng, SeededRng};
use crate::Mat;

pub const SUITES: [&str; 6] = ["cayley", "dcay", "bch", "exp", "retraction", "inverse-tangent"];

/// Relative tolerance of every suite.
pub const ORACLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct OracleOutcome {
    pub suite: String,
    pub instances: usize,
    pub max_rel_error: f64,
    pub tol: f64,
    pub pass: bool,
}

fn rel(a: &Mat, b: &Mat) -> f64 {
    (a - b).norm() / b.norm().max(f64::MIN_POSITIVE)
}

/// Random `(2m, k)` with `2m <= 64`, `2k <= 8`, `k <= m / 2`.
fn dims(r: &mut SeededRng) -> (usize, usize) {
    let m = r.random_range(4..=32);
    let k = r.random_range(1..=4.min(m / 2));
    (2 * m, k)
}

fn gauge_or_zero(r: &mut SeededRng, k: usize) -> GaugeMatrix {
    if r.random_bool(0.5) {
        random_gauge(r, k, 0.3)
    } else {
        GaugeMatrix::zero(k)
    }
}

fn upsilon_dense(q: &Mat, theta: &Mat) -> Mat {
    theta * q.transpose() - q * theta.transpose()
}

fn theta_dense(q: &Mat, v: &Mat, s: &GaugeMatrix) -> Mat {
    v + q * (s.matrix() - q.transpose() * v * 0.5)
}

fn instance(suite: &str, r: &mut SeededRng) -> Result<f64> {
    let (two_m, k) = dims(r);
    let pairs = r.random_range(1..=2);
    match suite {
        "cayley" => {
            let om = random_algebra_factors(r, two_m, pairs, 0.5);
            let y = random_matrix(r, two_m, 2 * k);
            let dense = cayley_dense(&om.densify())? * &y;
            Ok(rel(&cayley_apply_lowrank(&om, &y)?, &dense))
        }
        "dcay" => {
            let om = random_algebra_factors(r, two_m, pairs, 0.5);
            let l = random_algebra_factors(r, two_m, k, 1.0);
            let h = om.densify() * 0.5;
            let id = Mat::identity(two_m, two_m);
            let dense = (&id - &h) * l.densify() * (&id + &h);
            Ok(rel(&dcay_inverse_lowrank(&om, &l)?.densify(), &dense))
        }
        "bch" => {
            let q = r.random_range(1..=6);
            let om = random_algebra_factors(r, two_m, pairs, 0.3);
            let l = random_algebra_factors(r, two_m, k, 1.0);
            let dense = dexp_inverse_dense(&om.densify(), &l.densify(), q);
            Ok(rel(&dexp_inverse_truncated(&om, &l, q)?.densify(), &dense))
        }
        "exp" => {
            let om = random_algebra_factors(r, two_m, pairs, 0.3);
            let y = random_matrix(r, two_m, 2 * k);
            let dense = om.densify().exp() * &y;
            Ok(rel(&exp_apply_lowrank(&om, &y)?, &dense))
        }
        "retraction" => {
            let q = random_orthosymplectic(r, two_m, k);
            let v = random_tangent(r, &q, 0.4);
            let s = gauge_or_zero(r, k);
            let th = theta_dense(q.full(), &v, &s);
            let dense = cayley_dense(&upsilon_dense(q.full(), &th))? * q.full();
            let p = retract(&q, &TangentVector::assume(v, TangentFlavor::General), &s)?;
            Ok(rel(p.full(), &dense))
        }
        "inverse-tangent" => {
            // W = dR_Q|_V (V~) from the dense derivative of the Cayley map, then invert.
            let q = random_orthosymplectic(r, two_m, k);
            let qm = q.full();
            let v = random_tangent(r, &q, 0.3);
            let vt = random_tangent(r, &q, 1.0);
            let s = gauge_or_zero(r, k);
            let omega = upsilon_dense(qm, &theta_dense(qm, &v, &s));
            let dtheta = &vt - qm * (qm.transpose() * &vt) * 0.5;
            let delta = upsilon_dense(qm, &dtheta);
            let id = Mat::identity(two_m, two_m);
            let inv = (&id - &omega * 0.5)
                .try_inverse()
                .ok_or_else(|| Error::CoordinateBreakdown("dense oracle inverse".into()))?;
            let w = &inv * delta * &inv * qm;
            let out = inverse_tangent_map(&q, &TangentVector::assume(v, TangentFlavor::General), &w, &s)?;
            Ok(rel(&out.data, &vt))
        }
        other => Err(Error::Config(format!("unknown oracle suite '{other}' (expected one of {} or all)", SUITES.join(", ")))),
    }
}

/// Runs `instances` random cases of `suite`.
pub fn run_suite(suite: &str, instances: usize, seed: u64) -> Result<OracleOutcome> {
    if !SUITES.contains(&suite) {
        return Err(Error::Config(format!("unknown oracle suite '{suite}' (expected one of {} or all)", SUITES.join(", "))));
    }
    let salt = SUITES.iter().position(|s| *s == suite).unwrap_or(0) as u64;
    let mut r = rng(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(salt + 1)));
    let mut worst = 0.0f64;
    for _ in 0..instances {
        worst = worst.max(instance(suite, &mut r)?);
    }
    Ok(OracleOutcome { suite: suite.into(), instances, max_rel_error: worst, tol: ORACLE_TOL, pass: worst <= ORACLE_TOL })
}

/// `all` expands to every suite.
pub fn run_suites(name: &str, instances: usize, seed: u64) -> Result<Vec<OracleOutcome>> {
    if name == "all" {
        SUITES.iter().map(|s| run_suite(s, instances, seed)).collect()
    } else {
        Ok(vec![run_suite(name, instances, seed)?])
    }
}
