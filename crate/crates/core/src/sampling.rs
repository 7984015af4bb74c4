//! Seeded random instances: orthosymplectic bases, tangent vectors and
//! Lie-algebra factors. Used by the oracle suites and the test harnesses.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::cayley::{GaugeMatrix, SkewHamiltonianFactors};
use crate::symplectic::{apply_j_unchecked, realify, OrthosymplecticBasis};
use crate::Mat;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Mat {
    Mat::from_fn(rows, cols, |_, _| normal(rng))
}

/// `[B | J^T B]`: a matrix that commutes with `J` in the sense `X J_{2k} = J_{2m} X`.
pub fn j_paired(b: &Mat) -> Mat {
    let k = b.ncols();
    let mut x = Mat::zeros(b.nrows(), 2 * k);
    x.columns_mut(0, k).copy_from(b);
    x.columns_mut(k, k).copy_from(&apply_j_unchecked(b, true));
    x
}

/// Haar-like random orthosymplectic basis (`2m x 2k`) from a complex QR.
pub fn random_orthosymplectic<R: Rng>(rng: &mut R, two_m: usize, k: usize) -> OrthosymplecticBasis {
    let m = two_m / 2;
    let c = DMatrix::<Complex64>::from_fn(m, k, |_, _| Complex64::new(normal(rng), normal(rng)));
    let q = c.qr().q();
    OrthosymplecticBasis::from_a_block_unchecked(realify(&q.columns(0, k).into_owned()))
}

/// Random horizontal vector at `q`: `(I - Q Q^T)[B | J^T B]`.
pub fn random_horizontal<R: Rng>(rng: &mut R, q: &OrthosymplecticBasis, scale: f64) -> Mat {
    let u = q.full();
    let b = random_matrix(rng, u.nrows(), q.half_reduced_dim());
    let x = j_paired(&b) * scale;
    &x - u * (u.transpose() * &x)
}

/// Random element of `so(2k) ∩ sp(2k)`: `[[A, B], [-B, A]]`, `A` skew, `B` symmetric.
pub fn random_small_algebra<R: Rng>(rng: &mut R, k: usize, scale: f64) -> Mat {
    let a = random_matrix(rng, k, k);
    let a = (&a - a.transpose()) * (0.5 * scale);
    let b = random_matrix(rng, k, k);
    let b = (&b + b.transpose()) * (0.5 * scale);
    let mut w = Mat::zeros(2 * k, 2 * k);
    w.view_mut((0, 0), (k, k)).copy_from(&a);
    w.view_mut((0, k), (k, k)).copy_from(&b);
    w.view_mut((k, 0), (k, k)).copy_from(&(-&b));
    w.view_mut((k, k), (k, k)).copy_from(&a);
    w
}

/// Random general tangent vector at `q`: horizontal part plus `Q W` with `W ∈ so ∩ sp`.
pub fn random_tangent<R: Rng>(rng: &mut R, q: &OrthosymplecticBasis, scale: f64) -> Mat {
    let h = random_horizontal(rng, q, scale);
    let w = random_small_algebra(rng, q.half_reduced_dim(), scale);
    h + q.full() * w
}

/// Random gauge `[[A, B], [B, -A]]` with `A`, `B` symmetric.
pub fn random_gauge<R: Rng>(rng: &mut R, k: usize, scale: f64) -> GaugeMatrix {
    let a = random_matrix(rng, k, k);
    let a = (&a + a.transpose()) * (0.5 * scale);
    let b = random_matrix(rng, k, k);
    let b = (&b + b.transpose()) * (0.5 * scale);
    GaugeMatrix::from_blocks(&a, &b).expect("square symmetric blocks")
}

/// Random low-rank element of `so(2m) ∩ sp(2m)` built from `pairs` J-paired column pairs:
/// `alpha = [X | -Y]`, `beta = [Y | X]`, rank `4 * pairs`.
pub fn random_algebra_factors<R: Rng>(rng: &mut R, two_m: usize, pairs: usize, scale: f64) -> SkewHamiltonianFactors {
    let x = j_paired(&random_matrix(rng, two_m, pairs)) * scale;
    let y = j_paired(&random_matrix(rng, two_m, pairs)) * scale;
    let r = 2 * pairs;
    let mut alpha = Mat::zeros(two_m, 2 * r);
    let mut beta = Mat::zeros(two_m, 2 * r);
    alpha.columns_mut(0, r).copy_from(&x);
    alpha.columns_mut(r, r).copy_from(&(-&y));
    beta.columns_mut(0, r).copy_from(&y);
    beta.columns_mut(r, r).copy_from(&x);
    SkewHamiltonianFactors::new(alpha, beta).expect("consistent shapes")
}
