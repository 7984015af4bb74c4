//! Canonical symplectic structure, orthosymplectic bases and the
//! real/complex isomorphism used to initialize them.
//!
//! The canonical Poisson tensor `J_{2m} = [[0, I_m], [-I_m, 0]]` is never
//! stored; [`apply_j`] and [`apply_j_right`] act on matrices by block
//! permutation with sign flips.
//!
//! An orthosymplectic basis `U` (`2m x 2k`) satisfies `U^T U = I` and
//! `U^T J_{2m} U = J_{2k}`. Every such matrix has the form `U = [A | J^T A]`,
//! so only the first block `A` is kept as the authoritative data.

use std::sync::OnceLock;

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::Mat;

/// Default tolerance on the manifold defects of a freshly constructed basis.
pub const TOL_MANIFOLD: f64 = 1e-10;

/// Default relative rank tolerance of the full-rank monitor.
pub const RANK_TOL: f64 = 1e-10;

/// Implicit canonical symplectic unit `J_{2m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymplecticStructure {
    half_dim: usize,
}

impl SymplecticStructure {
    pub fn new(half_dim: usize) -> Result<Self> {
        if half_dim == 0 {
            return Err(Error::Dimension("symplectic structure needs m >= 1".into()));
        }
        Ok(Self { half_dim })
    }

    pub fn half_dim(&self) -> usize {
        self.half_dim
    }

    pub fn dim(&self) -> usize {
        2 * self.half_dim
    }

    pub fn apply(&self, x: &Mat, transpose: bool) -> Result<Mat> {
        if x.nrows() != self.dim() {
            return Err(Error::Dimension(format!(
                "expected {} rows, got {}",
                self.dim(),
                x.nrows()
            )));
        }
        apply_j(x, transpose)
    }

    /// Dense `J_{2m}`; only meant for oracles at small sizes.
    pub fn to_dense(&self) -> Mat {
        j_dense(self.half_dim)
    }
}

/// Returns `J x` (or `J^T x`) for a matrix with an even number of rows.
pub fn apply_j(x: &Mat, transpose: bool) -> Result<Mat> {
    let n = x.nrows();
    if n % 2 != 0 {
        return Err(Error::Dimension(format!("apply_J needs an even row count, got {n}")));
    }
    Ok(apply_j_unchecked(x, transpose))
}

pub(crate) fn apply_j_unchecked(x: &Mat, transpose: bool) -> Mat {
    let m = x.nrows() / 2;
    let q = x.ncols();
    let mut out = Mat::zeros(2 * m, q);
    let sign = if transpose { -1.0 } else { 1.0 };
    for c in 0..q {
        let src = x.column(c);
        let mut dst = out.column_mut(c);
        for i in 0..m {
            dst[i] = sign * src[m + i];
            dst[m + i] = -sign * src[i];
        }
    }
    out
}

/// Returns `x J_{2k}` (or `x J_{2k}^T`) for a matrix with an even number of columns.
pub fn apply_j_right(x: &Mat, transpose: bool) -> Result<Mat> {
    let n = x.ncols();
    if n % 2 != 0 {
        return Err(Error::Dimension(format!("right J needs an even column count, got {n}")));
    }
    Ok(apply_j_right_unchecked(x, transpose))
}

pub(crate) fn apply_j_right_unchecked(x: &Mat, transpose: bool) -> Mat {
    let k = x.ncols() / 2;
    let mut out = Mat::zeros(x.nrows(), 2 * k);
    let sign = if transpose { -1.0 } else { 1.0 };
    // (X J)[:, j] = -X[:, k + j],  (X J)[:, k + j] = X[:, j]
    for j in 0..k {
        out.column_mut(j).copy_from(&(x.column(k + j) * (-sign)));
        out.column_mut(k + j).copy_from(&(x.column(j) * sign));
    }
    out
}

/// Dense canonical symplectic unit of size `2m`.
pub fn j_dense(m: usize) -> Mat {
    let mut j = Mat::zeros(2 * m, 2 * m);
    for i in 0..m {
        j[(i, m + i)] = 1.0;
        j[(m + i, i)] = -1.0;
    }
    j
}

/// Orthogonality and symplecticity defects of a tall matrix.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ManifoldCheck {
    pub orth_defect: f64,
    pub sympl_defect: f64,
    pub pass: bool,
}

/// Computes `||U^T U - I||_F` and `||U^T J U - J||_F`; `pass` iff both are within `tol`.
pub fn check_orthosymplectic(u: &Mat, tol: f64) -> ManifoldCheck {
    if u.nrows() % 2 != 0 || u.ncols() % 2 != 0 {
        return ManifoldCheck {
            orth_defect: f64::INFINITY,
            sympl_defect: f64::INFINITY,
            pass: false,
        };
    }
    let n = u.ncols();
    let orth = (u.transpose() * u - Mat::identity(n, n)).norm();
    let sympl = symplecticity_defect(u);
    ManifoldCheck {
        orth_defect: orth,
        sympl_defect: sympl,
        pass: orth <= tol && sympl <= tol,
    }
}

/// `||M^T J_{2m} M - J_{2k}||_F`.
pub fn symplecticity_defect(m: &Mat) -> f64 {
    let k = m.ncols() / 2;
    let jm = apply_j_unchecked(m, false);
    (m.transpose() * jm - j_dense(k)).norm()
}

/// Symplectic right inverse `M^+ = J_{2k}^T M^T J_{2m}` of a symplectic `M`.
pub fn symplectic_inverse(m: &Mat, tol: f64) -> Result<Mat> {
    if m.nrows() % 2 != 0 || m.ncols() % 2 != 0 {
        return Err(Error::Dimension(format!(
            "symplectic inverse needs even dimensions, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let defect = symplecticity_defect(m);
    if !(defect <= tol) {
        return Err(Error::NotSymplectic { defect, tol });
    }
    // M^T J_{2m} = (J_{2m}^T M)^T
    let mt_j = apply_j_unchecked(m, true).transpose();
    Ok(apply_j_unchecked(&mt_j, true))
}

/// `F(R) = R_q + i R_p` where `R_q`, `R_p` are the top and bottom halves.
pub fn complexify(r: &Mat) -> Result<DMatrix<Complex64>> {
    if r.nrows() % 2 != 0 {
        return Err(Error::Dimension(format!("complexify needs an even row count, got {}", r.nrows())));
    }
    let m = r.nrows() / 2;
    Ok(DMatrix::from_fn(m, r.ncols(), |i, j| Complex64::new(r[(i, j)], r[(m + i, j)])))
}

/// Inverse of [`complexify`].
pub fn realify(c: &DMatrix<Complex64>) -> Mat {
    let m = c.nrows();
    Mat::from_fn(2 * m, c.ncols(), |i, j| if i < m { c[(i, j)].re } else { c[(i - m, j)].im })
}

/// A point on the orthosymplectic Stiefel manifold, `U = [A | J^T A]`.
#[derive(Debug)]
pub struct OrthosymplecticBasis {
    a: Mat,
    full: OnceLock<Mat>,
}

impl Clone for OrthosymplecticBasis {
    fn clone(&self) -> Self {
        let full = OnceLock::new();
        if let Some(f) = self.full.get() {
            let _ = full.set(f.clone());
        }
        Self { a: self.a.clone(), full }
    }
}

impl PartialEq for OrthosymplecticBasis {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
    }
}

impl OrthosymplecticBasis {
    /// Builds the basis from its first block and checks both manifold defects.
    pub fn from_a_block(a: Mat, tol: f64) -> Result<Self> {
        if a.nrows() % 2 != 0 || a.ncols() == 0 {
            return Err(Error::Dimension(format!("A block must be 2m x k, got {}x{}", a.nrows(), a.ncols())));
        }
        if a.ncols() > a.nrows() / 2 {
            return Err(Error::Dimension(format!("k = {} exceeds m = {}", a.ncols(), a.nrows() / 2)));
        }
        let basis = Self::from_a_block_unchecked(a);
        let check = basis.check(tol);
        if !check.pass {
            return Err(Error::NotSymplectic {
                defect: check.orth_defect.max(check.sympl_defect),
                tol,
            });
        }
        Ok(basis)
    }

    pub(crate) fn from_a_block_unchecked(a: Mat) -> Self {
        Self { a, full: OnceLock::new() }
    }

    /// Builds the basis from a full `2m x 2k` matrix, checking the block convention.
    pub fn from_full(u: Mat, tol: f64) -> Result<Self> {
        if u.nrows() % 2 != 0 || u.ncols() % 2 != 0 {
            return Err(Error::Dimension(format!("U must be 2m x 2k, got {}x{}", u.nrows(), u.ncols())));
        }
        let k = u.ncols() / 2;
        let a = u.columns(0, k).into_owned();
        let paired = apply_j_unchecked(&a, true);
        let mismatch = (paired - u.columns(k, k)).norm();
        if mismatch > tol {
            return Err(Error::NotSymplectic { defect: mismatch, tol });
        }
        Self::from_a_block(a, tol)
    }

    /// Canonical embedding `[e_1 .. e_k | e_{m+1} .. e_{m+k}]`.
    pub fn canonical(m: usize, k: usize) -> Result<Self> {
        if k == 0 || k > m {
            return Err(Error::Dimension(format!("canonical embedding needs 1 <= k <= m, got k={k}, m={m}")));
        }
        let mut a = Mat::zeros(2 * m, k);
        for j in 0..k {
            a[(j, j)] = 1.0;
        }
        Ok(Self::from_a_block_unchecked(a))
    }

    pub fn a_block(&self) -> &Mat {
        &self.a
    }

    pub fn full(&self) -> &Mat {
        self.full.get_or_init(|| {
            let k = self.a.ncols();
            let mut u = Mat::zeros(self.a.nrows(), 2 * k);
            u.columns_mut(0, k).copy_from(&self.a);
            u.columns_mut(k, k).copy_from(&apply_j_unchecked(&self.a, true));
            u
        })
    }

    pub fn into_full(self) -> Mat {
        self.full();
        self.full.into_inner().expect("initialized above")
    }

    pub fn half_full_dim(&self) -> usize {
        self.a.nrows() / 2
    }

    pub fn half_reduced_dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn check(&self, tol: f64) -> ManifoldCheck {
        check_orthosymplectic(self.full(), tol)
    }
}

/// Expansion coefficients `Z` (`p x 2k`), one row per parameter sample.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientMatrix(pub Mat);

impl CoefficientMatrix {
    pub fn new(z: Mat) -> Result<Self> {
        if z.ncols() % 2 != 0 || z.ncols() == 0 {
            return Err(Error::Dimension(format!("Z must be p x 2k, got {}x{}", z.nrows(), z.ncols())));
        }
        Ok(Self(z))
    }

    pub fn data(&self) -> &Mat {
        &self.0
    }

    pub fn n_params(&self) -> usize {
        self.0.nrows()
    }

    pub fn half_reduced_dim(&self) -> usize {
        self.0.ncols() / 2
    }
}

/// Basis, coefficients and the current time.
#[derive(Debug, Clone)]
pub struct ReducedState {
    pub basis: OrthosymplecticBasis,
    pub coefficients: CoefficientMatrix,
    pub time: f64,
}

impl ReducedState {
    /// `R = U Z^T` (`2m x p`).
    pub fn reconstruct(&self) -> Mat {
        self.basis.full() * self.coefficients.0.transpose()
    }
}

/// Truncated complex SVD: left singular vectors `W` (`m x k`, unit columns) and all singular values in descending order.
#[derive(Debug, Clone)]
pub struct ComplexSvd {
    pub left: DMatrix<Complex64>,
    pub singular_values: Vec<f64>,
}

/// Complex SVD of `c` truncated at `k` modes.
///
/// Singular values are sorted in descending order with index-order tie
/// breaking. The phase of each left singular vector is fixed so that its
/// entry of largest modulus (first such index) is real and positive.
pub fn complex_svd_truncated(c: &DMatrix<Complex64>, k: usize) -> Result<ComplexSvd> {
    let (m, p) = c.shape();
    if k == 0 || k > m.min(p) {
        return Err(Error::Dimension(format!("truncation rank k = {k} must satisfy 1 <= k <= min(m, p) = {}", m.min(p))));
    }
    let svd = c.clone().svd(true, false);
    let u = svd.u.ok_or_else(|| Error::Initialization("complex SVD did not return left vectors".into()))?;
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[j].partial_cmp(&sv[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));

    let mut left = DMatrix::<Complex64>::zeros(m, k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        let col = u.column(src);
        let mut pivot = 0;
        let mut best = -1.0;
        for (i, z) in col.iter().enumerate() {
            let n = z.norm();
            if n > best {
                best = n;
                pivot = i;
            }
        }
        let phase = if best > 0.0 { col[pivot].conj() / best } else { Complex64::new(1.0, 0.0) };
        left.column_mut(dst).copy_from(&(col * phase));
    }
    let singular_values: Vec<f64> = order.iter().map(|&i| sv[i]).collect();
    Ok(ComplexSvd { left, singular_values })
}

/// Orthosymplectic basis and coefficients from the complex SVD of a real snapshot/state matrix.
///
/// With `W` the first `k` complex left singular vectors of `F(R0)`, the basis is
/// `U = [A | J^T A]` with `A = [Re W; Im W]`, and `Z = R0^T U`.
pub fn orthosymplectic_from_complex_svd(
    r0: &Mat,
    k: usize,
    tol: f64,
) -> Result<(OrthosymplecticBasis, CoefficientMatrix, Vec<f64>)> {
    let c = complexify(r0)?;
    let (m, p) = c.shape();
    if k == 0 || k > m.min(p) {
        return Err(Error::Dimension(format!("k = {k} must satisfy 1 <= k <= min(m, p) = {}", m.min(p))));
    }
    let svd = complex_svd_truncated(&c, k)?;
    let s = &svd.singular_values;
    if k < s.len() && s[k - 1] - s[k] < 1e-12 * s[0] {
        warn!(
            "near-degenerate singular values at truncation boundary: s_k = {:.6e}, s_(k+1) = {:.6e}",
            s[k - 1],
            s[k]
        );
    }
    if s[k - 1] <= 1e-14 * s[0].max(f64::MIN_POSITIVE) {
        warn!("complexified initial state has numerical rank below k = {k}");
    }
    let a = realify(&svd.left);
    let basis = OrthosymplecticBasis::from_a_block(a, tol)?;
    let z = r0.transpose() * basis.full();
    let z = CoefficientMatrix::new(z)?;
    let monitor = crate::flow::fullrank_monitor(&z, RANK_TOL);
    if !monitor.ok {
        return Err(Error::Initialization(format!(
            "full-rank condition violated by initial coefficients (smin/smax = {:.3e})",
            monitor.smin / monitor.smax.max(f64::MIN_POSITIVE)
        )));
    }
    Ok((basis, z, svd.singular_values))
}

/// `x^T J y` summed over columns, i.e. `<x, J y>_F`.
pub fn symplectic_pairing(x: &Mat, y: &Mat) -> f64 {
    x.dot(&apply_j_unchecked(y, false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{normal, random_matrix, random_orthosymplectic, rng};

    #[test]
    fn j_on_first_unit_vector() {
        let mut e1 = Mat::zeros(4, 1);
        e1[0] = 1.0;
        let je = apply_j(&e1, false).unwrap();
        let mut expected = Mat::zeros(4, 1);
        expected[2] = -1.0;
        assert_eq!(je, expected);
    }

    #[test]
    fn j_squares_to_minus_identity_and_is_skew() {
        let mut r = rng(1);
        let x = random_matrix(&mut r, 10, 3);
        let jjx = apply_j(&apply_j(&x, false).unwrap(), false).unwrap();
        assert_eq!(jjx, -x.clone());
        let jt = apply_j(&x, true).unwrap();
        assert_eq!(jt, -apply_j(&x, false).unwrap());
        let s = SymplecticStructure::new(5).unwrap();
        assert_eq!(s.apply(&apply_j(&x, false).unwrap(), true).unwrap(), x);
        assert_eq!(s.to_dense() * &x, apply_j(&x, false).unwrap());
    }

    #[test]
    fn j_rejects_odd_rows() {
        assert!(matches!(apply_j(&Mat::zeros(3, 1), false), Err(Error::Dimension(_))));
        assert!(matches!(apply_j_right(&Mat::zeros(2, 3), false), Err(Error::Dimension(_))));
    }

    #[test]
    fn right_j_matches_dense() {
        let mut r = rng(2);
        let x = random_matrix(&mut r, 5, 6);
        let d = j_dense(3);
        assert!((apply_j_right(&x, false).unwrap() - &x * &d).norm() < 1e-15);
        assert!((apply_j_right(&x, true).unwrap() - &x * d.transpose()).norm() < 1e-15);
    }

    #[test]
    fn canonical_embedding_passes() {
        let u = OrthosymplecticBasis::canonical(5, 2).unwrap();
        let c = u.check(0.0);
        assert!(c.pass);
        assert_eq!(c.orth_defect, 0.0);
        let full = u.full();
        assert_eq!(full[(0, 0)], 1.0);
        assert_eq!(full[(5, 2)], 1.0);
    }

    #[test]
    fn random_gaussian_fails_check() {
        let mut r = rng(3);
        let u = random_matrix(&mut r, 8, 4);
        assert!(!check_orthosymplectic(&u, 1e-10).pass);
    }

    #[test]
    fn symplectic_inverse_of_orthosymplectic_is_transpose() {
        let mut r = rng(4);
        for _ in 0..10 {
            let u = random_orthosymplectic(&mut r, 12, 3);
            let inv = symplectic_inverse(u.full(), 1e-10).unwrap();
            assert!((inv - u.full().transpose()).amax() <= 1e-13);
        }
        let c = OrthosymplecticBasis::canonical(4, 2).unwrap();
        assert_eq!(symplectic_inverse(c.full(), 1e-12).unwrap(), c.full().transpose());
    }

    #[test]
    fn symplectic_inverse_of_scaling() {
        // diag(2I, I/2) applied to the canonical embedding is symplectic but not orthogonal.
        let m = 3;
        let mut d = Mat::zeros(2 * m, 2 * m);
        for i in 0..m {
            d[(i, i)] = 2.0;
            d[(m + i, m + i)] = 0.5;
        }
        let e = OrthosymplecticBasis::canonical(m, 2).unwrap();
        let mm = d * e.full();
        let inv = symplectic_inverse(&mm, 1e-12).unwrap();
        assert!((inv * &mm - Mat::identity(4, 4)).norm() < 1e-14);
    }

    #[test]
    fn symplectic_inverse_rejects_non_symplectic() {
        let mut r = rng(5);
        let x = random_matrix(&mut r, 6, 2);
        match symplectic_inverse(&x, 1e-10) {
            Err(Error::NotSymplectic { defect, .. }) => assert!(defect > 1e-10),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn complexify_definition_and_roundtrip() {
        let c = complexify(&Mat::from_column_slice(2, 1, &[1.0, 0.0])).unwrap();
        assert_eq!(c[(0, 0)], Complex64::new(1.0, 0.0));
        let c = complexify(&Mat::from_column_slice(2, 1, &[0.0, 1.0])).unwrap();
        assert_eq!(c[(0, 0)], Complex64::new(0.0, 1.0));
        assert!(complexify(&Mat::zeros(3, 2)).is_err());
        let mut r = rng(6);
        let x = random_matrix(&mut r, 14, 5);
        assert_eq!(realify(&complexify(&x).unwrap()), x);
    }

    #[test]
    fn complex_svd_basis_exact_rank() {
        let mut r = rng(7);
        // Complex rank-3 matrix 10 x 6 realified to 20 x 6.
        let m = 10;
        let left = DMatrix::from_fn(m, 3, |_, _| Complex64::new(normal(&mut r), normal(&mut r)));
        let right = DMatrix::from_fn(3, 6, |_, _| Complex64::new(normal(&mut r), normal(&mut r)));
        let r0 = realify(&(left * right));
        let (u, z, _) = orthosymplectic_from_complex_svd(&r0, 3, 1e-10).unwrap();
        assert!(u.check(1e-10).pass);
        assert_eq!(z.data().shape(), (6, 6));
        let proj = u.full() * (u.full().transpose() * &r0);
        assert!((proj - &r0).norm() <= 1e-10 * r0.norm().max(1.0));
    }

    #[test]
    fn complex_svd_rank_one_real() {
        // R0 = u v^T with u = [a; b]: one complex mode captures it exactly.
        let u = Mat::from_column_slice(6, 1, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let v = Mat::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        let r0 = &u * v.transpose();
        let (b, _, _) = orthosymplectic_from_complex_svd(&r0, 1, 1e-10).unwrap();
        let proj = b.full() * (b.full().transpose() * &r0);
        assert!((proj - &r0).norm() <= 1e-12 * r0.norm());
    }

    #[test]
    fn complex_svd_rejects_large_k() {
        let r0 = Mat::from_element(6, 2, 1.0);
        assert!(matches!(orthosymplectic_from_complex_svd(&r0, 3, 1e-10), Err(Error::Dimension(_))));
    }

    #[test]
    fn complex_svd_rank_deficient_coefficients_fail() {
        // Complex rank one, asking for two modes: Z has a zero complex direction.
        let u = Mat::from_column_slice(6, 1, &[1.0, 2.0, -1.0, 0.5, 0.0, 3.0]);
        let v = Mat::from_column_slice(3, 1, &[1.0, -2.0, 0.5]);
        let r0 = &u * v.transpose();
        assert!(matches!(orthosymplectic_from_complex_svd(&r0, 2, 1e-10), Err(Error::Initialization(_))));
    }

    #[test]
    fn full_resolution_shapes() {
        let mut r = rng(8);
        let r0 = random_matrix(&mut r, 2000, 100);
        let (u, z, _) = orthosymplectic_from_complex_svd(&r0, 8, 1e-10).unwrap();
        assert_eq!(u.full().shape(), (2000, 16));
        assert_eq!(z.data().shape(), (100, 16));
        assert!(u.check(1e-10).pass);
    }

    #[test]
    fn discarded_energy_matches_projection_residual() {
        let mut r = rng(9);
        for &(m2, p, k) in &[(64usize, 16usize, 5usize), (20, 8, 3), (40, 16, 8)] {
            let r0 = random_matrix(&mut r, m2, p);
            let (u, _, sv) = orthosymplectic_from_complex_svd(&r0, k, 1e-10).unwrap();
            let resid = (&r0 - u.full() * (u.full().transpose() * &r0)).norm_squared();
            let discarded: f64 = sv[k..].iter().map(|s| s * s).sum();
            assert!((resid - discarded).abs() <= 1e-8 * discarded, "{resid} vs {discarded}");
        }
    }
}
