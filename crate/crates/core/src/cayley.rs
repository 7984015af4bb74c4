//! Cayley coordinate map on the orthosymplectic group and the retraction
//! built from it.
//!
//! Lie-algebra elements of `so(2m) ∩ sp(2m)` that show up in the basis
//! integrators are always low rank, so they are carried as factor pairs
//! `Omega = alpha beta^T` ([`SkewHamiltonianFactors`]) and applied with thin
//! products only. Nothing here materializes a `2m x 2m` matrix except the
//! `*_dense` oracles.

use nalgebra::linalg::ColPivQR;

use crate::error::{Error, Result};
use crate::symplectic::{apply_j_right_unchecked, apply_j_unchecked, OrthosymplecticBasis};
use crate::Mat;

/// Pivot ratio below which a small dense solve is reported as singular.
const SINGULAR_RATIO: f64 = 1e-14;

/// Relative pivot cutoff used by [`SkewHamiltonianFactors::recompress`].
pub const RECOMPRESS_TOL: f64 = 1e-13;

/// Low-rank factors `Omega = alpha beta^T` of an element of `so(2m) ∩ sp(2m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewHamiltonianFactors {
    pub alpha: Mat,
    pub beta: Mat,
}

impl SkewHamiltonianFactors {
    pub fn new(alpha: Mat, beta: Mat) -> Result<Self> {
        if alpha.shape() != beta.shape() {
            return Err(Error::Dimension(format!(
                "factor shapes differ: {:?} vs {:?}",
                alpha.shape(),
                beta.shape()
            )));
        }
        if alpha.nrows() % 2 != 0 {
            return Err(Error::Dimension(format!("factors need an even row count, got {}", alpha.nrows())));
        }
        Ok(Self { alpha, beta })
    }

    /// Rank-zero factors representing the zero matrix.
    pub fn zero(two_m: usize) -> Self {
        Self {
            alpha: Mat::zeros(two_m, 0),
            beta: Mat::zeros(two_m, 0),
        }
    }

    pub fn dim(&self) -> usize {
        self.alpha.nrows()
    }

    pub fn rank(&self) -> usize {
        self.alpha.ncols()
    }

    pub fn densify(&self) -> Mat {
        &self.alpha * self.beta.transpose()
    }

    /// `||Omega + Omega^T||_F` and `||Omega J + J Omega^T||_F` of the densified matrix.
    pub fn algebra_defects(&self) -> (f64, f64) {
        let o = self.densify();
        let skew = (&o + o.transpose()).norm();
        let oj = apply_j_right_unchecked(&o, false);
        let jot = apply_j_unchecked(&o.transpose(), false);
        (skew, (oj + jot).norm())
    }

    /// Same represented matrix with the rank reduced by thin QR of both factors and a
    /// column-pivoted QR of the small core, dropping trailing rows whose pivot is below
    /// `rel_tol` times the leading one. Pivoted QR stays backward stable when the core has
    /// clustered singular values, where an SVD of the core can lose its vectors.
    pub fn recompress(&self, rel_tol: f64) -> Self {
        let r = self.rank();
        if r == 0 {
            return self.clone();
        }
        let (qa, ra) = thin_qr(&self.alpha);
        let (qb, rb) = thin_qr(&self.beta);
        let core = ra * rb.transpose();
        let cqr: ColPivQR<f64, _, _> = core.col_piv_qr();
        let mut rc = cqr.r();
        cqr.p().inv_permute_columns(&mut rc);
        let lead = cqr.r()[(0, 0)].abs();
        let n = rc.nrows().min(rc.ncols());
        let keep = (0..n).take_while(|&i| lead > 0.0 && cqr.r()[(i, i)].abs() > rel_tol * lead).count();
        let alpha = qa * cqr.q().columns(0, keep);
        let beta = qb * rc.rows(0, keep).transpose();
        Self { alpha, beta }
    }
}

/// Thin QR of a tall matrix by row blocks (TSQR): Householder QR of each cache-sized block,
/// then of the stacked triangular factors. Same stability as plain Householder QR.
fn thin_qr(x: &Mat) -> (Mat, Mat) {
    let (rows, cols) = x.shape();
    let block = (4 * cols).max(512);
    if rows <= 2 * block || cols == 0 {
        let qr = x.clone().qr();
        return (qr.q(), qr.r());
    }
    let starts: Vec<usize> = (0..rows).step_by(block).collect();
    let mut local = Vec::with_capacity(starts.len());
    let mut stacked = Mat::zeros(starts.len() * cols, cols);
    for (i, &s) in starts.iter().enumerate() {
        let qr = x.rows(s, block.min(rows - s)).clone_owned().qr();
        stacked.rows_mut(i * cols, cols).copy_from(&qr.r());
        local.push(qr.q());
    }
    let (qs, r) = thin_qr(&stacked);
    let mut q = Mat::zeros(rows, cols);
    for (i, &s) in starts.iter().enumerate() {
        q.rows_mut(s, local[i].nrows()).copy_from(&(&local[i] * qs.rows(i * cols, cols)));
    }
    (q, r)
}

/// Solves `a x = b` with a column-pivoted QR, rejecting numerically singular `a`.
pub(crate) fn pivoted_solve(a: &Mat, b: &Mat) -> Option<Mat> {
    let n = a.nrows();
    if n == 0 {
        return Some(b.clone());
    }
    let qr: ColPivQR<f64, _, _> = a.clone().col_piv_qr();
    let r = qr.r();
    let dmax = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    let dmin = (0..n).map(|i| r[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(dmax > 0.0) || dmin < SINGULAR_RATIO * dmax {
        return None;
    }
    qr.solve(b)
}

/// Solves `x a = b` (right division).
pub(crate) fn pivoted_solve_right(b: &Mat, a: &Mat) -> Option<Mat> {
    pivoted_solve(&a.transpose(), &b.transpose()).map(|x| x.transpose())
}

/// Dense Cayley transform `(I - Omega/2)^{-1} (I + Omega/2)`.
pub fn cayley_dense(omega: &Mat) -> Result<Mat> {
    let n = omega.nrows();
    if omega.ncols() != n {
        return Err(Error::Dimension("Cayley transform needs a square matrix".into()));
    }
    let half = omega * 0.5;
    let id = Mat::identity(n, n);
    pivoted_solve(&(&id - &half), &(&id + &half))
        .ok_or_else(|| Error::CoordinateBreakdown("I - Omega/2 is singular".into()))
}

/// `cay(alpha beta^T) Y = Y - alpha (beta^T alpha / 2 - I)^{-1} beta^T Y`.
pub fn cayley_apply_lowrank(omega: &SkewHamiltonianFactors, y: &Mat) -> Result<Mat> {
    if y.nrows() != omega.dim() {
        return Err(Error::Dimension(format!("Y has {} rows, factors have {}", y.nrows(), omega.dim())));
    }
    let r = omega.rank();
    if r == 0 {
        return Ok(y.clone());
    }
    let mut inner = omega.beta.transpose() * &omega.alpha * 0.5;
    for i in 0..r {
        inner[(i, i)] -= 1.0;
    }
    let bty = omega.beta.transpose() * y;
    let x = pivoted_solve(&inner, &bty).ok_or(Error::DegenerateFactors { size: r })?;
    Ok(y - &omega.alpha * x)
}

/// `cay(alpha beta^T) Y = Y + alpha f(beta^T alpha) beta^T Y` with `f(z) = (cay(z) - 1) / z`.
///
/// Requires an invertible `beta^T alpha`; kept as a cross-check of [`cayley_apply_lowrank`].
pub fn cayley_apply_analytic(omega: &SkewHamiltonianFactors, y: &Mat) -> Result<Mat> {
    let r = omega.rank();
    if r == 0 {
        return Ok(y.clone());
    }
    let g = omega.beta.transpose() * &omega.alpha;
    let cay_g = cayley_dense(&g).map_err(|_| Error::DegenerateFactors { size: r })?;
    let f = pivoted_solve(&g, &(cay_g - Mat::identity(r, r))).ok_or(Error::DegenerateFactors { size: r })?;
    Ok(y + &omega.alpha * (f * (omega.beta.transpose() * y)))
}

/// Factors of `dcay^{-1}_Omega(gamma delta^T) = (I - Omega/2) gamma delta^T (I + Omega/2)`.
pub fn dcay_inverse_lowrank(omega: &SkewHamiltonianFactors, l: &SkewHamiltonianFactors) -> Result<SkewHamiltonianFactors> {
    if omega.dim() != l.dim() {
        return Err(Error::Dimension(format!("row mismatch: {} vs {}", omega.dim(), l.dim())));
    }
    if omega.rank() == 0 {
        return Ok(l.clone());
    }
    let (a, b) = (&omega.alpha, &omega.beta);
    let e = &l.alpha - a * (b.transpose() * &l.alpha) * 0.5;
    let f = &l.beta + b * (a.transpose() * &l.beta) * 0.5;
    Ok(SkewHamiltonianFactors { alpha: e, beta: f })
}

/// Factors of `sum_i c_i alpha_i beta_i^T` by column concatenation; each term contributes
/// `sign(c) sqrt|c| alpha_i` and `sqrt|c| beta_i`.
pub fn lowrank_sum(terms: &[(f64, &SkewHamiltonianFactors)]) -> Result<SkewHamiltonianFactors> {
    let dim = terms
        .first()
        .map(|(_, f)| f.dim())
        .ok_or_else(|| Error::Dimension("lowrank_sum needs at least one term".into()))?;
    if let Some((_, bad)) = terms.iter().find(|(_, f)| f.dim() != dim) {
        return Err(Error::Dimension(format!("row mismatch: {} vs {}", bad.dim(), dim)));
    }
    let live: Vec<&(f64, &SkewHamiltonianFactors)> = terms.iter().filter(|(c, _)| *c != 0.0).collect();
    let rank: usize = live.iter().map(|(_, f)| f.rank()).sum();
    let mut alpha = Mat::zeros(dim, rank);
    let mut beta = Mat::zeros(dim, rank);
    let mut col = 0;
    for (c, f) in live {
        let s = c.abs().sqrt();
        let r = f.rank();
        alpha.columns_mut(col, r).copy_from(&(&f.alpha * (s * c.signum())));
        beta.columns_mut(col, r).copy_from(&(&f.beta * s));
        col += r;
    }
    Ok(SkewHamiltonianFactors { alpha, beta })
}

/// Declared flavor of a tangent vector at a base point `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TangentFlavor {
    /// `Q^T V = 0` and `V J_{2k} = J_{2m} V`.
    Horizontal,
    /// `Q^T V ∈ so(2k) ∩ sp(2k)`.
    General,
}

/// Tangent vector at an orthosymplectic base point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub data: Mat,
    pub flavor: TangentFlavor,
}

/// Tangent-space defects of `v` at `q`.
#[derive(Debug, Clone, Copy)]
pub struct TangentDefects {
    /// `||Q^T V||_F`
    pub vertical: f64,
    /// `||V J - J V||_F`
    pub commutation: f64,
    /// `||Q^T V + V^T Q||_F`
    pub skew: f64,
    /// `||Q^T V J + J V^T Q||_F`
    pub hamiltonian: f64,
}

pub fn tangent_defects(q: &OrthosymplecticBasis, v: &Mat) -> TangentDefects {
    let qtv = q.full().transpose() * v;
    let vj = apply_j_right_unchecked(v, false);
    let jv = apply_j_unchecked(v, false);
    let skew = (&qtv + qtv.transpose()).norm();
    let ham = (apply_j_right_unchecked(&qtv, false) + apply_j_unchecked(&qtv.transpose(), false)).norm();
    TangentDefects {
        vertical: qtv.norm(),
        commutation: (vj - jv).norm(),
        skew,
        hamiltonian: ham,
    }
}

impl TangentVector {
    pub fn horizontal(q: &OrthosymplecticBasis, v: Mat, tol: f64) -> Result<Self> {
        check_shape(q, &v)?;
        let d = tangent_defects(q, &v);
        if d.vertical > tol || d.commutation > tol {
            return Err(Error::Flavor(format!(
                "not horizontal: ||Q^T V|| = {:.3e}, ||VJ - JV|| = {:.3e}",
                d.vertical, d.commutation
            )));
        }
        Ok(Self { data: v, flavor: TangentFlavor::Horizontal })
    }

    pub fn general(q: &OrthosymplecticBasis, v: Mat, tol: f64) -> Result<Self> {
        check_shape(q, &v)?;
        let d = tangent_defects(q, &v);
        if d.skew > tol || d.hamiltonian > tol {
            return Err(Error::Flavor(format!(
                "not tangent: skew defect {:.3e}, hamiltonian defect {:.3e}",
                d.skew, d.hamiltonian
            )));
        }
        Ok(Self { data: v, flavor: TangentFlavor::General })
    }

    /// Wraps `v` without validation.
    pub fn assume(v: Mat, flavor: TangentFlavor) -> Self {
        Self { data: v, flavor }
    }
}

fn check_shape(q: &OrthosymplecticBasis, v: &Mat) -> Result<()> {
    if v.shape() != q.full().shape() {
        return Err(Error::Dimension(format!(
            "tangent vector shape {:?} differs from base {:?}",
            v.shape(),
            q.full().shape()
        )));
    }
    Ok(())
}

/// Gauge `S ∈ sym(2k) ∩ sp(2k)`, i.e. `[[A, B], [B, -A]]` with `A`, `B` symmetric.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeMatrix(Mat);

impl GaugeMatrix {
    pub fn zero(k: usize) -> Self {
        Self(Mat::zeros(2 * k, 2 * k))
    }

    pub fn from_blocks(a: &Mat, b: &Mat) -> Result<Self> {
        let k = a.nrows();
        if a.shape() != (k, k) || b.shape() != (k, k) {
            return Err(Error::Dimension("gauge blocks must be square and of equal size".into()));
        }
        let mut s = Mat::zeros(2 * k, 2 * k);
        s.view_mut((0, 0), (k, k)).copy_from(a);
        s.view_mut((0, k), (k, k)).copy_from(b);
        s.view_mut((k, 0), (k, k)).copy_from(b);
        s.view_mut((k, k), (k, k)).copy_from(&(-a));
        Self::new(s, 1e-12 * (1.0 + a.norm() + b.norm()))
    }

    /// Validates symmetry and `S J + J S^T = 0`.
    pub fn new(s: Mat, tol: f64) -> Result<Self> {
        if s.nrows() != s.ncols() || s.nrows() % 2 != 0 {
            return Err(Error::Dimension(format!("gauge must be 2k x 2k, got {:?}", s.shape())));
        }
        let sym = (&s - s.transpose()).norm();
        let ham = (apply_j_right_unchecked(&s, false) + apply_j_unchecked(&s.transpose(), false)).norm();
        if sym > tol || ham > tol {
            return Err(Error::Flavor(format!(
                "gauge not in sym ∩ sp: symmetry defect {sym:.3e}, hamiltonian defect {ham:.3e}"
            )));
        }
        Ok(Self(s))
    }

    pub fn matrix(&self) -> &Mat {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }
}

/// `Theta = V + Q (S - Q^T V / 2)`.
pub fn theta_map(q: &OrthosymplecticBasis, v: &TangentVector, s: &GaugeMatrix) -> Result<Mat> {
    check_shape(q, &v.data)?;
    check_gauge(q, s)?;
    Ok(theta_raw(q.full(), &v.data, s))
}

fn check_gauge(q: &OrthosymplecticBasis, s: &GaugeMatrix) -> Result<()> {
    let n = 2 * q.half_reduced_dim();
    if s.0.shape() != (n, n) {
        return Err(Error::Dimension(format!("gauge shape {:?} does not match 2k = {n}", s.0.shape())));
    }
    Ok(())
}

pub(crate) fn theta_raw(q: &Mat, v: &Mat, s: &GaugeMatrix) -> Mat {
    let mut inner = q.transpose() * v * (-0.5);
    if !s.is_zero() {
        inner += &s.0;
    }
    v + q * inner
}

/// Factors `alpha = [Theta | -Q]`, `beta = [Q | Theta]` of `Upsilon_Q(V) = Theta Q^T - Q Theta^T`.
pub(crate) fn upsilon_factors(q: &Mat, theta: &Mat) -> SkewHamiltonianFactors {
    let (n, c) = q.shape();
    let mut alpha = Mat::zeros(n, 2 * c);
    let mut beta = Mat::zeros(n, 2 * c);
    alpha.columns_mut(0, c).copy_from(theta);
    alpha.columns_mut(c, c).copy_from(&(-q));
    beta.columns_mut(0, c).copy_from(q);
    beta.columns_mut(c, c).copy_from(theta);
    SkewHamiltonianFactors { alpha, beta }
}

/// Retraction with the pieces the inverse tangent map reuses.
pub(crate) struct Retraction {
    pub point: OrthosymplecticBasis,
    pub factors: SkewHamiltonianFactors,
}

pub(crate) fn retract_raw(q: &OrthosymplecticBasis, v: &Mat, s: &GaugeMatrix) -> Result<Retraction> {
    let theta = theta_raw(q.full(), v, s);
    let factors = upsilon_factors(q.full(), &theta);
    let a = cayley_apply_lowrank(&factors, q.a_block()).map_err(|e| match e {
        Error::DegenerateFactors { .. } => Error::CoordinateBreakdown("retraction inner solve is singular; reduce dt".into()),
        e => e,
    })?;
    Ok(Retraction {
        point: OrthosymplecticBasis::from_a_block_unchecked(a),
        factors,
    })
}

/// `R_Q(V) = cay(Theta Q^T - Q Theta^T) Q`, evaluated in `O(m k^2)`.
pub fn retract(q: &OrthosymplecticBasis, v: &TangentVector, s: &GaugeMatrix) -> Result<OrthosymplecticBasis> {
    check_shape(q, &v.data)?;
    check_gauge(q, s)?;
    Ok(retract_raw(q, &v.data, s)?.point)
}

/// Solves `dR_Q|_V (V~) = W` for `V~ ∈ T_Q`, with `W` tangent at `P = R_Q(V)`.
pub fn inverse_tangent_map(
    q: &OrthosymplecticBasis,
    v: &TangentVector,
    w: &Mat,
    s: &GaugeMatrix,
) -> Result<TangentVector> {
    check_shape(q, &v.data)?;
    check_shape(q, w)?;
    check_gauge(q, s)?;
    let ret = retract_raw(q, &v.data, s)?;
    let out = inverse_tangent_map_raw(q, &ret, w, s)?;
    Ok(TangentVector::assume(out, TangentFlavor::General))
}

pub(crate) fn inverse_tangent_map_raw(q: &OrthosymplecticBasis, ret: &Retraction, w: &Mat, s: &GaugeMatrix) -> Result<Mat> {
    let qm = q.full();
    let p = ret.point.full();
    let n = qm.ncols();
    let breakdown = || Error::CoordinateBreakdown("Q^T P + I is singular (eigenvalue -1); reduce dt".into());

    let mut qtp_i = qm.transpose() * p;
    for i in 0..n {
        qtp_i[(i, i)] += 1.0;
    }
    // T2 = (2I - Upsilon) W (Q^T P + I)^{-1}
    let ups_w = &ret.factors.alpha * (ret.factors.beta.transpose() * w);
    let rhs = w * 2.0 - ups_w;
    let t2 = pivoted_solve_right(&rhs, &qtp_i).ok_or_else(breakdown)?;

    // 2 T1 = 2S - (Q^T T2 + T2^T Q) - (P^T Q + I)^{-1} (P + Q)^T T2
    let qt_t2 = qm.transpose() * &t2;
    let pq_t2 = (p + qm).transpose() * &t2;
    let skew_part = pivoted_solve(&qtp_i.transpose(), &pq_t2).ok_or_else(breakdown)?;
    let mut t1 = -(&qt_t2 + qt_t2.transpose()) - skew_part;
    if !s.is_zero() {
        t1 += &s.0 * 2.0;
    }
    t1 *= 0.5;

    let theta = qm * t1 + t2;
    Ok(&theta - qm * (theta.transpose() * qm))
}
