//! Exponential coordinate map: truncated BCH series for `dexp^{-1}` and the
//! low-rank action of `exp(alpha beta^T)`.

use num_rational::Ratio;

use crate::cayley::SkewHamiltonianFactors;
use crate::error::{Error, Result};
use crate::Mat;

/// Coefficients of `ad_A^k(B) = sum_h c_h^(k) A^h B A^(k-h)` and Bernoulli numbers `B_0..B_q`.
#[derive(Debug, Clone, PartialEq)]
pub struct BchTable {
    /// `commutator[k][h] = c_h^(k)` for `0 <= h <= k <= q`.
    pub commutator: Vec<Vec<f64>>,
    /// First-kind Bernoulli numbers (`B_1 = -1/2`).
    pub bernoulli: Vec<f64>,
}

impl BchTable {
    pub fn order(&self) -> usize {
        self.bernoulli.len() - 1
    }

    /// `c_h^(k) B_k / k!`
    pub fn weighted(&self, k: usize, h: usize) -> f64 {
        let fact: f64 = (1..=k).map(|i| i as f64).product();
        self.commutator[k][h] * self.bernoulli[k] / fact
    }
}

/// Bernoulli numbers `B_0..B_n` as exact rationals (`B_1 = -1/2`).
pub fn bernoulli_exact(n: usize) -> Vec<Ratio<i128>> {
    let mut b: Vec<Ratio<i128>> = Vec::with_capacity(n + 1);
    b.push(Ratio::from_integer(1));
    for k in 1..=n {
        // sum_{j=0}^{k} C(k+1, j) B_j = 0
        let mut acc = Ratio::from_integer(0);
        let mut binom: i128 = 1;
        for (j, bj) in b.iter().enumerate() {
            acc += *bj * binom;
            binom = binom * (k as i128 + 1 - j as i128) / (j as i128 + 1);
        }
        b.push(-acc / Ratio::from_integer(k as i128 + 1));
    }
    b
}

pub fn bch_coefficients(q: usize) -> BchTable {
    let mut c: Vec<Vec<i64>> = vec![vec![1]];
    for k in 1..=q {
        let prev = &c[k - 1];
        let mut row = vec![0i64; k + 1];
        row[0] = -prev[0];
        row[k] = prev[k - 1];
        for h in 1..k {
            row[h] = prev[h - 1] - prev[h];
        }
        c.push(row);
    }
    let bernoulli = bernoulli_exact(q)
        .into_iter()
        .map(|r| *r.numer() as f64 / *r.denom() as f64)
        .collect();
    BchTable {
        commutator: c.into_iter().map(|row| row.into_iter().map(|x| x as f64).collect()).collect(),
        bernoulli,
    }
}

/// Factors of `sum_{k=0}^{q} B_k / k! ad_Omega^k(L)` with `Omega = alpha beta^T`, `L = gamma delta^T`.
///
/// Regrouping the commutator polynomial by the left power of `Omega` gives
/// `sum_h Omega^h gamma delta^T P_h(Omega)` with
/// `P_h(x) = sum_{k >= h} c_h^(k) B_k / k! x^(k-h)`. Every power `Omega^j`
/// with `j >= 1` is `alpha (beta^T alpha)^(j-1) beta^T`, so the result is
/// `[gamma | alpha] K [delta | beta]^T` for a small core `K`, of rank at most
/// `rank(L) + rank(Omega)`.
pub fn dexp_inverse_truncated(omega: &SkewHamiltonianFactors, l: &SkewHamiltonianFactors, q: usize) -> Result<SkewHamiltonianFactors> {
    if omega.dim() != l.dim() {
        return Err(Error::Dimension(format!("row mismatch: {} vs {}", omega.dim(), l.dim())));
    }
    let r = omega.rank();
    if r == 0 || q == 0 {
        return Ok(l.clone());
    }
    let s = l.rank();
    let table = bch_coefficients(q);
    let (alpha, beta) = (&omega.alpha, &omega.beta);
    let (gamma, delta) = (&l.alpha, &l.beta);

    let g = beta.transpose() * alpha; // r x r
    let gt = g.transpose();
    let bg = beta.transpose() * gamma; // r x s
    let ad = alpha.transpose() * delta; // r x s

    // powers (G^T)^(j-1) alpha^T delta for j = 1..q
    let mut right_powers: Vec<Mat> = Vec::with_capacity(q);
    let mut cur = ad.clone();
    for _ in 0..q {
        right_powers.push(cur.clone());
        cur = &gt * &cur;
    }

    // Y_h = a_h delta + beta N_h,  N_h = sum_{j>=1, h+j<=q} chat_h^(h+j) (G^T)^(j-1) alpha^T delta
    let n_of = |h: usize| -> Mat {
        let mut n = Mat::zeros(r, s);
        for j in 1..=(q - h) {
            let c = table.weighted(h + j, h);
            if c != 0.0 {
                n += &right_powers[j - 1] * c;
            }
        }
        n
    };

    let a0 = table.weighted(0, 0);
    let n0 = n_of(0);
    // Left terms: for h >= 1, Omega^h gamma = alpha G^(h-1) beta^T gamma.
    let mut c1 = Mat::zeros(r, s);
    let mut c2 = Mat::zeros(r, r);
    let mut left = bg.clone();
    for h in 1..=q {
        let ah = table.weighted(h, h);
        let nh = n_of(h);
        if ah != 0.0 {
            c1 += &left * ah;
        }
        c2 += &left * nh.transpose();
        left = &g * &left;
    }

    // Lambda = [gamma | alpha] K [delta | beta]^T, K = [[a0 I, N0^T], [C1, C2]]
    let mut k = Mat::zeros(s + r, s + r);
    for i in 0..s {
        k[(i, i)] = a0;
    }
    k.view_mut((0, s), (s, r)).copy_from(&n0.transpose());
    k.view_mut((s, 0), (r, s)).copy_from(&c1);
    k.view_mut((s, s), (r, r)).copy_from(&c2);

    let mut e = Mat::zeros(l.dim(), s + r);
    e.columns_mut(0, s).copy_from(gamma);
    e.columns_mut(s, r).copy_from(alpha);
    let mut db = Mat::zeros(l.dim(), s + r);
    db.columns_mut(0, s).copy_from(delta);
    db.columns_mut(s, r).copy_from(beta);
    let f = db * k.transpose();
    SkewHamiltonianFactors::new(e, f)
}

/// `exp(alpha beta^T) Y = Y + alpha g(beta^T alpha) beta^T Y` with `g(z) = (e^z - 1) / z`.
///
/// `g(G)` is read off the upper-right block of `exp([[G, I], [0, 0]])`, so no
/// inverse of `beta^T alpha` is needed.
pub fn exp_apply_lowrank(omega: &SkewHamiltonianFactors, y: &Mat) -> Result<Mat> {
    if y.nrows() != omega.dim() {
        return Err(Error::Dimension(format!("Y has {} rows, factors have {}", y.nrows(), omega.dim())));
    }
    let r = omega.rank();
    if r == 0 {
        return Ok(y.clone());
    }
    let g = omega.beta.transpose() * &omega.alpha;
    let mut aug = Mat::zeros(2 * r, 2 * r);
    aug.view_mut((0, 0), (r, r)).copy_from(&g);
    for i in 0..r {
        aug[(i, r + i)] = 1.0;
    }
    let e = aug.exp();
    let phi = e.view((0, r), (r, r)).into_owned();
    if !phi.iter().all(|x| x.is_finite()) {
        return Err(Error::DegenerateFactors { size: r });
    }
    Ok(y + &omega.alpha * (phi * (omega.beta.transpose() * y)))
}

/// Dense oracle: `sum_{k=0}^{q} B_k / k! ad_Omega^k(L)` by nested commutators.
pub fn dexp_inverse_dense(omega: &Mat, l: &Mat, q: usize) -> Mat {
    let b = bch_coefficients(q).bernoulli;
    let mut term = l.clone();
    let mut out = l * b[0];
    let mut fact = 1.0;
    for (k, bk) in b.iter().enumerate().skip(1) {
        term = omega * &term - &term * omega;
        fact *= k as f64;
        out += &term * (bk / fact);
    }
    out
}

/// Dense oracle: Taylor series of the matrix exponential with a fixed number of terms.
pub fn exp_dense_taylor(a: &Mat, terms: usize) -> Mat {
    let n = a.nrows();
    let mut out = Mat::identity(n, n);
    let mut term = Mat::identity(n, n);
    for k in 1..terms {
        term = &term * a / k as f64;
        out += &term;
    }
    out
}
