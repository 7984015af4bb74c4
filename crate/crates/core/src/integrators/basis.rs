use crate::bch::{dexp_inverse_truncated, exp_apply_lowrank};
use crate::cayley::{
    cayley_apply_lowrank, dcay_inverse_lowrank, inverse_tangent_map_raw, lowrank_sum, retract_raw, GaugeMatrix,
    SkewHamiltonianFactors, RECOMPRESS_TOL,
};
use crate::error::{Error, Result};
use crate::flow::{lie_factors_raw, velocity_from_gradient, GramS};
use crate::models::Ensemble;
use crate::symplectic::{CoefficientMatrix, OrthosymplecticBasis};
use crate::Mat;

use super::ButcherTableau;

/// Horizontal velocity field `F(c, U)` driving the basis over one step; `c` is the stage
/// abscissa in `[0, 1]`.
pub trait BasisField {
    fn velocity(&self, c: f64, u: &OrthosymplecticBasis) -> Result<Mat>;
}

/// Basis velocity with the coefficients held fixed.
pub struct FrozenCoefficients<'a> {
    sys: Ensemble<'a>,
    z: &'a CoefficientMatrix,
    gram: GramS,
}

impl<'a> FrozenCoefficients<'a> {
    pub fn new(sys: Ensemble<'a>, z: &'a CoefficientMatrix, rank_tol: f64) -> Result<Self> {
        Ok(Self { sys, z, gram: GramS::new(z, rank_tol)? })
    }
}

impl BasisField for FrozenCoefficients<'_> {
    fn velocity(&self, _c: f64, u: &OrthosymplecticBasis) -> Result<Mat> {
        let y = self.sys.gradient_block(&(u.full() * self.z.data().transpose()))?;
        Ok(velocity_from_gradient(u.full(), self.z.data(), &y, &self.gram))
    }
}

/// Basis velocity with `Z(c) = (1 - c) Z_0 + c Z_1`.
pub struct InterpolatedCoefficients<'a> {
    sys: Ensemble<'a>,
    z0: &'a CoefficientMatrix,
    z1: &'a CoefficientMatrix,
    rank_tol: f64,
}

impl<'a> InterpolatedCoefficients<'a> {
    pub fn new(sys: Ensemble<'a>, z0: &'a CoefficientMatrix, z1: &'a CoefficientMatrix, rank_tol: f64) -> Self {
        Self { sys, z0, z1, rank_tol }
    }
}

impl BasisField for InterpolatedCoefficients<'_> {
    fn velocity(&self, c: f64, u: &OrthosymplecticBasis) -> Result<Mat> {
        let z = if c == 0.0 {
            self.z0.clone()
        } else {
            CoefficientMatrix(self.z0.data() * (1.0 - c) + self.z1.data() * c)
        };
        let gram = GramS::new(&z, self.rank_tol)?;
        let y = self.sys.gradient_block(&(u.full() * z.data().transpose()))?;
        Ok(velocity_from_gradient(u.full(), z.data(), &y, &gram))
    }
}

/// Basis integrator family.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasisMethod {
    RkmkCayley,
    RkmkExp,
    Tangent,
}

impl BasisMethod {
    pub fn name(&self) -> &'static str {
        match self {
            BasisMethod::RkmkCayley => "rkmk-cay",
            BasisMethod::RkmkExp => "rkmk-exp",
            BasisMethod::Tangent => "tangent",
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "rkmk-cay" => Ok(BasisMethod::RkmkCayley),
            "rkmk-exp" => Ok(BasisMethod::RkmkExp),
            "tangent" => Ok(BasisMethod::Tangent),
            other => Err(Error::Config(format!("unknown basis method '{other}' (expected rkmk-cay, rkmk-exp or tangent)"))),
        }
    }
}

/// A basis method with its tableau and method-specific settings.
#[derive(Debug, Clone)]
pub struct BasisScheme {
    pub method: BasisMethod,
    pub tableau: ButcherTableau,
    /// Truncation order of the BCH series (`rkmk-exp` only).
    pub q_bch: usize,
    /// Gauge `S` (`tangent` only); `None` means `S = 0`.
    pub gauge: Option<GaugeMatrix>,
}

impl BasisScheme {
    pub fn new(method: BasisMethod, tableau: ButcherTableau) -> Self {
        let q_bch = tableau.order.saturating_sub(1).max(1);
        Self { method, tableau, q_bch, gauge: None }
    }
}

fn combine(terms: &[SkewHamiltonianFactors], coeffs: &[f64], dt: f64, two_m: usize, k: usize) -> Result<SkewHamiltonianFactors> {
    let list: Vec<(f64, &SkewHamiltonianFactors)> = terms.iter().zip(coeffs).map(|(t, &c)| (dt * c, t)).filter(|(c, _)| *c != 0.0).collect();
    if list.is_empty() {
        return Ok(SkewHamiltonianFactors::zero(two_m));
    }
    let sum = lowrank_sum(&list)?;
    Ok(if sum.rank() > 8 * k { sum.recompress(RECOMPRESS_TOL) } else { sum })
}

fn breakdown(e: Error) -> Error {
    match e {
        Error::DegenerateFactors { size } => {
            Error::CoordinateBreakdown(format!("{size}x{size} coordinate-map solve is singular; reduce dt"))
        }
        e => e,
    }
}

#[derive(Clone, Copy)]
enum Coordinates {
    Cayley,
    Exp(usize),
}

fn rkmk(u: &OrthosymplecticBasis, field: &dyn BasisField, dt: f64, tab: &ButcherTableau, coords: Coordinates, first: Option<&Mat>) -> Result<OrthosymplecticBasis> {
    let two_m = u.full().nrows();
    let k = u.half_reduced_dim();
    let apply = |omega: &SkewHamiltonianFactors| -> Result<OrthosymplecticBasis> {
        let a = match coords {
            Coordinates::Cayley => cayley_apply_lowrank(omega, u.a_block()),
            Coordinates::Exp(_) => exp_apply_lowrank(omega, u.a_block()),
        }
        .map_err(breakdown)?;
        Ok(OrthosymplecticBasis::from_a_block_unchecked(a))
    };
    let mut terms: Vec<SkewHamiltonianFactors> = Vec::with_capacity(tab.stages());
    for i in 0..tab.stages() {
        let (omega, ui) = if i == 0 {
            (SkewHamiltonianFactors::zero(two_m), u.clone())
        } else {
            let omega = combine(&terms, &tab.a[i][..i], dt, two_m, k)?;
            let ui = apply(&omega)?;
            (omega, ui)
        };
        let f = match (i, first) {
            (0, Some(f)) => f.clone(),
            _ => field.velocity(tab.c[i], &ui)?,
        };
        let l = lie_factors_raw(ui.full(), &f);
        let term = match coords {
            Coordinates::Cayley => dcay_inverse_lowrank(&omega, &l)?,
            Coordinates::Exp(q) => {
                let t = dexp_inverse_truncated(&omega, &l, q)?;
                if t.rank() > 8 * k { t.recompress(RECOMPRESS_TOL) } else { t }
            }
        };
        terms.push(term);
    }
    let omega = combine(&terms, &tab.b, dt, two_m, k)?;
    apply(&omega)
}

fn tangent(u: &OrthosymplecticBasis, field: &dyn BasisField, dt: f64, tab: &ButcherTableau, gauge: &GaugeMatrix, first: Option<&Mat>) -> Result<OrthosymplecticBasis> {
    let mut stages: Vec<Mat> = Vec::with_capacity(tab.stages());
    let shape = u.full().shape();
    let sum = |coeffs: &[f64], stages: &[Mat]| -> Mat {
        let mut v = Mat::zeros(shape.0, shape.1);
        for (c, a) in coeffs.iter().zip(stages) {
            if *c != 0.0 {
                v += a * (dt * c);
            }
        }
        v
    };
    for i in 0..tab.stages() {
        let a = if i == 0 {
            match first {
                Some(f) => f.clone(),
                None => field.velocity(tab.c[0], u)?,
            }
        } else {
            let v = sum(&tab.a[i][..i], &stages);
            let ret = retract_raw(u, &v, gauge)?;
            let w = field.velocity(tab.c[i], &ret.point)?;
            inverse_tangent_map_raw(u, &ret, &w, gauge)?
        };
        stages.push(a);
    }
    let v = sum(&tab.b, &stages);
    Ok(retract_raw(u, &v, gauge)?.point)
}

fn check_step(tab: &ButcherTableau, dt: f64) -> Result<()> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::Config(format!("dt = {dt} must be positive")));
    }
    if tab.stages() == 0 {
        return Err(Error::Config("empty tableau".into()));
    }
    Ok(())
}

/// One basis step of `scheme` under `field`; `first` optionally supplies `F(0, U_m)`.
pub fn basis_step(u: &OrthosymplecticBasis, field: &dyn BasisField, dt: f64, scheme: &BasisScheme, first: Option<&Mat>) -> Result<OrthosymplecticBasis> {
    check_step(&scheme.tableau, dt)?;
    match scheme.method {
        BasisMethod::RkmkCayley => rkmk(u, field, dt, &scheme.tableau, Coordinates::Cayley, first),
        BasisMethod::RkmkExp => rkmk(u, field, dt, &scheme.tableau, Coordinates::Exp(scheme.q_bch), first),
        BasisMethod::Tangent => {
            let zero;
            let gauge = match &scheme.gauge {
                Some(g) => g,
                None => {
                    zero = GaugeMatrix::zero(u.half_reduced_dim());
                    &zero
                }
            };
            if gauge.matrix().nrows() != 2 * u.half_reduced_dim() {
                return Err(Error::Dimension("gauge size does not match the basis".into()));
            }
            tangent(u, field, dt, &scheme.tableau, gauge, first)
        }
    }
}

/// RK-MK step with Cayley coordinates and frozen coefficients.
pub fn rkmk_cayley_step(u: &OrthosymplecticBasis, z: &CoefficientMatrix, sys: &Ensemble, dt: f64, tableau: &ButcherTableau, rank_tol: f64) -> Result<OrthosymplecticBasis> {
    let field = FrozenCoefficients::new(*sys, z, rank_tol)?;
    basis_step(u, &field, dt, &BasisScheme::new(BasisMethod::RkmkCayley, tableau.clone()), None)
}

/// RK-MK step with exponential coordinates (BCH series truncated at `q_bch`).
pub fn rkmk_exp_step(u: &OrthosymplecticBasis, z: &CoefficientMatrix, sys: &Ensemble, dt: f64, tableau: &ButcherTableau, q_bch: usize, rank_tol: f64) -> Result<OrthosymplecticBasis> {
    let field = FrozenCoefficients::new(*sys, z, rank_tol)?;
    let mut scheme = BasisScheme::new(BasisMethod::RkmkExp, tableau.clone());
    scheme.q_bch = q_bch;
    basis_step(u, &field, dt, &scheme, None)
}

/// Retraction-based tangent RK step with gauge `s`.
pub fn tangent_rk_step(u: &OrthosymplecticBasis, z: &CoefficientMatrix, sys: &Ensemble, dt: f64, tableau: &ButcherTableau, s: &GaugeMatrix, rank_tol: f64) -> Result<OrthosymplecticBasis> {
    let field = FrozenCoefficients::new(*sys, z, rank_tol)?;
    let mut scheme = BasisScheme::new(BasisMethod::Tangent, tableau.clone());
    scheme.gauge = Some(s.clone());
    basis_step(u, &field, dt, &scheme, None)
}
