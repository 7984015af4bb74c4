use serde::{Deserialize, Serialize};

use crate::cayley::GaugeMatrix;
use crate::error::{Error, Result};
use crate::integrators::{BasisMethod, BasisScheme, ButcherTableau, MidpointOptions};
use crate::models::{HamiltonianModel, LinearOscillator, ParameterGrid, SweConfig, SweModel};

/// Scale presets selectable from the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Scale {
    Desk,
    Paper,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<String>,
    pub model: ModelSection,
    #[serde(default)]
    pub parameters: GridSection,
    #[serde(default)]
    pub training: TrainingSection,
    #[serde(default)]
    pub reduction: ReductionSection,
    pub time: TimeSection,
    #[serde(default)]
    pub tolerance: ToleranceSection,
    #[serde(default)]
    pub scaling: ScalingSection,
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    /// `swe` or `oscillator`.
    pub name: String,
    #[serde(default = "default_half_length")]
    pub half_length: f64,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    /// Oscillator half dimension `m`.
    #[serde(default)]
    pub m: Option<usize>,
    /// Oscillator stiffness: `identity`, `graded`, or explicit diagonal values.
    #[serde(default)]
    pub stiffness: Option<Stiffness>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Stiffness {
    Named(String),
    Diagonal(Vec<f64>),
}

fn default_half_length() -> f64 {
    10.0
}

fn default_grid_points() -> usize {
    256
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub ranges: Vec<(f64, f64)>,
    pub samples: Vec<usize>,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { ranges: vec![(0.1, 0.15), (0.2, 1.5)], samples: vec![2, 8] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub samples: Vec<usize>,
    pub stride: usize,
}

impl Default for TrainingSection {
    fn default() -> Self {
        Self { samples: vec![2, 2], stride: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReductionSection {
    /// Reduced dimensions `2k`.
    pub sizes: Vec<usize>,
    pub basis_method: String,
    pub tableau: String,
    /// `S = gauge diag(I, -I)` for the tangent method.
    pub gauge: f64,
    pub q_bch: Option<usize>,
    /// Subset of `dynamical`, `global`.
    pub methods: Vec<String>,
}

impl Default for ReductionSection {
    fn default() -> Self {
        Self {
            sizes: vec![6, 8, 10, 12],
            basis_method: "rkmk-cay".into(),
            tableau: "midpoint".into(),
            gauge: 0.0,
            q_bch: None,
            methods: vec!["dynamical".into(), "global".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub final_time: f64,
    #[serde(default = "default_save_stride")]
    pub save_stride: usize,
}

fn default_save_stride() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceSection {
    pub rank_tol: f64,
    pub midpoint_tol: f64,
    pub midpoint_max_iters: usize,
    pub manifold_gate: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        Self { rank_tol: 1e-10, midpoint_tol: 1e-12, midpoint_max_iters: 50, manifold_gate: 1e-7 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScalingSection {
    /// Half dimensions `m` of the SWE grid.
    pub m_values: Vec<usize>,
    pub k: usize,
    pub p: usize,
    pub runs: usize,
    pub warmup: usize,
    pub methods: Vec<String>,
    pub tableau: String,
}

impl Default for ScalingSection {
    fn default() -> Self {
        Self {
            m_values: vec![512, 1024, 2048, 4096],
            k: 4,
            p: 16,
            runs: 50,
            warmup: 3,
            methods: vec!["rkmk-cay".into(), "tangent".into()],
            tableau: "rk4".into(),
        }
    }
}

fn field<T: std::fmt::Display>(name: &str, msg: T) -> Error {
    Error::Config(format!("field `{name}`: {msg}"))
}

impl ExperimentConfig {
    /// Parses TOML text; syntax and type errors carry line and column.
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            e => e,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn apply_scale(&mut self, scale: Scale) {
        let preset = match scale {
            Scale::Desk => SweConfig::desk(),
            Scale::Paper => SweConfig::paper(),
        };
        if self.model.name == "swe" {
            self.model.half_length = preset.half_length;
            self.model.grid_points = preset.grid_points;
            self.time.dt = preset.dt;
            self.time.final_time = preset.final_time;
            self.parameters = GridSection {
                ranges: vec![(0.1, 0.15), (0.2, 1.5)],
                samples: match scale {
                    Scale::Desk => vec![2, 8],
                    Scale::Paper => vec![10, 10],
                },
            };
            self.training = TrainingSection { samples: vec![2, 2], stride: 10 };
            self.reduction.sizes = match scale {
                Scale::Desk => vec![6, 8, 10, 12],
                Scale::Paper => vec![6, 8, 10, 12, 14, 16],
            };
        }
    }

    pub fn validate(&self) -> Result<()> {
        let model = self.build_model()?;
        let two_m = model.dim();
        self.parameter_grid()?;
        self.training_grid()?;
        if self.training.stride == 0 {
            return Err(field("training.stride", "must be at least 1"));
        }
        if self.reduction.sizes.is_empty() {
            return Err(field("reduction.sizes", "needs at least one reduced dimension"));
        }
        for &s in &self.reduction.sizes {
            if s == 0 || s % 2 != 0 || s > two_m {
                return Err(field("reduction.sizes", format!("2k = {s} must be even, positive and at most 2m = {two_m}")));
            }
            if s / 2 > self.parameter_grid()?.len() {
                return Err(field("reduction.sizes", format!("k = {} exceeds the number of parameters", s / 2)));
            }
        }
        BasisMethod::by_name(&self.reduction.basis_method).map_err(|e| field("reduction.basis_method", e))?;
        ButcherTableau::by_name(&self.reduction.tableau).map_err(|e| field("reduction.tableau", e))?;
        if !self.reduction.gauge.is_finite() {
            return Err(field("reduction.gauge", "must be finite"));
        }
        if self.reduction.q_bch == Some(0) {
            return Err(field("reduction.q_bch", "must be at least 1"));
        }
        for m in &self.reduction.methods {
            if m != "dynamical" && m != "global" {
                return Err(field("reduction.methods", format!("unknown method '{m}' (expected dynamical or global)")));
            }
        }
        if !(self.time.dt > 0.0) || !self.time.dt.is_finite() {
            return Err(field("time.dt", "must be positive"));
        }
        if !(self.time.final_time > 0.0) {
            return Err(field("time.final_time", "must be positive"));
        }
        let n = (self.time.final_time / self.time.dt).round();
        if (n * self.time.dt - self.time.final_time).abs() > 1e-9 * self.time.final_time || n < 1.0 {
            return Err(field("time.final_time", "must be an integer multiple of time.dt"));
        }
        if self.time.save_stride == 0 {
            return Err(field("time.save_stride", "must be at least 1"));
        }
        let t = &self.tolerance;
        if !(t.rank_tol > 0.0) || !(t.midpoint_tol > 0.0) || t.midpoint_max_iters == 0 || !(t.manifold_gate > 0.0) {
            return Err(field("tolerance", "all tolerances must be positive"));
        }
        let s = &self.scaling;
        if s.m_values.is_empty() || s.m_values.iter().any(|&m| m < 4) {
            return Err(field("scaling.m_values", "needs values of at least 4"));
        }
        if s.k == 0 || s.p < s.k || s.runs == 0 {
            return Err(field("scaling", "needs k >= 1, p >= k and runs >= 1"));
        }
        for m in &s.methods {
            BasisMethod::by_name(m).map_err(|e| field("scaling.methods", e))?;
        }
        ButcherTableau::by_name(&s.tableau).map_err(|e| field("scaling.tableau", e))?;
        Ok(())
    }

    pub fn build_model(&self) -> Result<Box<dyn HamiltonianModel>> {
        match self.model.name.as_str() {
            "swe" => {
                let cfg = SweConfig {
                    half_length: self.model.half_length,
                    grid_points: self.model.grid_points,
                    final_time: self.time.final_time,
                    dt: self.time.dt,
                };
                Ok(Box::new(SweModel::new(cfg).map_err(|e| field("model", e))?))
            }
            "oscillator" => {
                let m = self.model.m.ok_or_else(|| field("model.m", "required for the oscillator"))?;
                if m == 0 {
                    return Err(field("model.m", "must be positive"));
                }
                let osc = match &self.model.stiffness {
                    None => LinearOscillator::graded(m),
                    Some(Stiffness::Named(n)) if n == "graded" => LinearOscillator::graded(m),
                    Some(Stiffness::Named(n)) if n == "identity" => LinearOscillator::identity(m),
                    Some(Stiffness::Named(n)) => return Err(field("model.stiffness", format!("unknown preset '{n}'"))),
                    Some(Stiffness::Diagonal(d)) => {
                        if d.len() != 2 * m {
                            return Err(field("model.stiffness", format!("needs {} entries", 2 * m)));
                        }
                        LinearOscillator::new(d.clone()).map_err(|e| field("model.stiffness", e))?
                    }
                };
                Ok(Box::new(osc))
            }
            other => Err(field("model.name", format!("unknown model '{other}' (expected swe or oscillator)"))),
        }
    }

    pub fn parameter_grid(&self) -> Result<ParameterGrid> {
        ParameterGrid::new(self.parameters.ranges.clone(), self.parameters.samples.clone()).map_err(|e| field("parameters", e))
    }

    pub fn training_grid(&self) -> Result<ParameterGrid> {
        ParameterGrid::new(self.parameters.ranges.clone(), self.training.samples.clone()).map_err(|e| field("training.samples", e))
    }

    pub fn scheme(&self, k: usize) -> Result<BasisScheme> {
        let method = BasisMethod::by_name(&self.reduction.basis_method)?;
        let tableau = ButcherTableau::by_name(&self.reduction.tableau)?;
        let mut scheme = BasisScheme::new(method, tableau);
        if let Some(q) = self.reduction.q_bch {
            scheme.q_bch = q;
        }
        if method == BasisMethod::Tangent {
            scheme.gauge = Some(gauge(k, self.reduction.gauge)?);
        }
        Ok(scheme)
    }

    pub fn midpoint(&self) -> MidpointOptions {
        MidpointOptions { tol: self.tolerance.midpoint_tol, max_iters: self.tolerance.midpoint_max_iters }
    }
}

/// `S = s diag(I_k, -I_k)`.
pub fn gauge(k: usize, s: f64) -> Result<GaugeMatrix> {
    let a = crate::Mat::identity(k, k) * s;
    GaugeMatrix::from_blocks(&a, &crate::Mat::zeros(k, k))
}
