use super::HamiltonianModel;
use crate::error::{Error, Result};

/// `H(u) = u^T K u / 2` with `K = diag(k)` positive.
///
/// Parameters `eta = (shift, width)` select the initial profile
/// `q_i = exp(-width (x_i - shift)^2)`, `p_i = exp(-width (x_i + shift)^2) / 2` on `x_i ∈ [-1, 1)`.
#[derive(Debug, Clone)]
pub struct LinearOscillator {
    stiffness: Vec<f64>,
}

impl LinearOscillator {
    pub fn new(stiffness: Vec<f64>) -> Result<Self> {
        if stiffness.is_empty() || stiffness.len() % 2 != 0 {
            return Err(Error::Config(format!("stiffness length {} must be even and positive", stiffness.len())));
        }
        if stiffness.iter().any(|&k| !(k > 0.0) || !k.is_finite()) {
            return Err(Error::Config("stiffness must be positive and finite".into()));
        }
        Ok(Self { stiffness })
    }

    pub fn identity(m: usize) -> Self {
        Self { stiffness: vec![1.0; 2 * m] }
    }

    /// Distinct frequencies `1 + i / m` on the `q` and `p` halves.
    pub fn graded(m: usize) -> Self {
        let mut k: Vec<f64> = (0..m).map(|i| 1.0 + i as f64 / m as f64).collect();
        k.extend((0..m).map(|i| 1.5 - 0.5 * i as f64 / m as f64));
        Self { stiffness: k }
    }

    pub fn stiffness(&self) -> &[f64] {
        &self.stiffness
    }
}

impl HamiltonianModel for LinearOscillator {
    fn dim(&self) -> usize {
        self.stiffness.len()
    }

    fn hamiltonian(&self, u: &[f64], _eta: &[f64]) -> f64 {
        0.5 * u.iter().zip(&self.stiffness).map(|(x, k)| k * x * x).sum::<f64>()
    }

    fn gradient(&self, u: &[f64], _eta: &[f64], out: &mut [f64]) {
        for ((o, x), k) in out.iter_mut().zip(u).zip(&self.stiffness) {
            *o = k * x;
        }
    }

    fn initial(&self, eta: &[f64]) -> Vec<f64> {
        let m = self.stiffness.len() / 2;
        let (shift, width) = (eta.first().copied().unwrap_or(0.0), eta.get(1).copied().unwrap_or(4.0));
        let mut u = vec![0.0; 2 * m];
        for i in 0..m {
            let x = -1.0 + 2.0 * i as f64 / m as f64;
            u[i] = (-width * (x - shift).powi(2)).exp();
            u[m + i] = 0.5 * (-width * (x + shift).powi(2)).exp();
        }
        u
    }

    fn descriptor(&self) -> String {
        format!("oscillator(2m={})", self.stiffness.len())
    }
}
