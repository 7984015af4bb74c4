use serde::{Deserialize, Serialize};

use super::HamiltonianModel;
use crate::error::{Error, Result};

/// Periodic 1D shallow-water discretization on `[-L, L)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweConfig {
    pub half_length: f64,
    pub grid_points: usize,
    pub final_time: f64,
    pub dt: f64,
}

impl SweConfig {
    /// Reduced resolution used for quick runs.
    pub fn desk() -> Self {
        Self { half_length: 10.0, grid_points: 256, final_time: 2.0, dt: 2e-3 }
    }

    /// Full resolution.
    pub fn paper() -> Self {
        Self { half_length: 10.0, grid_points: 1000, final_time: 7.0, dt: 1e-3 }
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_length / self.grid_points as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 4 {
            return Err(Error::Config(format!("grid_points = {} must be at least 4", self.grid_points)));
        }
        if !(self.half_length > 0.0) || !(self.final_time > 0.0) || !(self.dt > 0.0) {
            return Err(Error::Config("half_length, final_time and dt must be positive".into()));
        }
        Ok(())
    }
}

/// State `u = (h, phi)`, parameters `eta = (alpha, beta)` of the initial hump
/// `h0 = 1 + alpha exp(-beta x^2)`, `phi0 = 0`.
#[derive(Debug, Clone)]
pub struct SweModel {
    pub config: SweConfig,
}

impl SweModel {
    pub fn new(config: SweConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }

    pub fn grid(&self) -> Vec<f64> {
        let dx = self.config.dx();
        (0..self.config.grid_points).map(|i| -self.config.half_length + i as f64 * dx).collect()
    }

    fn centered_diff(&self, phi: &[f64], out: &mut [f64]) {
        let n = phi.len();
        let inv = 1.0 / (2.0 * self.config.dx());
        for i in 0..n {
            out[i] = (phi[(i + 1) % n] - phi[(i + n - 1) % n]) * inv;
        }
    }
}

impl HamiltonianModel for SweModel {
    fn dim(&self) -> usize {
        2 * self.config.grid_points
    }

    fn hamiltonian(&self, u: &[f64], _eta: &[f64]) -> f64 {
        let n = self.config.grid_points;
        let (h, phi) = u.split_at(n);
        let mut d = vec![0.0; n];
        self.centered_diff(phi, &mut d);
        0.5 * h.iter().zip(&d).map(|(hi, di)| hi * di * di + hi * hi).sum::<f64>()
    }

    fn gradient(&self, u: &[f64], _eta: &[f64], out: &mut [f64]) {
        let n = self.config.grid_points;
        let (h, phi) = u.split_at(n);
        let mut d = vec![0.0; n];
        self.centered_diff(phi, &mut d);
        let inv = 1.0 / (2.0 * self.config.dx());
        let (gh, gphi) = out.split_at_mut(n);
        for i in 0..n {
            gh[i] = 0.5 * d[i] * d[i] + h[i];
            let l = (i + n - 1) % n;
            let r = (i + 1) % n;
            gphi[i] = (h[l] * d[l] - h[r] * d[r]) * inv;
        }
    }

    fn initial(&self, eta: &[f64]) -> Vec<f64> {
        let (alpha, beta) = (eta[0], eta[1]);
        let n = self.config.grid_points;
        let mut u = vec![0.0; 2 * n];
        for (i, x) in self.grid().into_iter().enumerate() {
            u[i] = 1.0 + alpha * (-beta * x * x).exp();
        }
        u
    }

    fn descriptor(&self) -> String {
        format!("swe(L={}, N={})", self.config.half_length, self.config.grid_points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::gradient_fd_mismatch;
    use crate::sampling::{normal, rng};

    #[test]
    fn gradient_matches_finite_differences() {
        let model = SweModel::new(SweConfig { grid_points: 40, ..SweConfig::desk() }).unwrap();
        let mut r = rng(3);
        let u: Vec<f64> = (0..80).map(|_| 1.0 + 0.3 * normal(&mut r)).collect();
        let dirs: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let d: Vec<f64> = (0..80).map(|_| normal(&mut r)).collect();
                let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
                d.into_iter().map(|x| x / n).collect()
            })
            .collect();
        assert!(gradient_fd_mismatch(&model, &u, &[0.1, 1.0], &dirs, 1e-5) < 1e-7);
    }

    #[test]
    fn initial_state_and_energy() {
        let model = SweModel::new(SweConfig::desk()).unwrap();
        let u = model.initial(&[0.1, 0.2]);
        assert_eq!(u.len(), 512);
        assert!(u[256..].iter().all(|&x| x == 0.0));
        let x = model.grid();
        assert_eq!(x[0], -10.0);
        let h: f64 = u[..256].iter().map(|h| 0.5 * h * h).sum();
        assert!((model.hamiltonian(&u, &[0.1, 0.2]) - h).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(SweModel::new(SweConfig { grid_points: 2, ..SweConfig::desk() }).is_err());
        assert!(SweModel::new(SweConfig { dt: 0.0, ..SweConfig::desk() }).is_err());
    }
}
