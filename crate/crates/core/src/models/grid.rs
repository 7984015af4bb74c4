use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tensor grid of parameter samples, flattened in lexicographic order
/// (first dimension varies slowest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub ranges: Vec<(f64, f64)>,
    pub samples: Vec<usize>,
}

impl Default for ParameterGrid {
    fn default() -> Self {
        Self {
            ranges: vec![(0.1, 0.15), (0.2, 1.5)],
            samples: vec![4, 4],
        }
    }
}

impl ParameterGrid {
    pub fn new(ranges: Vec<(f64, f64)>, samples: Vec<usize>) -> Result<Self> {
        if ranges.len() != samples.len() {
            return Err(Error::Config(format!(
                "parameter grid has {} ranges but {} sample counts",
                ranges.len(),
                samples.len()
            )));
        }
        if samples.iter().any(|&s| s == 0) {
            return Err(Error::Config("parameter grid needs at least one sample per dimension".into()));
        }
        if ranges.iter().any(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Config("parameter ranges must be finite with lower <= upper".into()));
        }
        Ok(Self { ranges, samples })
    }

    pub fn len(&self) -> usize {
        self.samples.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn axis(&self, d: usize) -> Vec<f64> {
        let (a, b) = self.ranges[d];
        let n = self.samples[d];
        if n == 1 {
            return vec![0.5 * (a + b)];
        }
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        let axes: Vec<Vec<f64>> = (0..self.ranges.len()).map(|d| self.axis(d)).collect();
        let mut out = vec![Vec::new()];
        for axis in &axes {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    axis.iter().map(move |&x| {
                        let mut p = prefix.clone();
                        p.push(x);
                        p
                    })
                })
                .collect();
        }
        out
    }
}
