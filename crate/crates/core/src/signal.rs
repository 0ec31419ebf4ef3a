//! Dual-polarization complex sample containers.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A pair of equally long complex streams, one per polarization.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DualPol {
    pub x: Vec<Complex64>,
    pub y: Vec<Complex64>,
}

impl DualPol {
    pub fn new(x: Vec<Complex64>, y: Vec<Complex64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::Shape {
                expected: format!("equal polarization lengths ({})", x.len()),
                got: y.len().to_string(),
            });
        }
        Ok(Self { x, y })
    }

    pub fn zeros(len: usize) -> Self {
        Self {
            x: vec![Complex64::new(0.0, 0.0); len],
            y: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn pols(&self) -> [&[Complex64]; 2] {
        [&self.x, &self.y]
    }

    pub fn pols_mut(&mut self) -> [&mut Vec<Complex64>; 2] {
        [&mut self.x, &mut self.y]
    }

    /// Mean of |x|² + |y|² over samples.
    pub fn mean_total_power(&self) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        let sum: f64 = self
            .x
            .iter()
            .chain(self.y.iter())
            .map(|s| s.norm_sqr())
            .sum();
        sum / self.len() as f64
    }

    pub fn energy(&self) -> f64 {
        self.x.iter().chain(self.y.iter()).map(|s| s.norm_sqr()).sum()
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.x.iter_mut().chain(self.y.iter_mut()) {
            *s *= factor;
        }
    }

    pub fn slice(&self, range: std::ops::Range<usize>) -> DualPol {
        DualPol {
            x: self.x[range.clone()].to_vec(),
            y: self.y[range].to_vec(),
        }
    }

    /// Interleaved (Re x, Im x, Re y, Im y) rows, the feature layout the
    /// equalizers consume.
    pub fn to_features(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.len() * 4);
        for (a, b) in self.x.iter().zip(&self.y) {
            out.extend_from_slice(&[a.re, a.im, b.re, b.im]);
        }
        out
    }

    pub fn from_features(rows: &[f64]) -> Result<Self> {
        if rows.len() % 4 != 0 {
            return Err(Error::Shape {
                expected: "multiple of 4 values".into(),
                got: rows.len().to_string(),
            });
        }
        let (x, y) = rows
            .chunks_exact(4)
            .map(|r| (Complex64::new(r[0], r[1]), Complex64::new(r[2], r[3])))
            .unzip();
        Ok(Self { x, y })
    }
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * db_to_lin(dbm)
}
