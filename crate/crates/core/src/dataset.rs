//! Response/design container with the invariants every estimator relies on:
//! a leading intercept column and a full-rank design.

use crate::error::{Error, Result};
use crate::linalg;

#[derive(Debug, Clone)]
pub struct Dataset {
    y: Vec<f64>,
    /// Row-major T x d design, column 0 identically 1.
    x: Vec<f64>,
    d: usize,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(y: Vec<f64>, x: Vec<f64>, d: usize, names: Vec<String>) -> Result<Self> {
        let t = y.len();
        if d == 0 || x.len() != t * d {
            return Err(Error::Data(format!(
                "design shape mismatch: {} cells for T={t}, d={d}",
                x.len()
            )));
        }
        if t < d + 1 {
            return Err(Error::Data(format!(
                "need T >= d + 1 observations, got T={t}, d={d}"
            )));
        }
        if names.len() != d {
            return Err(Error::Data(format!(
                "expected {d} column names, got {}",
                names.len()
            )));
        }
        for row in 0..t {
            let v = x[row * d];
            if v != 1.0 {
                return Err(Error::Data(format!(
                    "column 0 must be identically 1 (row {row} has {v})"
                )));
            }
            if !y[row].is_finite() || x[row * d..(row + 1) * d].iter().any(|c| !c.is_finite()) {
                return Err(Error::Data(format!("non-finite value in row {row}")));
            }
        }
        linalg::gram_full_rank(&x, t, d)?;
        Ok(Dataset { y, x, d, names })
    }

    /// Intercept-only design from a plain sample.
    pub fn from_sample(y: Vec<f64>) -> Result<Self> {
        let t = y.len();
        let x = vec![1.0; t];
        Dataset::new(y, x, 1, vec!["intercept".into()])
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x_flat(&self) -> &[f64] {
        &self.x
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.x[t * self.d..(t + 1) * self.d]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Column means x̄_T.
    pub fn xbar(&self) -> Vec<f64> {
        let t = self.len();
        let mut m = vec![0.0; self.d];
        for row in 0..t {
            for (j, v) in self.row(row).iter().enumerate() {
                m[j] += v;
            }
        }
        for v in &mut m {
            *v /= t as f64;
        }
        m
    }

    /// Per-column standard deviations (population form).
    pub fn column_sds(&self) -> Vec<f64> {
        let t = self.len() as f64;
        let means = self.xbar();
        let mut ss = vec![0.0; self.d];
        for row in 0..self.len() {
            for (j, v) in self.row(row).iter().enumerate() {
                let c = v - means[j];
                ss[j] += c * c;
            }
        }
        ss.iter().map(|s| (s / t).sqrt()).collect()
    }

    /// Magnitude scale of y used for relative tolerances.
    pub fn y_scale(&self) -> f64 {
        self.y
            .iter()
            .map(|v| v.abs())
            .fold(0.0f64, f64::max)
            .max(1.0)
    }

    /// Subset by observation indices (used by subsampling).
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        let mut y = Vec::with_capacity(idx.len());
        let mut x = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            y.push(self.y[i]);
            x.extend_from_slice(self.row(i));
        }
        Dataset::new(y, x, self.d, self.names.clone())
    }

    /// Dataset with y negated, for the upper-tail reduction tau -> 1 - tau.
    pub fn negated(&self) -> Self {
        Dataset {
            y: self.y.iter().map(|v| -v).collect(),
            x: self.x.clone(),
            d: self.d,
            names: self.names.clone(),
        }
    }

    /// Dataset with y replaced by c*y + X b (used by equivariance tests).
    pub fn affine_y(&self, c: f64, b: &[f64]) -> Result<Self> {
        let y = (0..self.len())
            .map(|t| c * self.y[t] + linalg::dot(self.row(t), b))
            .collect();
        Dataset::new(y, self.x.clone(), self.d, self.names.clone())
    }
}
