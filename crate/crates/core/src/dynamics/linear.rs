use serde::{Deserialize, Serialize};

use super::GenericSde;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// `dX = A X dt + B dW` with constant matrices given row by row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSde {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
}

impl LinearSde {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<Vec<f64>>) -> Result<Self> {
        let n = a.len();
        let m = b.first().map_or(0, Vec::len);
        if n == 0 || a.iter().any(|r| r.len() != n) || b.len() != n || b.iter().any(|r| r.len() != m) {
            return Err(Error::dim("A must be n x n and B n x m"));
        }
        Ok(LinearSde { a, b })
    }

    /// Scalar Ornstein–Uhlenbeck process `dX = -θ X dt + σ dW`.
    pub fn ornstein_uhlenbeck(theta: f64, sigma: f64) -> Self {
        LinearSde {
            a: vec![vec![-theta]],
            b: vec![vec![sigma]],
        }
    }
}

impl GenericSde for LinearSde {
    fn state_dim(&self) -> usize {
        self.a.len()
    }
    fn noise_dim(&self) -> usize {
        self.b[0].len()
    }
    fn drift<T: Scalar>(&self, x: &[T], _t: f64) -> Result<Vec<T>> {
        if x.len() != self.a.len() {
            return Err(Error::dim("state size does not match A"));
        }
        Ok(self
            .a
            .iter()
            .map(|row| {
                row.iter()
                    .zip(x)
                    .fold(x[0].lift(0.0), |acc, (a, xi)| acc + xi.clone() * *a)
            })
            .collect())
    }
    fn diffusion<T: Scalar>(&self, x: &[T], _t: f64) -> Result<Vec<Vec<T>>> {
        if x.len() != self.a.len() {
            return Err(Error::dim("state size does not match A"));
        }
        Ok(self
            .b
            .iter()
            .map(|row| row.iter().map(|b| x[0].lift(*b)).collect())
            .collect())
    }
}
