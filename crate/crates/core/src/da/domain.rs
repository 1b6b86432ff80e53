//! Gaussian uncertainty mapped onto a box of DA deviation variables.

use nalgebra::{DMatrix, DVector};

use super::poly::{identity_vars, TaylorPoly};
use super::space::DaSpace;
use crate::error::{Error, Result};
use crate::linalg::psd_eigen;

/// `x = μ + V (β ⊙ δx)` with `β_i = ζ sqrt(λ_i)` from the eigenpairs of `P`.
///
/// A deviation `δx_i = ±1` reaches `ζ` standard deviations along the i-th
/// principal axis.
#[derive(Debug, Clone)]
pub struct UncertaintyDomain {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub eigvals: DVector<f64>,
    pub eigvecs: DMatrix<f64>,
    pub scale: DVector<f64>,
    pub zeta: f64,
}

impl UncertaintyDomain {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, zeta: f64) -> Result<Self> {
        if cov.nrows() != mean.len() {
            return Err(Error::dim(format!(
                "mean of length {} with {}x{} covariance",
                mean.len(),
                cov.nrows(),
                cov.ncols()
            )));
        }
        if !(zeta > 0.0) {
            return Err(Error::invalid(format!("spread ζ must be positive, got {zeta}")));
        }
        let (eigvals, eigvecs) = psd_eigen(&cov)?;
        let scale = eigvals.map(|l| zeta * l.sqrt());
        Ok(UncertaintyDomain {
            mean,
            cov,
            eigvals,
            eigvecs,
            scale,
            zeta,
        })
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// First-order polynomials `μ + V diag(β) δx` at truncation order `k`.
    pub fn to_polys(&self, k: usize) -> Result<Vec<TaylorPoly>> {
        let n = self.dim();
        let space = DaSpace::shared(n, k)?;
        let dx = identity_vars(n, k, &vec![0.0; n], self.scale.as_slice())?;
        (0..n)
            .map(|i| {
                let mut p = TaylorPoly::constant(&space, self.mean[i]);
                for (j, d) in dx.iter().enumerate() {
                    let v = self.eigvecs[(i, j)];
                    if v != 0.0 {
                        p = &p + &d.scale(v);
                    }
                }
                Ok(p)
            })
            .collect()
    }

    /// Physical point `μ + V (β ⊙ δx)` of a deviation vector.
    pub fn to_physical(&self, dx: &[f64]) -> DVector<f64> {
        let d = DVector::from_iterator(dx.len(), dx.iter().zip(self.scale.iter()).map(|(a, b)| a * b));
        &self.mean + &self.eigvecs * d
    }

    /// Deviation coordinates of a physical point; axes with `β = 0` map to 0.
    pub fn to_deviation(&self, x: &DVector<f64>) -> Vec<f64> {
        let y = self.eigvecs.transpose() * (x - &self.mean);
        y.iter()
            .zip(self.scale.iter())
            .map(|(v, b)| if *b > 0.0 { v / b } else { 0.0 })
            .collect()
    }
}
