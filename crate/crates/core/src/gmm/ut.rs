use nalgebra::{DMatrix, DVector};

use super::kernel::GaussKernel;
use crate::da::TaylorPoly;
use crate::error::{Error, Result};
use crate::linalg::eigen_sqrt;

/// `κ = 3 - n`, or 0 when that leaves `n + κ <= 0`.
pub fn default_kappa(n: usize) -> f64 {
    let k = 3.0 - n as f64;
    if n as f64 + k > 0.0 {
        k
    } else {
        0.0
    }
}

fn ut_weights(n: usize, kappa: f64) -> Result<Vec<f64>> {
    let s = n as f64 + kappa;
    if !(s > 0.0) {
        return Err(Error::invalid(format!("n + κ = {s} must be positive")));
    }
    let mut w = vec![1.0 / (2.0 * s); 2 * n + 1];
    w[0] = kappa / s;
    Ok(w)
}

/// `2n + 1` sigma points `μ, μ ± L_j` with `L Lᵀ = (n + κ) P`.
///
/// `L` comes from the symmetric eigendecomposition, so the points lie on the
/// principal axes of `P`.
pub fn ut_sigma(mean: &DVector<f64>, cov: &DMatrix<f64>, kappa: f64) -> Result<(Vec<DVector<f64>>, Vec<f64>)> {
    let n = mean.len();
    if cov.nrows() != n || cov.ncols() != n {
        return Err(Error::dim("mean and covariance sizes differ"));
    }
    let w = ut_weights(n, kappa)?;
    let l = eigen_sqrt(cov)? * (n as f64 + kappa).sqrt();
    let mut pts = Vec::with_capacity(2 * n + 1);
    pts.push(mean.clone());
    for j in 0..n {
        pts.push(mean + l.column(j));
    }
    for j in 0..n {
        pts.push(mean - l.column(j));
    }
    Ok((pts, w))
}

/// Weighted mean and covariance of points.
pub fn weighted_moments(pts: &[DVector<f64>], w: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let m = pts[0].len();
    let mut mean = DVector::zeros(m);
    for (p, wi) in pts.iter().zip(w) {
        mean += p * *wi;
    }
    let mut cov = DMatrix::zeros(m, m);
    for (p, wi) in pts.iter().zip(w) {
        let d = p - &mean;
        cov += &d * d.transpose() * *wi;
    }
    (mean, cov)
}

/// Mean and covariance of `poly(δx)` under the kernel's Gaussian.
///
/// `poly` must be expressed in the deviation coordinates of the kernel's
/// domain with spread `zeta`. The sigma points of [`ut_sigma`] then sit at
/// `δx = ±sqrt(n + κ)/ζ e_j` (or at the origin along zero-variance axes).
pub fn ut_transform(poly: &[TaylorPoly], kernel: &GaussKernel, zeta: f64, kappa: f64) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = kernel.dim();
    if poly.is_empty() {
        return Err(Error::dim("empty polynomial vector"));
    }
    if poly.iter().any(|p| p.nvars() != n) {
        return Err(Error::dim(format!(
            "polynomials have {} variables, kernel has dimension {n}",
            poly[0].nvars()
        )));
    }
    let w = ut_weights(n, kappa)?;
    let dom = kernel.domain(zeta)?;
    let r = (n as f64 + kappa).sqrt() / zeta;
    let mut devs = vec![vec![0.0; n]; 2 * n + 1];
    for j in 0..n {
        if dom.scale[j] > 0.0 {
            devs[1 + j][j] = r;
            devs[1 + n + j][j] = -r;
        }
    }
    let pts = devs
        .iter()
        .map(|d| {
            let v = poly.iter().map(|p| p.eval(d)).collect::<Result<Vec<_>>>()?;
            Ok(DVector::from_vec(v))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(weighted_moments(&pts, &w))
}
