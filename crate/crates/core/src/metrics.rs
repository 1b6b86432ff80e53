//! Error measures between an estimated distribution and a reference.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::max_eigenvalue;

/// `(est_i - ref_i) / ref_i`, or `None` where the reference is zero.
pub fn relative_errors(est: &[f64], reference: &[f64]) -> Result<Vec<Option<f64>>> {
    if est.len() != reference.len() {
        return Err(Error::dim("estimate and reference sizes differ"));
    }
    Ok(est
        .iter()
        .zip(reference)
        .map(|(e, r)| (*r != 0.0).then(|| (e - r) / r))
        .collect())
}

/// Largest absolute component-wise relative error of the mean. Components
/// with a zero reference are skipped.
pub fn eps_mu(est: &[f64], reference: &[f64]) -> Result<f64> {
    let rel = relative_errors(est, reference)?;
    if rel.iter().all(Option::is_none) {
        return Err(Error::invalid("relative mean error undefined for an all-zero reference"));
    }
    Ok(rel.into_iter().flatten().map(f64::abs).fold(0.0, f64::max))
}

/// Relative error of the largest covariance eigenvalue.
pub fn eps_lambda(est: &DMatrix<f64>, reference: &DMatrix<f64>) -> Result<f64> {
    if est.shape() != reference.shape() {
        return Err(Error::dim("covariance shapes differ"));
    }
    let lr = max_eigenvalue(reference)?;
    if lr == 0.0 {
        return Err(Error::invalid("largest reference eigenvalue is zero"));
    }
    Ok((max_eigenvalue(est)? - lr).abs() / lr)
}

/// Length and time units used to make orbital states dimensionless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Units {
    pub length: f64,
    pub time: f64,
}

impl Units {
    /// Length unit `r_p`, time unit `sqrt(r_p³/μ)`.
    pub fn pericenter(rp: f64, mu: f64) -> Self {
        Units {
            length: rp,
            time: (rp.powi(3) / mu).sqrt(),
        }
    }

    /// Per-component scale of a Cartesian position/velocity state.
    pub fn cartesian_scale(&self) -> [f64; 6] {
        let v = self.length / self.time;
        [self.length, self.length, self.length, v, v, v]
    }
}

/// Root mean square of matched sample differences, each component divided
/// by `scale`.
pub fn rmse(pred: &[Vec<f64>], actual: &[Vec<f64>], scale: &[f64]) -> Result<f64> {
    if pred.len() != actual.len() || pred.is_empty() {
        return Err(Error::dim("sample sets must be non-empty and matched"));
    }
    let n = scale.len();
    let mut acc = 0.0;
    for (p, a) in pred.iter().zip(actual) {
        if p.len() != n || a.len() != n {
            return Err(Error::dim("sample and scale sizes differ"));
        }
        acc += p.iter().zip(a).zip(scale).map(|((p, a), s)| ((p - a) / s).powi(2)).sum::<f64>();
    }
    Ok((acc / (pred.len() * n) as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub eps_mu: f64,
    pub eps_lambda: f64,
    pub rmse: Option<f64>,
    pub mean_rel: Vec<Option<f64>>,
    /// Entry-wise relative covariance errors, row-major.
    pub cov_rel: Vec<Vec<Option<f64>>>,
}

impl ErrorReport {
    pub fn compare(est_mean: &DVector<f64>, est_cov: &DMatrix<f64>, ref_mean: &DVector<f64>, ref_cov: &DMatrix<f64>) -> Result<Self> {
        let cov_rel = (0..ref_cov.nrows())
            .map(|i| {
                let e: Vec<f64> = est_cov.row(i).iter().copied().collect();
                let r: Vec<f64> = ref_cov.row(i).iter().copied().collect();
                relative_errors(&e, &r)
            })
            .collect::<Result<_>>()?;
        Ok(ErrorReport {
            eps_mu: eps_mu(est_mean.as_slice(), ref_mean.as_slice())?,
            eps_lambda: eps_lambda(est_cov, ref_cov)?,
            rmse: None,
            mean_rel: relative_errors(est_mean.as_slice(), ref_mean.as_slice())?,
            cov_rel,
        })
    }
}
