//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric eigendecomposition with eigenvalues sorted in descending order
/// and each eigenvector's largest-magnitude component made positive.
pub fn sym_eigen(p: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(Error::dim(format!("{}x{} matrix is not square", n, p.ncols())));
    }
    if p.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let sym = (p + p.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let mut vals = DVector::zeros(n);
    let mut vecs = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vals[dst] = eig.eigenvalues[src];
        let mut col = eig.eigenvectors.column(src).into_owned();
        let imax = col.iamax();
        if col[imax] < 0.0 {
            col = -col;
        }
        vecs.set_column(dst, &col);
    }
    Ok((vals, vecs))
}

/// Eigendecomposition of a covariance, rejecting matrices that are not PSD.
///
/// Eigenvalues above `-tol * trace` are accepted and clamped to zero.
pub fn psd_eigen(p: &DMatrix<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let (mut vals, vecs) = sym_eigen(p)?;
    let asym = (p - p.transpose()).amax();
    let scale = p.diagonal().iter().map(|v| v.abs()).sum::<f64>().max(f64::MIN_POSITIVE);
    if asym > 1e-9 * scale {
        return Err(Error::invalid(format!("covariance is not symmetric (asymmetry {asym:e})")));
    }
    let tol = 1e-12 * scale;
    for v in vals.iter_mut() {
        if *v < -tol {
            return Err(Error::invalid(format!("covariance is not PSD (eigenvalue {v:e})")));
        }
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    Ok((vals, vecs))
}

/// `V diag(sqrt(λ))`, a square root `L` with `L Lᵀ = P`.
pub fn eigen_sqrt(p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = psd_eigen(p)?;
    let mut l = vecs;
    for (j, v) in vals.iter().enumerate() {
        let s = v.sqrt();
        l.column_mut(j).scale_mut(s);
    }
    Ok(l)
}

pub fn max_eigenvalue(p: &DMatrix<f64>) -> Result<f64> {
    let (vals, _) = sym_eigen(p)?;
    Ok(vals.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

/// Row-major `Vec<Vec<f64>>` to a matrix.
pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != m) {
        return Err(Error::dim("ragged matrix rows"));
    }
    Ok(DMatrix::from_fn(n, m, |i, j| rows[i][j]))
}

pub fn to_rows(p: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..p.nrows())
        .map(|i| (0..p.ncols()).map(|j| p[(i, j)]).collect())
        .collect()
}
