//! DA-based nonlinearity index of a polynomial map.
//!
//! For a map `y = f(x)` expanded over `x = x̄ + β ⊙ δx`, the Jacobian with
//! respect to the physical deviation is a matrix of first-order polynomials
//! `J = J̄ + δJ`, where `δJ_ij = Σ_p c^p_ij δx_p`. Over the unit box the
//! variation is bounded entry-wise by `B_ij = Σ_p |c^p_ij|`, and the index is
//!
//! ```text
//! ν = ‖B‖_F / ‖J̄‖_F
//! ```
//!
//! It vanishes for linear maps. The index is only meaningful when inputs and
//! outputs are nondimensional; scaling is left to the caller.

use crate::da::TaylorPoly;
use crate::error::{Error, Result};

/// `m x n` matrix of first-order polynomials.
#[derive(Debug, Clone)]
pub struct JacobianPolyMatrix {
    pub entries: Vec<Vec<TaylorPoly>>,
}

impl JacobianPolyMatrix {
    pub fn rows(&self) -> usize {
        self.entries.len()
    }

    pub fn cols(&self) -> usize {
        self.entries.first().map_or(0, |r| r.len())
    }

    /// Constant part `J̄`.
    pub fn constant(&self) -> Vec<Vec<f64>> {
        self.entries
            .iter()
            .map(|r| r.iter().map(TaylorPoly::cons).collect())
            .collect()
    }

    /// Linear coefficient `c^p_ij` of entry `(i, j)`.
    pub fn linear_coeff(&self, i: usize, j: usize, p: usize) -> f64 {
        let e = &self.entries[i][j];
        if e.order() == 0 {
            0.0
        } else {
            e.coeffs()[1 + p]
        }
    }

    /// `B_ij = Σ_p |c^p_ij|`
    pub fn bound(&self) -> Vec<Vec<f64>> {
        let nv = self.entries.first().and_then(|r| r.first()).map_or(0, |e| e.nvars());
        (0..self.rows())
            .map(|i| {
                (0..self.cols())
                    .map(|j| (0..nv).map(|p| self.linear_coeff(i, j, p).abs()).sum())
                    .collect()
            })
            .collect()
    }
}

/// Nonlinearity index together with the per-variable bound contributions.
#[derive(Debug, Clone, PartialEq)]
pub struct NliReport {
    pub nu: f64,
    /// `Σ_ij |c^p_ij|` for every deviation variable `p`.
    pub variable_weights: Vec<f64>,
}

impl NliReport {
    /// Variable with the largest bound contribution (lowest index on ties).
    pub fn dominant_variable(&self) -> usize {
        let mut best = 0;
        for (p, w) in self.variable_weights.iter().enumerate() {
            if *w > self.variable_weights[best] {
                best = p;
            }
        }
        best
    }
}

/// Jacobian of `map` with respect to `β ⊙ δx`, truncated to first order.
pub fn jacobian(map: &[TaylorPoly], beta: &[f64]) -> Result<JacobianPolyMatrix> {
    let cols: Vec<usize> = (0..beta.len()).collect();
    jacobian_columns(map, beta, &cols)
}

/// Jacobian restricted to the deviation variables in `cols`.
pub fn jacobian_columns(
    map: &[TaylorPoly],
    beta: &[f64],
    cols: &[usize],
) -> Result<JacobianPolyMatrix> {
    let first = map.first().ok_or_else(|| Error::dim("empty map"))?;
    let n = first.nvars();
    if beta.len() != n {
        return Err(Error::dim(format!("{} scales for {n} variables", beta.len())));
    }
    if first.order() < 2 {
        return Err(Error::invalid("nonlinearity index needs an order >= 2 map"));
    }
    if map.iter().any(|p| !p.same_space(first)) {
        return Err(Error::dim("map components live in different DA spaces"));
    }
    for &j in cols {
        if j >= n {
            return Err(Error::dim(format!("column {j} out of range")));
        }
        if !(beta[j] > 0.0) {
            return Err(Error::invalid(format!("scale β_{j} = {} must be positive", beta[j])));
        }
    }
    let entries = map
        .iter()
        .map(|f| {
            cols.iter()
                .map(|&j| Ok(f.partial(j)?.truncate(1).scale(1.0 / beta[j])))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JacobianPolyMatrix { entries })
}

/// `ν = ‖B‖_F / ‖J̄‖_F`.
pub fn nli(map: &[TaylorPoly], beta: &[f64]) -> Result<f64> {
    Ok(nli_report(&jacobian(map, beta)?)?.nu)
}

/// Index and per-variable contributions of a Jacobian.
pub fn nli_report(jac: &JacobianPolyMatrix) -> Result<NliReport> {
    let jbar = jac.constant();
    let norm_j = frobenius(&jbar);
    if norm_j == 0.0 {
        return Err(Error::Degenerate("constant Jacobian part is zero".into()));
    }
    let norm_b = frobenius(&jac.bound());
    let nv = jac.entries.first().and_then(|r| r.first()).map_or(0, |e| e.nvars());
    let variable_weights = (0..nv)
        .map(|p| {
            let mut s = 0.0;
            for i in 0..jac.rows() {
                for j in 0..jac.cols() {
                    s += jac.linear_coeff(i, j, p).abs();
                }
            }
            s
        })
        .collect();
    Ok(NliReport {
        nu: norm_b / norm_j,
        variable_weights,
    })
}

fn frobenius(m: &[Vec<f64>]) -> f64 {
    m.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
}
