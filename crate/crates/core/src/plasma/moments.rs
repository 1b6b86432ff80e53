use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::da::{DaSpace, MultiIndex};
use crate::error::{Error, Result};

/// `E[ΔW^s]` for `ΔW ~ N(0, h I)`: zero if any exponent is odd, otherwise
/// `prod (s_j - 1)!! h^{s_j / 2}`.
pub fn gaussian_increment_moments(s: &MultiIndex, h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::invalid(format!("increment variance must be positive, got {h}")));
    }
    Ok(double_factorial_part(s).map_or(0.0, |df| df * h.powi(s.order() as i32 / 2)))
}

/// `prod (s_j - 1)!!`, or `None` when some `s_j` is odd.
pub(crate) fn double_factorial_part(s: &MultiIndex) -> Option<f64> {
    let mut acc = 1.0;
    for &e in s.exps() {
        if e % 2 == 1 {
            return None;
        }
        let mut k = e as i64 - 1;
        while k > 1 {
            acc *= k as f64;
            k -= 2;
        }
    }
    Some(acc)
}

/// Moments `E[ΔŴ^r]`, `|r| <= N`, of the effective noise around a central
/// state at one time.
///
/// Moments are stored densely in the graded order of the `n`-variable,
/// order-`N` monomial enumeration.
#[derive(Debug, Clone)]
pub struct NoiseMomentSet {
    space: Arc<DaSpace>,
    moments: Vec<f64>,
    pub central: Vec<f64>,
    pub time: f64,
}

impl PartialEq for NoiseMomentSet {
    fn eq(&self, other: &Self) -> bool {
        self.space.nvars() == other.space.nvars()
            && self.space.order() == other.space.order()
            && self.moments == other.moments
            && self.central == other.central
            && self.time == other.time
    }
}

impl NoiseMomentSet {
    /// Point mass at `central`: `E[ΔŴ^0] = 1`, all other moments zero.
    pub fn deterministic(central: Vec<f64>, time: f64, order: usize) -> Result<Self> {
        if central.is_empty() {
            return Err(Error::invalid("state must be non-empty"));
        }
        let space = DaSpace::shared(central.len(), order)?;
        let mut moments = vec![0.0; space.len()];
        moments[0] = 1.0;
        Ok(NoiseMomentSet {
            space,
            moments,
            central,
            time,
        })
    }

    /// Builds a set from dense moments in graded order.
    pub fn from_parts(central: Vec<f64>, time: f64, order: usize, moments: Vec<f64>) -> Result<Self> {
        let space = DaSpace::shared(central.len(), order)?;
        if moments.len() != space.len() {
            return Err(Error::dim(format!("{} moments for {} monomials", moments.len(), space.len())));
        }
        if moments[0] != 1.0 {
            return Err(Error::invalid(format!("zeroth moment must be 1, got {}", moments[0])));
        }
        Ok(NoiseMomentSet {
            space,
            moments,
            central,
            time,
        })
    }

    pub fn dim(&self) -> usize {
        self.space.nvars()
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn space(&self) -> &Arc<DaSpace> {
        &self.space
    }

    /// Dense moments in graded order.
    pub fn moments(&self) -> &[f64] {
        &self.moments
    }

    /// `E[ΔŴ^r]`.
    pub fn moment(&self, r: &MultiIndex) -> Result<f64> {
        self.check(r)?;
        Ok(self.moments[self.space.index_of(r).expect("checked order")])
    }

    fn check(&self, r: &MultiIndex) -> Result<()> {
        if r.len() != self.dim() {
            return Err(Error::dim(format!("multi-index of length {} for {} states", r.len(), self.dim())));
        }
        if r.order() as usize > self.order() {
            return Err(Error::OutOfOrder {
                requested: r.order() as usize,
                available: self.order(),
            });
        }
        Ok(())
    }

    /// Raw state moment `E[X^r] = Σ_{r' <= r} C(r, r') x̂^{r - r'} E[ΔŴ^{r'}]`.
    pub fn state_moment(&self, r: &MultiIndex) -> Result<f64> {
        self.check(r)?;
        let mut acc = 0.0;
        for s in r.sub_indices() {
            let rest = r.checked_sub(&s).expect("s <= r");
            let e = self.moments[self.space.index_of(&s).expect("s <= r")];
            if e != 0.0 {
                acc += r.binomial(&s) * rest.pow(&self.central) * e;
            }
        }
        Ok(acc)
    }

    /// `E[X] = x̂ + E[ΔŴ]`.
    pub fn mean(&self) -> Vec<f64> {
        let first = self.space.block(1);
        if first.is_empty() {
            return self.central.clone();
        }
        self.central
            .iter()
            .zip(&self.moments[first])
            .map(|(c, e)| c + e)
            .collect()
    }

    /// `P_ij = E[ΔŴ_i ΔŴ_j] - E[ΔŴ_i] E[ΔŴ_j]`.
    pub fn covariance(&self) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if self.order() < 2 {
            return Err(Error::OutOfOrder {
                requested: 2,
                available: self.order(),
            });
        }
        let e1: Vec<f64> = self.moments[self.space.block(1)].to_vec();
        let mut p = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut r = vec![0u32; n];
                r[i] += 1;
                r[j] += 1;
                let e2 = self.moments[self.space.index_of(&MultiIndex::new(r)).expect("order 2 present")];
                let v = e2 - e1[i] * e1[j];
                p[(i, j)] = v;
                p[(j, i)] = v;
            }
        }
        Ok(p)
    }

    /// Checks normalisation and that the covariance is PSD within
    /// `1e-10 · trace`.
    pub fn validate(&self) -> Result<()> {
        if self.moments[0] != 1.0 {
            return Err(Error::invalid(format!("zeroth moment is {}", self.moments[0])));
        }
        if self.moments.iter().chain(&self.central).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { t: self.time });
        }
        if self.order() >= 2 {
            let p = self.covariance()?;
            let tr = p.trace().abs();
            let (vals, _) = crate::linalg::sym_eigen(&p)?;
            let min = vals.iter().cloned().fold(f64::INFINITY, f64::min);
            if min < -1e-10 * tr {
                return Err(Error::invalid(format!("covariance has eigenvalue {min:e} at t = {}", self.time)));
            }
        }
        Ok(())
    }

    /// One `(time, multi-index, value)` row per stored moment.
    pub fn to_rows(&self) -> Vec<MomentRow> {
        self.space
            .monomials()
            .iter()
            .zip(&self.moments)
            .map(|(m, &v)| MomentRow {
                time: self.time,
                index: m.clone(),
                value: v,
            })
            .collect()
    }

    /// Inverse of [`to_rows`](Self::to_rows); rows may come in any order.
    pub fn from_rows(central: Vec<f64>, order: usize, rows: &[MomentRow]) -> Result<Self> {
        let mut set = NoiseMomentSet::deterministic(central, rows.first().map_or(0.0, |r| r.time), order)?;
        for row in rows {
            set.check(&row.index)?;
            let i = set.space.index_of(&row.index).expect("checked");
            set.moments[i] = row.value;
        }
        if set.moments[0] != 1.0 {
            return Err(Error::invalid("zeroth moment must be 1"));
        }
        Ok(set)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentRow {
    pub time: f64,
    pub index: MultiIndex,
    pub value: f64,
}
