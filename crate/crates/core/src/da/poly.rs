//! Truncated multivariate Taylor polynomials.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use super::multi_index::MultiIndex;
use super::space::DaSpace;
use crate::error::{Error, Result};

/// Polynomial in `nvars` deviation variables truncated at `order`.
///
/// Coefficients are stored densely in the graded layout of the shared
/// [`DaSpace`]. Values are immutable once built; operators return new values.
#[derive(Clone)]
pub struct TaylorPoly {
    space: Arc<DaSpace>,
    coeffs: Vec<f64>,
}

impl TaylorPoly {
    pub fn zeros(space: &Arc<DaSpace>) -> Self {
        TaylorPoly {
            space: space.clone(),
            coeffs: vec![0.0; space.len()],
        }
    }

    pub fn constant(space: &Arc<DaSpace>, c: f64) -> Self {
        let mut p = Self::zeros(space);
        p.coeffs[0] = c;
        p
    }

    /// The deviation variable `δx_i`.
    pub fn variable(space: &Arc<DaSpace>, i: usize) -> Result<Self> {
        if i >= space.nvars() {
            return Err(Error::dim(format!(
                "variable {i} out of range for {} variables",
                space.nvars()
            )));
        }
        let mut p = Self::zeros(space);
        if space.order() >= 1 {
            p.coeffs[1 + i] = 1.0;
        }
        Ok(p)
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs.
    pub fn from_terms(space: &Arc<DaSpace>, terms: &[(MultiIndex, f64)]) -> Result<Self> {
        let mut p = Self::zeros(space);
        for (m, c) in terms {
            if m.len() != space.nvars() {
                return Err(Error::dim(format!(
                    "multi-index {m} has length {} but the space has {} variables",
                    m.len(),
                    space.nvars()
                )));
            }
            if let Some(i) = space.index_of(m) {
                p.coeffs[i] += c;
            }
        }
        Ok(p)
    }

    /// Builds a polynomial from a dense coefficient vector in graded layout.
    pub fn from_dense(space: &Arc<DaSpace>, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.len() {
            return Err(Error::dim(format!(
                "{} coefficients for a space of {}",
                coeffs.len(),
                space.len()
            )));
        }
        Ok(TaylorPoly {
            space: space.clone(),
            coeffs,
        })
    }

    pub fn space(&self) -> &Arc<DaSpace> {
        &self.space
    }

    pub fn nvars(&self) -> usize {
        self.space.nvars()
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    /// Dense coefficients in graded layout.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn cons(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, m: &MultiIndex) -> f64 {
        self.space.index_of(m).map_or(0.0, |i| self.coeffs[i])
    }

    /// Nonzero terms as `(exponents, coefficient)`.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(move |(i, &c)| (self.space.monomial(i), c))
    }

    /// Polynomial minus its constant part.
    pub fn nilpotent(&self) -> Self {
        let mut p = self.clone();
        p.coeffs[0] = 0.0;
        p
    }

    pub fn with_constant(&self, c: f64) -> Self {
        let mut p = self.clone();
        p.coeffs[0] = c;
        p
    }

    /// Drops every term of degree above `d`.
    pub fn truncate(&self, d: usize) -> Self {
        let mut p = self.clone();
        let keep = self.space.len_up_to(d);
        p.coeffs[keep..].iter_mut().for_each(|c| *c = 0.0);
        p
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn same_space(&self, other: &TaylorPoly) -> bool {
        Arc::ptr_eq(&self.space, &other.space)
            || (self.nvars() == other.nvars() && self.order() == other.order())
    }

    fn check(&self, other: &TaylorPoly) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::dim(format!(
                "operands differ: (n={}, k={}) vs (n={}, k={})",
                self.nvars(),
                self.order(),
                other.nvars(),
                other.order()
            )))
        }
    }

    pub fn try_add(&self, other: &TaylorPoly) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(TaylorPoly {
            space: self.space.clone(),
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &TaylorPoly) -> Result<Self> {
        self.check(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(TaylorPoly {
            space: self.space.clone(),
            coeffs,
        })
    }

    /// Truncated product.
    pub fn try_mul(&self, other: &TaylorPoly) -> Result<Self> {
        self.check(other)?;
        let mut out = vec![0.0; self.coeffs.len()];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            for &(j, o) in self.space.mul_row(i) {
                out[o as usize] += a * other.coeffs[j as usize];
            }
        }
        Ok(TaylorPoly {
            space: self.space.clone(),
            coeffs: out,
        })
    }

    pub fn scale(&self, s: f64) -> Self {
        TaylorPoly {
            space: self.space.clone(),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add_scalar(&self, s: f64) -> Self {
        let mut p = self.clone();
        p.coeffs[0] += s;
        p
    }

    /// Multiplies every monomial by `prod factors_i^{r_i}`.
    ///
    /// Equivalent to composing with `(factors_1 δx_1, ..., factors_n δx_n)`.
    pub fn scale_variables(&self, factors: &[f64]) -> Result<Self> {
        if factors.len() != self.nvars() {
            return Err(Error::dim(format!(
                "{} scale factors for {} variables",
                factors.len(),
                self.nvars()
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                if c == 0.0 {
                    0.0
                } else {
                    c * self.space.monomial(i).pow(factors)
                }
            })
            .collect();
        Ok(TaylorPoly {
            space: self.space.clone(),
            coeffs,
        })
    }

    /// Formal partial derivative with respect to `δx_var`.
    pub fn partial(&self, var: usize) -> Result<Self> {
        if var >= self.nvars() {
            return Err(Error::dim(format!(
                "variable {var} out of range for {} variables",
                self.nvars()
            )));
        }
        let mut out = vec![0.0; self.coeffs.len()];
        let unit = MultiIndex::unit(self.nvars(), var);
        for (i, &c) in self.coeffs.iter().enumerate() {
            let m = self.space.monomial(i);
            let e = m.exps()[var];
            if c == 0.0 || e == 0 {
                continue;
            }
            let lowered = m.checked_sub(&unit).expect("exponent is positive");
            let j = self.space.index_of(&lowered).expect("lowered index in space");
            out[j] += f64::from(e) * c;
        }
        Ok(TaylorPoly {
            space: self.space.clone(),
            coeffs: out,
        })
    }

    /// Evaluates the polynomial at a deviation point.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.nvars() {
            return Err(Error::dim(format!(
                "point has {} components for {} variables",
                point.len(),
                self.nvars()
            )));
        }
        // Monomial values built block by block: each value is a lower-degree
        // value times one coordinate.
        let n = self.nvars();
        let mut vals = vec![0.0; self.coeffs.len()];
        vals[0] = 1.0;
        for i in 1..vals.len() {
            let m = self.space.monomial(i);
            let v = m.exps().iter().position(|&e| e > 0).expect("nonconstant");
            let prev = m
                .checked_sub(&MultiIndex::unit(n, v))
                .expect("exponent is positive");
            vals[i] = vals[self.space.index_of(&prev).expect("in space")] * point[v];
        }
        Ok(self.coeffs.iter().zip(&vals).map(|(c, v)| c * v).sum())
    }

    /// Substitutes `args[i]` for `δx_i`, truncating at the arguments' order.
    ///
    /// Arguments with nonzero constant parts are accepted; the caller is
    /// responsible for the truncation being meaningful in that case.
    pub fn compose(&self, args: &[TaylorPoly]) -> Result<Self> {
        if args.len() != self.nvars() {
            return Err(Error::dim(format!(
                "{} arguments for {} variables",
                args.len(),
                self.nvars()
            )));
        }
        let target = args
            .first()
            .map(|a| a.space.clone())
            .ok_or_else(|| Error::dim("composition needs at least one argument"))?;
        for a in args {
            if a.nvars() != target.nvars() || a.order() != target.order() {
                return Err(Error::dim("composition arguments must share a space"));
            }
        }
        // Monomials of the arguments, built like `eval` but in the target algebra.
        let n = self.nvars();
        let mut vals: Vec<Option<TaylorPoly>> = vec![None; self.coeffs.len()];
        vals[0] = Some(TaylorPoly::constant(&target, 1.0));
        let mut out = TaylorPoly::constant(&target, self.coeffs[0]);
        for i in 1..self.coeffs.len() {
            let m = self.space.monomial(i);
            let v = m.exps().iter().position(|&e| e > 0).expect("nonconstant");
            let prev = m
                .checked_sub(&MultiIndex::unit(n, v))
                .expect("exponent is positive");
            let p = self.space.index_of(&prev).expect("in space");
            let val = vals[p].as_ref().expect("lower degree first").try_mul(&args[v])?;
            if self.coeffs[i] != 0.0 {
                out = out.try_add(&val.scale(self.coeffs[i]))?;
            }
            vals[i] = Some(val);
        }
        Ok(out)
    }

    /// Maximum absolute coefficient difference.
    pub fn max_abs_diff(&self, other: &TaylorPoly) -> Result<f64> {
        self.check(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn to_text(&self) -> PolyText {
        PolyText {
            nvars: self.nvars(),
            order: self.order(),
            terms: self
                .terms()
                .map(|(m, c)| {
                    let mut row: Vec<f64> = m.exps().iter().map(|&e| f64::from(e)).collect();
                    row.push(c);
                    row
                })
                .collect(),
        }
    }

    pub fn from_text(text: &PolyText) -> Result<Self> {
        let space = DaSpace::shared(text.nvars, text.order)?;
        let mut p = TaylorPoly::zeros(&space);
        for row in &text.terms {
            if row.len() != text.nvars + 1 {
                return Err(Error::dim(format!(
                    "term row has {} entries, expected {}",
                    row.len(),
                    text.nvars + 1
                )));
            }
            let mut exps = Vec::with_capacity(text.nvars);
            for &e in &row[..text.nvars] {
                if e < 0.0 || e.fract() != 0.0 {
                    return Err(Error::invalid(format!("invalid exponent {e}")));
                }
                exps.push(e as u32);
            }
            let m = MultiIndex::new(exps);
            let i = space.index_of(&m).ok_or_else(|| {
                Error::invalid(format!("term {m} exceeds order {}", text.order))
            })?;
            p.coeffs[i] += row[text.nvars];
        }
        Ok(p)
    }
}

/// Portable text form: `nvars`, `order`, and rows of `[exponents..., coefficient]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyText {
    pub nvars: usize,
    pub order: usize,
    pub terms: Vec<Vec<f64>>,
}

/// First-order variables `center_i + scale_i δx_i` in an `n`-variable, order-`k` space.
pub fn identity_vars(n: usize, k: usize, center: &[f64], scale: &[f64]) -> Result<Vec<TaylorPoly>> {
    if center.len() != n || scale.len() != n {
        return Err(Error::dim(format!(
            "center/scale lengths {}/{} for n = {n}",
            center.len(),
            scale.len()
        )));
    }
    if let Some(s) = scale.iter().find(|s| !(**s >= 0.0)) {
        return Err(Error::invalid(format!("negative scale {s}")));
    }
    let space = DaSpace::shared(n, k)?;
    (0..n)
        .map(|i| {
            Ok(TaylorPoly::variable(&space, i)?
                .scale(scale[i])
                .add_scalar(center[i]))
        })
        .collect()
}

impl fmt::Debug for TaylorPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TaylorPoly(n={}, k={}; ", self.nvars(), self.order())?;
        let mut first = true;
        for (m, c) in self.terms() {
            if !first {
                write!(f, " + ")?;
            }
            write!(f, "{c:e}·{m}")?;
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

impl PartialEq for TaylorPoly {
    fn eq(&self, other: &Self) -> bool {
        self.same_space(other) && self.coeffs == other.coeffs
    }
}

macro_rules! poly_binop {
    ($tr:ident, $method:ident, $try:ident) => {
        impl $tr<&TaylorPoly> for &TaylorPoly {
            type Output = TaylorPoly;
            fn $method(self, rhs: &TaylorPoly) -> TaylorPoly {
                self.$try(rhs).expect("operands in different DA spaces")
            }
        }
        impl $tr<TaylorPoly> for TaylorPoly {
            type Output = TaylorPoly;
            fn $method(self, rhs: TaylorPoly) -> TaylorPoly {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&TaylorPoly> for TaylorPoly {
            type Output = TaylorPoly;
            fn $method(self, rhs: &TaylorPoly) -> TaylorPoly {
                (&self).$method(rhs)
            }
        }
        impl $tr<TaylorPoly> for &TaylorPoly {
            type Output = TaylorPoly;
            fn $method(self, rhs: TaylorPoly) -> TaylorPoly {
                self.$method(&rhs)
            }
        }
    };
}

poly_binop!(Add, add, try_add);
poly_binop!(Sub, sub, try_sub);
poly_binop!(Mul, mul, try_mul);

impl Add<f64> for TaylorPoly {
    type Output = TaylorPoly;
    fn add(mut self, rhs: f64) -> TaylorPoly {
        self.coeffs[0] += rhs;
        self
    }
}

impl Sub<f64> for TaylorPoly {
    type Output = TaylorPoly;
    fn sub(mut self, rhs: f64) -> TaylorPoly {
        self.coeffs[0] -= rhs;
        self
    }
}

impl Mul<f64> for TaylorPoly {
    type Output = TaylorPoly;
    fn mul(mut self, rhs: f64) -> TaylorPoly {
        self.coeffs.iter_mut().for_each(|c| *c *= rhs);
        self
    }
}

impl Div<f64> for TaylorPoly {
    type Output = TaylorPoly;
    fn div(mut self, rhs: f64) -> TaylorPoly {
        self.coeffs.iter_mut().for_each(|c| *c /= rhs);
        self
    }
}

impl Neg for TaylorPoly {
    type Output = TaylorPoly;
    fn neg(mut self) -> TaylorPoly {
        self.coeffs.iter_mut().for_each(|c| *c = -*c);
        self
    }
}

impl Neg for &TaylorPoly {
    type Output = TaylorPoly;
    fn neg(self) -> TaylorPoly {
        -self.clone()
    }
}
