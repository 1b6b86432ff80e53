//! Field abstraction letting model code run on reals and on Taylor polynomials.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::da::TaylorPoly;
use crate::error::{Error, Result};

/// Arithmetic shared by `f64` and [`TaylorPoly`].
///
/// For polynomials, the constant part of every operation is computed with the
/// same floating-point operations as the real evaluation, so a model evaluated
/// on constant-only polynomials reproduces its real output bit for bit.
pub trait Scalar:
    Clone
    + Debug
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// A constant of the same kind (and DA space) as `self`.
    fn lift(&self, c: f64) -> Self;
    /// Constant part.
    fn value(&self) -> f64;
    fn sqrt(&self) -> Result<Self>;
    fn recip(&self) -> Result<Self>;
    fn powi(&self, n: i32) -> Result<Self>;
    fn exp(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn atan2(&self, x: &Self) -> Result<Self>;
    fn is_finite(&self) -> bool;

    fn square(&self) -> Self {
        self.clone() * self.clone()
    }

    fn div_by(&self, d: &Self) -> Result<Self> {
        Ok(self.clone() * d.recip()?)
    }
}

impl Scalar for f64 {
    fn lift(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Result<Self> {
        if *self < 0.0 || self.is_nan() {
            return Err(Error::singular(format!("sqrt of {self}")));
        }
        Ok(f64::sqrt(*self))
    }
    fn recip(&self) -> Result<Self> {
        if *self == 0.0 || self.is_nan() {
            return Err(Error::singular(format!("reciprocal of {self}")));
        }
        Ok(1.0 / *self)
    }
    fn powi(&self, n: i32) -> Result<Self> {
        if n < 0 {
            return Scalar::recip(self)?.powi_pos(-n);
        }
        self.powi_pos(n)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn atan2(&self, x: &Self) -> Result<Self> {
        if *self == 0.0 && *x == 0.0 {
            return Err(Error::singular("atan2 at the origin"));
        }
        Ok(f64::atan2(*self, *x))
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

trait PowPos {
    fn powi_pos(self, n: i32) -> Result<f64>;
}

impl PowPos for f64 {
    /// Repeated squaring in the same order as the polynomial version.
    fn powi_pos(self, n: i32) -> Result<f64> {
        let mut base = self;
        let mut acc = 1.0;
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            e >>= 1;
            if e > 0 {
                base *= base;
            }
        }
        Ok(acc)
    }
}

impl Scalar for TaylorPoly {
    fn lift(&self, c: f64) -> Self {
        TaylorPoly::constant(self.space(), c)
    }
    fn value(&self) -> f64 {
        self.cons()
    }
    fn sqrt(&self) -> Result<Self> {
        TaylorPoly::sqrt(self)
    }
    fn recip(&self) -> Result<Self> {
        TaylorPoly::recip(self)
    }
    fn powi(&self, n: i32) -> Result<Self> {
        TaylorPoly::powi(self, n)
    }
    fn exp(&self) -> Self {
        TaylorPoly::exp(self)
    }
    fn sin(&self) -> Self {
        TaylorPoly::sin(self)
    }
    fn cos(&self) -> Self {
        TaylorPoly::cos(self)
    }
    fn atan2(&self, x: &Self) -> Result<Self> {
        TaylorPoly::atan2(self, x)
    }
    fn is_finite(&self) -> bool {
        TaylorPoly::is_finite(self)
    }
    fn square(&self) -> Self {
        self * self
    }
}

/// Constant parts of a slice.
pub fn values<T: Scalar>(x: &[T]) -> Vec<f64> {
    x.iter().map(Scalar::value).collect()
}
