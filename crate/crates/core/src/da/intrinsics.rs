//! Elementary functions: univariate Taylor series composed with the nilpotent part.

use super::multi_index::factorial;
use super::poly::TaylorPoly;
use crate::error::{Error, Result};

impl TaylorPoly {
    /// `sum_j coeffs[j] * (self - cons)^j`, evaluated by Horner's rule.
    ///
    /// The constant part of the result is exactly `coeffs[0]`.
    pub fn compose_series(&self, coeffs: &[f64]) -> TaylorPoly {
        let dx = self.nilpotent();
        let k = self.order().min(coeffs.len().saturating_sub(1));
        let mut acc = TaylorPoly::constant(self.space(), coeffs[k]);
        for j in (0..k).rev() {
            acc = (&acc * &dx).add_scalar(coeffs[j]);
        }
        acc
    }

    /// `1 / self`
    pub fn recip(&self) -> Result<TaylorPoly> {
        let c = self.cons();
        if c == 0.0 || !c.is_finite() {
            return Err(Error::singular(format!("reciprocal at constant part {c}")));
        }
        let k = self.order();
        let mut coeffs = Vec::with_capacity(k + 1);
        let inv = 1.0 / c;
        let mut t = inv;
        for _ in 0..=k {
            coeffs.push(t);
            t *= -inv;
        }
        Ok(self.compose_series(&coeffs))
    }

    /// `self^p` for real `p`, expanded about a positive constant part.
    fn powf_series(&self, p: f64, what: &str) -> Result<TaylorPoly> {
        let c = self.cons();
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::singular(format!("{what} at constant part {c}")));
        }
        let k = self.order();
        let mut coeffs = Vec::with_capacity(k + 1);
        let mut t = c.powf(p);
        for j in 0..=k {
            coeffs.push(t);
            t *= (p - j as f64) / ((j + 1) as f64 * c);
        }
        Ok(self.compose_series(&coeffs))
    }

    /// `sqrt(self)`; the constant part must be positive.
    pub fn sqrt(&self) -> Result<TaylorPoly> {
        let mut r = self.powf_series(0.5, "sqrt")?;
        // Keep the constant part bit-identical to the real evaluation.
        r = r.with_constant(self.cons().sqrt());
        Ok(r)
    }

    /// Integer power by repeated squaring; negative powers go through `recip`.
    pub fn powi(&self, n: i32) -> Result<TaylorPoly> {
        if n < 0 {
            return self.recip()?.powi(-n);
        }
        let mut base = self.clone();
        let mut acc = TaylorPoly::constant(self.space(), 1.0);
        let mut e = n as u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        Ok(acc)
    }

    pub fn exp(&self) -> TaylorPoly {
        let c = self.cons().exp();
        let coeffs: Vec<f64> = (0..=self.order())
            .map(|j| c / factorial(j as u32))
            .collect();
        self.compose_series(&coeffs)
    }

    pub fn sin(&self) -> TaylorPoly {
        let (s, c) = self.cons().sin_cos();
        let cycle = [s, c, -s, -c];
        let coeffs: Vec<f64> = (0..=self.order())
            .map(|j| cycle[j % 4] / factorial(j as u32))
            .collect();
        self.compose_series(&coeffs)
    }

    pub fn cos(&self) -> TaylorPoly {
        let (s, c) = self.cons().sin_cos();
        let cycle = [c, -s, -c, s];
        let coeffs: Vec<f64> = (0..=self.order())
            .map(|j| cycle[j % 4] / factorial(j as u32))
            .collect();
        self.compose_series(&coeffs)
    }

    /// Four-quadrant `atan2(self, x)`.
    ///
    /// Uses `θ = θ0 + atan(u)` with `u = (x0 y - y0 x) / (x0 x + y0 y)`, whose
    /// constant part vanishes.
    pub fn atan2(&self, x: &TaylorPoly) -> Result<TaylorPoly> {
        let (y0, x0) = (self.cons(), x.cons());
        if y0 == 0.0 && x0 == 0.0 {
            return Err(Error::singular("atan2 at the origin"));
        }
        let num = x.scale(-y0).try_add(&self.scale(x0))?;
        let den = x.scale(x0).try_add(&self.scale(y0))?;
        let u = num.try_mul(&den.recip()?)?.nilpotent();
        let k = self.order();
        let coeffs: Vec<f64> = (0..=k)
            .map(|j| {
                if j % 2 == 0 {
                    0.0
                } else if (j / 2) % 2 == 0 {
                    1.0 / j as f64
                } else {
                    -1.0 / j as f64
                }
            })
            .collect();
        Ok(u.compose_series(&coeffs).add_scalar(y0.atan2(x0)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::da::{DaSpace, MultiIndex};

    fn var(n: usize, k: usize, c: f64) -> TaylorPoly {
        let s = DaSpace::shared(n, k).unwrap();
        TaylorPoly::variable(&s, 0).unwrap().add_scalar(c)
    }

    fn coeff1(p: &TaylorPoly, e: u32) -> f64 {
        p.coeff(&MultiIndex::new(vec![e]))
    }

    #[test]
    fn sqrt_of_four() {
        let p = var(1, 2, 4.0).sqrt().unwrap();
        assert_eq!(coeff1(&p, 0), 2.0);
        assert!((coeff1(&p, 1) - 0.25).abs() < 1e-15);
        assert!((coeff1(&p, 2) + 1.0 / 64.0).abs() < 1e-15);
    }

    #[test]
    fn geometric_series() {
        let p = var(1, 3, 1.0).recip().unwrap();
        let expect = [1.0, -1.0, 1.0, -1.0];
        for (e, v) in expect.iter().enumerate() {
            assert_eq!(coeff1(&p, e as u32), *v);
        }
    }

    #[test]
    fn exp_series() {
        let p = var(1, 2, 0.0).exp();
        assert_eq!(coeff1(&p, 0), 1.0);
        assert_eq!(coeff1(&p, 1), 1.0);
        assert_eq!(coeff1(&p, 2), 0.5);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(var(1, 2, 0.0).recip(), Err(Error::Singular(_))));
        assert!(matches!(var(1, 2, -1.0).sqrt(), Err(Error::Singular(_))));
        let z = var(1, 2, 0.0);
        assert!(matches!(z.atan2(&z), Err(Error::Singular(_))));
    }

    #[test]
    fn powi_matches_products() {
        let x = var(1, 4, 1.5);
        let p3 = x.powi(3).unwrap();
        let direct = &(&x * &x) * &x;
        assert!(p3.max_abs_diff(&direct).unwrap() < 1e-14);
        let m2 = x.powi(-2).unwrap();
        let inv = x.recip().unwrap();
        assert!(m2.max_abs_diff(&(&inv * &inv)).unwrap() < 1e-14);
    }

    fn check_derivative(f: impl Fn(f64) -> f64, p: &TaylorPoly, x0: f64) {
        let h = 1e-5;
        let fd = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        let d = coeff1(p, 1);
        assert!(
            (fd - d).abs() <= 1e-6 * d.abs().max(1.0),
            "fd {fd} vs da {d}"
        );
        assert_eq!(coeff1(p, 0), f(x0));
    }

    #[test]
    fn intrinsics_match_finite_differences() {
        for &x0 in &[0.3, 1.7, 4.2] {
            let x = var(1, 3, x0);
            check_derivative(f64::sqrt, &x.sqrt().unwrap(), x0);
            check_derivative(|v| 1.0 / v, &x.recip().unwrap(), x0);
            check_derivative(f64::exp, &x.exp(), x0);
            check_derivative(f64::sin, &x.sin(), x0);
            check_derivative(f64::cos, &x.cos(), x0);
            check_derivative(|v| v.powi(5), &x.powi(5).unwrap(), x0);
        }
    }

    #[test]
    fn atan2_all_quadrants() {
        let s = DaSpace::shared(2, 3).unwrap();
        for &(y0, x0) in &[(1.0, 2.0), (1.0, -2.0), (-1.0, -2.0), (-1.0, 2.0), (0.0, -1.0)] {
            let y = TaylorPoly::variable(&s, 0).unwrap().add_scalar(y0);
            let x = TaylorPoly::variable(&s, 1).unwrap().add_scalar(x0);
            let t = y.atan2(&x).unwrap();
            assert_eq!(t.cons(), f64::atan2(y0, x0));
            let r2 = x0 * x0 + y0 * y0;
            let dy = t.coeff(&MultiIndex::new(vec![1, 0]));
            let dx = t.coeff(&MultiIndex::new(vec![0, 1]));
            assert!((dy - x0 / r2).abs() < 1e-14);
            assert!((dx + y0 / r2).abs() < 1e-14);
            // second derivative d2/dy2 atan2 = -2 x y / r^4
            let dyy = t.coeff(&MultiIndex::new(vec![2, 0]));
            assert!((dyy - (-x0 * y0 / (r2 * r2))).abs() < 1e-14);
        }
    }

    #[test]
    fn trig_identity_holds_in_da() {
        let x = var(1, 4, 0.7);
        let one = &(&x.sin() * &x.sin()) + &(&x.cos() * &x.cos());
        for (i, c) in one.coeffs().iter().enumerate() {
            let expect = if i == 0 { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-15);
        }
    }
}
