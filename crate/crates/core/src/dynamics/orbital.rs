use serde::{Deserialize, Serialize};

use super::GenericSde;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Zonal `J₂` acceleration at position `r`.
pub fn j2_acceleration<T: Scalar>(r: &[T], mu: f64, r_e: f64, j2: f64) -> Result<[T; 3]> {
    let r2 = r[0].square() + r[1].square() + r[2].square();
    if !(r2.value() > 0.0) {
        return Err(Error::singular("radius is zero"));
    }
    let rn = r2.sqrt()?;
    let inv_r2 = r2.recip()?;
    let k = (r2.square() * rn).recip()? * (-1.5 * j2 * mu * r_e * r_e);
    let q = r[2].square() * inv_r2 * 5.0;
    let lat = -q.clone() + 1.0;
    Ok([
        r[0].clone() * lat.clone() * k.clone(),
        r[1].clone() * lat * k.clone(),
        r[2].clone() * (-q + 3.0) * k,
    ])
}

fn central<T: Scalar>(s: &[T], mu: f64) -> Result<[T; 3]> {
    let r2 = s[0].square() + s[1].square() + s[2].square();
    if !(r2.value() > 0.0) {
        return Err(Error::singular("radius is zero"));
    }
    let k = (r2.clone() * r2.sqrt()?).recip()? * (-mu);
    Ok([s[0].clone() * k.clone(), s[1].clone() * k.clone(), s[2].clone() * k])
}

fn check6<T>(s: &[T]) -> Result<()> {
    if s.len() != 6 {
        return Err(Error::dim(format!("expected 6 Cartesian states, got {}", s.len())));
    }
    Ok(())
}

/// Deterministic two-body motion with optional `J₂`; `j2 = 0` gives pure
/// Keplerian motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoBodyJ2 {
    pub mu: f64,
    pub r_e: f64,
    pub j2: f64,
}

impl GenericSde for TwoBodyJ2 {
    fn state_dim(&self) -> usize {
        6
    }
    fn noise_dim(&self) -> usize {
        0
    }
    fn drift<T: Scalar>(&self, s: &[T], _t: f64) -> Result<Vec<T>> {
        check6(s)?;
        let mut a = central(s, self.mu)?;
        if self.j2 != 0.0 {
            let p = j2_acceleration(&s[..3], self.mu, self.r_e, self.j2)?;
            for (a, p) in a.iter_mut().zip(p) {
                *a = a.clone() + p;
            }
        }
        let [ax, ay, az] = a;
        Ok(vec![s[3].clone(), s[4].clone(), s[5].clone(), ax, ay, az])
    }
    fn diffusion<T: Scalar>(&self, s: &[T], _t: f64) -> Result<Vec<Vec<T>>> {
        check6(s)?;
        Ok(vec![Vec::new(); 6])
    }
}

/// Two-body motion with `J₂` and constant tangential thrust whose magnitude
/// and two direction angles are dispersed by white noise.
///
/// Units are km and s throughout; angles in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrustSdeParams {
    pub mu: f64,
    pub r_e: f64,
    pub j2: f64,
    /// Thrust acceleration, km/s².
    pub a_t: f64,
    /// Magnitude dispersion, km/s^1.5.
    pub sigma_at: f64,
    /// In-plane angle dispersion, rad·s^0.5.
    pub sigma_alpha: f64,
    /// Out-of-plane angle dispersion, rad·s^0.5.
    pub sigma_beta: f64,
}

impl ThrustSdeParams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu > 0.0
            && self.r_e > 0.0
            && self.a_t >= 0.0
            && self.sigma_at >= 0.0
            && self.sigma_alpha >= 0.0
            && self.sigma_beta >= 0.0;
        if !ok {
            return Err(Error::invalid("thrust model requires mu, R_e > 0 and non-negative a_t and sigmas"));
        }
        Ok(())
    }

    /// The same model without `J₂`.
    pub fn without_j2(&self) -> Self {
        ThrustSdeParams { j2: 0.0, ..*self }
    }

    /// `∂a_t/∂(a_t, α, β)` as three rows of three entries.
    pub fn thrust_jacobian<T: Scalar>(&self, v: &[T]) -> Result<[[T; 3]; 3]> {
        let vxy2 = v[0].square() + v[1].square();
        if !(vxy2.value() > 0.0) {
            return Err(Error::singular("thrust direction undefined: in-plane velocity is zero"));
        }
        let v2 = vxy2.clone() + v[2].square();
        let inv_v = v2.sqrt()?.recip()?;
        let vxy = vxy2.sqrt()?;
        let ux = v[0].clone() * inv_v.clone();
        let uy = v[1].clone() * inv_v.clone();
        let uz = v[2].clone() * inv_v.clone();
        let q = uz.clone() * vxy.recip()? * (-self.a_t);
        let z = v[0].lift(0.0);
        Ok([
            [ux.clone(), -uy.clone() * self.a_t, v[0].clone() * q.clone()],
            [uy, ux * self.a_t, v[1].clone() * q],
            [uz, z, vxy * inv_v * self.a_t],
        ])
    }
}

/// Low-thrust SDE as a model.
pub fn thrust_sde(p: ThrustSdeParams) -> Result<ThrustSdeParams> {
    p.validate()?;
    Ok(p)
}

impl GenericSde for ThrustSdeParams {
    fn state_dim(&self) -> usize {
        6
    }
    fn noise_dim(&self) -> usize {
        3
    }
    fn drift<T: Scalar>(&self, s: &[T], _t: f64) -> Result<Vec<T>> {
        check6(s)?;
        let base = TwoBodyJ2 {
            mu: self.mu,
            r_e: self.r_e,
            j2: self.j2,
        };
        let mut out = base.drift(s, 0.0)?;
        if self.a_t != 0.0 {
            let v2 = s[3].square() + s[4].square() + s[5].square();
            if !(v2.value() > 0.0) {
                return Err(Error::singular("thrust direction undefined: speed is zero"));
            }
            let k = v2.sqrt()?.recip()? * self.a_t;
            for i in 0..3 {
                out[3 + i] = out[3 + i].clone() + s[3 + i].clone() * k.clone();
            }
        }
        Ok(out)
    }
    fn diffusion<T: Scalar>(&self, s: &[T], _t: f64) -> Result<Vec<Vec<T>>> {
        check6(s)?;
        let z = s[0].lift(0.0);
        let mut g = vec![vec![z.clone(); 3]; 3];
        let jac = self.thrust_jacobian(&s[3..])?;
        let sig = [self.sigma_at, self.sigma_alpha, self.sigma_beta];
        for row in jac {
            g.push(row.iter().zip(sig).map(|(j, s)| j.clone() * s).collect());
        }
        Ok(g)
    }
}
