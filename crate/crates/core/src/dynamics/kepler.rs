use serde::{Deserialize, Serialize};

use super::GenericSde;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Planar two-body motion with a random acceleration of magnitude `σ_w / v`.
///
/// State `(x, y, vx, vy)` in km and km/s; two noise channels acting on the
/// velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeplerSdeParams {
    /// Gravitational parameter, km³/s².
    pub mu: f64,
    /// Diffusion scale, km²/s^2.5.
    pub sigma_w: f64,
}

impl KeplerSdeParams {
    pub fn new(mu: f64, sigma_w: f64) -> Result<Self> {
        if !(mu > 0.0) || !(sigma_w >= 0.0) || !sigma_w.is_finite() {
            return Err(Error::invalid("Kepler SDE requires mu > 0 and sigma_w >= 0"));
        }
        Ok(KeplerSdeParams { mu, sigma_w })
    }
}

fn dims<T>(x: &[T], n: usize) -> Result<()> {
    if x.len() != n {
        return Err(Error::dim(format!("expected {n} states, got {}", x.len())));
    }
    Ok(())
}

impl GenericSde for KeplerSdeParams {
    fn state_dim(&self) -> usize {
        4
    }

    fn noise_dim(&self) -> usize {
        2
    }

    fn drift<T: Scalar>(&self, s: &[T], _t: f64) -> Result<Vec<T>> {
        dims(s, 4)?;
        let r2 = s[0].square() + s[1].square();
        if !(r2.value() > 0.0) {
            return Err(Error::singular("radius is zero"));
        }
        let k = (r2.clone() * r2.sqrt()?).recip()? * (-self.mu);
        Ok(vec![s[2].clone(), s[3].clone(), s[0].clone() * k.clone(), s[1].clone() * k])
    }

    fn diffusion<T: Scalar>(&self, s: &[T], _t: f64) -> Result<Vec<Vec<T>>> {
        dims(s, 4)?;
        let v2 = s[2].square() + s[3].square();
        if !(v2.value() > 0.0) {
            return Err(Error::singular("speed is zero"));
        }
        let g = v2.sqrt()?.recip()? * (-self.sigma_w);
        let z = s[0].lift(0.0);
        Ok(vec![
            vec![z.clone(), z.clone()],
            vec![z.clone(), z.clone()],
            vec![g.clone(), z.clone()],
            vec![z, g],
        ])
    }
}

/// Planar Kepler SDE as a model.
pub fn kepler_planar_sde(p: KeplerSdeParams) -> Result<KeplerSdeParams> {
    KeplerSdeParams::new(p.mu, p.sigma_w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{MU_EARTH, R_EARTH};
    use crate::dynamics::{propagate, SdeModel};

    fn circular() -> Vec<f64> {
        let r = R_EARTH + 200.0;
        vec![r, 0.0, 0.0, (MU_EARTH / r).sqrt()]
    }

    #[test]
    fn diffusion_magnitude_at_circular_ic() {
        let m = KeplerSdeParams::new(MU_EARTH, 2e-4).unwrap();
        let x = circular();
        let g = m.diffusion_real(&x, 0.0).unwrap();
        assert_eq!(g[0], vec![0.0, 0.0]);
        assert!((g[2][0] + 2e-4 / x[3]).abs() < 1e-18);
        assert_eq!(g[2][1], 0.0);
        assert_eq!(g[3][1], g[2][0]);
    }

    #[test]
    fn energy_and_momentum_conserved_over_one_period() {
        let m = KeplerSdeParams::new(MU_EARTH, 0.0).unwrap();
        let x0 = vec![7000.0, 0.0, 0.0, 8.2];
        let energy = |x: &[f64]| 0.5 * (x[2] * x[2] + x[3] * x[3]) - MU_EARTH / (x[0] * x[0] + x[1] * x[1]).sqrt();
        let mom = |x: &[f64]| x[0] * x[3] - x[1] * x[2];
        let a = -MU_EARTH / (2.0 * energy(&x0));
        let period = 2.0 * std::f64::consts::PI * (a.powi(3) / MU_EARTH).sqrt();
        let x1 = propagate::<f64>(&m, &x0, 0.0, period, 1.0).unwrap();
        assert!(((energy(&x1) - energy(&x0)) / energy(&x0)).abs() < 1e-8);
        assert!(((mom(&x1) - mom(&x0)) / mom(&x0)).abs() < 1e-8);
    }

    #[test]
    fn singular_states_rejected() {
        let m = KeplerSdeParams::new(MU_EARTH, 1e-4).unwrap();
        assert!(m.drift_real(&[0.0, 0.0, 1.0, 0.0], 0.0).is_err());
        assert!(m.diffusion_real(&[7000.0, 0.0, 0.0, 0.0], 0.0).is_err());
        assert!(KeplerSdeParams::new(-1.0, 0.0).is_err());
    }
}
