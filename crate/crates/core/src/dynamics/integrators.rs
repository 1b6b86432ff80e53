use super::{mat_vec, SdeField, SdeModel};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Grid `t0, t0 + h, ...` ending exactly at `tf`; the last step may be short.
pub fn time_grid(t0: f64, tf: f64, h: f64) -> Result<Vec<f64>> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::invalid(format!("step must be positive, got {h}")));
    }
    if !(tf >= t0) {
        return Err(Error::invalid(format!("final time {tf} precedes initial time {t0}")));
    }
    let span = tf - t0;
    let n = ((span / h) - 1e-9).ceil().max(0.0) as usize;
    let mut grid: Vec<f64> = (0..n).map(|i| t0 + h * i as f64).collect();
    grid.push(tf);
    Ok(grid)
}

fn axpy<T: Scalar>(x: &[T], k: &[T], a: f64) -> Vec<T> {
    x.iter().zip(k).map(|(x, k)| x.clone() + k.clone() * a).collect()
}

fn check_finite<T: Scalar>(x: &[T], t: f64) -> Result<()> {
    if x.iter().all(Scalar::is_finite) {
        Ok(())
    } else {
        Err(Error::NonFinite { t })
    }
}

/// One classical RK4 step of `ẋ = f(x, t)`.
pub fn rk4_step_fn<T: Scalar>(
    f: &dyn Fn(&[T], f64) -> Result<Vec<T>>,
    x: &[T],
    t: f64,
    h: f64,
) -> Result<Vec<T>> {
    let k1 = f(x, t)?;
    let k2 = f(&axpy(x, &k1, h / 2.0), t + h / 2.0)?;
    let k3 = f(&axpy(x, &k2, h / 2.0), t + h / 2.0)?;
    let k4 = f(&axpy(x, &k3, h), t + h)?;
    let out: Vec<T> = (0..x.len())
        .map(|i| {
            let incr = k1[i].clone() + (k2[i].clone() + k3[i].clone()) * 2.0 + k4[i].clone();
            x[i].clone() + incr * (h / 6.0)
        })
        .collect();
    check_finite(&out, t + h)?;
    Ok(out)
}

/// One RK4 step of the drift of `model`.
pub fn rk4_step<T: SdeField>(model: &dyn SdeModel, x: &[T], t: f64, h: f64) -> Result<Vec<T>> {
    rk4_step_fn(&|y: &[T], s: f64| T::drift(model, y, s), x, t, h)
}

/// Euler–Maruyama step `x + h u(x, t) + G(x, t) dw`.
pub fn em_step<T: SdeField>(model: &dyn SdeModel, x: &[T], dw: &[T], t: f64, h: f64) -> Result<Vec<T>> {
    let u = T::drift(model, x, t)?;
    let mut out = axpy(x, &u, h);
    if !dw.is_empty() {
        let g = T::diffusion(model, x, t)?;
        let gw = mat_vec(&g, dw).ok_or_else(|| Error::dim("diffusion/noise size mismatch"))?;
        out = out.into_iter().zip(gw).map(|(a, b)| a + b).collect();
    }
    check_finite(&out, t + h)?;
    Ok(out)
}

/// Noise-free RK4 propagation from `t0` to `tf` with nominal step `h`.
pub fn propagate<T: SdeField>(model: &dyn SdeModel, x0: &[T], t0: f64, tf: f64, h: f64) -> Result<Vec<T>> {
    let grid = time_grid(t0, tf, h)?;
    let mut x = x0.to_vec();
    for w in grid.windows(2) {
        x = rk4_step(model, &x, w[0], w[1] - w[0])?;
    }
    Ok(x)
}
