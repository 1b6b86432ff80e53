//! Osculating element conversions, generic over [`Scalar`].
//!
//! Keplerian elements are `(a, e, i, Ω, ω, ν)`. Modified equinoctial elements
//! are `(p, f, g, h, k, L)` with true longitude `L`, or the same with mean
//! longitude `λ` in place of `L`. Angles are radians in `[0, 2π)`.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordSet {
    Cartesian,
    Keplerian,
    /// Modified equinoctial elements with true longitude.
    Mee,
    /// Modified equinoctial elements with mean longitude.
    MeeMean,
}

/// Converts a 6-element state between coordinate sets.
pub fn convert<T: Scalar>(state: &[T], from: CoordSet, to: CoordSet, mu: f64) -> Result<Vec<T>> {
    if state.len() != 6 {
        return Err(Error::dim(format!("orbital state must have 6 entries, got {}", state.len())));
    }
    if !(mu > 0.0) {
        return Err(Error::invalid("mu must be positive"));
    }
    if from == to {
        return Ok(state.to_vec());
    }
    let cart = match from {
        CoordSet::Cartesian => state.to_vec(),
        CoordSet::Keplerian => kep_to_cart(state, mu)?,
        CoordSet::Mee => mee_to_cart(state, mu)?,
        CoordSet::MeeMean => mee_to_cart(&mean_to_true_longitude(state)?, mu)?,
    };
    match to {
        CoordSet::Cartesian => Ok(cart),
        CoordSet::Keplerian => cart_to_kep(&cart, mu),
        CoordSet::Mee => cart_to_mee(&cart, mu),
        CoordSet::MeeMean => true_to_mean_longitude(&cart_to_mee(&cart, mu)?),
    }
}

/// Shifts `angle` by whole turns so it lies within `π` of `reference`.
pub fn unwrap_angle(angle: f64, reference: f64) -> f64 {
    angle + TAU * ((reference - angle) / TAU).round()
}

fn wrap<T: Scalar>(a: T) -> T {
    let v = a.value();
    let turns = (v / TAU).floor();
    if turns != 0.0 {
        a - TAU * turns
    } else {
        a
    }
}

fn dot<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> T {
    a[0].clone() * b[0].clone() + a[1].clone() * b[1].clone() + a[2].clone() * b[2].clone()
}

fn cross<T: Scalar>(a: &[T; 3], b: &[T; 3]) -> [T; 3] {
    [
        a[1].clone() * b[2].clone() - a[2].clone() * b[1].clone(),
        a[2].clone() * b[0].clone() - a[0].clone() * b[2].clone(),
        a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone(),
    ]
}

fn split<T: Scalar>(s: &[T]) -> ([T; 3], [T; 3]) {
    (
        [s[0].clone(), s[1].clone(), s[2].clone()],
        [s[3].clone(), s[4].clone(), s[5].clone()],
    )
}

/// Angular momentum, its norm, eccentricity vector, radius and speed².
#[allow(clippy::type_complexity)]
fn invariants<T: Scalar>(r: &[T; 3], v: &[T; 3], mu: f64) -> Result<([T; 3], T, [T; 3], T, T)> {
    let rn = dot(r, r).sqrt()?;
    if !(rn.value() > 0.0) {
        return Err(Error::singular("radius is zero"));
    }
    let h = cross(r, v);
    let hn = dot(&h, &h).sqrt()?;
    if !(hn.value() > 0.0) {
        return Err(Error::singular("angular momentum is zero (rectilinear orbit)"));
    }
    let v2 = dot(v, v);
    let rv = dot(r, v);
    let c1 = (v2.clone() - rn.recip()? * mu) * (1.0 / mu);
    let c2 = rv * (1.0 / mu);
    let e = [
        r[0].clone() * c1.clone() - v[0].clone() * c2.clone(),
        r[1].clone() * c1.clone() - v[1].clone() * c2.clone(),
        r[2].clone() * c1 - v[2].clone() * c2,
    ];
    Ok((h, hn, e, rn, v2))
}

fn cart_to_kep<T: Scalar>(s: &[T], mu: f64) -> Result<Vec<T>> {
    let (r, v) = split(s);
    let (h, hn, ev, rn, v2) = invariants(&r, &v, mu)?;
    let inv_a = rn.recip()? * 2.0 - v2 * (1.0 / mu);
    if !(inv_a.value() > 0.0) {
        return Err(Error::singular("orbit is not elliptic: semi-major axis undefined"));
    }
    let a = inv_a.recip()?;
    let e2 = dot(&ev, &ev);
    if !(e2.value() > 0.0) {
        return Err(Error::singular("eccentricity is zero: periapsis undefined"));
    }
    let e = e2.sqrt()?;
    let nxy2 = h[0].square() + h[1].square();
    if !(nxy2.value() > 0.0) {
        return Err(Error::singular("inclination is zero: node undefined"));
    }
    let inc = nxy2.sqrt()?.atan2(&h[2])?;
    let raan = h[0].atan2(&-h[1].clone())?;
    let z = s[0].lift(0.0);
    let n = [-h[1].clone(), h[0].clone(), z];
    let inv_h = hn.recip()?;
    let argp = (dot(&cross(&n, &ev), &h) * inv_h.clone()).atan2(&dot(&n, &ev))?;
    let nu = (dot(&cross(&ev, &r), &h) * inv_h).atan2(&dot(&ev, &r))?;
    Ok(vec![a, e, inc, wrap(raan), wrap(argp), wrap(nu)])
}

fn kep_to_cart<T: Scalar>(k: &[T], mu: f64) -> Result<Vec<T>> {
    let (a, e) = (&k[0], &k[1]);
    if !(a.value() > 0.0) || !(e.value() >= 0.0 && e.value() < 1.0) {
        return Err(Error::singular("only elliptic orbits with a > 0 and 0 <= e < 1 are supported"));
    }
    let p = a.clone() * (-e.square() + 1.0);
    let (cn, sn) = (k[5].cos(), k[5].sin());
    let rn = p.clone() * (e.clone() * cn.clone() + 1.0).recip()?;
    let vs = p.recip()?.sqrt()? * mu.sqrt();
    let rp = [rn.clone() * cn.clone(), rn * sn.clone()];
    let vp = [-sn * vs.clone(), (cn + e.clone()) * vs];
    let (co, so) = (k[3].cos(), k[3].sin());
    let (cw, sw) = (k[4].cos(), k[4].sin());
    let (ci, si) = (k[2].cos(), k[2].sin());
    let p_hat = [
        co.clone() * cw.clone() - so.clone() * sw.clone() * ci.clone(),
        so.clone() * cw.clone() + co.clone() * sw.clone() * ci.clone(),
        sw.clone() * si.clone(),
    ];
    let q_hat = [
        -co.clone() * sw.clone() - so.clone() * cw.clone() * ci.clone(),
        -so * sw + co * cw.clone() * ci,
        cw * si,
    ];
    let mut out = Vec::with_capacity(6);
    for pair in [&rp, &vp] {
        for j in 0..3 {
            out.push(p_hat[j].clone() * pair[0].clone() + q_hat[j].clone() * pair[1].clone());
        }
    }
    Ok(out)
}

fn cart_to_mee<T: Scalar>(s: &[T], mu: f64) -> Result<Vec<T>> {
    let (r, v) = split(s);
    let (h, hn, ev, _, _) = invariants(&r, &v, mu)?;
    let inv_h = hn.recip()?;
    let hz1 = h[2].clone() * inv_h.clone() + 1.0;
    if !(hz1.value() > 1e-12) {
        return Err(Error::singular("inclination is 180 deg: equinoctial frame undefined"));
    }
    let d = (hz1 * hn.clone()).recip()?;
    let hh = -h[1].clone() * d.clone();
    let kk = h[0].clone() * d;
    let s2 = hh.square() + kk.square() + 1.0;
    let inv_s2 = s2.recip()?;
    let hk2 = hh.clone() * kk.clone() * 2.0;
    let f_hat = [
        (-kk.square() + hh.square() + 1.0) * inv_s2.clone(),
        hk2.clone() * inv_s2.clone(),
        kk.clone() * inv_s2.clone() * -2.0,
    ];
    let g_hat = [
        hk2 * inv_s2.clone(),
        (kk.square() - hh.square() + 1.0) * inv_s2.clone(),
        hh.clone() * inv_s2 * 2.0,
    ];
    let f = dot(&ev, &f_hat);
    let g = dot(&ev, &g_hat);
    let l = dot(&r, &g_hat).atan2(&dot(&r, &f_hat))?;
    let p = hn.square() * (1.0 / mu);
    Ok(vec![p, f, g, hh, kk, wrap(l)])
}

fn mee_to_cart<T: Scalar>(m: &[T], mu: f64) -> Result<Vec<T>> {
    let (p, f, g, h, k, l) = (&m[0], &m[1], &m[2], &m[3], &m[4], &m[5]);
    if !(p.value() > 0.0) {
        return Err(Error::singular("semi-latus rectum must be positive"));
    }
    let (cl, sl) = (l.cos(), l.sin());
    let w = f.clone() * cl.clone() + g.clone() * sl.clone() + 1.0;
    let rn = p.clone() * w.recip()?;
    let al2 = h.square() - k.square();
    let s2 = h.square() + k.square() + 1.0;
    let inv_s2 = s2.recip()?;
    let hk2 = h.clone() * k.clone() * 2.0;
    let rs = rn * inv_s2.clone();
    let vs = p.recip()?.sqrt()? * inv_s2 * mu.sqrt();
    let one_p = al2.clone() + 1.0;
    let one_m = -al2.clone() + 1.0;
    Ok(vec![
        rs.clone() * (cl.clone() * one_p.clone() + sl.clone() * hk2.clone()),
        rs.clone() * (sl.clone() * one_m.clone() + cl.clone() * hk2.clone()),
        rs * (h.clone() * sl.clone() - k.clone() * cl.clone()) * 2.0,
        -vs.clone() * (sl.clone() * one_p + g.clone() * (al2.clone() + 1.0) - cl.clone() * hk2.clone() - f.clone() * hk2.clone()),
        -vs.clone() * (cl.clone() * -one_m.clone() + sl.clone() * hk2.clone() + f.clone() * (al2 - 1.0) + g.clone() * hk2),
        vs * (h.clone() * cl + k.clone() * sl + f.clone() * h.clone() + g.clone() * k.clone()) * 2.0,
    ])
}

/// `(a, β, √(1 - f² - g²))` of an elliptic equinoctial orbit.
fn shape<T: Scalar>(p: &T, f: &T, g: &T) -> Result<(T, T, T)> {
    let one_e2 = -(f.square() + g.square()) + 1.0;
    if !(one_e2.value() > 0.0) {
        return Err(Error::singular("eccentricity >= 1: mean longitude undefined"));
    }
    let root = one_e2.sqrt()?;
    let a = p.clone() * one_e2.recip()?;
    let beta = (root.clone() + 1.0).recip()?;
    Ok((a, beta, root))
}

fn true_to_mean_longitude<T: Scalar>(m: &[T]) -> Result<Vec<T>> {
    let (p, f, g, l) = (&m[0], &m[1], &m[2], &m[5]);
    let (a, beta, root) = shape(p, f, g)?;
    let (cl, sl) = (l.cos(), l.sin());
    let rn = p.clone() * (f.clone() * cl.clone() + g.clone() * sl.clone() + 1.0).recip()?;
    let x1 = rn.clone() * cl;
    let y1 = rn * sl;
    let fgb = f.clone() * g.clone() * beta.clone();
    let inv = (a * root).recip()?;
    let cos_f = f.clone() + ((-f.square() * beta.clone() + 1.0) * x1.clone() - fgb.clone() * y1.clone()) * inv.clone();
    let sin_f = g.clone() + ((-g.square() * beta + 1.0) * y1 - fgb * x1) * inv;
    let ecc = sin_f.atan2(&cos_f)?;
    let lam = ecc.clone() - f.clone() * ecc.sin() + g.clone() * ecc.cos();
    let mut out = m.to_vec();
    out[5] = wrap(lam);
    Ok(out)
}

fn mean_to_true_longitude<T: Scalar>(m: &[T]) -> Result<Vec<T>> {
    let (p, f, g, lam) = (&m[0], &m[1], &m[2], &m[5]);
    let (a, beta, _) = shape(p, f, g)?;
    let mut ecc = lam.clone();
    let mut settled = None;
    for it in 0..100 {
        let res = ecc.clone() - f.clone() * ecc.sin() + g.clone() * ecc.cos() - lam.clone();
        let der = -(f.clone() * ecc.cos() + g.clone() * ecc.sin()) + 1.0;
        let step = res * der.recip()?;
        let small = step.value().abs() <= 1e-15 * (1.0 + ecc.value().abs());
        ecc = ecc - step;
        match settled {
            None if small => settled = Some(it),
            Some(s) if it >= s + 8 => break,
            _ => {}
        }
    }
    if settled.is_none() {
        return Err(Error::Optimizer {
            residual: f64::NAN,
            message: "equinoctial Kepler equation did not converge".into(),
        });
    }
    let (cf, sf) = (ecc.cos(), ecc.sin());
    let fgb = f.clone() * g.clone() * beta.clone();
    let x1 = a.clone() * ((-g.square() * beta.clone() + 1.0) * cf.clone() + fgb.clone() * sf.clone() - f.clone());
    let y1 = a * ((-f.square() * beta + 1.0) * sf + fgb * cf - g.clone());
    let mut out = m.to_vec();
    out[5] = wrap(y1.atan2(&x1)?);
    Ok(out)
}
