//! Exact symbolic polynomials over the integers, kept as sparse exponent maps.

use std::collections::BTreeMap;

use rand::Rng;
use uqprop::da::{DaSpace, MultiIndex, TaylorPoly};

pub type Sym = BTreeMap<Vec<u32>, i128>;

fn degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

pub fn add(a: &Sym, b: &Sym) -> Sym {
    let mut out = a.clone();
    for (e, c) in b {
        *out.entry(e.clone()).or_insert(0) += c;
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Full product, then drop every monomial above `k`.
pub fn mul(a: &Sym, b: &Sym, k: u32) -> Sym {
    let mut out = Sym::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            if degree(&e) <= k {
                *out.entry(e).or_insert(0) += ca * cb;
            }
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Substitution `f(g_1, ..., g_n)` by explicit monomial expansion.
pub fn compose(f: &Sym, g: &[Sym], nvars_out: usize, k: u32) -> Sym {
    let mut out = Sym::new();
    for (e, c) in f {
        let mut term = Sym::new();
        term.insert(vec![0; nvars_out], *c);
        for (i, &p) in e.iter().enumerate() {
            for _ in 0..p {
                term = mul(&term, &g[i], k);
            }
        }
        out = add(&out, &term);
    }
    out
}

pub fn random_sym<R: Rng>(rng: &mut R, n: usize, k: u32, density: f64) -> Sym {
    let mut out = Sym::new();
    for m in uqprop::da::enumerate(n, k) {
        if rng.gen_bool(density) {
            let c: i128 = rng.gen_range(-3..=3);
            if c != 0 {
                out.insert(m.exps().to_vec(), c);
            }
        }
    }
    out
}

pub fn to_poly(s: &Sym, n: usize, k: usize) -> TaylorPoly {
    let space = DaSpace::shared(n, k).unwrap();
    let terms: Vec<(MultiIndex, f64)> = s
        .iter()
        .map(|(e, c)| (MultiIndex::new(e.clone()), *c as f64))
        .collect();
    TaylorPoly::from_terms(&space, &terms).unwrap()
}

/// True when every coefficient of `p` equals the symbolic one exactly.
pub fn matches(p: &TaylorPoly, s: &Sym) -> bool {
    let space = p.space().clone();
    space.monomials().iter().enumerate().all(|(i, m)| {
        let expect = s.get(m.exps()).copied().unwrap_or(0) as f64;
        p.coeffs()[i] == expect
    })
}
