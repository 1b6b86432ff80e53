//! Multi-indices: exponent tuples used to key monomials and moments.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Exponent tuple `r = (r_1, ..., r_n)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exps: Vec<u32>) -> Self {
        MultiIndex(exps)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// Unit index `e_i`.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        MultiIndex(e)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    /// `|r|`
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    /// `r! = prod r_i!`
    pub fn factorial(&self) -> f64 {
        self.0.iter().map(|&e| factorial(e)).product()
    }

    /// Component-wise binomial `prod C(r_i, s_i)`; zero unless `s <= r`.
    pub fn binomial(&self, s: &MultiIndex) -> f64 {
        debug_assert_eq!(self.len(), s.len());
        self.0
            .iter()
            .zip(&s.0)
            .map(|(&r, &s)| binomial(r, s))
            .product()
    }

    /// Component-wise `self <= other`.
    pub fn le(&self, other: &MultiIndex) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - other`, or `None` if any component would go negative.
    pub fn checked_sub(&self, other: &MultiIndex) -> Option<MultiIndex> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(MultiIndex)
    }

    /// `x^r = prod x_i^{r_i}`
    pub fn pow(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .map(|(&e, &v)| v.powi(e as i32))
            .product()
    }

    /// All `r' <= r` component-wise, in graded order.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let n = self.len();
        enumerate(n, self.order())
            .into_iter()
            .filter(|s| s.le(self))
            .collect()
    }

    /// Splits into the first `k` components and the rest.
    pub fn split_at(&self, k: usize) -> (MultiIndex, MultiIndex) {
        let (a, b) = self.0.split_at(k);
        (MultiIndex(a.to_vec()), MultiIndex(b.to_vec()))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|e| e.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * f64::from(n - i) / f64::from(i + 1);
    }
    acc.round()
}

/// Number of monomials of order at most `k` in `n` variables, `C(n+k, k)`.
pub fn dimension(n: usize, k: usize) -> Result<usize> {
    if n == 0 {
        return Err(Error::invalid("dimension requires n >= 1"));
    }
    // C(n+k, k) built incrementally; each partial product C(n+i, i) is an integer.
    let mut acc: u128 = 1;
    for i in 1..=k as u128 {
        acc = acc
            .checked_mul(n as u128 + i)
            .ok_or_else(|| Error::Overflow(format!("dimension({n}, {k})")))?
            / i;
    }
    usize::try_from(acc).map_err(|_| Error::Overflow(format!("dimension({n}, {k})")))
}

/// Graded enumeration of every `r` with `|r| <= max_order`.
///
/// Degree blocks ascend; within a block the first exponent descends, so the
/// first-order block is `e_1, e_2, ..., e_n`.
pub fn enumerate(n: usize, max_order: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for d in 0..=max_order {
        let mut cur = vec![0u32; n];
        fill_degree(&mut cur, 0, d, &mut out);
    }
    out
}

fn fill_degree(cur: &mut [u32], pos: usize, remaining: u32, out: &mut Vec<MultiIndex>) {
    let n = cur.len();
    if n == 0 {
        if remaining == 0 {
            out.push(MultiIndex(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = remaining;
        out.push(MultiIndex(cur.to_vec()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        fill_degree(cur, pos + 1, remaining - e, out);
    }
    cur[pos] = 0;
}
