//! Monomial layout shared by every polynomial with the same `(nvars, order)`.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::multi_index::{dimension, enumerate, MultiIndex};
use crate::error::{Error, Result};

/// Largest coefficient vector a space may allocate.
pub const MAX_MONOMIALS: usize = 250_000;

/// Graded monomial ordering plus a truncated multiplication table.
#[derive(Debug)]
pub struct DaSpace {
    nvars: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    degree: Vec<u32>,
    lookup: HashMap<MultiIndex, usize>,
    /// First index of each degree block; `block_start[d+1]` ends block `d`.
    block_start: Vec<usize>,
    /// For monomial `i`: every `(j, out)` with `|r_i| + |r_j| <= order`.
    mul_table: Vec<Vec<(u32, u32)>>,
}

static CACHE: Lazy<Mutex<HashMap<(usize, usize), Arc<DaSpace>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

impl DaSpace {
    /// Shared space for `nvars` variables truncated at `order`.
    pub fn shared(nvars: usize, order: usize) -> Result<Arc<DaSpace>> {
        let mut cache = CACHE.lock().expect("DA space cache poisoned");
        if let Some(s) = cache.get(&(nvars, order)) {
            return Ok(s.clone());
        }
        let space = Arc::new(DaSpace::build(nvars, order)?);
        cache.insert((nvars, order), space.clone());
        Ok(space)
    }

    fn build(nvars: usize, order: usize) -> Result<DaSpace> {
        let dim = dimension(nvars, order)?;
        if dim > MAX_MONOMIALS {
            return Err(Error::Overflow(format!(
                "{dim} monomials for n={nvars}, k={order} exceeds {MAX_MONOMIALS}"
            )));
        }
        let monomials = enumerate(nvars, order as u32);
        let degree: Vec<u32> = monomials.iter().map(|m| m.order()).collect();
        let lookup: HashMap<MultiIndex, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();
        let mut block_start = vec![0usize; order + 2];
        for d in 0..=order {
            block_start[d + 1] = dimension(nvars, d)?;
        }
        let mut mul_table = Vec::with_capacity(dim);
        for (i, mi) in monomials.iter().enumerate() {
            let limit = block_start[order - degree[i] as usize + 1];
            let row = (0..limit)
                .map(|j| (j as u32, lookup[&mi.add(&monomials[j])] as u32))
                .collect();
            mul_table.push(row);
        }
        Ok(DaSpace {
            nvars,
            order,
            monomials,
            degree,
            lookup,
            block_start,
            mul_table,
        })
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn len(&self) -> usize {
        self.monomials.len()
    }

    pub fn is_empty(&self) -> bool {
        self.monomials.is_empty()
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.monomials
    }

    pub fn monomial(&self, i: usize) -> &MultiIndex {
        &self.monomials[i]
    }

    pub fn degree(&self, i: usize) -> u32 {
        self.degree[i]
    }

    pub fn index_of(&self, m: &MultiIndex) -> Option<usize> {
        self.lookup.get(m).copied()
    }

    /// Index range of monomials of exactly degree `d`.
    pub fn block(&self, d: usize) -> std::ops::Range<usize> {
        self.block_start[d]..self.block_start[d + 1]
    }

    /// Number of monomials with degree at most `d`.
    pub fn len_up_to(&self, d: usize) -> usize {
        self.block_start[d.min(self.order) + 1]
    }

    pub(crate) fn mul_row(&self, i: usize) -> &[(u32, u32)] {
        &self.mul_table[i]
    }
}
