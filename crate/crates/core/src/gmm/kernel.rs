use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;

use super::split::SplitLibrary3;
use crate::da::{PolyText, TaylorPoly, UncertaintyDomain};
use crate::error::{Error, Result};
use crate::linalg::{from_rows, psd_eigen, to_rows};

/// Lineage of a kernel: root index followed by child slots (0, 1, 2).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct KernelId(pub Vec<u32>);

impl KernelId {
    pub fn root(i: u32) -> Self {
        KernelId(vec![i])
    }

    pub fn child(&self, slot: u32) -> Self {
        let mut p = self.0.clone();
        p.push(slot);
        KernelId(p)
    }

    /// Number of splits along the lineage.
    pub fn depth(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
}

impl fmt::Display for KernelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", s.join("."))
    }
}

/// One weighted Gaussian component with its attached polynomials.
#[derive(Debug, Clone)]
pub struct GaussKernel {
    pub id: KernelId,
    pub weight: f64,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
    pub polys: Vec<TaylorPoly>,
}

impl GaussKernel {
    pub fn new(weight: f64, mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::dim("kernel mean and covariance sizes differ"));
        }
        Ok(GaussKernel {
            id: KernelId::root(0),
            weight,
            mean,
            cov,
            polys: Vec::new(),
        })
    }

    pub fn with_id(mut self, id: KernelId) -> Self {
        self.id = id;
        self
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn domain(&self, zeta: f64) -> Result<UncertaintyDomain> {
        UncertaintyDomain::new(self.mean.clone(), self.cov.clone(), zeta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Initial,
    Propagated,
}

/// A Gaussian mixture.
#[derive(Debug, Clone)]
pub struct Manifold {
    pub kernels: Vec<GaussKernel>,
    pub side: Side,
}

impl Manifold {
    pub fn single(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        Ok(Manifold {
            kernels: vec![GaussKernel::new(1.0, mean, cov)?],
            side: Side::Initial,
        })
    }

    pub fn len(&self) -> usize {
        self.kernels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernels.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.kernels.iter().map(|k| k.weight).sum()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.kernels.iter().map(|k| k.weight).collect()
    }

    pub fn to_text(&self) -> ManifoldText {
        ManifoldText {
            side: self.side,
            kernels: self
                .kernels
                .iter()
                .map(|k| KernelText {
                    id: k.id.to_string(),
                    weight: k.weight,
                    mean: k.mean.iter().copied().collect(),
                    cov: to_rows(&k.cov),
                    polys: k.polys.iter().map(TaylorPoly::to_text).collect(),
                })
                .collect(),
        }
    }

    pub fn from_text(text: &ManifoldText) -> Result<Self> {
        let kernels = text
            .kernels
            .iter()
            .map(|k| {
                let id = k
                    .id
                    .split('.')
                    .map(|s| s.parse::<u32>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::invalid(format!("bad kernel id '{}'", k.id)))?;
                Ok(GaussKernel {
                    id: KernelId(id),
                    weight: k.weight,
                    mean: DVector::from_vec(k.mean.clone()),
                    cov: from_rows(&k.cov)?,
                    polys: k.polys.iter().map(TaylorPoly::from_text).collect::<Result<_>>()?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Manifold {
            kernels,
            side: text.side,
        })
    }
}

/// Export form of a manifold: kernel metadata plus polynomial text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifoldText {
    pub side: Side,
    pub kernels: Vec<KernelText>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelText {
    pub id: String,
    pub weight: f64,
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub polys: Vec<PolyText>,
}

/// Symmetric square root `V diag(sqrt λ) Vᵀ`.
fn sym_sqrt(p: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (vals, vecs) = psd_eigen(p)?;
    let d = DMatrix::from_diagonal(&vals.map(f64::sqrt));
    Ok(&vecs * d * vecs.transpose())
}

/// Splits a kernel in three along `P^{1/2} u` for a unit vector `u`.
///
/// For `u` an eigenvector `v_d`, the children sit at `μ - m sqrt(λ_d) v_d`,
/// `μ`, `μ + m sqrt(λ_d) v_d` with variance `σ̃² λ_d` along `v_d`.
pub fn split_kernel(k: &GaussKernel, direction: &DVector<f64>, lib: &SplitLibrary3) -> Result<[GaussKernel; 3]> {
    if direction.len() != k.dim() {
        return Err(Error::dim("split direction length differs from the kernel dimension"));
    }
    if (direction.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("split direction must be a unit vector"));
    }
    let d = sym_sqrt(&k.cov)? * direction;
    let shrink = 1.0 - lib.sigma * lib.sigma;
    let mut cov = &k.cov - (&d * d.transpose()) * shrink;
    cov = (&cov + cov.transpose()) * 0.5;
    let w = lib.weights();
    let off = lib.offsets();
    let make = |slot: usize| GaussKernel {
        id: k.id.child(slot as u32),
        weight: k.weight * w[slot],
        mean: &k.mean + &d * off[slot],
        cov: cov.clone(),
        polys: Vec::new(),
    };
    Ok([make(0), make(1), make(2)])
}

/// Mixture mean `Σ α μ` and covariance `Σ α (P + μ μᵀ) - μ̄ μ̄ᵀ`.
pub fn mixture_moments(m: &Manifold) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let first = m.kernels.first().ok_or_else(|| Error::invalid("empty mixture"))?;
    let n = first.dim();
    let mut mean = DVector::zeros(n);
    for k in &m.kernels {
        if k.dim() != n {
            return Err(Error::dim("mixture kernels have different dimensions"));
        }
        mean += &k.mean * k.weight;
    }
    let mut cov = DMatrix::zeros(n, n);
    for k in &m.kernels {
        let d = &k.mean - &mean;
        cov += (&k.cov + &d * d.transpose()) * k.weight;
    }
    Ok((mean, cov))
}
