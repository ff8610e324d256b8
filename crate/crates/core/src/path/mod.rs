//! Factorizations `Σ = C·Cᵀ` of the log-path covariance. A construction maps
//! i.i.d. standard normals `ε` to a path `Z = C·ε`; they differ in how much of
//! the payoff's variation the leading coordinates of `ε` explain.

mod kpa;
mod lt;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use faer::prelude::ReborrowMut;
use faer::{Mat, MatMut, MatRef};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    chol_block_boomerang, clear_simd_upper, eig_sym, gemm, gemm_acc, psd_within_tolerance, BlockBoomerangMatrix,
    BlockLowerTriangular, BoomerangMatrix,
};
use crate::market::{build_covariance_blocks, drift_vector, MarketSpec};

/// Number of columns the linear transformation optimizes by default.
pub const DEFAULT_LT_COLUMNS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "CH")]
    Cholesky,
    #[serde(rename = "PCA")]
    Pca,
    #[serde(rename = "LT")]
    Lt,
    #[serde(rename = "KPA")]
    Kpa,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Cholesky, Method::Pca, Method::Lt, Method::Kpa];

    pub fn label(self) -> &'static str {
        match self {
            Method::Cholesky => "CH",
            Method::Pca => "PCA",
            Method::Lt => "LT",
            Method::Kpa => "KPA",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "CH" | "CHOLESKY" => Ok(Method::Cholesky),
            "PCA" => Ok(Method::Pca),
            "LT" => Ok(Method::Lt),
            "KPA" => Ok(Method::Kpa),
            _ => Err(Error::InvalidInput(format!("unknown construction '{s}'"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Factor {
    Cholesky(BlockLowerTriangular),
    Dense(Mat<f64>),
    Rotated {
        chol: BlockLowerTriangular,
        rotation: lt::Rotation,
    },
    Kronecker(Box<kpa::KroneckerFactor>),
}

/// A factor `C` of the log-path covariance, stored in whatever form makes
/// `C·ε` cheap.
#[derive(Debug, Clone)]
pub struct Construction {
    method: Method,
    dim: usize,
    metadata: BTreeMap<String, String>,
    factor: Factor,
}

impl Construction {
    pub fn method(&self) -> Method {
        self.method
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of optimized leading columns (LT only, zero otherwise).
    pub fn optimized_columns(&self) -> usize {
        match &self.factor {
            Factor::Rotated { rotation, .. } => rotation.columns(),
            _ => 0,
        }
    }

    pub fn metadata(&self) -> &BTreeMap<String, String> {
        &self.metadata
    }

    /// `C·ε` for one vector.
    pub fn apply(&self, eps: &[f64]) -> Result<Vec<f64>> {
        if eps.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: eps.len(),
            });
        }
        let e = MatRef::from_column_major_slice(eps, self.dim, 1);
        let out = self.apply_batch(e)?;
        Ok((0..self.dim).map(|k| out[(k, 0)]).collect())
    }

    /// `C·E` where each column of `eps` is one normal vector.
    pub fn apply_batch(&self, eps: MatRef<'_, f64>) -> Result<Mat<f64>> {
        if eps.nrows() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: eps.nrows(),
            });
        }
        let mut out = Mat::<f64>::zeros(self.dim, eps.ncols());
        self.apply_batch_into(eps, out.as_mut());
        Ok(out)
    }

    pub(crate) fn apply_batch_into(&self, eps: MatRef<'_, f64>, out: MatMut<'_, f64>) {
        match &self.factor {
            Factor::Cholesky(chol) => apply_chol_batch(chol, eps, out),
            Factor::Dense(c) => gemm(out, c.as_ref(), eps),
            Factor::Rotated { chol, rotation } => {
                let mut x = eps.to_owned();
                rotation.apply_in_place(x.as_mut());
                apply_chol_batch(chol, x.as_ref(), out);
            }
            Factor::Kronecker(k) => k.apply_batch(eps, out),
        }
        clear_simd_upper();
    }

    /// The dense factor `C`.
    pub fn factor_matrix(&self) -> Mat<f64> {
        match &self.factor {
            Factor::Dense(c) => c.clone(),
            Factor::Cholesky(chol) => chol.to_dense(),
            _ => {
                let id = Mat::<f64>::identity(self.dim, self.dim);
                let mut out = Mat::<f64>::zeros(self.dim, self.dim);
                self.apply_batch_into(id.as_ref(), out.as_mut());
                out
            }
        }
    }

    /// Block Cholesky factor underlying CH, LT and KPA.
    pub fn cholesky_factor(&self) -> Option<&BlockLowerTriangular> {
        match &self.factor {
            Factor::Cholesky(c) | Factor::Rotated { chol: c, .. } => Some(c),
            Factor::Kronecker(k) => Some(&k.chol),
            Factor::Dense(_) => None,
        }
    }

    /// The orthogonal matrix `A` of the LT construction, `C = C_Σ·A`.
    pub fn rotation_matrix(&self) -> Option<Mat<f64>> {
        match &self.factor {
            Factor::Rotated { rotation, .. } => Some(rotation.to_dense(self.dim)),
            _ => None,
        }
    }

    /// The nearest Kronecker factor `H` of the KPA construction.
    pub fn kronecker_factor(&self) -> Option<&Mat<f64>> {
        match &self.factor {
            Factor::Kronecker(k) => Some(&k.h),
            _ => None,
        }
    }

    /// The principal-component factor `P` of `R ⊗ H` and its column variances.
    pub fn kronecker_components(&self) -> Option<(Mat<f64>, Vec<f64>)> {
        match &self.factor {
            Factor::Kronecker(k) => Some((k.pca_factor(), k.spectrum())),
            _ => None,
        }
    }
}

fn apply_chol_batch(chol: &BlockLowerTriangular, eps: MatRef<'_, f64>, mut out: MatMut<'_, f64>) {
    let d = chol.block_size();
    for (h, c) in chol.blocks().iter().enumerate() {
        let r = h * d;
        if h > 0 {
            for b in 0..eps.ncols() {
                for i in 0..d {
                    out[(r + i, b)] = out[(r - d + i, b)];
                }
            }
            gemm_acc(out.rb_mut().subrows_mut(r, d), c.as_ref(), eps.subrows(r, d), 1.0);
        } else {
            gemm(out.rb_mut().subrows_mut(0, d), c.as_ref(), eps.subrows(0, d));
        }
    }
}

/// Block Cholesky construction.
pub fn build_cholesky(blocks: &BlockBoomerangMatrix) -> Result<Construction> {
    let chol = chol_block_boomerang(blocks)?;
    Ok(Construction {
        method: Method::Cholesky,
        dim: blocks.dim(),
        metadata: BTreeMap::new(),
        factor: Factor::Cholesky(chol),
    })
}

/// Principal components of the assembled covariance: `C = E·Λ^{1/2}` with
/// eigenvalues descending.
pub fn build_pca(blocks: &BlockBoomerangMatrix) -> Result<Construction> {
    let eig = eig_sym(blocks.to_dense().as_ref())?;
    let max = eig.values.first().copied().unwrap_or(0.0);
    let min = eig.values.last().copied().unwrap_or(0.0);
    if !psd_within_tolerance(min, max) {
        return Err(Error::NotPositiveSemidefinite { value: min });
    }
    let n = eig.values.len();
    let roots: Vec<f64> = eig.values.iter().map(|v| v.max(0.0).sqrt()).collect();
    let c = Mat::from_fn(n, n, |r, l| eig.vectors[(r, l)] * roots[l]);
    let total: f64 = eig.values.iter().map(|v| v.max(0.0)).sum();
    let mut metadata = BTreeMap::new();
    metadata.insert("eigensolver".into(), "dense symmetric".into());
    metadata.insert(
        "leading_variance_share".into(),
        format!("{:.6}", eig.values[0].max(0.0) / total),
    );
    Ok(Construction {
        method: Method::Pca,
        dim: n,
        metadata,
        factor: Factor::Dense(c),
    })
}

/// Linear transformation with `columns` greedily optimized leading columns.
pub fn build_lt(
    blocks: &BlockBoomerangMatrix,
    mu: &[f64],
    columns: usize,
) -> Result<Construction> {
    let chol = chol_block_boomerang(blocks)?;
    let built = lt::optimize(&chol, mu, columns)?;
    let mut metadata = BTreeMap::new();
    metadata.insert("optimized_columns".into(), columns.to_string());
    metadata.insert(
        "reorthogonalizations".into(),
        built.reorthogonalizations.to_string(),
    );
    Ok(Construction {
        method: Method::Lt,
        dim: blocks.dim(),
        metadata,
        factor: Factor::Rotated {
            chol,
            rotation: built.rotation,
        },
    })
}

/// Kronecker-product PCA against the scalar boomerang matrix `r` (the Brownian
/// covariance of the monitoring grid in the usual case).
pub fn build_kpa(blocks: &BlockBoomerangMatrix, r: &BoomerangMatrix) -> Result<Construction> {
    let k = kpa::KroneckerFactor::build(blocks, r)?;
    let mut metadata = BTreeMap::new();
    metadata.insert("eigensolver".into(), "kronecker".into());
    Ok(Construction {
        method: Method::Kpa,
        dim: blocks.dim(),
        metadata,
        factor: Factor::Kronecker(Box::new(k)),
    })
}

/// Builds a construction for a market, using the Brownian covariance of the
/// monitoring grid as the KPA reference matrix.
pub fn build(method: Method, spec: &MarketSpec, lt_columns: usize) -> Result<Construction> {
    let blocks = build_covariance_blocks(spec)?;
    build_from_blocks(method, spec, &blocks, lt_columns)
}

pub fn build_from_blocks(
    method: Method,
    spec: &MarketSpec,
    blocks: &BlockBoomerangMatrix,
    lt_columns: usize,
) -> Result<Construction> {
    match method {
        Method::Cholesky => build_cholesky(blocks),
        Method::Pca => build_pca(blocks),
        Method::Lt => build_lt(blocks, &drift_vector(spec)?, lt_columns.min(blocks.dim())),
        Method::Kpa => build_kpa(blocks, &BoomerangMatrix::brownian(spec.times())),
    }
}

/// `Z = C·ε`.
pub fn transform(c: &Construction, eps: &[f64]) -> Result<Vec<f64>> {
    c.apply(eps)
}

/// Loadings of the basket on each input at the centre of the cube:
/// `g_l = Σ_k C_kl·exp(μ_k)`.
pub fn first_order_loadings(c: &Construction, mu: &[f64]) -> Result<Vec<f64>> {
    if mu.len() != c.dim() {
        return Err(Error::DimensionMismatch {
            expected: c.dim(),
            actual: mu.len(),
        });
    }
    let w = Mat::from_fn(c.dim(), 1, |k, _| mu[k].exp());
    let f = c.factor_matrix();
    let mut g = Mat::<f64>::zeros(c.dim(), 1);
    gemm(g.as_mut(), f.transpose(), w.as_ref());
    Ok((0..c.dim()).map(|l| g[(l, 0)]).collect())
}

/// Smallest `d` such that the first `d` inputs carry a fraction `p` of the
/// variance of the basket's first-order expansion around the centre.
pub fn effective_truncation_dimension(c: &Construction, mu: &[f64], p: f64) -> Result<usize> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::InvalidInput(format!("threshold {p} must lie in (0, 1)")));
    }
    let g = first_order_loadings(c, mu)?;
    let total: f64 = g.iter().map(|x| x * x).sum();
    if !(total > 0.0) {
        return Err(Error::Numerical("basket has zero first-order variance".into()));
    }
    let target = p * total;
    let mut acc = 0.0;
    for (l, x) in g.iter().enumerate() {
        acc += x * x;
        if acc >= target {
            return Ok(l + 1);
        }
    }
    Ok(g.len())
}
