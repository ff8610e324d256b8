//! Kronecker-product PCA: principal components of the nearest `R ⊗ H`
//! approximation, mapped back onto the exact covariance through its block
//! Cholesky factor.
//!
//! With `P = (E_R ⊗ E_H)·Λ^{1/2}` (columns ordered by eigenvalue product) the
//! factor is `C = C_Σ·(C_R ⊗ C_H)^{−1}·P`. The Kronecker inverse is applied
//! without forming it: `C_R^{−1}` is a scaled first difference over dates and
//! `C_H^{−1}` a forward substitution over assets.

use faer::{Mat, MatMut, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{
    chol_block_boomerang, chol_dense, eig_sym, gemm, nearest_kron_factor, BlockBoomerangMatrix,
    BlockLowerTriangular, BoomerangMatrix,
};

#[derive(Debug, Clone)]
pub(crate) struct KroneckerFactor {
    pub chol: BlockLowerTriangular,
    pub h: Mat<f64>,
    h_chol: Mat<f64>,
    /// `1/√(r_n − r_{n−1})`.
    inv_sqrt_steps: Vec<f64>,
    e_r: Mat<f64>,
    e_h: Mat<f64>,
    /// Column `l` of `P` is `scale·(e_R[date] ⊗ e_H[asset])`.
    order: Vec<(usize, usize, f64)>,
}

impl KroneckerFactor {
    pub(crate) fn build(blocks: &BlockBoomerangMatrix, r: &BoomerangMatrix) -> Result<Self> {
        if !r.is_positive_definite() {
            return Err(Error::InvalidInput(
                "reference boomerang matrix must have a positive, strictly increasing elementary vector"
                    .into(),
            ));
        }
        let chol = chol_block_boomerang(blocks)?;
        let h = nearest_kron_factor(blocks, r)?;
        let eh = eig_sym(h.as_ref())?;
        let min = *eh.values.last().unwrap_or(&0.0);
        if !(min > 0.0) {
            return Err(Error::IndefiniteKroneckerFactor {
                min_eigenvalue: min,
            });
        }
        let h_chol = chol_dense(h.as_ref())?;
        let er = eig_sym(r.to_dense().as_ref())?;
        let b = r.elementary();
        let inv_sqrt_steps = (0..b.len())
            .map(|n| 1.0 / (b[n] - if n == 0 { 0.0 } else { b[n - 1] }).sqrt())
            .collect();
        let mut order: Vec<(usize, usize, f64)> = Vec::with_capacity(b.len() * h.nrows());
        for (a, la) in er.values.iter().enumerate() {
            for (c, mc) in eh.values.iter().enumerate() {
                order.push((a, c, la.max(0.0) * mc));
            }
        }
        // stable sort keeps (date, asset) order among equal products
        order.sort_by(|x, y| y.2.total_cmp(&x.2));
        for entry in &mut order {
            entry.2 = entry.2.sqrt();
        }
        Ok(Self {
            chol,
            h,
            h_chol,
            inv_sqrt_steps,
            e_r: er.vectors,
            e_h: eh.vectors,
            order,
        })
    }

    fn assets(&self) -> usize {
        self.h.nrows()
    }

    fn dates(&self) -> usize {
        self.inv_sqrt_steps.len()
    }

    /// Eigenvalue products `λ_R·λ_H` in column order.
    pub(crate) fn spectrum(&self) -> Vec<f64> {
        self.order.iter().map(|(_, _, s)| s * s).collect()
    }

    /// The Kronecker principal-component factor `P` in time-major layout.
    pub(crate) fn pca_factor(&self) -> Mat<f64> {
        let m = self.assets();
        let mut p = Mat::<f64>::zeros(self.dates() * m, self.order.len());
        for (l, (a, c, s)) in self.order.iter().enumerate() {
            for n in 0..self.dates() {
                for i in 0..m {
                    p[(n * m + i, l)] = s * self.e_r[(n, *a)] * self.e_h[(i, *c)];
                }
            }
        }
        p
    }

    /// `out = C·eps` column by column.
    pub(crate) fn apply_batch(&self, eps: MatRef<'_, f64>, mut out: MatMut<'_, f64>) {
        let (m, nd) = (self.assets(), self.dates());
        let batch = eps.ncols();
        // Y_b (dates × assets) for path b lives in columns b·m..(b+1)·m
        let mut y = Mat::<f64>::zeros(nd, m * batch);
        for b in 0..batch {
            for (l, (a, c, s)) in self.order.iter().enumerate() {
                y[(*a, b * m + c)] = s * eps[(l, b)];
            }
        }
        let mut x = Mat::<f64>::zeros(nd, m * batch);
        gemm(x.as_mut(), self.e_r.as_ref(), y.as_ref());
        let mut u = Mat::<f64>::zeros(nd, m);
        let mut row = vec![0.0; m];
        let mut z = vec![0.0; nd * m];
        let mut w = vec![0.0; nd * m];
        for b in 0..batch {
            gemm(
                u.as_mut(),
                x.as_ref().subcols(b * m, m),
                self.e_h.transpose(),
            );
            for n in 0..nd {
                for i in 0..m {
                    let prev = if n == 0 { 0.0 } else { u[(n - 1, i)] };
                    row[i] = (u[(n, i)] - prev) * self.inv_sqrt_steps[n];
                }
                // forward substitution with C_H
                for i in 0..m {
                    let mut acc = row[i];
                    for j in 0..i {
                        acc -= self.h_chol[(i, j)] * w[n * m + j];
                    }
                    w[n * m + i] = acc / self.h_chol[(i, i)];
                }
            }
            self.chol.apply_into(&w, &mut z);
            for (k, zk) in z.iter().enumerate() {
                out[(k, b)] = *zk;
            }
        }
    }
}
