//! Linear transformation construction: rotate the Cholesky factor so that the
//! leading inputs carry the directions in which the payoff varies most.

use faer::{Mat, MatMut};

use crate::error::{Error, Result};
use crate::linalg::{dot, gemm, gemm_acc, norm2, BlockLowerTriangular};

/// Projected norms below this fraction of the original trigger a second
/// Gram–Schmidt pass.
const REORTHOGONALIZE_BELOW: f64 = 0.1;

/// Orthogonal `A = Q·diag(signs, 1, …, 1)` with `Q = I − V·T·Vᵀ` a product of
/// `k` Householder reflections whose first `k` columns reproduce the optimized
/// columns exactly.
#[derive(Debug, Clone)]
pub(crate) struct Rotation {
    v: Mat<f64>,
    t: Mat<f64>,
    signs: Vec<f64>,
}

impl Rotation {
    /// Completes `k` orthonormal columns of length `n` to an orthogonal matrix.
    pub(crate) fn complete(columns: &[Vec<f64>], n: usize) -> Self {
        let k = columns.len();
        let mut w: Vec<Vec<f64>> = columns.to_vec();
        let mut v: Vec<Vec<f64>> = vec![vec![0.0; n]; k];
        let mut tau = vec![0.0; k];
        let mut signs = vec![1.0; k];
        for j in 0..k {
            let (done, rest) = w.split_at_mut(j + 1);
            let wj = &done[j];
            let norm = norm2(&wj[j..]);
            let x0 = wj[j];
            let alpha = if x0 >= 0.0 { -norm } else { norm };
            let vj = &mut v[j];
            vj[j..].copy_from_slice(&wj[j..]);
            vj[j] -= alpha;
            let vnorm2 = dot(&vj[j..], &vj[j..]);
            tau[j] = if vnorm2 > 0.0 { 2.0 / vnorm2 } else { 0.0 };
            for wc in rest.iter_mut() {
                let s = dot(&vj[j..], &wc[j..]) * tau[j];
                wc[j..].iter_mut().zip(&vj[j..]).for_each(|(x, y)| *x -= s * y);
            }
            // H_j x = alpha e_j, so column j of Q is sign(alpha) times the input column
            signs[j] = if alpha >= 0.0 { 1.0 } else { -1.0 };
        }
        let mut t = Mat::<f64>::zeros(k, k);
        for j in 0..k {
            t[(j, j)] = tau[j];
            if j == 0 {
                continue;
            }
            let w: Vec<f64> = (0..j).map(|i| dot(&v[i], &v[j])).collect();
            for i in 0..j {
                let s: f64 = (i..j).map(|l| t[(i, l)] * w[l]).sum();
                t[(i, j)] = -tau[j] * s;
            }
        }
        let v = Mat::from_fn(n, k, |r, c| v[c][r]);
        Self { v, t, signs }
    }

    pub(crate) fn columns(&self) -> usize {
        self.signs.len()
    }

    /// `x ← A·x` for every column of `x`.
    pub(crate) fn apply_in_place(&self, mut x: MatMut<'_, f64>) {
        let k = self.columns();
        if k == 0 {
            return;
        }
        for (r, s) in self.signs.iter().enumerate() {
            if *s < 0.0 {
                for b in 0..x.ncols() {
                    x[(r, b)] = -x[(r, b)];
                }
            }
        }
        let mut y = Mat::<f64>::zeros(k, x.ncols());
        gemm(y.as_mut(), self.v.transpose(), x.as_ref());
        let mut ty = Mat::<f64>::zeros(k, x.ncols());
        gemm(ty.as_mut(), self.t.as_ref(), y.as_ref());
        gemm_acc(x, self.v.as_ref(), ty.as_ref(), -1.0);
    }

    pub(crate) fn to_dense(&self, n: usize) -> Mat<f64> {
        let mut a = Mat::<f64>::identity(n, n);
        self.apply_in_place(a.as_mut());
        a
    }
}

pub(crate) struct LtBuild {
    pub rotation: Rotation,
    pub reorthogonalizations: usize,
}

/// Greedy column optimization: column `p` points along the gradient of the
/// basket at the path built from columns `0..p` set to one, projected off the
/// earlier columns.
pub(crate) fn optimize(chol: &BlockLowerTriangular, mu: &[f64], count: usize) -> Result<LtBuild> {
    let n = chol.dim();
    if mu.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: mu.len(),
        });
    }
    if count > n {
        return Err(Error::InvalidInput(format!(
            "cannot optimize {count} columns in dimension {n}"
        )));
    }
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(count);
    let mut shift = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut image = vec![0.0; n];
    let mut reorthogonalizations = 0;
    for p in 0..count {
        for k in 0..n {
            d[k] = (mu[k] + shift[k]).exp();
        }
        let mut b = chol.apply_transpose(&d)?;
        let original = norm2(&b);
        project_out(&mut b, &columns);
        if norm2(&b) < REORTHOGONALIZE_BELOW * original {
            project_out(&mut b, &columns);
            reorthogonalizations += 1;
        }
        let norm = norm2(&b);
        if !(norm > 1e-12 * original) || !norm.is_finite() {
            return Err(Error::Numerical(format!(
                "optimized column {p} vanished after orthogonalization"
            )));
        }
        b.iter_mut().for_each(|x| *x /= norm);
        chol.apply_into(&b, &mut image);
        for k in 0..n {
            shift[k] += image[k];
        }
        columns.push(b);
    }
    Ok(LtBuild {
        rotation: Rotation::complete(&columns, n),
        reorthogonalizations,
    })
}

fn project_out(b: &mut [f64], columns: &[Vec<f64>]) {
    for q in columns {
        let c = dot(b, q);
        b.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::MatRef;
    use rand::{Rng, SeedableRng};

    fn orthogonality_defect(a: MatRef<'_, f64>) -> f64 {
        let n = a.ncols();
        let mut g = Mat::<f64>::zeros(n, n);
        gemm(g.as_mut(), a.transpose(), a);
        (&g - Mat::<f64>::identity(n, n)).norm_max()
    }

    fn orthonormal_columns(n: usize, k: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut cols: Vec<Vec<f64>> = Vec::new();
        for _ in 0..k {
            let mut c: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            project_out(&mut c, &cols);
            project_out(&mut c, &cols);
            let nm = norm2(&c);
            c.iter_mut().for_each(|x| *x /= nm);
            cols.push(c);
        }
        cols
    }

    #[test]
    fn completion_keeps_given_columns() {
        let cols = orthonormal_columns(40, 7, 3);
        let a = Rotation::complete(&cols, 40).to_dense(40);
        assert!(orthogonality_defect(a.as_ref()) < 1e-13);
        for (j, c) in cols.iter().enumerate() {
            for r in 0..40 {
                assert!((a[(r, j)] - c[r]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn completion_of_nothing_is_identity() {
        let a = Rotation::complete(&[], 5).to_dense(5);
        assert_eq!(a, Mat::<f64>::identity(5, 5));
    }
}
