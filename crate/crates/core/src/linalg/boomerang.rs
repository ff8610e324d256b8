//! Boomerang matrices: `B[h][p] = b_{min(h, p)}` for an elementary vector `b`,
//! and their block analogue with symmetric `D × D` blocks.

use faer::Mat;

use super::dense::{chol_dense, spd_inverse};
use crate::error::{Error, Result};

/// Scalar boomerang matrix defined by its elementary vector.
#[derive(Debug, Clone, PartialEq)]
pub struct BoomerangMatrix {
    elementary: Vec<f64>,
}

impl BoomerangMatrix {
    pub fn new(elementary: Vec<f64>) -> Self {
        Self { elementary }
    }

    /// Covariance of a Brownian motion sampled at `times`: `min(t_h, t_p)`.
    pub fn brownian(times: &[f64]) -> Self {
        Self::new(times.to_vec())
    }

    pub fn elementary(&self) -> &[f64] {
        &self.elementary
    }

    pub fn len(&self) -> usize {
        self.elementary.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elementary.is_empty()
    }

    pub fn get(&self, h: usize, p: usize) -> f64 {
        self.elementary[h.min(p)]
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.len();
        Mat::from_fn(n, n, |h, p| self.get(h, p))
    }

    /// Positive definite iff the elementary vector is strictly increasing from a
    /// positive start.
    pub fn is_positive_definite(&self) -> bool {
        self.elementary.first().is_some_and(|b| *b > 0.0)
            && self.elementary.windows(2).all(|w| w[1] > w[0])
    }
}

/// Block boomerang matrix with blocks `B_1, …, B_P`, each symmetric `D × D`.
#[derive(Debug, Clone)]
pub struct BlockBoomerangMatrix {
    blocks: Vec<Mat<f64>>,
    block_size: usize,
}

impl BlockBoomerangMatrix {
    pub fn new(blocks: Vec<Mat<f64>>) -> Result<Self> {
        let d = blocks.first().map_or(0, |b| b.nrows());
        if blocks.is_empty() || d == 0 {
            return Err(Error::InvalidInput("need at least one non-empty block".into()));
        }
        for b in &blocks {
            if b.nrows() != d || b.ncols() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    actual: if b.nrows() != d { b.nrows() } else { b.ncols() },
                });
            }
            let scale = b.norm_max().max(f64::MIN_POSITIVE);
            for i in 0..d {
                for j in 0..i {
                    if (b[(i, j)] - b[(j, i)]).abs() > 1e-12 * scale {
                        return Err(Error::InvalidInput("blocks must be symmetric".into()));
                    }
                }
            }
        }
        Ok(Self {
            blocks,
            block_size: d,
        })
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn dim(&self) -> usize {
        self.block_count() * self.block_size
    }

    pub fn blocks(&self) -> &[Mat<f64>] {
        &self.blocks
    }

    pub fn block(&self, h: usize) -> &Mat<f64> {
        &self.blocks[h]
    }

    /// `B_h − B_{h−1}` with `B_{−1} = 0` (0-based `h`).
    pub fn increment(&self, h: usize) -> Mat<f64> {
        match h {
            0 => self.blocks[0].clone(),
            _ => &self.blocks[h] - &self.blocks[h - 1],
        }
    }

    /// Scalar entry at global row `r`, column `c`.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let d = self.block_size;
        self.blocks[(r / d).min(c / d)][(r % d, c % d)]
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        Mat::from_fn(n, n, |r, c| self.get(r, c))
    }

    /// The scalar boomerang matrix formed by entry `(i, k)` of every block.
    pub fn entry_sequence(&self, i: usize, k: usize) -> BoomerangMatrix {
        BoomerangMatrix::new(self.blocks.iter().map(|b| b[(i, k)]).collect())
    }
}

/// Block lower-triangular matrix whose block column `h` repeats `C_h` on and
/// below the diagonal: the factor `C` with `C·Cᵀ = B` for a block boomerang `B`.
#[derive(Debug, Clone)]
pub struct BlockLowerTriangular {
    blocks: Vec<Mat<f64>>,
    block_size: usize,
}

impl BlockLowerTriangular {
    pub fn new(blocks: Vec<Mat<f64>>) -> Result<Self> {
        let d = blocks.first().map_or(0, |b| b.nrows());
        if blocks.iter().any(|b| b.nrows() != d || b.ncols() != d) {
            return Err(Error::InvalidInput("blocks must share a square shape".into()));
        }
        Ok(Self {
            blocks,
            block_size: d,
        })
    }

    pub fn blocks(&self) -> &[Mat<f64>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    pub fn dim(&self) -> usize {
        self.blocks.len() * self.block_size
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let d = self.block_size;
        let (h, l) = (r / d, c / d);
        if l > h {
            0.0
        } else {
            self.blocks[l][(r % d, c % d)]
        }
    }

    pub fn to_dense(&self) -> Mat<f64> {
        let n = self.dim();
        Mat::from_fn(n, n, |r, c| self.get(r, c))
    }

    /// `out = C·x`, i.e. `out_h = out_{h−1} + C_h x_h`.
    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        let d = self.block_size;
        let mut prev = vec![0.0; d];
        for (h, c) in self.blocks.iter().enumerate() {
            let xs = &x[h * d..(h + 1) * d];
            let os = &mut out[h * d..(h + 1) * d];
            for i in 0..d {
                let mut acc = prev[i];
                for (j, xj) in xs.iter().enumerate().take(i + 1) {
                    acc += c[(i, j)] * xj;
                }
                os[i] = acc;
            }
            prev.copy_from_slice(os);
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    /// `out = Cᵀ·y`: `out_l = C_lᵀ Σ_{h ≥ l} y_h`.
    pub fn apply_transpose_into(&self, y: &[f64], out: &mut [f64]) {
        let d = self.block_size;
        let mut tail = vec![0.0; d];
        for h in (0..self.blocks.len()).rev() {
            for i in 0..d {
                tail[i] += y[h * d + i];
            }
            let c = &self.blocks[h];
            for j in 0..d {
                let mut acc = 0.0;
                for (i, t) in tail.iter().enumerate().skip(j) {
                    acc += c[(i, j)] * t;
                }
                out[h * d + j] = acc;
            }
        }
    }

    pub fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        let mut out = vec![0.0; y.len()];
        self.apply_transpose_into(y, &mut out);
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                actual: len,
            });
        }
        Ok(())
    }
}

/// Symmetric block tridiagonal matrix: diagonal blocks `D_1..D_P` and
/// sub-diagonal blocks `T_1..T_{P−1}` (block `(l+1, l)`; the super-diagonal
/// holds their transposes).
#[derive(Debug, Clone)]
pub struct BlockTridiagonal {
    pub diagonal: Vec<Mat<f64>>,
    pub off_diagonal: Vec<Mat<f64>>,
}

impl BlockTridiagonal {
    pub fn to_dense(&self) -> Mat<f64> {
        let p = self.diagonal.len();
        let d = self.diagonal.first().map_or(0, |b| b.nrows());
        Mat::from_fn(p * d, p * d, |r, c| {
            let (h, l) = (r / d, c / d);
            let (i, j) = (r % d, c % d);
            if h == l {
                self.diagonal[h][(i, j)]
            } else if h == l + 1 {
                self.off_diagonal[l][(i, j)]
            } else if l == h + 1 {
                self.off_diagonal[h][(j, i)]
            } else {
                0.0
            }
        })
    }
}

/// Block Cholesky factor of a block boomerang matrix: `C_h = chol(B_h − B_{h−1})`.
///
/// Costs `P` Cholesky factorizations of `D × D` blocks.
pub fn chol_block_boomerang(b: &BlockBoomerangMatrix) -> Result<BlockLowerTriangular> {
    let blocks = (0..b.block_count())
        .map(|h| {
            chol_dense(b.increment(h).as_ref()).map_err(|e| match e {
                Error::NotPositiveSemidefinite { .. } => Error::IndefiniteIncrement { block: h },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BlockLowerTriangular::new(blocks)
}

/// Inverse of a block boomerang matrix with positive definite increments.
///
/// With `V_h = B_h − B_{h−1}`, the inverse is block tridiagonal with
/// sub-diagonal `−V_{l+1}^{−1}` and diagonal `V_m^{−1} + V_{m+1}^{−1}`
/// (`V_P^{−1}` in the last block).
pub fn inverse_block_boomerang(b: &BlockBoomerangMatrix) -> Result<BlockTridiagonal> {
    let p = b.block_count();
    let inv = (0..p)
        .map(|h| {
            spd_inverse(b.increment(h).as_ref()).map_err(|_| Error::SingularIncrement { block: h })
        })
        .collect::<Result<Vec<_>>>()?;
    let diagonal = (0..p)
        .map(|m| if m + 1 < p { &inv[m] + &inv[m + 1] } else { inv[m].clone() })
        .collect();
    let off_diagonal = (0..p.saturating_sub(1)).map(|l| -&inv[l + 1]).collect();
    Ok(BlockTridiagonal {
        diagonal,
        off_diagonal,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::dense::mul;

    #[test]
    fn scalar_boomerang_example() {
        let b = BoomerangMatrix::new(vec![1.0, 2.0, 3.0]).to_dense();
        let expected = [[1.0, 1.0, 1.0], [1.0, 2.0, 2.0], [1.0, 2.0, 3.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(b[(i, j)], expected[i][j]);
            }
        }
    }

    #[test]
    fn brownian_cholesky_example() {
        let blocks = [1.0, 2.0, 3.0].iter().map(|v| Mat::from_fn(1, 1, |_, _| *v)).collect();
        let b = BlockBoomerangMatrix::new(blocks).unwrap();
        let c = chol_block_boomerang(&b).unwrap().to_dense();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(c[(i, j)], if j <= i { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn brownian_inverse_example() {
        let blocks = [1.0, 2.0, 3.0].iter().map(|v| Mat::from_fn(1, 1, |_, _| *v)).collect();
        let b = BlockBoomerangMatrix::new(blocks).unwrap();
        let inv = inverse_block_boomerang(&b).unwrap().to_dense();
        let expected = [[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 1.0]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((inv[(i, j)] - expected[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn indefinite_increment_is_reported() {
        let blocks = [2.0, 1.0].iter().map(|v| Mat::from_fn(1, 1, |_, _| *v)).collect();
        let b = BlockBoomerangMatrix::new(blocks).unwrap();
        assert!(matches!(chol_block_boomerang(&b), Err(Error::IndefiniteIncrement { block: 1 })));
    }

    #[test]
    fn apply_matches_dense() {
        let blocks: Vec<Mat<f64>> = (0..4)
            .map(|h| Mat::from_fn(3, 3, |i, j| if j <= i { 1.0 + (h * 9 + i * 3 + j) as f64 * 0.1 } else { 0.0 }))
            .collect();
        let c = BlockLowerTriangular::new(blocks).unwrap();
        let dense = c.to_dense();
        let x: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let xm = Mat::from_fn(12, 1, |i, _| x[i]);
        let fwd = mul(dense.as_ref(), xm.as_ref());
        let back = mul(dense.transpose(), xm.as_ref());
        let a = c.apply(&x).unwrap();
        let t = c.apply_transpose(&x).unwrap();
        for i in 0..12 {
            assert!((a[i] - fwd[(i, 0)]).abs() < 1e-12);
            assert!((t[i] - back[(i, 0)]).abs() < 1e-12);
        }
        assert!(c.apply(&x[..5]).is_err());
    }
}
