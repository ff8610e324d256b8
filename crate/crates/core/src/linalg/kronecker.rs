//! Nearest Kronecker product approximation of a block boomerang matrix.

use faer::{Mat, MatRef};

use super::boomerang::{BlockBoomerangMatrix, BoomerangMatrix};
use crate::error::{Error, Result};

/// Block `(h, l)` of the rearrangement of `G` with inner block shape
/// `m2 × n2`: entry `(a, b)` is `G[a·m2 + h][b·n2 + l]`.
///
/// For `G = A ⊗ B` this equals `B[h][l]·A`, which is what turns the nearest
/// Kronecker problem into a rank-one approximation.
pub fn rearrangement_block(
    g: MatRef<'_, f64>,
    h: usize,
    l: usize,
    m2: usize,
    n2: usize,
) -> Result<Mat<f64>> {
    if m2 == 0 || n2 == 0 || g.nrows() % m2 != 0 || g.ncols() % n2 != 0 {
        return Err(Error::InvalidInput(format!(
            "{}x{} matrix cannot be split into {m2}x{n2} blocks",
            g.nrows(),
            g.ncols()
        )));
    }
    if h >= m2 {
        return Err(Error::IndexOutOfRange { index: h, len: m2 });
    }
    if l >= n2 {
        return Err(Error::IndexOutOfRange { index: l, len: n2 });
    }
    let (m1, n1) = (g.nrows() / m2, g.ncols() / n2);
    Ok(Mat::from_fn(m1, n1, |a, b| g[(a * m2 + h, b * n2 + l)]))
}

/// `Tr(A·B)` for boomerang matrices of the same order from their elementary
/// vectors, in `O(N)`: `Σ_j (2(N − j) + 1)·a_j·b_j` with 1-based `j`.
pub fn boomerang_trace_product(a: &BoomerangMatrix, b: &BoomerangMatrix) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            actual: b.len(),
        });
    }
    let n = a.len();
    Ok(a.elementary()
        .iter()
        .zip(b.elementary())
        .enumerate()
        .map(|(j, (x, y))| (2 * (n - j) - 1) as f64 * x * y)
        .sum())
}

/// The `M × M` matrix `H` minimizing `‖G − R ⊗ H‖_F` for fixed `R`:
/// `H[h][l] = Tr(R(G)_{hl}·R) / Tr(R·R)`, where `R(G)_{hl}` is the boomerang
/// matrix of entry `(h, l)` across the blocks of `G`.
pub fn nearest_kron_factor(g: &BlockBoomerangMatrix, r: &BoomerangMatrix) -> Result<Mat<f64>> {
    if r.len() != g.block_count() {
        return Err(Error::DimensionMismatch {
            expected: g.block_count(),
            actual: r.len(),
        });
    }
    let denom = boomerang_trace_product(r, r)?;
    if !(denom > 0.0) {
        return Err(Error::InvalidInput("reference boomerang matrix is zero".into()));
    }
    let m = g.block_size();
    let mut h = Mat::<f64>::zeros(m, m);
    for i in 0..m {
        for k in 0..=i {
            let v = boomerang_trace_product(&g.entry_sequence(i, k), r)? / denom;
            h[(i, k)] = v;
            h[(k, i)] = v;
        }
    }
    Ok(h)
}
