use faer::dyn_stack::{MemBuffer, MemStack};
use faer::linalg::evd::{self, ComputeEigenvectors};
use faer::linalg::matmul::matmul;
use faer::diag::Diag;
use faer::{Accum, Mat, MatMut, MatRef, Par};

use crate::error::{Error, Result};

/// Relative tolerance for treating tiny negative eigenvalues or pivots as zero.
pub const PSD_TOLERANCE: f64 = 1e-10;

pub(crate) fn psd_within_tolerance(min_eigenvalue: f64, max_eigenvalue: f64) -> bool {
    min_eigenvalue >= -PSD_TOLERANCE * max_eigenvalue.abs().max(1.0)
}

/// Eigen-decomposition of a symmetric matrix, eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors stored as columns, matching `values`.
    pub vectors: Mat<f64>,
}

/// Symmetric eigen-decomposition. Only the lower triangle of `a` is read.
pub fn eig_sym(a: MatRef<'_, f64>) -> Result<SymEigen> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    if n == 0 {
        return Ok(SymEigen {
            values: Vec::new(),
            vectors: Mat::zeros(0, 0),
        });
    }
    let mut s = Diag::<f64>::zeros(n);
    let mut u = Mat::<f64>::zeros(n, n);
    let par = Par::Seq;
    let mut buf = MemBuffer::new(evd::self_adjoint_evd_scratch::<f64>(
        n,
        ComputeEigenvectors::Yes,
        par,
        Default::default(),
    ));
    evd::self_adjoint_evd(
        a,
        s.as_mut(),
        Some(u.as_mut()),
        par,
        MemStack::new(&mut buf),
        Default::default(),
    )
    .map_err(|e| Error::Numerical(format!("symmetric eigensolver failed: {e:?}")))?;
    let ascending = s.column_vector();
    let values: Vec<f64> = (0..n).rev().map(|i| ascending[i]).collect();
    let vectors = Mat::from_fn(n, n, |r, c| u[(r, n - 1 - c)]);
    Ok(SymEigen { values, vectors })
}

/// Lower Cholesky factor of a symmetric positive semidefinite matrix.
///
/// Only the lower triangle is read. Negative pivots no worse than
/// `-PSD_TOLERANCE·max(1, max diagonal)` are clamped to zero, which yields a
/// valid factor for singular matrices; the columns below a zero pivot are zero.
pub fn chol_dense(s: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: s.ncols(),
        });
    }
    let scale = (0..n).map(|i| s[(i, i)].abs()).fold(1.0, f64::max);
    let tol = PSD_TOLERANCE * scale;
    // row-major lower triangle so that the inner products are contiguous
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let (done, rest) = l.split_at_mut(j * n);
        let row_j = &mut rest[..n];
        for k in 0..j {
            let row_k = &done[k * n..k * n + k + 1];
            let pivot = row_k[k];
            row_j[k] = if pivot > 0.0 {
                (s[(j, k)] - dot(&row_j[..k], &row_k[..k])) / pivot
            } else {
                0.0
            };
        }
        let d = s[(j, j)] - dot(&row_j[..j], &row_j[..j]);
        if !d.is_finite() || d < -tol {
            return Err(Error::NotPositiveSemidefinite { value: d });
        }
        row_j[j] = d.max(0.0).sqrt();
    }
    Ok(Mat::from_fn(n, n, |i, j| if j <= i { l[i * n + j] } else { 0.0 }))
}

/// Inverse of a symmetric positive definite matrix.
pub fn spd_inverse(s: MatRef<'_, f64>) -> Result<Mat<f64>> {
    let n = s.nrows();
    let l = chol_dense(s)?;
    if (0..n).any(|i| !(l[(i, i)] > 0.0)) {
        return Err(Error::Numerical("matrix is singular".into()));
    }
    // L^{-1} column by column, then L^{-T} L^{-1}
    let mut inv_l = Mat::<f64>::zeros(n, n);
    for c in 0..n {
        for r in c..n {
            let mut acc = if r == c { 1.0 } else { 0.0 };
            for k in c..r {
                acc -= l[(r, k)] * inv_l[(k, c)];
            }
            inv_l[(r, c)] = acc / l[(r, r)];
        }
    }
    let mut out = Mat::<f64>::zeros(n, n);
    gemm(out.as_mut(), inv_l.transpose(), inv_l.as_ref());
    Ok(symmetrize(out))
}

pub(crate) fn symmetrize(mut a: Mat<f64>) -> Mat<f64> {
    let n = a.nrows();
    for i in 0..n {
        for j in 0..i {
            let v = 0.5 * (a[(i, j)] + a[(j, i)]);
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    a
}

/// `dst = lhs · rhs`, single-threaded.
pub(crate) fn gemm(dst: MatMut<'_, f64>, lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>) {
    matmul(dst, Accum::Replace, lhs, rhs, 1.0, Par::Seq);
}

/// `dst += alpha · lhs · rhs`, single-threaded.
pub(crate) fn gemm_acc(dst: MatMut<'_, f64>, lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>, alpha: f64) {
    matmul(dst, Accum::Add, lhs, rhs, alpha, Par::Seq);
}

/// Clears the upper halves of the AVX registers after faer kernels.
///
/// faer's SIMD kernels can return with dirty upper YMM state; on many x86
/// cores the legacy-SSE code in the system `exp`/`erfc` then runs about 30×
/// slower until the state is cleared.
#[inline]
pub(crate) fn clear_simd_upper() {
    #[cfg(target_arch = "x86_64")]
    {
        if std::arch::is_x86_feature_detected!("avx") {
            // SAFETY: the instruction is available, checked above.
            unsafe { std::arch::x86_64::_mm256_zeroupper() }
        }
    }
}

pub(crate) fn mul(lhs: MatRef<'_, f64>, rhs: MatRef<'_, f64>) -> Mat<f64> {
    let mut out = Mat::zeros(lhs.nrows(), rhs.ncols());
    gemm(out.as_mut(), lhs, rhs);
    out
}

pub fn kron(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> Mat<f64> {
    let (br, bc) = (b.nrows(), b.ncols());
    Mat::from_fn(a.nrows() * br, a.ncols() * bc, |r, c| {
        a[(r / br, c / bc)] * b[(r % br, c % bc)]
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut tail = 0.0;
    for i in 4 * chunks..a.len() {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn frobenius(a: MatRef<'_, f64>) -> f64 {
    a.norm_l2()
}

pub fn max_abs(a: MatRef<'_, f64>) -> f64 {
    a.norm_max()
}

/// Writes a matrix as comma-separated rows with round-trip float formatting.
pub fn write_csv<W: std::io::Write>(mut out: W, a: MatRef<'_, f64>) -> std::io::Result<()> {
    for i in 0..a.nrows() {
        let row: Vec<String> = (0..a.ncols()).map(|j| format!("{}", a[(i, j)])).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
