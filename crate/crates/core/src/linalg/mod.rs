//! Dense and structured linear algebra for block boomerang covariance matrices.

mod boomerang;
mod dense;
mod kronecker;

pub use boomerang::{
    chol_block_boomerang, inverse_block_boomerang, BlockBoomerangMatrix, BlockLowerTriangular,
    BlockTridiagonal, BoomerangMatrix,
};
pub use dense::{
    chol_dense, eig_sym, frobenius, kron, max_abs, spd_inverse, write_csv, SymEigen, PSD_TOLERANCE,
};
pub use kronecker::{boomerang_trace_product, nearest_kron_factor, rearrangement_block};

pub(crate) use dense::{clear_simd_upper, dot, gemm, gemm_acc, mul, norm2, psd_within_tolerance, symmetrize};
