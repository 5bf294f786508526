// SPDX-License-Identifier: Apache-2.0

//! Quaternions, fixed-size complex matrices and the small dense kernels built
//! on them: exponential, eigen-decomposition and characteristic polynomials.

mod eigen;
mod matrix;
mod poly;
mod quaternion;

use num_complex::Complex64;
use thiserror::Error;

pub use eigen::{
    common_eigenspace_dim, eigen, eigen2_continuous, eigenspace_dim, eigenvalues, hermitian_eigen, pair_residual,
    EigenPair,
};
pub use matrix::{mat_exp, ComplexMat2, ComplexMat4, Mat};
pub use poly::{palindromic_defect, CharPoly4};
pub use quaternion::Quaternion;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("matrix is singular to working precision")]
    Singular,
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("matrix exponential overflows (1-norm {norm:.3e})")]
    ExpOverflow { norm: f64 },
}

/// The embedding ℍ → M₂(ℂ), `a + bi + cj + dk ↦ [[a+bi, c+di], [−c+di, a−bi]]`.
pub fn quat_to_mat2(q: Quaternion) -> ComplexMat2 {
    Mat([[Complex64::new(q.w, q.x), Complex64::new(q.y, q.z)], [Complex64::new(-q.y, q.z), Complex64::new(q.w, -q.x)]])
}

/// Orthogonal projection of M₂(ℂ) onto the image of [`quat_to_mat2`].
///
/// Exact inverse on the image; for other matrices it returns the nearest
/// quaternion in the Frobenius norm.
pub fn mat2_to_quat(m: &ComplexMat2) -> Quaternion {
    let a = (m[(0, 0)] + m[(1, 1)].conj()) * 0.5;
    let c = (m[(0, 1)] - m[(1, 0)].conj()) * 0.5;
    Quaternion::new(a.re, a.im, c.re, c.im)
}

/// Distance of a 2×2 matrix from the quaternion subalgebra.
pub fn quaternion_defect(m: &ComplexMat2) -> f64 {
    (*m - quat_to_mat2(mat2_to_quat(m))).norm()
}

/// Block embedding of a quaternionic 2×2 matrix into M₄(ℂ).
pub fn quat_block(q: [[Quaternion; 2]; 2]) -> ComplexMat4 {
    let mut out = Mat::<4>::zero();
    for (bi, row) in q.iter().enumerate() {
        for (bj, entry) in row.iter().enumerate() {
            let m = quat_to_mat2(*entry);
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * bi + i, 2 * bj + j)] = m[(i, j)];
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_basis_cases() {
        assert_eq!(quat_to_mat2(Quaternion::ONE), ComplexMat2::identity());
        let j = quat_to_mat2(Quaternion::J);
        let expect = ComplexMat2::new(
            Complex64::new(0.0, 0.0),
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, 0.0),
            Complex64::new(0.0, 0.0),
        );
        assert_eq!(j, expect);
    }

    #[test]
    fn roundtrip_and_det() {
        let q = Quaternion::new(0.4, -0.3, 1.1, 0.25);
        let m = quat_to_mat2(q);
        assert!((mat2_to_quat(&m) - q).norm() < 1e-15);
        assert!((m.det().re - q.norm_sqr()).abs() < 1e-14);
        assert!(m.det().im.abs() < 1e-15);
        assert!(quaternion_defect(&m) < 1e-15);
    }
}
