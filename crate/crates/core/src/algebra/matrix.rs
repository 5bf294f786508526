// SPDX-License-Identifier: Apache-2.0

//! Fixed-size complex matrices. Only sizes 2 and 4 are used by the crate.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::AlgebraError;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Square complex matrix with `N × N` entries stored row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat<const N: usize>(pub [[Complex64; N]; N]);

pub type ComplexMat2 = Mat<2>;
pub type ComplexMat4 = Mat<4>;

impl<const N: usize> Default for Mat<N> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<const N: usize> Mat<N> {
    pub fn zero() -> Self {
        Mat([[ZERO; N]; N])
    }

    pub fn identity() -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for j in 0..N {
                m.0[i][j] = f(i, j);
            }
        }
        m
    }

    pub fn diag(d: [Complex64; N]) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            m.0[i][i] = d[i];
        }
        m
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    pub fn scale_re(&self, s: f64) -> Self {
        Self::from_fn(|i, j| self.0[i][j] * s)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i])
    }

    pub fn trace(&self) -> Complex64 {
        (0..N).map(|i| self.0[i][i]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flat_map(|r| r.iter()).map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flat_map(|r| r.iter()).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Induced 1-norm (maximum column sum).
    pub fn norm_1(&self) -> f64 {
        (0..N).map(|j| (0..N).map(|i| self.0[i][j].norm()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flat_map(|r| r.iter()).all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        *self * *other - *other * *self
    }

    pub fn apply(&self, v: &[Complex64; N]) -> [Complex64; N] {
        let mut out = [ZERO; N];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..N).map(|j| self.0[i][j] * v[j]).sum();
        }
        out
    }

    /// Determinant by Gaussian elimination with partial pivoting.
    pub fn det(&self) -> Complex64 {
        if N == 2 {
            return self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0];
        }
        let mut a = self.0;
        let mut det = ONE;
        for col in 0..N {
            let piv = (col..N).max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm())).unwrap_or(col);
            if a[piv][col].norm() == 0.0 {
                return ZERO;
            }
            if piv != col {
                a.swap(piv, col);
                det = -det;
            }
            det *= a[col][col];
            for r in col + 1..N {
                let f = a[r][col] / a[col][col];
                for c in col..N {
                    let v = a[col][c];
                    a[r][c] -= f * v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self, AlgebraError> {
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return Err(AlgebraError::Singular);
        }
        let mut a = self.0;
        let mut inv = Self::identity().0;
        for col in 0..N {
            let piv = (col..N).max_by(|&p, &q| a[p][col].norm().total_cmp(&a[q][col].norm())).unwrap_or(col);
            if a[piv][col].norm() <= 1e-300_f64.max(scale * 1e-15) {
                return Err(AlgebraError::Singular);
            }
            a.swap(piv, col);
            inv.swap(piv, col);
            let d = a[col][col].inv();
            for c in 0..N {
                a[col][c] *= d;
                inv[col][c] *= d;
            }
            for r in 0..N {
                if r != col {
                    let f = a[r][col];
                    if f != ZERO {
                        for c in 0..N {
                            let (av, iv) = (a[col][c], inv[col][c]);
                            a[r][c] -= f * av;
                            inv[r][c] -= f * iv;
                        }
                    }
                }
            }
        }
        Ok(Mat(inv))
    }
}

impl Mat<2> {
    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat([[a, b], [c, d]])
    }

    /// Closed-form inverse; assumes the caller knows the matrix is regular.
    pub fn inverse2(&self) -> Self {
        let [[a, b], [c, d]] = self.0;
        let det = a * d - b * c;
        Mat([[d / det, -b / det], [-c / det, a / det]])
    }

    /// The trace-free anti-Hermitian part, i.e. the orthogonal projection onto su(2).
    pub fn su2_part(&self) -> Self {
        let ah = (*self - self.adjoint()).scale_re(0.5);
        let tr = ah.trace() * 0.5;
        ah - Self::identity().scale(tr)
    }
}

impl<const N: usize> Index<(usize, usize)> for Mat<N> {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl<const N: usize> IndexMut<(usize, usize)> for Mat<N> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl<const N: usize> Add for Mat<N> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] + o.0[i][j])
    }
}

impl<const N: usize> AddAssign for Mat<N> {
    fn add_assign(&mut self, o: Self) {
        for i in 0..N {
            for j in 0..N {
                self.0[i][j] += o.0[i][j];
            }
        }
    }
}

impl<const N: usize> Sub for Mat<N> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::from_fn(|i, j| self.0[i][j] - o.0[i][j])
    }
}

impl<const N: usize> Neg for Mat<N> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.0[i][j])
    }
}

impl<const N: usize> Mul for Mat<N> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        let mut m = Self::zero();
        for i in 0..N {
            for k in 0..N {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..N {
                    m.0[i][j] += a * o.0[k][j];
                }
            }
        }
        m
    }
}

impl<const N: usize> Mul<Complex64> for Mat<N> {
    type Output = Self;
    fn mul(self, s: Complex64) -> Self {
        self.scale(s)
    }
}

impl<const N: usize> Mul<f64> for Mat<N> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        self.scale_re(s)
    }
}

/// Row-major list of `[re, im]` pairs, the layout used in JSON output.
impl<const N: usize> Serialize for Mat<N> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let flat: Vec<[f64; 2]> = self.0.iter().flat_map(|r| r.iter().map(|z| [z.re, z.im])).collect();
        flat.serialize(s)
    }
}

impl<'de, const N: usize> Deserialize<'de> for Mat<N> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let flat: Vec<[f64; 2]> = Vec::deserialize(d)?;
        if flat.len() != N * N {
            return Err(serde::de::Error::invalid_length(flat.len(), &"N*N complex entries"));
        }
        Ok(Self::from_fn(|i, j| {
            let [re, im] = flat[i * N + j];
            Complex64::new(re, im)
        }))
    }
}

/// Matrix exponential by scaling and squaring with a truncated Taylor series.
///
/// The argument is scaled by `2^-s` until its 1-norm is at most 1/2, where an
/// 18-term series is accurate to below double precision, then squared back.
pub fn mat_exp<const N: usize>(m: &Mat<N>) -> Result<Mat<N>, AlgebraError> {
    if !m.is_finite() {
        return Err(AlgebraError::NonFinite);
    }
    let norm = m.norm_1();
    // exp overflows f64 long before the norm reaches this.
    if norm > 700.0 {
        return Err(AlgebraError::ExpOverflow { norm });
    }
    let mut squarings = 0u32;
    let mut scaled_norm = norm;
    while scaled_norm > 0.5 {
        scaled_norm *= 0.5;
        squarings += 1;
    }
    let a = m.scale_re(0.5f64.powi(squarings as i32));
    let mut term = Mat::<N>::identity();
    let mut sum = term;
    for k in 1..=18 {
        term = (term * a).scale_re(1.0 / k as f64);
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    if !sum.is_finite() {
        return Err(AlgebraError::ExpOverflow { norm });
    }
    Ok(sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exp_of_zero_is_identity() {
        let e = mat_exp(&Mat::<4>::zero()).unwrap();
        assert_eq!(e, Mat::<4>::identity());
    }

    #[test]
    fn exp_of_diagonal_rotation() {
        let m = Mat::<2>::diag([c(0.0, PI), c(0.0, -PI)]);
        let e = mat_exp(&m).unwrap();
        assert!((e - Mat::<2>::identity().scale_re(-1.0)).max_abs() < 1e-14);
    }

    #[test]
    fn exp_of_nilpotent_terminates() {
        let m = Mat::<2>::new(c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0));
        let e = mat_exp(&m).unwrap();
        let expect = Mat::<2>::new(c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!((e - expect).max_abs() < 1e-15);
    }

    #[test]
    fn exp_rejects_overflow() {
        let m = Mat::<2>::identity().scale_re(1e4);
        assert!(matches!(mat_exp(&m), Err(AlgebraError::ExpOverflow { .. })));
        let nan = Mat::<2>::identity().scale_re(f64::NAN);
        assert!(matches!(mat_exp(&nan), Err(AlgebraError::NonFinite)));
    }

    #[test]
    fn exp_large_norm_relative_accuracy() {
        // exp(diag(a, -a)) for |a| = 10.
        let a = c(6.0, 8.0);
        let e = mat_exp(&Mat::<2>::diag([a, -a])).unwrap();
        let rel = (e[(0, 0)] - a.exp()).norm() / a.exp().norm();
        assert!(rel < 1e-12, "rel {rel}");
    }

    #[test]
    fn inverse_and_det_4x4() {
        let m = Mat::<4>::from_fn(|i, j| {
            c((i * 3 + j) as f64 * 0.1 + if i == j { 2.0 } else { 0.0 }, (i as f64 - j as f64) * 0.2)
        });
        let inv = m.inverse().unwrap();
        assert!((m * inv - Mat::<4>::identity()).max_abs() < 1e-13);
        let d = m.det() * inv.det();
        assert!((d - c(1.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn singular_inverse_is_error() {
        let m = Mat::<2>::new(c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0), c(4.0, 0.0));
        assert!(m.inverse().is_err());
    }
}
