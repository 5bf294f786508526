// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ComplexMat4;

/// Monic quartic `c0 + c1 η + c2 η² + c3 η³ + η⁴`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharPoly4 {
    pub c: [Complex64; 5],
}

impl CharPoly4 {
    /// `det(η I − M)` by the Faddeev–LeVerrier recursion.
    pub fn of(m: &ComplexMat4) -> Self {
        let mut c = [Complex64::new(0.0, 0.0); 5];
        c[4] = Complex64::new(1.0, 0.0);
        let id = ComplexMat4::identity();
        let mut mk = ComplexMat4::zero();
        for k in 1..=4usize {
            mk = *m * mk + id.scale(c[5 - k]);
            c[4 - k] = -(*m * mk).trace() / k as f64;
        }
        Self { c }
    }

    /// Expands `Π (η − r_i)`.
    pub fn from_roots(roots: [Complex64; 4]) -> Self {
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k + 1] += ck;
                next[k] -= ck * r;
            }
            c = next;
        }
        Self { c: [c[0], c[1], c[2], c[3], c[4]] }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck)
    }
}

/// `|c0 − 1| + |c1 − c3|`; zero exactly when the roots are closed under
/// `η ↦ η⁻¹` with multiplicity.
pub fn palindromic_defect(p: &CharPoly4) -> f64 {
    (p.c[0] - 1.0).norm() + (p.c[1] - p.c[3]).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn identity_is_palindromic() {
        let p = CharPoly4::of(&ComplexMat4::identity());
        let expect = CharPoly4::from_roots([r(1.0); 4]);
        for k in 0..5 {
            assert!((p.c[k] - expect.c[k]).norm() < 1e-14);
        }
        assert!(palindromic_defect(&p) < 1e-14);
    }

    #[test]
    fn reciprocal_pairs() {
        let p = CharPoly4::from_roots([r(2.0), r(0.5), r(3.0), r(1.0 / 3.0)]);
        assert!(palindromic_defect(&p) < 1e-14);
        let q = CharPoly4::from_roots([r(2.0), r(2.0), r(3.0), r(1.0 / 3.0)]);
        assert!(palindromic_defect(&q) > 0.1);
    }

    #[test]
    fn faddeev_leverrier_matches_roots() {
        let d = [r(2.0), Complex64::new(0.0, 1.0), r(-0.5), Complex64::new(1.0, 1.0)];
        let p = CharPoly4::of(&ComplexMat4::diag(d));
        let q = CharPoly4::from_roots(d);
        for k in 0..5 {
            assert!((p.c[k] - q.c[k]).norm() < 1e-13);
        }
        for root in d {
            assert!(p.eval(root).norm() < 1e-13);
        }
    }
}
