// SPDX-License-Identifier: Apache-2.0

//! Constrained Willmore tori through the trivial quaternionic bundle `ℍ²`.
//!
//! A vector `(v1, v2) ∈ ℍ²` is stored in ℂ⁴ by writing each quaternion as
//! the first column of [`quat_to_mat2`]. Complex scalars then act as right
//! multiplication by `i`, and 2×2 quaternionic matrices act from the left
//! through [`quat_block`], so they are exactly the complex matrices that
//! commute with the quaternionic structure `v ↦ v·j`.

mod cw;
mod gauss;
mod hopf;

pub use cw::{
    build_cw_family, case_classify, classify_holonomies, cw_flatness, cw_holonomy, default_mu_grid, gauge_transform,
    write_cw_spectra_csv, CaseReport, CaseSample, CwConfig, CwFamily, CwFlatness, CwHolonomy, GaugedCwFamily,
    MuConnection, WillmoreCase,
};
pub use gauss::{conformal_gauss_map, sphere_equation, SphereCongruence, SphereContract};
pub use hopf::{
    a0_form, hopf_fields, hopf_line_residuals, willmore_residual, HopfFields, HopfReport, LagrangeMultiplier,
    WillmoreResidual,
};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{quat_to_mat2, AlgebraError, ComplexMat4, Mat, Quaternion};
use crate::immersions::{ImmersionError, ImmersionGrid};
use crate::torus::{GridField, TorusError, TorusLattice};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WillmoreError {
    #[error("{check} residual {value:.3e} exceeds {threshold:.1e}")]
    Contract { check: &'static str, value: f64, threshold: f64 },
    #[error("spectral parameter μ = 0")]
    MuZero,
    #[error("gauge is singular at μ = {mu}")]
    SingularGauge { mu: Complex64 },
    #[error("4×4 holonomy not converged: halving-step defect {defect:.3e} above {threshold:.1e}")]
    StepTooCoarse { defect: f64, threshold: f64 },
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Immersion(#[from] ImmersionError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// The trivial bundle `T² × ℍ²` seen as a rank-4 complex bundle.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuaternionicBundle;

/// Structure identities measured on a real basis of ℂ⁴.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct StructureReport {
    pub i_square: f64,
    pub j_square: f64,
    pub anticommute: f64,
    /// `𝕛` against right multiplication by `j` in quaternion form.
    pub right_j: f64,
}

impl QuaternionicBundle {
    pub fn to_complex(v: [Quaternion; 2]) -> [Complex64; 4] {
        let a = quat_to_mat2(v[0]);
        let b = quat_to_mat2(v[1]);
        [a[(0, 0)], a[(1, 0)], b[(0, 0)], b[(1, 0)]]
    }

    pub fn from_complex(u: [Complex64; 4]) -> [Quaternion; 2] {
        let q = |z0: Complex64, z1: Complex64| Quaternion::new(z0.re, z0.im, -z1.re, z1.im);
        [q(u[0], u[1]), q(u[2], u[3])]
    }

    /// Multiplication by the complex unit, i.e. `v ↦ v·i`.
    pub fn complex_structure(u: [Complex64; 4]) -> [Complex64; 4] {
        u.map(|z| z * Complex64::new(0.0, 1.0))
    }

    /// `v ↦ v·j`, antilinear on ℂ⁴: `(u1, u2) ↦ (ū2, −ū1)` per quaternion.
    pub fn quaternionic_structure(u: [Complex64; 4]) -> [Complex64; 4] {
        [u[1].conj(), -u[0].conj(), u[3].conj(), -u[2].conj()]
    }

    pub fn structure_report() -> StructureReport {
        let i = Self::complex_structure;
        let j = Self::quaternionic_structure;
        let dist =
            |a: [Complex64; 4], b: [Complex64; 4]| a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        let neg = |a: [Complex64; 4]| a.map(|z| -z);
        let add = |a: [Complex64; 4], b: [Complex64; 4]| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]];
        let mut out = StructureReport { i_square: 0.0, j_square: 0.0, anticommute: 0.0, right_j: 0.0 };
        for k in 0..8 {
            let mut e = [Complex64::new(0.0, 0.0); 4];
            e[k / 2] = if k % 2 == 0 { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 1.0) };
            out.i_square = out.i_square.max(dist(i(i(e)), neg(e)));
            out.j_square = out.j_square.max(dist(j(j(e)), neg(e)));
            out.anticommute = out.anticommute.max(dist(add(i(j(e)), j(i(e))), [Complex64::new(0.0, 0.0); 4]));
            let q = Self::from_complex(e);
            let direct = Self::to_complex([q[0] * Quaternion::J, q[1] * Quaternion::J]);
            out.right_j = out.right_j.max(dist(direct, j(e)));
        }
        out
    }
}

/// `(v, w) = v̄₁ w₂ + v̄₂ w₁`.
pub fn indefinite_product(v: [Quaternion; 2], w: [Quaternion; 2]) -> Quaternion {
    v[0].conj() * w[1] + v[1].conj() * w[0]
}

/// Representative `(f − 1, f + 1)` of the line through `(f, 1)` after the
/// Möbius change of coordinates that turns the unit sphere into a null
/// quadric of [`indefinite_product`]: `(ψ̂, ψ̂) = 2(|f|² − 1)`.
pub fn sphere_representative(f: Quaternion) -> [Quaternion; 2] {
    [f - Quaternion::ONE, f + Quaternion::ONE]
}

/// The line subbundle `L = ψℍ` with unit-norm representatives of `ψ = (f, 1)`.
#[derive(Debug, Clone)]
pub struct LineBundle {
    pub first: GridField<Quaternion>,
    pub second: GridField<Quaternion>,
}

impl LineBundle {
    /// Lines through `(f, 1)` for any quaternion field, without an S³ check.
    pub fn from_field(f: &GridField<Quaternion>) -> Self {
        let scale = f.map(|q| 1.0 / (q.norm_sqr() + 1.0).sqrt());
        Self { first: f.zip(&scale, |q, s| *q * *s).expect("same grid"), second: scale.map(|s| Quaternion::ONE * *s) }
    }

    pub fn lattice(&self) -> &TorusLattice {
        self.first.lattice()
    }

    pub fn representative(&self, i: usize, j: usize) -> [Quaternion; 2] {
        [self.first.get(i, j), self.second.get(i, j)]
    }

    /// The affine coordinate `ψ₁ψ₂⁻¹`.
    pub fn affine_point(&self, i: usize, j: usize) -> Quaternion {
        self.first.get(i, j) * self.second.get(i, j).inverse()
    }

    /// Orthogonal projector of ℂ⁴ onto `L`, spanned by `ψ` and `ψ·j`.
    pub fn projector(&self, i: usize, j: usize) -> ComplexMat4 {
        let u = QuaternionicBundle::to_complex(self.representative(i, j));
        let w = QuaternionicBundle::quaternionic_structure(u);
        let n2: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        Mat::from_fn(|r, c| (u[r] * u[c].conj() + w[r] * w[c].conj()) / n2)
    }

    /// Smallest representative norm (1 up to rounding).
    pub fn min_norm(&self) -> f64 {
        self.first
            .values()
            .iter()
            .zip(self.second.values())
            .map(|(a, b)| (a.norm_sqr() + b.norm_sqr()).sqrt())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest distance of `ψ·j` from `L`.
    pub fn j_stability(&self) -> f64 {
        let (m1, m2) = self.first.dims();
        let mut worst: f64 = 0.0;
        for i in 0..m1 {
            for j in 0..m2 {
                let p = self.projector(i, j);
                let [a, b] = self.representative(i, j);
                let w = QuaternionicBundle::to_complex([a * Quaternion::J, b * Quaternion::J]);
                let pw = p.apply(&w);
                let d = w.iter().zip(&pw).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                worst = worst.max(d);
            }
        }
        worst
    }

    /// Largest `|(ψ̂, ψ̂)|` for the sphere representatives of the affine points.
    pub fn nullity_defect(&self) -> f64 {
        let (m1, m2) = self.first.dims();
        let mut worst: f64 = 0.0;
        for i in 0..m1 {
            for j in 0..m2 {
                let r = sphere_representative(self.affine_point(i, j));
                worst = worst.max(indefinite_product(r, r).norm());
            }
        }
        worst
    }
}

/// `L = f*T` for an immersion into S³.
pub fn line_bundle(f: &ImmersionGrid) -> LineBundle {
    LineBundle::from_field(f.field())
}

/// A constant symplectic change of basis of ℍ², for naturality checks.
pub fn symplectic_rotation(theta: f64, p: Quaternion, q: Quaternion) -> ComplexMat4 {
    let (c, s) = (theta.cos(), theta.sin());
    let p = p.normalized();
    let q = q.normalized();
    crate::algebra::quat_block([[p * c, p * s], [q * -s, q * c]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::clifford_torus;

    fn q(w: f64, x: f64, y: f64, z: f64) -> Quaternion {
        Quaternion::new(w, x, y, z)
    }

    #[test]
    fn bundle_structures() {
        let r = QuaternionicBundle::structure_report();
        assert!(r.i_square < 1e-15 && r.j_square < 1e-15);
        assert!(r.anticommute < 1e-15 && r.right_j < 1e-15);
        let v = [q(0.3, -1.0, 2.0, 0.5), q(-0.7, 0.1, 0.0, 1.5)];
        let back = QuaternionicBundle::from_complex(QuaternionicBundle::to_complex(v));
        assert!((back[0] - v[0]).norm() + (back[1] - v[1]).norm() < 1e-15);
    }

    #[test]
    fn block_matrices_act_on_columns() {
        let m = [[q(1.0, 2.0, 0.0, -1.0), q(0.5, 0.0, 1.0, 0.0)], [q(0.0, 0.0, 0.0, 1.0), q(2.0, -1.0, 0.3, 0.0)]];
        let v = [q(0.3, -1.0, 2.0, 0.5), q(-0.7, 0.1, 0.0, 1.5)];
        let direct = [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]];
        let via = crate::algebra::quat_block(m).apply(&QuaternionicBundle::to_complex(v));
        let expect = QuaternionicBundle::to_complex(direct);
        for k in 0..4 {
            assert!((via[k] - expect[k]).norm() < 1e-14);
        }
    }

    #[test]
    fn indefinite_product_cases() {
        let (one, zero) = (Quaternion::ONE, Quaternion::ZERO);
        assert_eq!(indefinite_product([one, zero], [one, zero]), zero);
        assert_eq!(indefinite_product([one, zero], [zero, one]), one);
        let f = q(0.0, 0.6, 0.0, 0.8);
        let psi = [f, one];
        let direct = indefinite_product(psi, psi);
        assert!((direct - one * (2.0 * f.real())).norm() < 1e-15);
        let g = q(0.5, 0.5, 0.5, 0.5);
        let r = sphere_representative(g);
        assert!(indefinite_product(r, r).norm() < 1e-15);
    }

    #[test]
    fn line_bundle_of_clifford_torus() {
        let f = clifford_torus(16).unwrap();
        let l = line_bundle(&f);
        assert!((l.min_norm() - 1.0).abs() < 1e-14);
        assert!(l.j_stability() < 1e-14);
        assert!(l.nullity_defect() < 1e-10);
        assert!((l.affine_point(3, 5) - f.field().get(3, 5)).norm() < 1e-14);
        let zero = LineBundle::from_field(&GridField::constant(*f.lattice(), Quaternion::ZERO));
        assert_eq!(zero.representative(0, 0), [Quaternion::ZERO, Quaternion::ONE]);
    }
}
