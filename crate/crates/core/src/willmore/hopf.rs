// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::{LineBundle, QuaternionicBundle, SphereCongruence, WillmoreError};
use crate::algebra::{ComplexMat4, Mat};
use crate::immersions::FieldStats;
use crate::torus::{hodge_star, partial_derivatives, GridField, OneForm, Stencil, TorusLattice};

/// Pointwise identities of the Hopf fields, maxima over the grid.
#[derive(Debug, Clone, Serialize)]
pub struct HopfReport {
    /// `‖SA + AS‖`.
    pub anticommute_a: f64,
    pub anticommute_q: f64,
    /// `‖∗A − SA‖`.
    pub type_a: f64,
    /// `‖∗Q + SQ‖`.
    pub type_q: f64,
    /// `‖S dS − 2(A + Q)‖`.
    pub reassembly: f64,
    /// Site norms `(|Ax|² + |Ay|²)^½`.
    pub a_norm: FieldStats,
    pub q_norm: FieldStats,
}

#[derive(Debug, Clone)]
pub struct HopfFields {
    pub a: OneForm<ComplexMat4>,
    pub q: OneForm<ComplexMat4>,
    pub ds: OneForm<ComplexMat4>,
    pub report: HopfReport,
}

fn max_over(
    a: &OneForm<ComplexMat4>,
    b: &OneForm<ComplexMat4>,
    f: impl Fn(&ComplexMat4, &ComplexMat4, usize) -> f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..a.dx.values().len() {
        worst = worst.max(f(&a.dx.values()[k], &b.dx.values()[k], k)).max(f(&a.dy.values()[k], &b.dy.values()[k], k));
    }
    worst
}

fn site_norms(a: &OneForm<ComplexMat4>) -> FieldStats {
    let v: Vec<f64> =
        a.dx.values().iter().zip(a.dy.values()).map(|(x, y)| (x.norm().powi(2) + y.norm().powi(2)).sqrt()).collect();
    FieldStats::of(&v)
}

/// `‖(1 − P_L)A‖` and `‖Q P_L‖`: for the mean-curvature sphere `A` takes
/// values in `L` and `Q` vanishes on `L`.
pub fn hopf_line_residuals(h: &HopfFields, l: &LineBundle) -> (f64, f64) {
    let (m1, m2) = h.a.dx.dims();
    let id = Mat::<4>::identity();
    let mut image: f64 = 0.0;
    let mut kernel: f64 = 0.0;
    for i in 0..m1 {
        for j in 0..m2 {
            let p = l.projector(i, j);
            for (a, q) in [(h.a.dx.get(i, j), h.q.dx.get(i, j)), (h.a.dy.get(i, j), h.q.dy.get(i, j))] {
                image = image.max(((id - p) * a).max_abs());
                kernel = kernel.max((q * p).max_abs());
            }
        }
    }
    (image, kernel)
}

/// `A = ¼(S dS + ∗dS)` and `Q = ¼(S dS − ∗dS)`.
pub fn hopf_fields(s: &SphereCongruence, stencil: Stencil) -> Result<HopfFields, WillmoreError> {
    let (sx, sy) = partial_derivatives(&s.s, stencil)?;
    let ds = OneForm::new(sx, sy)?;
    let sds = OneForm::new(s.s.zip(&ds.dx, |a, b| *a * *b)?, s.s.zip(&ds.dy, |a, b| *a * *b)?)?;
    let star = hodge_star(&ds);
    let a = sds.add(&star)?.map(|m| *m * 0.25);
    let q = sds.sub(&star)?.map(|m| *m * 0.25);
    let sv = s.s.values();
    let anti = |x: &ComplexMat4, _: &ComplexMat4, k: usize| (sv[k] * *x + *x * sv[k]).max_abs();
    let star_a = hodge_star(&a);
    let star_q = hodge_star(&q);
    let report = HopfReport {
        anticommute_a: max_over(&a, &a, anti),
        anticommute_q: max_over(&q, &q, anti),
        type_a: max_over(&star_a, &a, |x, y, k| (*x - sv[k] * *y).max_abs()),
        type_q: max_over(&star_q, &q, |x, y, k| (*x + sv[k] * *y).max_abs()),
        reassembly: max_over(&sds, &a.add(&q)?, |x, y, _| (*x - *y * 2.0).max_abs()),
        a_norm: site_norms(&a),
        q_norm: site_norms(&q),
    };
    Ok(HopfFields { a, q, ds, report })
}

/// A Lagrange multiplier `ν` with values in `R = {B : Im B ⊂ L ⊂ Ker B}`.
#[derive(Debug, Clone)]
pub struct LagrangeMultiplier {
    pub nu: OneForm<ComplexMat4>,
}

impl LagrangeMultiplier {
    /// `ν = 0`, the unconstrained Willmore case.
    pub fn zero(lattice: TorusLattice) -> Self {
        Self { nu: OneForm::zero(lattice) }
    }

    /// Largest `‖ν P_L‖` (kernel condition) and `‖(1 − P_L) ν‖` (image
    /// condition) over the grid.
    pub fn constraint_residuals(&self, l: &LineBundle) -> (f64, f64) {
        let (m1, m2) = self.nu.dx.dims();
        let id = Mat::<4>::identity();
        let mut kernel: f64 = 0.0;
        let mut image: f64 = 0.0;
        for i in 0..m1 {
            for j in 0..m2 {
                let p = l.projector(i, j);
                for b in [self.nu.dx.get(i, j), self.nu.dy.get(i, j)] {
                    kernel = kernel.max((b * p).max_abs());
                    image = image.max(((id - p) * b).max_abs());
                }
            }
        }
        (kernel, image)
    }

    pub fn validate(&self, l: &LineBundle, tol: f64) -> Result<(), WillmoreError> {
        let (kernel, image) = self.constraint_residuals(l);
        if !(kernel <= tol) {
            return Err(WillmoreError::Contract { check: "multiplier kernel", value: kernel, threshold: tol });
        }
        if !(image <= tol) {
            return Err(WillmoreError::Contract { check: "multiplier image", value: image, threshold: tol });
        }
        Ok(())
    }

    /// `ν = B η` with a quaternionic-linear `B` at every site that maps
    /// onto `L` and kills `L`; `eta` gives the scalar 1-form coefficients.
    pub fn nilpotent(l: &LineBundle, eta: (f64, f64)) -> Self {
        let lat = *l.lattice();
        let zero = num_complex::Complex64::new(0.0, 0.0);
        let b = GridField::from_fn(lat, |i, j| {
            let u = QuaternionicBundle::to_complex(l.representative(i, j));
            let p = l.projector(i, j);
            let w = (Mat::<4>::identity() - p).apply(&[num_complex::Complex64::new(1.0, 0.0), zero, zero, zero]);
            let (ju, jw) =
                (QuaternionicBundle::quaternionic_structure(u), QuaternionicBundle::quaternionic_structure(w));
            Mat::from_fn(|r, c| u[r] * w[c].conj() + ju[r] * jw[c].conj())
        });
        Self { nu: OneForm { dx: b.map(|m| *m * eta.0), dy: b.map(|m| *m * eta.1) } }
    }
}

/// `A₀ = A − ½∗ν`.
pub fn a0_form(hopf: &HopfFields, nu: &LagrangeMultiplier) -> Result<OneForm<ComplexMat4>, WillmoreError> {
    Ok(hopf.a.sub(&hodge_star(&nu.nu).map(|m| *m * 0.5))?)
}

/// Euler–Lagrange residual `d(2∗A + ν)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct WillmoreResidual {
    /// Cell circulation over area.
    pub plaquette: f64,
    /// Pointwise finite-difference exterior derivative.
    pub continuum: f64,
    pub residual: f64,
}

pub fn willmore_residual(
    hopf: &HopfFields,
    nu: &LagrangeMultiplier,
    stencil: Stencil,
) -> Result<WillmoreResidual, WillmoreError> {
    let form = hodge_star(&hopf.a).map(|m| *m * 2.0).add(&nu.nu)?;
    let plaquette = form.circulation_density()?.max_norm();
    let continuum = form.exterior_derivative(stencil)?.max_norm();
    Ok(WillmoreResidual { plaquette, continuum, residual: plaquette.max(continuum) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Quaternion;
    use crate::immersions::{clifford_torus, geometry, perturb};
    use crate::tolerances::Tolerances;
    use crate::willmore::{conformal_gauss_map, line_bundle, symplectic_rotation};

    fn clifford(n: usize) -> (crate::immersions::ImmersionGrid, SphereCongruence) {
        let f = clifford_torus(n).unwrap();
        let geo = geometry(&f, Stencil::Central6, 1e-10).unwrap();
        let s = conformal_gauss_map(&f, &geo, &Tolerances::default()).unwrap();
        (f, s)
    }

    #[test]
    fn constant_sphere_has_no_hopf_fields() {
        let l = crate::torus::TorusLattice::unit_square(16).unwrap();
        let zero = Quaternion::ZERO;
        let i = Quaternion::I;
        let s = SphereCongruence::from_blocks(l, vec![[[i, zero], [zero, i * -1.0]]; 256]).unwrap();
        assert!(s.contract.square < 1e-15);
        let h = hopf_fields(&s, Stencil::Central6).unwrap();
        assert!(h.a.max_norm() < 1e-12 && h.q.max_norm() < 1e-12);
    }

    #[test]
    fn clifford_hopf_fields() {
        let (_, s) = clifford(64);
        let h = hopf_fields(&s, Stencil::Spectral).unwrap();
        let r = &h.report;
        assert!(r.anticommute_a < 1e-8 && r.anticommute_q < 1e-8, "{r:?}");
        assert!(r.type_a < 1e-8 && r.type_q < 1e-8, "{r:?}");
        assert!(r.reassembly < 1e-12);
        assert!(r.a_norm.spread < 1e-6 && r.q_norm.spread < 1e-6, "{r:?}");
        let (image, kernel) = hopf_line_residuals(&h, &line_bundle(&clifford_torus(64).unwrap()));
        assert!(image < 1e-10 && kernel < 1e-10, "{image} {kernel}");
        let w = willmore_residual(&h, &LagrangeMultiplier::zero(*s.lattice()), Stencil::Spectral).unwrap();
        assert!(w.residual < 1e-5, "{w:?}");
    }

    #[test]
    fn perturbed_torus_is_not_willmore() {
        let f = clifford_torus(64).unwrap();
        let g = perturb(&f, 0.05, (1, 2), Stencil::Central6, 1e-10).unwrap();
        let geo = geometry(&g, Stencil::Central6, 1e-10).unwrap();
        let s = conformal_gauss_map(&g, &geo, &Tolerances::default()).unwrap();
        let h = hopf_fields(&s, Stencil::Spectral).unwrap();
        let w = willmore_residual(&h, &LagrangeMultiplier::zero(*s.lattice()), Stencil::Spectral).unwrap();
        assert!(w.residual > 1e-2, "{w:?}");
    }

    #[test]
    fn residual_is_basis_independent() {
        let (_, s) = clifford(32);
        let u = symplectic_rotation(0.4, Quaternion::new(1.0, 2.0, 0.0, -1.0), Quaternion::new(0.0, 1.0, 1.0, 1.0));
        let t = s.conjugated(&u).unwrap();
        let zero = LagrangeMultiplier::zero(*s.lattice());
        let a = willmore_residual(&hopf_fields(&s, Stencil::Central6).unwrap(), &zero, Stencil::Central6).unwrap();
        let b = willmore_residual(&hopf_fields(&t, Stencil::Central6).unwrap(), &zero, Stencil::Central6).unwrap();
        assert!((a.residual - b.residual).abs() < 1e-10, "{a:?} {b:?}");
    }

    #[test]
    fn nilpotent_multiplier_lies_in_r() {
        let f = clifford_torus(16).unwrap();
        let l = line_bundle(&f);
        let nu = LagrangeMultiplier::nilpotent(&l, (0.3, -0.2));
        let (k, i) = nu.constraint_residuals(&l);
        assert!(k < 1e-8 && i < 1e-8, "{k} {i}");
        assert!(nu.nu.max_norm() > 0.1);
    }
}
