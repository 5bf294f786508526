// SPDX-License-Identifier: Apache-2.0

//! Immersed tori in S³ ⊂ ℍ: fixtures, first and second fundamental forms,
//! and the Maurer–Cartan form.

use std::f64::consts::PI;
use std::io::BufRead;

use serde::Serialize;
use thiserror::Error;

use crate::algebra::{quat_to_mat2, ComplexMat2, Quaternion};
use crate::torus::{self, partial_derivatives, GridField, OneForm, Stencil, TorusError, TorusLattice};
use crate::transport::curvature_residual;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImmersionError {
    #[error("radius {0} outside (0, 1)")]
    Radius(f64),
    #[error("sample ({i}, {j}) is off the unit sphere by {deviation:.3e}")]
    NotUnit { i: usize, j: usize, deviation: f64 },
    #[error("degenerate metric at site ({i}, {j}): area element {area:.3e}")]
    Degenerate { i: usize, j: usize, area: f64 },
    #[error("immersion samples must be periodic")]
    NotPeriodic,
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// A periodic grid of unit quaternions `f: T² → S³`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionGrid {
    field: GridField<Quaternion>,
}

impl ImmersionGrid {
    /// Validates unit norm at every site.
    pub fn new(field: GridField<Quaternion>, unit_tol: f64) -> Result<Self, ImmersionError> {
        if !field.is_periodic() {
            return Err(ImmersionError::NotPeriodic);
        }
        let (_, m2) = field.dims();
        for (k, q) in field.values().iter().enumerate() {
            let deviation = (q.norm() - 1.0).abs();
            if !(deviation <= unit_tol) {
                return Err(ImmersionError::NotUnit { i: k / m2, j: k % m2, deviation });
            }
        }
        Ok(Self { field })
    }

    /// Wraps samples without validation (formal or degenerate test inputs).
    pub fn unchecked(field: GridField<Quaternion>) -> Self {
        Self { field }
    }

    pub fn field(&self) -> &GridField<Quaternion> {
        &self.field
    }

    pub fn lattice(&self) -> &TorusLattice {
        self.field.lattice()
    }

    /// Reads the grid CSV layout (`i, j, s, t, w, x, y, z`).
    pub fn read_csv(r: impl BufRead, unit_tol: f64) -> Result<Self, ImmersionError> {
        let field = torus::io::read_csv::<Quaternion>(r)?;
        Self::new(field, unit_tol)
    }
}

/// The product torus `S¹(r) × S¹(s) ⊂ S³`, `s = √(1 − r²)`.
///
/// `f(x, y) = (r cos(x/r), r sin(x/r), s cos(y/s), s sin(y/s))` on the
/// conformal lattice `(2πr, 2πs i)`.
pub fn homogeneous_torus(r: f64, n1: usize, n2: usize) -> Result<ImmersionGrid, ImmersionError> {
    if !(r > 0.0 && r < 1.0) {
        return Err(ImmersionError::Radius(r));
    }
    let s = (1.0 - r * r).sqrt();
    let lattice = TorusLattice::rectangular(r, s, n1, n2)?;
    let field = GridField::from_fn(lattice, |i, j| {
        let a = 2.0 * PI * i as f64 / n1 as f64;
        let b = 2.0 * PI * j as f64 / n2 as f64;
        Quaternion::new(r * a.cos(), r * a.sin(), s * b.cos(), s * b.sin())
    });
    Ok(ImmersionGrid { field })
}

/// The Clifford torus `r = 1/√2`.
pub fn clifford_torus(n: usize) -> Result<ImmersionGrid, ImmersionError> {
    homogeneous_torus(std::f64::consts::FRAC_1_SQRT_2, n, n)
}

/// Mean curvature `(s/r − r/s)/2` of the product torus for the orientation
/// used by [`geometry`].
pub fn homogeneous_mean_curvature(r: f64) -> f64 {
    let s = (1.0 - r * r).sqrt();
    0.5 * (s / r - r / s)
}

/// First and second order geometry of an immersion.
#[derive(Debug, Clone)]
pub struct GeometryReport {
    /// `⟨f_z, f_z̄⟩ = (|f_x|² + |f_y|²)/4`.
    pub conformal_factor: GridField<f64>,
    /// `(max |⟨f_x, f_y⟩| + max ||f_x| − |f_y||) / mean |f_x|`.
    pub conformality_defect: f64,
    pub mean_curvature: GridField<f64>,
    /// Unit normal in `T S³`.
    pub normal: GridField<Quaternion>,
    /// Largest `|⟨N, v⟩|` over `v ∈ {f, f_x/|f_x|, f_y/|f_y|}`.
    pub normal_defect: f64,
    pub fx: GridField<Quaternion>,
    pub fy: GridField<Quaternion>,
}

/// Summary statistics of a scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldStats {
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// Largest deviation from the mean.
    pub spread: f64,
    pub max_abs: f64,
}

impl FieldStats {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len().max(1) as f64;
        let mean = values.iter().sum::<f64>() / n;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = values.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
        let max_abs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        Self { mean, min, max, spread, max_abs }
    }
}

impl GeometryReport {
    pub fn mean_curvature_stats(&self) -> FieldStats {
        FieldStats::of(self.mean_curvature.values())
    }
}

/// Fundamental forms of `f` in S³.
///
/// The normal is `N = f · (u × v)/|u × v|` with `u = f⁻¹f_y`, `v = f⁻¹f_x`
/// (left-translated tangent vectors in Im ℍ). With this orientation the
/// product torus with `r < 1/√2` has `H > 0`.
pub fn geometry(f: &ImmersionGrid, stencil: Stencil, degenerate_tol: f64) -> Result<GeometryReport, ImmersionError> {
    let field = f.field();
    let (fx, fy) = partial_derivatives(field, stencil)?;
    let (fxx, fxy) = partial_derivatives(&fx, stencil)?;
    let (_, fyy) = partial_derivatives(&fy, stencil)?;
    let (_, m2) = field.dims();
    let n = field.values().len();
    let mut normal = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    let mut e_field = Vec::with_capacity(n);
    let mut cross_max: f64 = 0.0;
    let mut len_max: f64 = 0.0;
    let mut len_sum = 0.0;
    let mut normal_defect: f64 = 0.0;
    for k in 0..n {
        let p = field.values()[k];
        let (px, py) = (fx.values()[k], fy.values()[k]);
        let e = px.dot(px);
        let ff = px.dot(py);
        let g = py.dot(py);
        let area = (e * g - ff * ff).max(0.0).sqrt();
        if !(area > degenerate_tol) {
            return Err(ImmersionError::Degenerate { i: k / m2, j: k % m2, area });
        }
        let pinv = p.inverse();
        let u = pinv * py;
        let v = pinv * px;
        let cr = u.cross_imag(v);
        let nn = p * cr.normalized();
        let b11 = fxx.values()[k].dot(nn);
        let b12 = fxy.values()[k].dot(nn);
        let b22 = fyy.values()[k].dot(nn);
        h.push((g * b11 - 2.0 * ff * b12 + e * b22) / (2.0 * (e * g - ff * ff)));
        e_field.push(0.25 * (e + g));
        cross_max = cross_max.max(ff.abs());
        len_max = len_max.max((e.sqrt() - g.sqrt()).abs());
        len_sum += e.sqrt();
        normal_defect =
            normal_defect.max(nn.dot(p).abs()).max(nn.dot(px).abs() / e.sqrt()).max(nn.dot(py).abs() / g.sqrt());
        normal.push(nn);
    }
    let l = *field.lattice();
    Ok(GeometryReport {
        conformal_factor: GridField::from_values(l, true, e_field)?,
        conformality_defect: (cross_max + len_max) / (len_sum / n as f64),
        mean_curvature: GridField::from_values(l, true, h)?,
        normal: GridField::from_values(l, true, normal)?,
        normal_defect,
        fx,
        fy,
    })
}

/// Adds `amplitude · sin(2π(m s + k t)) · N` and projects back to S³.
pub fn perturb(
    f: &ImmersionGrid,
    amplitude: f64,
    mode: (i32, i32),
    stencil: Stencil,
    degenerate_tol: f64,
) -> Result<ImmersionGrid, ImmersionError> {
    if amplitude == 0.0 {
        return Ok(f.clone());
    }
    let geo = geometry(f, stencil, degenerate_tol)?;
    let l = *f.lattice();
    let field = GridField::from_fn(l, |i, j| {
        let s = i as f64 / l.n1 as f64;
        let t = j as f64 / l.n2 as f64;
        let bump = amplitude * (2.0 * PI * (mode.0 as f64 * s + mode.1 as f64 * t)).sin();
        (f.field().get(i, j) + geo.normal.get(i, j) * bump).normalized()
    });
    let out = ImmersionGrid { field };
    // The perturbed grid must still be an immersion.
    geometry(&out, stencil, degenerate_tol)?;
    Ok(out)
}

/// `α = F⁻¹ dF` with `F = quat_to_mat2(f)`; su(2)-valued for unit `f`.
pub fn maurer_cartan(f: &ImmersionGrid, stencil: Stencil) -> Result<OneForm<ComplexMat2>, ImmersionError> {
    let mats = f.field().map(|q| quat_to_mat2(*q));
    let (mx, my) = partial_derivatives(&mats, stencil)?;
    let inv = f.field().map(|q| quat_to_mat2(q.inverse()));
    let ax = inv.zip(&mx, |a, b| *a * *b)?;
    let ay = inv.zip(&my, |a, b| *a * *b)?;
    Ok(OneForm::new(ax, ay)?)
}

/// Largest entry of `dα + α∧α`.
pub fn maurer_cartan_residual(alpha: &OneForm<ComplexMat2>, stencil: Stencil) -> Result<f64, ImmersionError> {
    Ok(curvature_residual(alpha, stencil)?)
}

/// Largest deviation of a matrix form from su(2) (trace-free anti-Hermitian).
pub fn su2_defect(alpha: &OneForm<ComplexMat2>) -> f64 {
    let defect = |m: &ComplexMat2| (*m - m.su2_part()).max_abs();
    alpha.dx.values().iter().chain(alpha.dy.values()).map(defect).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn clifford_geometry() {
        let f = clifford_torus(64).unwrap();
        let g = geometry(&f, Stencil::Central6, 1e-10).unwrap();
        assert!(g.conformality_defect < 1e-10);
        assert!(g.mean_curvature_stats().max_abs < 1e-6);
        let e = FieldStats::of(g.conformal_factor.values());
        assert!((e.mean - 0.5).abs() < 1e-7 && e.spread < 1e-7);
        assert!(g.normal_defect < 1e-10);
    }

    #[test]
    fn homogeneous_mean_curvature_values() {
        for r in [0.5, 0.6, FRAC_1_SQRT_2, 0.8] {
            let f = homogeneous_torus(r, 64, 64).unwrap();
            let g = geometry(&f, Stencil::Central6, 1e-10).unwrap();
            let st = g.mean_curvature_stats();
            assert!((st.mean - homogeneous_mean_curvature(r)).abs() < 1e-5, "r {r}: {st:?}");
            assert!(st.spread < 1e-5);
        }
        assert!((homogeneous_mean_curvature(0.6) - 7.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn constant_map_is_degenerate() {
        let l = TorusLattice::unit_square(16).unwrap();
        let f = ImmersionGrid::new(GridField::constant(l, Quaternion::ONE), 1e-12).unwrap();
        assert!(matches!(geometry(&f, Stencil::Central6, 1e-10), Err(ImmersionError::Degenerate { .. })));
        let alpha = maurer_cartan(&f, Stencil::Central6).unwrap();
        assert!(alpha.max_norm() < 1e-13);
    }

    #[test]
    fn radius_and_norm_validation() {
        assert!(matches!(homogeneous_torus(1.0, 16, 16), Err(ImmersionError::Radius(_))));
        let l = TorusLattice::unit_square(16).unwrap();
        let bad = GridField::constant(l, Quaternion::new(1.0, 1e-3, 0.0, 0.0));
        assert!(matches!(ImmersionGrid::new(bad, 1e-12), Err(ImmersionError::NotUnit { .. })));
    }

    #[test]
    fn maurer_cartan_structure() {
        let f = clifford_torus(64).unwrap();
        let a = maurer_cartan(&f, Stencil::Central6).unwrap();
        assert!(su2_defect(&a) < 1e-10);
        assert!(maurer_cartan_residual(&a, Stencil::Central6).unwrap() < 1e-5);
        let norms: Vec<f64> = a.dx.values().iter().map(|m| m.norm()).collect();
        assert!(FieldStats::of(&norms).spread < 1e-8);
    }

    #[test]
    fn perturbation_breaks_cmc() {
        let f = clifford_torus(64).unwrap();
        let same = perturb(&f, 0.0, (1, 2), Stencil::Central6, 1e-10).unwrap();
        assert_eq!(same, f);
        let p = perturb(&f, 0.05, (1, 2), Stencil::Central6, 1e-10).unwrap();
        assert!(p.field().values().iter().all(|q| (q.norm() - 1.0).abs() < 1e-14));
        let g = geometry(&p, Stencil::Central6, 1e-10).unwrap();
        assert!(g.mean_curvature_stats().max_abs > 1e-2);
    }
}
