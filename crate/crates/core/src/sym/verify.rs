// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::{SpaceForm, SurfaceMesh, SymDiagnostics, SymError};
use crate::algebra::Quaternion;
use crate::immersions::FieldStats;
use crate::torus::{mesh_partials, GridField};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReconstructionReport {
    pub target: SpaceForm,
    pub predicted: Option<f64>,
    pub measured: FieldStats,
    /// `max | |H| − |H_pred| |` over vertices.
    pub abs_deviation: Option<f64>,
    /// `max |H − mean H|`.
    pub constancy: f64,
    /// `max (|E − G| + 2|F|)/(E + G)`.
    pub conformality_defect: f64,
    /// Closing defect along each generator.
    pub periodicity: [f64; 2],
    pub diagnostics: SymDiagnostics,
}

fn v4(q: Quaternion) -> [f64; 4] {
    q.to_array()
}

/// `c` with `⟨c, v⟩ = det(v, a, b, d)`.
fn cross4(a: [f64; 4], b: [f64; 4], d: [f64; 4]) -> [f64; 4] {
    let m = |i: usize| -> f64 {
        let cols: Vec<usize> = (0..4).filter(|&k| k != i).collect();
        let (x, y, z) = (cols[0], cols[1], cols[2]);
        a[x] * (b[y] * d[z] - b[z] * d[y]) - a[y] * (b[x] * d[z] - b[z] * d[x]) + a[z] * (b[x] * d[y] - b[y] * d[x])
    };
    [m(0), -m(1), m(2), -m(3)]
}

fn cross3(a: [f64; 4], b: [f64; 4]) -> [f64; 4] {
    [0.0, a[2] * b[3] - a[3] * b[2], a[3] * b[1] - a[1] * b[3], a[1] * b[2] - a[2] * b[1]]
}

/// Ambient inner product: Euclidean, or Minkowski `diag(−1, 1, 1, 1)` for H³.
fn inner(target: SpaceForm, a: [f64; 4], b: [f64; 4]) -> f64 {
    let s = if target == SpaceForm::H3 { -1.0 } else { 1.0 };
    s * a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

fn minkowski_flip(a: [f64; 4]) -> [f64; 4] {
    [-a[0], a[1], a[2], a[3]]
}

/// Closing defect of the mesh along each generator.
pub fn periodicity_check(mesh: &SurfaceMesh) -> [f64; 2] {
    let v = &mesh.vertices;
    if v.is_periodic() {
        return [0.0, 0.0];
    }
    let (m1, m2) = v.dims();
    let d1 = (0..m2).map(|j| (v.get(0, j) - v.get(m1 - 1, j)).norm()).fold(0.0, f64::max);
    let d2 = (0..m1).map(|i| (v.get(i, 0) - v.get(i, m2 - 1)).norm()).fold(0.0, f64::max);
    [d1, d2]
}

/// Mean curvature of the mesh from finite-difference fundamental forms in its
/// space form. Stores the per-vertex values in the mesh.
pub fn verify_cmc(
    mesh: &mut SurfaceMesh,
    predicted: Option<f64>,
    degenerate_tol: f64,
) -> Result<ReconstructionReport, SymError> {
    let p = &mesh.vertices;
    let (px, py) = mesh_partials(p)?;
    let (pxx, pxy) = mesh_partials(&px)?;
    let (_, pyy) = mesh_partials(&py)?;
    let target = mesh.target;
    let (_, m2) = p.dims();
    let mut h = Vec::with_capacity(p.values().len());
    let mut conf: f64 = 0.0;
    for k in 0..p.values().len() {
        let (a, ax, ay) = (v4(p.values()[k]), v4(px.values()[k]), v4(py.values()[k]));
        let e = inner(target, ax, ax);
        let f = inner(target, ax, ay);
        let g = inner(target, ay, ay);
        let det = e * g - f * f;
        if !(det > (degenerate_tol * (e + g)).powi(2)) {
            return Err(SymError::Degenerate { i: k / m2, j: k % m2, area: det.max(0.0).sqrt() });
        }
        let n = match target {
            SpaceForm::R3 => cross3(ax, ay),
            SpaceForm::S3 => cross4(a, ax, ay),
            SpaceForm::H3 => cross4(minkowski_flip(a), minkowski_flip(ax), minkowski_flip(ay)),
        };
        let nn = inner(target, n, n).abs().sqrt();
        let n = n.map(|c| c / nn);
        let b11 = inner(target, v4(pxx.values()[k]), n);
        let b12 = inner(target, v4(pxy.values()[k]), n);
        let b22 = inner(target, v4(pyy.values()[k]), n);
        h.push((g * b11 - 2.0 * f * b12 + e * b22) / (2.0 * det));
        conf = conf.max(((e - g).abs() + 2.0 * f.abs()) / (e + g));
    }
    let measured = FieldStats::of(&h);
    let abs_deviation = predicted.map(|ph| h.iter().map(|v| (v.abs() - ph.abs()).abs()).fold(0.0, f64::max));
    let constancy = h.iter().map(|v| (v - measured.mean).abs()).fold(0.0, f64::max);
    mesh.mean_curvature = Some(GridField::from_values(*p.lattice(), p.is_periodic(), h)?);
    Ok(ReconstructionReport {
        target,
        predicted,
        measured,
        abs_deviation,
        constancy,
        conformality_defect: conf,
        periodicity: periodicity_check(mesh),
        diagnostics: mesh.diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{clifford_torus, homogeneous_torus};
    use crate::torus::TorusLattice;
    use num_complex::Complex64;
    use std::f64::consts::PI;

    fn mesh_from(target: SpaceForm, vertices: GridField<Quaternion>) -> SurfaceMesh {
        SurfaceMesh { target, vertices, mean_curvature: None, diagnostics: SymDiagnostics::default() }
    }

    #[test]
    fn cross4_is_orthogonal() {
        let a = [0.3, -1.0, 2.0, 0.5];
        let b = [1.0, 0.2, -0.7, 0.1];
        let d = [-0.4, 0.9, 0.3, 1.5];
        let c = cross4(a, b, d);
        for v in [a, b, d] {
            assert!(inner(SpaceForm::S3, c, v).abs() < 1e-14);
        }
    }

    #[test]
    fn cylinder_of_radius_half() {
        let l = TorusLattice::new(Complex64::new(PI, 0.0), Complex64::new(0.0, 2.0), 64, 64).unwrap();
        let v = GridField::from_fn_closed(l, |i, j| {
            let z = l.site(i as isize, j as isize);
            let t = 2.0 * z.re;
            Quaternion::new(0.0, 0.5 * t.cos(), 0.5 * t.sin(), z.im)
        });
        let mut mesh = mesh_from(SpaceForm::R3, v);
        let r = verify_cmc(&mut mesh, Some(1.0), 1e-10).unwrap();
        assert!(r.abs_deviation.unwrap() < 1e-5, "{r:?}");
        assert!(r.periodicity[0] < 1e-12 && r.periodicity[1] > 1.0);
    }

    #[test]
    fn product_tori_in_s3() {
        let f = clifford_torus(64).unwrap();
        let mut mesh = mesh_from(SpaceForm::S3, f.field().clone());
        let r = verify_cmc(&mut mesh, Some(0.0), 1e-10).unwrap();
        assert!(r.measured.max_abs < 1e-6, "{r:?}");
        let f = homogeneous_torus(0.6, 64, 64).unwrap();
        let mut mesh = mesh_from(SpaceForm::S3, f.field().clone());
        let r = verify_cmc(&mut mesh, Some(7.0 / 24.0), 1e-10).unwrap();
        assert!(r.abs_deviation.unwrap() < 1e-4, "{r:?}");
    }
}
