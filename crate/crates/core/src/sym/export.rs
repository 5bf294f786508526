// SPDX-License-Identifier: Apache-2.0

use std::io::Write;

use super::{SpaceForm, SurfaceMesh, SymError};
use crate::algebra::Quaternion;
use crate::torus::io::write_csv;

/// Stereographic projection of S³ to ℝ³ from the unit quaternion `pole`.
pub fn stereographic(p: Quaternion, pole: Quaternion) -> [f64; 3] {
    // Rotate the pole to −1, then project from −1.
    let y = -(pole.conj() * p);
    let s = 1.0 + y.w;
    let [a, b, c] = y.imag();
    let s = if s.abs() < 1e-300 { 1e-300 } else { s };
    [a / s, b / s, c / s]
}

/// Hyperboloid point `(x0, x1, x2, x3)` to the Poincaré ball.
pub fn poincare_ball(p: Quaternion) -> [f64; 3] {
    let s = 1.0 + p.w;
    [p.x / s, p.y / s, p.z / s]
}

fn to_r3(mesh: &SurfaceMesh, pole: Quaternion) -> Vec<[f64; 3]> {
    mesh.vertices
        .values()
        .iter()
        .map(|&v| match mesh.target {
            SpaceForm::R3 => v.imag(),
            SpaceForm::S3 => stereographic(v, pole),
            SpaceForm::H3 => poincare_ball(v),
        })
        .collect()
}

/// Wavefront OBJ with one vertex per grid site and one quad per grid cell.
pub fn write_obj(mesh: &SurfaceMesh, pole: Quaternion, mut w: impl Write) -> Result<(), SymError> {
    let io = |e: std::io::Error| SymError::Torus(e.into());
    writeln!(w, "# cmc-mesh v1 target={:?}", mesh.target).map_err(io)?;
    for p in to_r3(mesh, pole) {
        writeln!(w, "v {:.12e} {:.12e} {:.12e}", p[0], p[1], p[2]).map_err(io)?;
    }
    for f in mesh.faces() {
        writeln!(w, "f {} {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1, f[3] + 1).map_err(io)?;
    }
    Ok(())
}

/// Raw 4-vector vertices in the grid CSV layout.
pub fn write_vertices_csv(mesh: &SurfaceMesh, w: impl Write) -> Result<(), SymError> {
    Ok(write_csv(&mesh.vertices, w)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections() {
        let p = stereographic(Quaternion::ONE, -Quaternion::ONE);
        assert!(p.iter().all(|c| c.abs() < 1e-15));
        let e = stereographic(Quaternion::I, -Quaternion::ONE);
        assert!((e[0] - 1.0).abs() < 1e-15);
        let b = poincare_ball(Quaternion::new(2f64.sqrt(), 1.0, 0.0, 0.0));
        assert!((b[0] - 1.0 / (1.0 + 2f64.sqrt())).abs() < 1e-15);
    }
}
