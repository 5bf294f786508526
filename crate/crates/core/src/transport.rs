// SPDX-License-Identifier: Apache-2.0

//! Parallel transport of matrix connections on the grid.
//!
//! A section is parallel when `dψ = −Ω ψ`. Frames solve `dX = −Ω X` and
//! multiply on the left, so transport along a path followed by another path
//! is the product in reverse order. All segment integrals use classical RK4
//! with the connection coefficient interpolated by quintic Lagrange
//! polynomials through the six nearest nodes on the grid line.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::algebra::Mat;
use crate::torus::{interpolate, lagrange6, plaquettes, GridField, OneForm, Stencil, TorusError};

/// Default RK4 substeps per grid cell.
pub const DEFAULT_SUBSTEPS: usize = 16;

/// Integrates `X' = −C(t) X` on `[0, 1]` from `X(0) = I` with `steps` RK4 steps.
pub fn integrate<const N: usize>(c: impl Fn(f64) -> Mat<N>, steps: usize) -> Mat<N> {
    let mut x = Mat::<N>::identity();
    let h = 1.0 / steps as f64;
    for k in 0..steps {
        let t = k as f64 * h;
        let c0 = c(t);
        let cm = c(t + 0.5 * h);
        let c1 = c(t + h);
        let k1 = -(c0 * x);
        let k2 = -(cm * (x + k1.scale_re(0.5 * h)));
        let k3 = -(cm * (x + k2.scale_re(0.5 * h)));
        let k4 = -(c1 * (x + k3.scale_re(h)));
        x += (k1 + k2.scale_re(2.0) + k3.scale_re(2.0) + k4).scale_re(h / 6.0);
    }
    x
}

/// Transport across one grid edge given the coefficient at the nodes
/// `−2, …, 3` relative to the edge start. Coefficients are the connection
/// applied to the edge displacement.
pub fn edge_transport<const N: usize>(nodes: [Mat<N>; 6], substeps: usize) -> Mat<N> {
    integrate(
        |t| {
            let w = lagrange6(t);
            (0..6).fold(Mat::<N>::zero(), |acc, k| acc + nodes[k].scale_re(w[k]))
        },
        substeps,
    )
}

/// Edge transports along a periodic line of nodes: entry `k` carries the
/// frame from node `k` to node `k + 1` (indices mod the line length).
pub fn line_transports<const N: usize>(nodes: &[Mat<N>], substeps: usize) -> Vec<Mat<N>> {
    let n = nodes.len() as isize;
    let at = |k: isize| nodes[k.rem_euclid(n) as usize];
    (0..n).map(|k| edge_transport([at(k - 2), at(k - 1), at(k), at(k + 1), at(k + 2), at(k + 3)], substeps)).collect()
}

/// Holonomy around a closed line of nodes starting at node 0.
pub fn line_holonomy<const N: usize>(nodes: &[Mat<N>], substeps: usize) -> Mat<N> {
    line_transports(nodes, substeps).into_iter().fold(Mat::<N>::identity(), |acc, p| p * acc)
}

/// Connection coefficients applied to the grid steps `γ1/n1` and `γ2/n2`.
pub fn step_coefficients<const N: usize>(form: &OneForm<Mat<N>>) -> (GridField<Mat<N>>, GridField<Mat<N>>) {
    let l = *form.lattice();
    (form.along(l.gamma1 / l.n1 as f64), form.along(l.gamma2 / l.n2 as f64))
}

fn row_nodes<const N: usize>(f: &GridField<Mat<N>>, j: isize) -> Vec<Mat<N>> {
    (0..f.lattice().n1 as isize).map(|i| f.get_wrapped(i, j)).collect()
}

fn col_nodes<const N: usize>(f: &GridField<Mat<N>>, i: isize) -> Vec<Mat<N>> {
    (0..f.lattice().n2 as isize).map(|j| f.get_wrapped(i, j)).collect()
}

/// Holonomy along generator 1 or 2 from grid site `base`.
pub fn holonomy<const N: usize>(
    form: &OneForm<Mat<N>>,
    generator: usize,
    base: (usize, usize),
    substeps: usize,
) -> Mat<N> {
    let (cs, ct) = step_coefficients(form);
    let mut nodes = if generator == 1 { row_nodes(&cs, base.1 as isize) } else { col_nodes(&ct, base.0 as isize) };
    let start = if generator == 1 { base.0 } else { base.1 };
    let len = nodes.len();
    nodes.rotate_left(start % len);
    line_holonomy(&nodes, substeps)
}

/// Parallel frame over the closed fundamental domain with `X(base) = I`.
///
/// The sweep first walks the column through the base point along `γ2`, then
/// every row along `γ1`. Indices are taken relative to `base`, so site `(i, j)`
/// of the result sits at `base + (i, j)`.
pub fn frame_field<const N: usize>(form: &OneForm<Mat<N>>, base: (usize, usize), substeps: usize) -> GridField<Mat<N>> {
    let l = *form.lattice();
    let (cs, ct) = step_coefficients(form);
    let (b1, b2) = (base.0 as isize, base.1 as isize);
    let mut col_nodes_v = col_nodes(&ct, b1);
    col_nodes_v.rotate_left(base.1 % l.n2);
    let col_p = line_transports(&col_nodes_v, substeps);
    let mut column = Vec::with_capacity(l.n2 + 1);
    column.push(Mat::<N>::identity());
    for p in &col_p {
        let last = *column.last().expect("non-empty");
        column.push(*p * last);
    }
    let rows: Vec<Vec<Mat<N>>> = (0..=l.n2)
        .into_par_iter()
        .map(|j| {
            let mut nodes = row_nodes(&cs, b2 + j as isize);
            nodes.rotate_left(base.0 % l.n1);
            let ps = line_transports(&nodes, substeps);
            let mut row = Vec::with_capacity(l.n1 + 1);
            row.push(column[j]);
            for p in &ps {
                let last = *row.last().expect("non-empty");
                row.push(*p * last);
            }
            row
        })
        .collect();
    GridField::from_fn_closed(l, |i, j| rows[j][i])
}

/// Transport along the straight segment `z0 → z0 + v` using bicubic
/// interpolation of the connection coefficients.
pub fn segment_transport<const N: usize>(form: &OneForm<Mat<N>>, z0: Complex64, v: Complex64, steps: usize) -> Mat<N> {
    integrate(
        |t| {
            let z = z0 + v * t;
            interpolate(&form.dx, z).scale_re(v.re) + interpolate(&form.dy, z).scale_re(v.im)
        },
        steps,
    )
}

/// Largest `‖P − I‖ / cell area` over all plaquette loops.
pub fn plaquette_residual<const N: usize>(form: &OneForm<Mat<N>>, substeps: usize) -> f64 {
    let l = *form.lattice();
    let (cs, ct) = step_coefficients(form);
    let px: Vec<Vec<Mat<N>>> =
        (0..l.n2 as isize).into_par_iter().map(|j| line_transports(&row_nodes(&cs, j), substeps)).collect();
    let py: Vec<Vec<Mat<N>>> =
        (0..l.n1 as isize).into_par_iter().map(|i| line_transports(&col_nodes(&ct, i), substeps)).collect();
    let area = l.cell_area();
    let loops: Vec<_> = plaquettes(&l).collect();
    loops
        .par_iter()
        .map(|p| {
            let (i, j) = (p.i, p.j);
            let (i1, j1) = (p.corners[2].0, p.corners[2].1);
            let bottom = px[j][i];
            let right = py[i1][j];
            let top = px[j1][i];
            let left = py[i][j];
            // Around the loop: bottom, right, then top and left backwards.
            let inv_top = top.inverse().unwrap_or_else(|_| Mat::<N>::identity().scale_re(f64::NAN));
            let inv_left = left.inverse().unwrap_or_else(|_| Mat::<N>::identity().scale_re(f64::NAN));
            let loop_p = inv_left * inv_top * right * bottom;
            (loop_p - Mat::<N>::identity()).max_abs() / area
        })
        .reduce(|| 0.0, f64::max)
}

/// Continuum curvature `∂x Ωy − ∂y Ωx + [Ωx, Ωy]` of a periodic connection.
pub fn curvature<const N: usize>(form: &OneForm<Mat<N>>, stencil: Stencil) -> Result<GridField<Mat<N>>, TorusError> {
    let d = form.exterior_derivative(stencil)?;
    let br = form.dx.zip(&form.dy, |a, b| a.commutator(b))?;
    d.zip(&br, |a, b| *a + *b)
}

/// Largest entry of the continuum curvature.
pub fn curvature_residual<const N: usize>(form: &OneForm<Mat<N>>, stencil: Stencil) -> Result<f64, TorusError> {
    Ok(curvature(form, stencil)?.values().iter().map(|m| m.max_abs()).fold(0.0, f64::max))
}

/// Path-independence audit: largest distance between the frame ratio
/// `X(i+1, j+1) X(i, j)⁻¹` and direct transport along the cell diagonal, for
/// the given cells.
pub fn diagonal_defect<const N: usize>(
    form: &OneForm<Mat<N>>,
    frame: &GridField<Mat<N>>,
    base: (usize, usize),
    cells: &[(usize, usize)],
    steps: usize,
) -> f64 {
    let l = *form.lattice();
    let diag = l.gamma1 / l.n1 as f64 + l.gamma2 / l.n2 as f64;
    cells
        .par_iter()
        .map(|&(i, j)| {
            let z0 = l.site((base.0 + i) as isize, (base.1 + j) as isize);
            let direct = segment_transport(form, z0, diag, steps);
            let x0 = frame.get(i, j);
            let x1 = frame.get(i + 1, j + 1);
            match x0.inverse() {
                Ok(inv) => (x1 * inv - direct).max_abs(),
                Err(_) => f64::INFINITY,
            }
        })
        .reduce(|| 0.0, f64::max)
}
