// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{FieldValue, GridField, TorusError};

/// Derivative rule along each lattice direction of a periodic grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stencil {
    /// 5-point central differences, 4th order.
    Central4,
    /// 7-point central differences, 6th order.
    #[default]
    Central6,
    /// Full-width periodic differentiation matrix (spectral accuracy).
    Spectral,
}

impl Stencil {
    /// Weights `(offset, w)` for `d/du` of a function with period 1 sampled at
    /// `n` points.
    pub fn weights(self, n: usize) -> Vec<(isize, f64)> {
        let nf = n as f64;
        match self {
            Stencil::Central4 => vec![(-2, nf / 12.0), (-1, -8.0 * nf / 12.0), (1, 8.0 * nf / 12.0), (2, -nf / 12.0)],
            Stencil::Central6 => vec![
                (-3, -nf / 60.0),
                (-2, 9.0 * nf / 60.0),
                (-1, -45.0 * nf / 60.0),
                (1, 45.0 * nf / 60.0),
                (2, -9.0 * nf / 60.0),
                (3, nf / 60.0),
            ],
            Stencil::Spectral => (1..n)
                .map(|k| {
                    let a = PI * k as f64 / nf;
                    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                    let kernel = if n % 2 == 0 { 1.0 / a.tan() } else { 1.0 / a.sin() };
                    (k as isize, -0.5 * sign * kernel * 2.0 * PI)
                })
                .collect(),
        }
    }

    pub fn order(self) -> Option<u32> {
        match self {
            Stencil::Central4 => Some(4),
            Stencil::Central6 => Some(6),
            Stencil::Spectral => None,
        }
    }
}

fn apply_line<T: FieldValue>(field: &GridField<T>, weights: &[(isize, f64)], along_first: bool) -> GridField<T> {
    GridField::from_fn(*field.lattice(), |i, j| {
        let mut acc = T::zero();
        for &(k, w) in weights {
            let v = if along_first {
                field.get_wrapped(i as isize + k, j as isize)
            } else {
                field.get_wrapped(i as isize, j as isize + k)
            };
            acc = acc + v * w;
        }
        acc
    })
}

/// Partials `(∂s, ∂t)` in lattice coordinates of a periodic field.
pub fn lattice_partials<T: FieldValue>(
    field: &GridField<T>,
    stencil: Stencil,
) -> Result<(GridField<T>, GridField<T>), TorusError> {
    if !field.is_periodic() {
        return Err(TorusError::NotPeriodic);
    }
    let l = field.lattice();
    let ds = apply_line(field, &stencil.weights(l.n1), true);
    let dt = apply_line(field, &stencil.weights(l.n2), false);
    Ok((ds, dt))
}

fn to_xy<T: FieldValue>(ds: &GridField<T>, dt: &GridField<T>) -> Result<(GridField<T>, GridField<T>), TorusError> {
    let [[a, b], [c, d]] = ds.lattice().partials_from_lattice();
    let dx = ds.zip(dt, |s, t| *s * a + *t * b)?;
    let dy = ds.zip(dt, |s, t| *s * c + *t * d)?;
    Ok((dx, dy))
}

/// Partials `(∂x, ∂y)` of a periodic field in the conformal coordinate
/// `z = x + iy`.
pub fn partial_derivatives<T: FieldValue>(
    field: &GridField<T>,
    stencil: Stencil,
) -> Result<(GridField<T>, GridField<T>), TorusError> {
    let (ds, dt) = lattice_partials(field, stencil)?;
    to_xy(&ds, &dt)
}

/// Finite-difference weights for derivatives `0..=m` at `x0` from arbitrary
/// nodes (Fornberg's recursion). Returns `w[k][node]`.
pub(crate) fn fornberg(x0: f64, nodes: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

const MESH_WIDTH: usize = 7;

/// Partials `(∂x, ∂y)` of a field on the closed (non-periodic) grid.
///
/// Uses 7-point Fornberg stencils, centred in the interior and shifted at the
/// edges, in lattice coordinates.
pub fn mesh_partials<T: FieldValue>(field: &GridField<T>) -> Result<(GridField<T>, GridField<T>), TorusError> {
    if field.is_periodic() {
        return partial_derivatives(field, Stencil::Central6);
    }
    let (m1, m2) = field.dims();
    let l = *field.lattice();
    let table = |m: usize, n: usize| -> Vec<(usize, Vec<f64>)> {
        let h = 1.0 / n as f64;
        (0..m)
            .map(|i| {
                let start = i.saturating_sub(MESH_WIDTH / 2).min(m - MESH_WIDTH);
                let nodes: Vec<f64> = (start..start + MESH_WIDTH).map(|k| k as f64 * h).collect();
                let w = fornberg(i as f64 * h, &nodes, 1);
                (start, w[1].clone())
            })
            .collect()
    };
    let t1 = table(m1, l.n1);
    let t2 = table(m2, l.n2);
    let ds = GridField::from_fn_closed(l, |i, j| {
        let (start, w) = &t1[i];
        w.iter().enumerate().fold(T::zero(), |acc, (k, &wk)| acc + field.get(start + k, j) * wk)
    });
    let dt = GridField::from_fn_closed(l, |i, j| {
        let (start, w) = &t2[j];
        w.iter().enumerate().fold(T::zero(), |acc, (k, &wk)| acc + field.get(i, start + k) * wk)
    });
    to_xy(&ds, &dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusLattice;

    fn sin_error(n: usize, stencil: Stencil) -> f64 {
        let l = TorusLattice::unit_square(n).unwrap();
        let f = GridField::from_fn(l, |i, _| (2.0 * PI * i as f64 / n as f64).sin());
        let (dx, dy) = partial_derivatives(&f, stencil).unwrap();
        assert!(dy.max_norm() < 1e-12);
        (0..n).map(|i| (dx.get(i, 0) - 2.0 * PI * (2.0 * PI * i as f64 / n as f64).cos()).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn constants_are_annihilated() {
        let l = TorusLattice::unit_square(16).unwrap();
        let f = GridField::constant(l, 3.5);
        for s in [Stencil::Central4, Stencil::Central6, Stencil::Spectral] {
            let (dx, dy) = partial_derivatives(&f, s).unwrap();
            assert!(dx.max_norm() < 1e-11 && dy.max_norm() < 1e-11);
        }
    }

    #[test]
    fn convergence_orders() {
        let e64 = sin_error(64, Stencil::Central4);
        let e128 = sin_error(128, Stencil::Central4);
        let ratio = e64 / e128;
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
        assert!(sin_error(64, Stencil::Central6) < 1e-7);
        assert!(sin_error(16, Stencil::Spectral) < 1e-12);
        assert!(sin_error(17, Stencil::Spectral) < 1e-12);
    }

    #[test]
    fn closed_grid_derivatives() {
        let l = TorusLattice::unit_square(32).unwrap();
        let f = GridField::from_fn_closed(l, |i, j| {
            let (x, y) = (i as f64 / 32.0, j as f64 / 32.0);
            (1.3 * x).exp() * y.sin()
        });
        let (dx, dy) = mesh_partials(&f).unwrap();
        for i in 0..33 {
            for j in 0..33 {
                let (x, y) = (i as f64 / 32.0, j as f64 / 32.0);
                assert!((dx.get(i, j) - 1.3 * (1.3 * x).exp() * y.sin()).abs() < 1e-8);
                assert!((dy.get(i, j) - (1.3 * x).exp() * y.cos()).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn non_periodic_rejected() {
        let l = TorusLattice::unit_square(8).unwrap();
        let f = GridField::from_fn_closed(l, |_, _| 1.0);
        assert!(matches!(lattice_partials(&f, Stencil::Central4), Err(TorusError::NotPeriodic)));
    }
}
