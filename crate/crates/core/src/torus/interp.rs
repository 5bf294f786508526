// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::{FieldValue, GridField};

/// Cubic Lagrange weights for nodes `−1, 0, 1, 2` at `t ∈ [0, 1]`.
pub fn lagrange4(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Quintic Lagrange weights for nodes `−2, −1, 0, 1, 2, 3` at `t`.
pub fn lagrange6(t: f64) -> [f64; 6] {
    let mut w = [1.0; 6];
    for (k, wk) in w.iter_mut().enumerate() {
        let xk = k as f64 - 2.0;
        for m in 0..6 {
            if m != k {
                let xm = m as f64 - 2.0;
                *wk *= (t - xm) / (xk - xm);
            }
        }
    }
    w
}

/// Tensor-product cubic interpolation of a periodic field at `z ∈ ℂ`.
///
/// Exact on polynomials of bidegree (3, 3) in the lattice coordinates and on
/// grid sites. Non-periodic fields are sampled with clamped indices.
pub fn interpolate<T: FieldValue>(field: &GridField<T>, z: Complex64) -> T {
    let l = field.lattice();
    let (s, t) = l.coords(z);
    let u = s * l.n1 as f64;
    let v = t * l.n2 as f64;
    let (i0, fu) = (u.floor(), u - u.floor());
    let (j0, fv) = (v.floor(), v - v.floor());
    let (i0, j0) = (i0 as isize, j0 as isize);
    let wu = lagrange4(fu);
    let wv = lagrange4(fv);
    let (m1, m2) = field.dims();
    let periodic = field.is_periodic();
    let fetch = |i: isize, j: isize| -> T {
        if periodic {
            field.get_wrapped(i, j)
        } else {
            field.get(i.clamp(0, m1 as isize - 1) as usize, j.clamp(0, m2 as isize - 1) as usize)
        }
    };
    let mut acc = T::zero();
    for (a, &wa) in wu.iter().enumerate() {
        if wa == 0.0 {
            continue;
        }
        let mut row = T::zero();
        for (b, &wb) in wv.iter().enumerate() {
            if wb == 0.0 {
                continue;
            }
            row = row + fetch(i0 + a as isize - 1, j0 + b as isize - 1) * wb;
        }
        acc = acc + row * wa;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::TorusLattice;
    use std::f64::consts::PI;

    #[test]
    fn weights_partition_unity_and_hit_nodes() {
        for t in [0.0, 0.3, 0.5, 1.0] {
            let w = lagrange4(t);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        }
        assert_eq!(lagrange4(0.0), [0.0, 1.0, 0.0, 0.0]);
        let w = lagrange6(0.37);
        let p = |x: f64| x.powi(5) - 2.0 * x.powi(3) + x - 1.0;
        let interp: f64 = (0..6).map(|k| w[k] * p(k as f64 - 2.0)).sum();
        assert!((interp - p(0.37)).abs() < 1e-12);
    }

    #[test]
    fn grid_points_are_exact() {
        let l = TorusLattice::new(Complex64::new(2.0, 0.0), Complex64::new(0.3, 1.5), 16, 12).unwrap();
        let f = GridField::from_fn(l, |i, j| (i * 31 + j * 7) as f64 % 5.0);
        for (i, j) in [(0, 0), (3, 7), (15, 11)] {
            let z = l.site(i as isize, j as isize);
            assert!((interpolate(&f, z) - f.get(i, j)).abs() < 1e-12);
        }
    }

    #[test]
    fn sin_mid_cell() {
        let n = 64;
        let l = TorusLattice::unit_square(n).unwrap();
        let f = GridField::sample(l, |z| (2.0 * PI * z.re).sin() * (2.0 * PI * z.im).cos());
        let mut worst: f64 = 0.0;
        for k in 0..n {
            let z = Complex64::new((k as f64 + 0.5) / n as f64, (k as f64 * 3.0 + 0.5) / n as f64);
            let exact = (2.0 * PI * z.re).sin() * (2.0 * PI * z.im).cos();
            worst = worst.max((interpolate(&f, z) - exact).abs());
        }
        assert!(worst < 1e-4, "{worst}");
    }
}
