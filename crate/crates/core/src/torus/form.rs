// SPDX-License-Identifier: Apache-2.0

use std::ops::Mul;

use num_complex::Complex64;

use super::{lagrange6, partial_derivatives, FieldValue, GridField, Stencil, TorusError, TorusLattice};

/// A 1-form `ω = ωx dx + ωy dy` with coefficients sampled on the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct OneForm<T> {
    pub dx: GridField<T>,
    pub dy: GridField<T>,
}

impl<T: FieldValue> OneForm<T> {
    pub fn new(dx: GridField<T>, dy: GridField<T>) -> Result<Self, TorusError> {
        if dx.lattice() != dy.lattice() || dx.is_periodic() != dy.is_periodic() {
            return Err(TorusError::LatticeMismatch);
        }
        Ok(Self { dx, dy })
    }

    pub fn zero(lattice: TorusLattice) -> Self {
        Self { dx: GridField::constant(lattice, T::zero()), dy: GridField::constant(lattice, T::zero()) }
    }

    pub fn lattice(&self) -> &TorusLattice {
        self.dx.lattice()
    }

    /// The exterior derivative of a 0-form.
    pub fn exact(f: &GridField<T>, stencil: Stencil) -> Result<Self, TorusError> {
        let (dx, dy) = partial_derivatives(f, stencil)?;
        Ok(Self { dx, dy })
    }

    /// `ω(v)` at site `(i, j)` for a tangent vector `v = vx + i vy`.
    pub fn eval(&self, i: usize, j: usize, v: Complex64) -> T {
        self.dx.get(i, j) * v.re + self.dy.get(i, j) * v.im
    }

    /// Coefficient field of `ω(v)` for a constant vector `v`.
    pub fn along(&self, v: Complex64) -> GridField<T> {
        self.dx.zip(&self.dy, |a, b| *a * v.re + *b * v.im).expect("coefficients share a lattice")
    }

    pub fn combine(&self, other: &Self, f: impl Fn(&T, &T) -> T + Sync + Send + Copy) -> Result<Self, TorusError> {
        Ok(Self { dx: self.dx.zip(&other.dx, f)?, dy: self.dy.zip(&other.dy, f)? })
    }

    pub fn add(&self, other: &Self) -> Result<Self, TorusError> {
        self.combine(other, |a, b| *a + *b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, TorusError> {
        self.combine(other, |a, b| *a - *b)
    }

    pub fn map(&self, f: impl Fn(&T) -> T + Sync + Send + Copy) -> Self {
        Self { dx: self.dx.map(f), dy: self.dy.map(f) }
    }

    /// `dω = (∂x ωy − ∂y ωx) dx∧dy`, returned as the coefficient field.
    pub fn exterior_derivative(&self, stencil: Stencil) -> Result<GridField<T>, TorusError> {
        let (dyx, _) = partial_derivatives(&self.dy, stencil)?;
        let (_, dxy) = partial_derivatives(&self.dx, stencil)?;
        dyx.zip(&dxy, |a, b| *a - *b)
    }

    /// Circulation of the form around each grid cell divided by the cell
    /// area, indexed by the lower-left corner.
    ///
    /// Edge integrals use the exact integral of the 6-point Lagrange
    /// interpolant, so by Stokes the result is the cell average of the
    /// `dx∧dy` coefficient of `dω`, up to sixth order in the grid step.
    pub fn circulation_density(&self) -> Result<GridField<T>, TorusError> {
        if !self.dx.is_periodic() {
            return Err(TorusError::NotPeriodic);
        }
        let l = *self.lattice();
        let cs = self.along(l.gamma1 / l.n1 as f64);
        let ct = self.along(l.gamma2 / l.n2 as f64);
        let w = edge_weights();
        let edge = |f: &GridField<T>, i: isize, j: isize, di: isize, dj: isize| {
            let mut acc = T::zero();
            for (k, wk) in w.iter().enumerate() {
                let o = k as isize - 2;
                acc = acc + f.get_wrapped(i + o * di, j + o * dj) * *wk;
            }
            acc
        };
        let area = l.cell_area();
        Ok(GridField::from_fn(l, |i, j| {
            let (i, j) = (i as isize, j as isize);
            let bottom = edge(&cs, i, j, 1, 0);
            let right = edge(&ct, i + 1, j, 0, 1);
            let top = edge(&cs, i, j + 1, 1, 0);
            let left = edge(&ct, i, j, 0, 1);
            (bottom + right - top - left) * (1.0 / area)
        }))
    }

    pub fn max_norm(&self) -> f64 {
        self.dx.max_norm().max(self.dy.max_norm())
    }

    /// Largest coefficient distance to another form.
    pub fn max_distance(&self, other: &Self) -> Result<f64, TorusError> {
        Ok(self.dx.max_distance(&other.dx)?.max(self.dy.max_distance(&other.dy)?))
    }
}

/// `∫₀¹ ℓ_k(t) dt` for the 6-point Lagrange basis on nodes −2..3.
fn edge_weights() -> [f64; 6] {
    // Three-point Gauss–Legendre is exact for the quintic basis.
    let r = (0.6f64).sqrt() * 0.5;
    let nodes = [(0.5 - r, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + r, 5.0 / 18.0)];
    let mut w = [0.0; 6];
    for (t, wt) in nodes {
        for (acc, b) in w.iter_mut().zip(lagrange6(t)) {
            *acc += wt * b;
        }
    }
    w
}

/// Hodge star of a 1-form, `∗ω = −ω∘J` with `J ∂x = ∂y`.
///
/// So `∗dx = dy`, `∗dy = −dx` and `∗ω = −ωy dx + ωx dy`.
pub fn hodge_star<T: FieldValue>(a: &OneForm<T>) -> OneForm<T> {
    OneForm { dx: a.dy.map(|v| *v * -1.0), dy: a.dx.clone() }
}

/// Splits a form into its complex-linear and anti-linear parts,
/// `a′ = ½(a − i a∘J)` and `a″ = ½(a + i a∘J)`.
pub fn type_split<T>(a: &OneForm<T>) -> (OneForm<T>, OneForm<T>)
where
    T: FieldValue + Mul<Complex64, Output = T>,
{
    let i = Complex64::new(0.0, 1.0);
    // (a∘J)(∂x) = a(∂y), (a∘J)(∂y) = −a(∂x).
    let prime = OneForm {
        dx: a.dx.zip(&a.dy, |x, y| (*x - *y * i) * 0.5).expect("shared lattice"),
        dy: a.dx.zip(&a.dy, |x, y| (*y + *x * i) * 0.5).expect("shared lattice"),
    };
    let dprime = OneForm {
        dx: a.dx.zip(&a.dy, |x, y| (*x + *y * i) * 0.5).expect("shared lattice"),
        dy: a.dx.zip(&a.dy, |x, y| (*y - *x * i) * 0.5).expect("shared lattice"),
    };
    (prime, dprime)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::ComplexMat2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn form(m: ComplexMat2, my: ComplexMat2) -> OneForm<ComplexMat2> {
        let l = TorusLattice::unit_square(8).unwrap();
        OneForm::new(GridField::constant(l, m), GridField::constant(l, my)).unwrap()
    }

    #[test]
    fn dz_is_type_10() {
        let m = ComplexMat2::new(c(1.0, 2.0), c(-0.5, 0.0), c(0.0, 3.0), c(0.25, -1.0));
        let dz = form(m, m * c(0.0, 1.0));
        let (p, pp) = type_split(&dz);
        assert!(p.max_distance(&dz).unwrap() < 1e-15);
        assert!(pp.max_norm() < 1e-15);
        let dzbar = form(m, m * c(0.0, -1.0));
        let (p, pp) = type_split(&dzbar);
        assert!(p.max_norm() < 1e-15);
        assert!(pp.max_distance(&dzbar).unwrap() < 1e-15);
    }

    #[test]
    fn circulation_matches_exterior_derivative() {
        let l = TorusLattice::new(c(1.0, 0.0), c(0.3, 0.9), 32, 32).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        let (w1, w2) = (c(two_pi, -two_pi * 0.3 / 0.9), c(0.0, two_pi / 0.9));
        // ω = sin(u) dx + cos(v) dy with u, v lattice-periodic phases.
        let phase = |z: Complex64, w: Complex64| z.re * w.re + z.im * w.im;
        let dx = GridField::sample(l, |z| phase(z, w1).sin());
        let dy = GridField::sample(l, |z| phase(z, w2).cos());
        let form = OneForm::new(dx, dy).unwrap();
        let circ = form.circulation_density().unwrap();
        // Oracle: cell average of the analytic dω by tensor Gauss quadrature.
        let dw = |z: Complex64| -phase(z, w2).sin() * w2.re - phase(z, w1).cos() * w1.im;
        let r = (0.6f64).sqrt() * 0.5;
        let g = [(0.5 - r, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.5 + r, 5.0 / 18.0)];
        let (e1, e2) = (l.gamma1 / 32.0, l.gamma2 / 32.0);
        let exact = GridField::sample(l, |z| {
            let mut acc = 0.0;
            for (s, ws) in g {
                for (t, wt) in g {
                    acc += ws * wt * dw(z + e1 * s + e2 * t);
                }
            }
            acc
        });
        let d = circ.max_distance(&exact).unwrap();
        assert!(d < 1e-7, "{d:e} {}", exact.max_norm());
    }

    #[test]
    fn hodge_squares_to_minus_one() {
        let m = ComplexMat2::new(c(1.0, 0.0), c(0.0, 1.0), c(2.0, 0.0), c(0.0, 0.0));
        let a = form(m, m * 3.0);
        let ss = hodge_star(&hodge_star(&a));
        assert!(ss.add(&a).unwrap().max_norm() < 1e-15);
    }
}
