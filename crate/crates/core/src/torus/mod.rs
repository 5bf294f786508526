// SPDX-License-Identifier: Apache-2.0

//! Period lattices, periodic grid fields and discrete calculus on `ℂ/Γ`.

mod calculus;
mod field;
mod form;
mod interp;
pub mod io;
mod plaquette;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use calculus::{mesh_partials, partial_derivatives, Stencil};
pub use field::{FieldValue, GridField};
pub use form::{hodge_star, type_split, OneForm};
pub use interp::{interpolate, lagrange4, lagrange6};
pub use plaquette::{plaquettes, Plaquette};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TorusError {
    #[error("lattice basis is not positively oriented (Im(γ2/γ1) = {0:.3e})")]
    Orientation(f64),
    #[error("grid resolution {n1}×{n2} below the minimum of {min}")]
    Resolution { n1: usize, n2: usize, min: usize },
    #[error("operation requires a periodic field")]
    NotPeriodic,
    #[error("field shape {got:?} does not match the lattice ({want:?})")]
    Shape { got: (usize, usize), want: (usize, usize) },
    #[error("fields live on different lattices")]
    LatticeMismatch,
    #[error("grid file: {0}")]
    Format(String),
    #[error("grid file i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for TorusError {
    fn from(e: std::io::Error) -> Self {
        TorusError::Io(e.to_string())
    }
}

/// Smallest accepted grid resolution per generator.
pub const MIN_RESOLUTION: usize = 8;

/// Period lattice `Γ = γ1 ℤ + γ2 ℤ` with a uniform sampling grid.
///
/// Lattice coordinates `(s, t) ∈ [0, 1)²` map to `z = s γ1 + t γ2`; site
/// `(i, j)` sits at `s = i/n1`, `t = j/n2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusLattice {
    pub gamma1: Complex64,
    pub gamma2: Complex64,
    pub n1: usize,
    pub n2: usize,
}

impl TorusLattice {
    pub fn new(gamma1: Complex64, gamma2: Complex64, n1: usize, n2: usize) -> Result<Self, TorusError> {
        let ratio = gamma2 / gamma1;
        if !(ratio.im > 0.0) || !ratio.im.is_finite() {
            return Err(TorusError::Orientation(ratio.im));
        }
        if n1 < MIN_RESOLUTION || n2 < MIN_RESOLUTION {
            return Err(TorusError::Resolution { n1, n2, min: MIN_RESOLUTION });
        }
        Ok(Self { gamma1, gamma2, n1, n2 })
    }

    /// Unit square lattice `(1, i)`.
    pub fn unit_square(n: usize) -> Result<Self, TorusError> {
        Self::new(Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0), n, n)
    }

    /// Rectangular lattice `(2πa, 2πb i)`.
    pub fn rectangular(a: f64, b: f64, n1: usize, n2: usize) -> Result<Self, TorusError> {
        Self::new(Complex64::new(2.0 * PI * a, 0.0), Complex64::new(0.0, 2.0 * PI * b), n1, n2)
    }

    pub fn with_resolution(&self, n1: usize, n2: usize) -> Result<Self, TorusError> {
        Self::new(self.gamma1, self.gamma2, n1, n2)
    }

    pub fn generator(&self, k: usize) -> Complex64 {
        if k == 1 {
            self.gamma1
        } else {
            self.gamma2
        }
    }

    pub fn site_count(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn point(&self, s: f64, t: f64) -> Complex64 {
        self.gamma1 * s + self.gamma2 * t
    }

    /// Position of grid site `(i, j)`; indices may exceed the grid.
    pub fn site(&self, i: isize, j: isize) -> Complex64 {
        self.point(i as f64 / self.n1 as f64, j as f64 / self.n2 as f64)
    }

    /// Lattice coordinates `(s, t)` of a point of ℂ.
    pub fn coords(&self, z: Complex64) -> (f64, f64) {
        let det = self.gamma1.re * self.gamma2.im - self.gamma1.im * self.gamma2.re;
        let s = (z.re * self.gamma2.im - z.im * self.gamma2.re) / det;
        let t = (self.gamma1.re * z.im - self.gamma1.im * z.re) / det;
        (s, t)
    }

    /// Area of the fundamental domain.
    pub fn area(&self) -> f64 {
        (self.gamma1.conj() * self.gamma2).im
    }

    pub fn cell_area(&self) -> f64 {
        self.area() / self.site_count() as f64
    }

    /// Converts lattice-coordinate partials `(∂s, ∂t)` into `(∂x, ∂y)`.
    ///
    /// Returns the coefficients `[[a, b], [c, d]]` with
    /// `∂x = a ∂s + b ∂t`, `∂y = c ∂s + d ∂t`.
    pub fn partials_from_lattice(&self) -> [[f64; 2]; 2] {
        // ∂s = g1x ∂x + g1y ∂y, ∂t = g2x ∂x + g2y ∂y; invert.
        let (a, b, c, d) = (self.gamma1.re, self.gamma1.im, self.gamma2.re, self.gamma2.im);
        let det = a * d - b * c;
        [[d / det, -b / det], [-c / det, a / det]]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_lattices() {
        let one = Complex64::new(1.0, 0.0);
        assert!(matches!(TorusLattice::new(one, Complex64::new(0.0, -1.0), 16, 16), Err(TorusError::Orientation(_))));
        assert!(matches!(TorusLattice::new(one, Complex64::new(0.0, 1.0), 4, 16), Err(TorusError::Resolution { .. })));
    }

    #[test]
    fn coords_invert_point() {
        let l = TorusLattice::new(Complex64::new(1.3, 0.2), Complex64::new(-0.4, 0.9), 16, 16).unwrap();
        let (s, t) = l.coords(l.point(0.3, -1.7));
        assert!((s - 0.3).abs() < 1e-14 && (t + 1.7).abs() < 1e-14);
        assert!((l.area() - (1.3 * 0.9 + 0.2 * 0.4)).abs() < 1e-14);
    }
}
