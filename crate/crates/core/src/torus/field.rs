// SPDX-License-Identifier: Apache-2.0

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use super::{TorusError, TorusLattice};
use crate::algebra::{Mat, Quaternion};

/// Values that can live on grid sites: a real vector space with a norm and a
/// flat list of real components for serialization.
pub trait FieldValue:
    Copy + Send + Sync + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> + 'static
{
    /// Tag written into grid files.
    const KIND: &'static str;
    /// Number of real components.
    const COMPONENTS: usize;

    fn zero() -> Self;
    fn norm(&self) -> f64;
    fn components(&self, out: &mut Vec<f64>);
    fn from_components(c: &[f64]) -> Self;
}

impl FieldValue for f64 {
    const KIND: &'static str = "real";
    const COMPONENTS: usize = 1;
    fn zero() -> Self {
        0.0
    }
    fn norm(&self) -> f64 {
        self.abs()
    }
    fn components(&self, out: &mut Vec<f64>) {
        out.push(*self);
    }
    fn from_components(c: &[f64]) -> Self {
        c[0]
    }
}

impl FieldValue for Complex64 {
    const KIND: &'static str = "complex";
    const COMPONENTS: usize = 2;
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn norm(&self) -> f64 {
        Complex64::norm(*self)
    }
    fn components(&self, out: &mut Vec<f64>) {
        out.extend([self.re, self.im]);
    }
    fn from_components(c: &[f64]) -> Self {
        Complex64::new(c[0], c[1])
    }
}

impl FieldValue for Quaternion {
    const KIND: &'static str = "quaternion";
    const COMPONENTS: usize = 4;
    fn zero() -> Self {
        Quaternion::ZERO
    }
    fn norm(&self) -> f64 {
        Quaternion::norm(*self)
    }
    fn components(&self, out: &mut Vec<f64>) {
        out.extend(self.to_array());
    }
    fn from_components(c: &[f64]) -> Self {
        Quaternion::new(c[0], c[1], c[2], c[3])
    }
}

impl<const N: usize> FieldValue for Mat<N> {
    const KIND: &'static str = match N {
        2 => "mat2",
        4 => "mat4",
        _ => "mat",
    };
    const COMPONENTS: usize = 2 * N * N;
    fn zero() -> Self {
        Mat::<N>::zero()
    }
    fn norm(&self) -> f64 {
        Mat::<N>::norm(self)
    }
    fn components(&self, out: &mut Vec<f64>) {
        for row in &self.0 {
            for z in row {
                out.extend([z.re, z.im]);
            }
        }
    }
    fn from_components(c: &[f64]) -> Self {
        Mat::<N>::from_fn(|i, j| Complex64::new(c[2 * (i * N + j)], c[2 * (i * N + j) + 1]))
    }
}

/// Samples of a field on the lattice grid, stored row-major with `i` (along
/// `γ1`) as the slow index.
///
/// Periodic fields have `n1 × n2` sites. Non-periodic fields cover the closed
/// fundamental domain with `(n1 + 1) × (n2 + 1)` sites, so values at `z` and
/// `z + γ` are both present.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField<T> {
    lattice: TorusLattice,
    periodic: bool,
    values: Vec<T>,
}

impl<T: FieldValue> GridField<T> {
    fn dims_for(lattice: &TorusLattice, periodic: bool) -> (usize, usize) {
        if periodic {
            (lattice.n1, lattice.n2)
        } else {
            (lattice.n1 + 1, lattice.n2 + 1)
        }
    }

    pub fn from_values(lattice: TorusLattice, periodic: bool, values: Vec<T>) -> Result<Self, TorusError> {
        let (m1, m2) = Self::dims_for(&lattice, periodic);
        if values.len() != m1 * m2 {
            return Err(TorusError::Shape { got: (values.len(), 1), want: (m1, m2) });
        }
        Ok(Self { lattice, periodic, values })
    }

    /// Periodic field sampled from a function of the site indices.
    pub fn from_fn(lattice: TorusLattice, f: impl Fn(usize, usize) -> T + Sync + Send) -> Self {
        Self::build(lattice, true, f)
    }

    /// Non-periodic field over the closed fundamental domain.
    pub fn from_fn_closed(lattice: TorusLattice, f: impl Fn(usize, usize) -> T + Sync + Send) -> Self {
        Self::build(lattice, false, f)
    }

    fn build(lattice: TorusLattice, periodic: bool, f: impl Fn(usize, usize) -> T + Sync + Send) -> Self {
        let (m1, m2) = Self::dims_for(&lattice, periodic);
        let values = (0..m1 * m2).into_par_iter().map(|k| f(k / m2, k % m2)).collect();
        Self { lattice, periodic, values }
    }

    /// Periodic field from a function of the position `z ∈ ℂ`.
    pub fn sample(lattice: TorusLattice, f: impl Fn(Complex64) -> T + Sync + Send) -> Self {
        Self::from_fn(lattice, |i, j| f(lattice.site(i as isize, j as isize)))
    }

    pub fn constant(lattice: TorusLattice, value: T) -> Self {
        Self { lattice, periodic: true, values: vec![value; lattice.site_count()] }
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn dims(&self) -> (usize, usize) {
        Self::dims_for(&self.lattice, self.periodic)
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let (_, m2) = self.dims();
        self.values[i * m2 + j]
    }

    /// Value at possibly out-of-range indices, wrapped periodically.
    pub fn get_wrapped(&self, i: isize, j: isize) -> T {
        let (m1, m2) = self.dims();
        let i = i.rem_euclid(m1 as isize) as usize;
        let j = j.rem_euclid(m2 as isize) as usize;
        self.values[i * m2 + j]
    }

    pub fn map<U: FieldValue>(&self, f: impl Fn(&T) -> U + Sync + Send) -> GridField<U> {
        GridField { lattice: self.lattice, periodic: self.periodic, values: self.values.par_iter().map(f).collect() }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip<U: FieldValue, V: FieldValue>(
        &self,
        other: &GridField<U>,
        f: impl Fn(&T, &U) -> V + Sync + Send,
    ) -> Result<GridField<V>, TorusError> {
        if self.lattice != other.lattice || self.periodic != other.periodic {
            return Err(TorusError::LatticeMismatch);
        }
        Ok(GridField {
            lattice: self.lattice,
            periodic: self.periodic,
            values: self.values.par_iter().zip(other.values.par_iter()).map(|(a, b)| f(a, b)).collect(),
        })
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest pointwise distance to another field.
    pub fn max_distance(&self, other: &GridField<T>) -> Result<f64, TorusError> {
        Ok(self.zip(other, |a, b| (*a - *b).norm())?.values.iter().fold(0.0, |m: f64, &v| m.max(v)))
    }

    /// Restriction of a closed field to the periodic grid (drops the far edges).
    pub fn to_periodic(&self) -> GridField<T> {
        if self.periodic {
            return self.clone();
        }
        GridField::from_fn(self.lattice, |i, j| self.get(i, j))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_and_wrapping() {
        let l = TorusLattice::unit_square(8).unwrap();
        let f = GridField::from_fn(l, |i, j| (i * 10 + j) as f64);
        assert_eq!(f.values().len(), 64);
        assert_eq!(f.get_wrapped(-1, 9), 71.0);
        let g = GridField::from_fn_closed(l, |i, j| (i * 10 + j) as f64);
        assert_eq!(g.dims(), (9, 9));
        assert_eq!(g.to_periodic(), f);
        assert!(GridField::<f64>::from_values(l, true, vec![0.0; 63]).is_err());
    }

    #[test]
    fn components_roundtrip() {
        let m = Mat::<2>::from_fn(|i, j| Complex64::new(i as f64, j as f64 + 0.5));
        let mut c = Vec::new();
        m.components(&mut c);
        assert_eq!(c.len(), <Mat<2> as FieldValue>::COMPONENTS);
        assert_eq!(Mat::<2>::from_components(&c), m);
    }
}
