// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::{QuaternionicBundle, WillmoreError};
use crate::algebra::{mat2_to_quat, quat_block, ComplexMat4, Mat, Quaternion};
use crate::immersions::{GeometryReport, ImmersionGrid};
use crate::tolerances::Tolerances;
use crate::torus::{GridField, TorusLattice};

/// Residuals of the mean-curvature sphere contract, maxima over the grid.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SphereContract {
    /// `‖S² + 1‖`.
    pub square: f64,
    /// `S(f, 1) ∈ (f, 1)ℍ`.
    pub stability: f64,
    /// Derivative of the sphere equation along `fx`, `fy` (relative).
    pub tangency: f64,
    /// Sphere equation at points of the sphere with the measured curvature.
    pub curvature_match: f64,
    /// `S𝕛 − 𝕛S` on a real basis.
    pub quaternionic_linearity: f64,
}

/// The conformal Gauss map: a field of 2×2 quaternionic matrices with
/// `S² = −1`, stored as complex 4×4 blocks.
#[derive(Debug, Clone)]
pub struct SphereCongruence {
    pub s: GridField<ComplexMat4>,
    blocks: Vec<[[Quaternion; 2]; 2]>,
    pub contract: SphereContract,
}

impl SphereCongruence {
    /// A congruence from explicit quaternionic blocks; only `S² + 1` and
    /// linearity are measured.
    pub fn from_blocks(lattice: TorusLattice, blocks: Vec<[[Quaternion; 2]; 2]>) -> Result<Self, WillmoreError> {
        let s = GridField::from_values(lattice, true, blocks.iter().map(|b| quat_block(*b)).collect())?;
        let contract = SphereContract {
            square: square_defect(&s),
            quaternionic_linearity: s.values().iter().map(linearity_defect).fold(0.0, f64::max),
            ..Default::default()
        };
        Ok(Self { s, blocks, contract })
    }

    pub fn lattice(&self) -> &TorusLattice {
        self.s.lattice()
    }

    pub fn block(&self, i: usize, j: usize) -> [[Quaternion; 2]; 2] {
        let (_, m2) = self.s.dims();
        self.blocks[i * m2 + j]
    }

    /// Conjugate by a constant `U`, i.e. change the basis of ℍ².
    pub fn conjugated(&self, u: &ComplexMat4) -> Result<Self, WillmoreError> {
        let inv = u.inverse()?;
        let s = self.s.map(|m| *u * *m * inv);
        let blocks = s.values().iter().map(quaternion_blocks).collect();
        Ok(Self { s, blocks, contract: self.contract })
    }
}

/// `F(x) = S₁₁x + S₁₂ − x(S₂₁x + S₂₂)`; zero exactly on the fixed sphere
/// `{x : S(x, 1) ∈ (x, 1)ℍ}`.
pub fn sphere_equation(b: &[[Quaternion; 2]; 2], x: Quaternion) -> Quaternion {
    b[0][0] * x + b[0][1] - x * (b[1][0] * x + b[1][1])
}

/// Directional derivative of [`sphere_equation`] at `x` along `v`.
fn sphere_equation_derivative(b: &[[Quaternion; 2]; 2], x: Quaternion, v: Quaternion) -> Quaternion {
    b[0][0] * v - v * (b[1][0] * x + b[1][1]) - x * b[1][0] * v
}

/// Inverse of [`quat_block`] (projecting each 2×2 block onto ℍ).
fn quaternion_blocks(m: &ComplexMat4) -> [[Quaternion; 2]; 2] {
    let sub = |bi: usize, bj: usize| mat2_to_quat(&Mat::<2>::from_fn(|i, j| m[(2 * bi + i, 2 * bj + j)]));
    [[sub(0, 0), sub(0, 1)], [sub(1, 0), sub(1, 1)]]
}

fn square_defect(s: &GridField<ComplexMat4>) -> f64 {
    s.values().iter().map(|m| (*m * *m + Mat::<4>::identity()).max_abs()).fold(0.0, f64::max)
}

fn linearity_defect(m: &ComplexMat4) -> f64 {
    let mut worst: f64 = 0.0;
    for k in 0..8 {
        let mut e = [num_complex::Complex64::new(0.0, 0.0); 4];
        e[k / 2] =
            if k % 2 == 0 { num_complex::Complex64::new(1.0, 0.0) } else { num_complex::Complex64::new(0.0, 1.0) };
        let a = m.apply(&QuaternionicBundle::quaternionic_structure(e));
        let b = QuaternionicBundle::quaternionic_structure(m.apply(&e));
        worst = worst.max(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max));
    }
    worst
}

/// Mean-curvature sphere congruence of an immersion into S³.
///
/// With `e1 = fx/|fx|`, `e2` the unit part of `fy` orthogonal to `e1`, the
/// left and right normals of `∗df = N df = −df R` (with `∗dx = dy`) are
/// `N = −e2 e1⁻¹` and `R = e1⁻¹ e2`. The sphere
/// through `f` with the measured curvature has Euclidean centre
/// `c = H(Hf + ν)/(1 + H²)` (ν the unit normal), and
/// `H̃ = −(w N + R w)` with `w = conj(c − f)/(2|c − f|²)`. Then
///
/// ```text
/// S = [[N − fH̃,  −Nf + fH̃f − fR],
///      [−H̃,       H̃f − R       ]].
/// ```
///
/// The result is only returned if every contract residual is within its
/// tolerance.
pub fn conformal_gauss_map(
    f: &ImmersionGrid,
    geo: &GeometryReport,
    tol: &Tolerances,
) -> Result<SphereCongruence, WillmoreError> {
    let field = f.field();
    let n = field.values().len();
    let mut blocks = Vec::with_capacity(n);
    let mut contract = SphereContract::default();
    for k in 0..n {
        let p = field.values()[k];
        let (px, py) = (geo.fx.values()[k], geo.fy.values()[k]);
        let nu = geo.normal.values()[k];
        let h = geo.mean_curvature.values()[k];
        let e1 = px.normalized();
        let e2 = (py - e1 * py.dot(e1)).normalized();
        let nl = -(e2 * e1.inverse());
        let rr = e1.inverse() * e2;
        let c = (p * h + nu) * (h / (1.0 + h * h));
        let cp = c - p;
        let w = cp.conj() * (0.5 / cp.norm_sqr());
        let ht = -(w * nl + rr * w);
        let b = [[nl - p * ht, -(nl * p) + p * ht * p - p * rr], [-ht, ht * p - rr]];

        contract.stability = contract.stability.max(sphere_equation(&b, p).norm());
        let tx = sphere_equation_derivative(&b, p, px).norm() / px.norm();
        let ty = sphere_equation_derivative(&b, p, py).norm() / py.norm();
        contract.tangency = contract.tangency.max(tx).max(ty);
        // Antipode of f and two equatorial points of the sphere of radius
        // sin ρ about c, where cot ρ = H.
        let sin_rho = 1.0 / (1.0 + h * h).sqrt();
        let probes = [c * 2.0 - p, c + e1 * sin_rho, c - e2 * sin_rho];
        for x in probes {
            contract.curvature_match = contract.curvature_match.max(sphere_equation(&b, x).norm());
        }
        blocks.push(b);
    }
    let s = GridField::from_values(*field.lattice(), true, blocks.iter().map(|b| quat_block(*b)).collect())?;
    contract.square = square_defect(&s);
    contract.quaternionic_linearity = s.values().iter().map(linearity_defect).fold(0.0, f64::max);
    let checks = [
        ("S² + 1", contract.square, tol.sphere_square),
        ("S-stability of L", contract.stability, tol.sphere_stability),
        ("sphere tangency", contract.tangency, tol.sphere_contact),
        ("mean-curvature match", contract.curvature_match, tol.sphere_contact),
        ("quaternionic linearity", contract.quaternionic_linearity, tol.sphere_square),
    ];
    for (check, value, threshold) in checks {
        if !(value <= threshold) {
            return Err(WillmoreError::Contract { check, value, threshold });
        }
    }
    Ok(SphereCongruence { s, blocks, contract })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{clifford_torus, geometry, homogeneous_torus};
    use crate::torus::Stencil;

    #[test]
    fn clifford_contract() {
        let f = clifford_torus(64).unwrap();
        let geo = geometry(&f, Stencil::Central6, 1e-10).unwrap();
        let s = conformal_gauss_map(&f, &geo, &Tolerances::default()).unwrap();
        assert!(s.contract.square < 1e-10);
        assert!(s.contract.tangency < 1e-6);
        assert!(s.contract.quaternionic_linearity < 1e-12);
    }

    #[test]
    fn homogeneous_curvature_match() {
        let f = homogeneous_torus(0.6, 64, 64).unwrap();
        let geo = geometry(&f, Stencil::Central6, 1e-10).unwrap();
        let s = conformal_gauss_map(&f, &geo, &Tolerances::default()).unwrap();
        assert!(s.contract.curvature_match < 1e-5, "{:?}", s.contract);
    }

    #[test]
    fn contract_failure_is_an_error() {
        let f = homogeneous_torus(0.6, 32, 32).unwrap();
        let geo = geometry(&f, Stencil::Central6, 1e-10).unwrap();
        let tol = Tolerances { sphere_contact: 1e-18, ..Tolerances::default() };
        assert!(matches!(conformal_gauss_map(&f, &geo, &tol), Err(WillmoreError::Contract { .. })));
    }
}
