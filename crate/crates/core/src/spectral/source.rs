// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::SpectralError;
use crate::algebra::ComplexMat2;
use crate::family::{holonomy_fast, ConnectionFamily, FamilyConfig};

/// Anything that can evaluate a trace function on `ℂ∖{0}`.
pub trait TraceSource: Sync {
    fn trace(&self, lambda: Complex64) -> Result<Complex64, SpectralError>;

    /// `D(λ) = t(λ)² − 4`.
    fn discriminant(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        let t = self.trace(lambda)?;
        Ok(t * t - 4.0)
    }

    /// The underlying SL(2) holonomy, when there is one.
    fn holonomy(&self, _lambda: Complex64) -> Option<Result<ComplexMat2, SpectralError>> {
        None
    }
}

/// Traces of a connection family along one generator.
pub struct FamilyTrace<'a> {
    pub family: &'a ConnectionFamily,
    pub generator: usize,
    pub config: FamilyConfig,
}

impl<'a> FamilyTrace<'a> {
    pub fn new(family: &'a ConnectionFamily, generator: usize, config: FamilyConfig) -> Self {
        Self { family, generator, config }
    }
}

impl TraceSource for FamilyTrace<'_> {
    fn trace(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        let m = self.holonomy(lambda).expect("family traces have holonomy")?;
        Ok(m.trace())
    }

    fn holonomy(&self, lambda: Complex64) -> Option<Result<ComplexMat2, SpectralError>> {
        let m = holonomy_fast(self.family, lambda, self.generator, &self.config).map_err(SpectralError::from);
        Some(m.and_then(|m| {
            if m.is_finite() {
                Ok(m)
            } else {
                Err(SpectralError::Evaluation { lambda, reason: "non-finite holonomy".into() })
            }
        }))
    }
}

/// A trace function given directly as a closure.
pub struct SyntheticTrace<F> {
    f: F,
}

impl<F: Fn(Complex64) -> Complex64 + Sync> SyntheticTrace<F> {
    pub fn new(f: F) -> Self {
        Self { f }
    }
}

impl<F: Fn(Complex64) -> Complex64 + Sync> TraceSource for SyntheticTrace<F> {
    fn trace(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        Ok((self.f)(lambda))
    }
}

/// A discriminant with planted zeros in reality-symmetric pairs,
///
/// `D(λ) = κ Π h_i(λ)^{m_i}`, `h(λ) = q⁻¹ λ⁻¹ (λ − q)(λ − q̄⁻¹)`,
///
/// so that `D(λ̄⁻¹) = conj D(λ)` for real `κ`. The trace is the principal
/// square root of `D + 4`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedDiscriminant {
    pub kappa: f64,
    /// `(q, m)`: the pair `{q, q̄⁻¹}` planted with order `m`.
    pub pairs: Vec<(Complex64, u32)>,
}

impl PlantedDiscriminant {
    pub fn new(kappa: f64, pairs: Vec<(Complex64, u32)>) -> Self {
        Self { kappa, pairs }
    }

    /// Every planted zero with its order.
    pub fn zeros(&self) -> Vec<(Complex64, u32)> {
        let mut out = Vec::new();
        for &(q, m) in &self.pairs {
            let partner = q.conj().inv();
            if (partner - q).norm() < 1e-14 {
                out.push((q, 2 * m));
            } else {
                out.push((q, m));
                out.push((partner, m));
            }
        }
        out
    }

    /// Distinct odd-order zeros, halved.
    pub fn genus(&self) -> usize {
        self.zeros().iter().filter(|(_, m)| m % 2 == 1).count() / 2
    }

    /// Total multiplicity, halved.
    pub fn arithmetic_genus(&self) -> usize {
        self.zeros().iter().map(|(_, m)| *m as usize).sum::<usize>() / 2
    }
}

impl TraceSource for PlantedDiscriminant {
    fn trace(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        Ok((self.discriminant(lambda)? + 4.0).sqrt())
    }

    fn discriminant(&self, lambda: Complex64) -> Result<Complex64, SpectralError> {
        if lambda.norm() == 0.0 {
            return Err(SpectralError::Evaluation { lambda, reason: "λ = 0".into() });
        }
        let li = lambda.inv();
        Ok(self.pairs.iter().fold(Complex64::new(self.kappa, 0.0), |acc, &(q, m)| {
            let h = q.inv() * li * (lambda - q) * (lambda - q.conj().inv());
            acc * h.powu(m)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_discriminant_is_reality_symmetric() {
        let d = PlantedDiscriminant::new(
            1.7,
            vec![(Complex64::new(0.3, 0.4), 1), (Complex64::new(-0.5, 0.1), 2), (Complex64::new(0.0, 0.7), 3)],
        );
        for lambda in [Complex64::new(0.4, 1.3), Complex64::new(-2.0, 0.1), Complex64::new(0.2, -0.3)] {
            let a = d.discriminant(lambda.conj().inv()).unwrap();
            let b = d.discriminant(lambda).unwrap().conj();
            assert!((a - b).norm() < 1e-12 * b.norm().max(1.0));
        }
        assert_eq!(d.genus(), 2);
        assert_eq!(d.arithmetic_genus(), 6);
        for (q, _) in d.zeros() {
            assert!(d.discriminant(q).unwrap().norm() < 1e-12);
        }
    }
}
