// SPDX-License-Identifier: Apache-2.0

//! Spectral data of a family: the trace function `t(λ) = tr H^λ(γ)`, zeros of
//! the discriminant `t² − 4`, genus bookkeeping, involutions and the reality
//! structure of the branch set.

mod branch;
mod reality;
mod report;
mod source;
mod sweep;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::FamilyError;

pub use branch::{branch_points, contour_probe, BranchPoint, BranchSearch, ContourProbe, Unresolved};
pub use reality::{lift_check, reality_classify, LiftCheck, RealityReport, RealityType};
pub use report::{curve_report, involution_report, InvolutionReport, SpectralCurveData, UnitCircleReport};
pub use source::{FamilyTrace, PlantedDiscriminant, SyntheticTrace, TraceSource};
pub use sweep::{trace_sweep, write_sweep_csv, TraceSample, TraceSweep};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid sampling plan: {0}")]
    Plan(String),
    #[error("trace evaluation failed at λ = {lambda}: {reason}")]
    Evaluation { lambda: num_complex::Complex64, reason: String },
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for SpectralError {
    fn from(e: std::io::Error) -> Self {
        SpectralError::Io(e.to_string())
    }
}

/// Where and how densely the trace function is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplingPlan {
    /// Samples on the unit circle.
    pub circle: usize,
    pub r_min: f64,
    pub r_max: f64,
    /// Log-spaced radii of the annulus grid.
    pub radial: usize,
    /// Angles of the annulus grid.
    pub angular: usize,
    /// Newton iterations per seed.
    pub newton_budget: usize,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        Self { circle: 64, r_min: 0.05, r_max: 20.0, radial: 32, angular: 64, newton_budget: 40 }
    }
}

impl SamplingPlan {
    pub fn validate(&self) -> Result<(), SpectralError> {
        if !(self.r_min > 0.0 && self.r_max > self.r_min && self.r_max.is_finite()) {
            return Err(SpectralError::Plan(format!("radii ({}, {})", self.r_min, self.r_max)));
        }
        for (name, v) in [("circle", self.circle), ("radial", self.radial), ("angular", self.angular)] {
            if v < 16 {
                return Err(SpectralError::Plan(format!("{name} count {v} < 16")));
            }
        }
        if self.newton_budget == 0 {
            return Err(SpectralError::Plan("zero Newton budget".into()));
        }
        Ok(())
    }

    /// Radius of annulus ring `k`, log-spaced, with an optional half-step offset.
    pub fn radius(&self, k: f64) -> f64 {
        let t = k / (self.radial - 1) as f64;
        self.r_min * (self.r_max / self.r_min).powf(t)
    }

    pub fn circle_points(&self) -> Vec<num_complex::Complex64> {
        (0..self.circle)
            .map(|k| {
                num_complex::Complex64::from_polar(1.0, std::f64::consts::TAU * (k as f64 + 0.5) / self.circle as f64)
            })
            .collect()
    }

    pub fn annulus_points(&self) -> Vec<num_complex::Complex64> {
        let mut out = Vec::with_capacity(self.radial * self.angular);
        for i in 0..self.radial {
            let r = self.radius(i as f64);
            for j in 0..self.angular {
                let phi = std::f64::consts::TAU * (j as f64 + 0.25) / self.angular as f64;
                out.push(num_complex::Complex64::from_polar(r, phi));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plan_validation() {
        assert!(SamplingPlan::default().validate().is_ok());
        assert!(SamplingPlan { r_min: 0.0, ..Default::default() }.validate().is_err());
        assert!(SamplingPlan { angular: 8, ..Default::default() }.validate().is_err());
        let p = SamplingPlan::default();
        assert!((p.radius(0.0) - 0.05).abs() < 1e-15);
        assert!((p.radius((p.radial - 1) as f64) - 20.0).abs() < 1e-12);
    }
}
