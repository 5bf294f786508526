// SPDX-License-Identifier: Apache-2.0

//! Centralized numerical thresholds.
//!
//! Every pass/fail decision in the crate reads its threshold from a
//! [`Tolerances`] record. The defaults below are the values the verification
//! suite is calibrated against; tightening them is allowed and simply produces
//! reported failures.

use serde::{Deserialize, Serialize};

/// Thresholds used by construction checks and the verification suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    /// Unit-norm deviation accepted for immersion samples.
    pub unit_norm: f64,
    /// Relative floor below which a tangent vector counts as degenerate.
    pub degenerate_metric: f64,
    /// `|det − 1|` for SL(2, ℂ) and SL(4, ℂ) members.
    pub det_one: f64,
    /// Plaquette flatness required before frames are computed.
    pub frame_flatness: f64,
    /// Flatness that certifies a CMC family.
    pub flatness_cmc: f64,
    /// Flatness a non-CMC control must exceed.
    pub flatness_violation: f64,
    /// Identity defect of a holonomy (trivial points, closing).
    pub holonomy_identity: f64,
    /// Halving-step disagreement of a holonomy.
    pub holonomy_step: f64,
    /// Trace reality and conjugation symmetry.
    pub trace_symmetry: f64,
    /// Unitarity of unit-circle holonomy: `|Im tr|` and `|tr| − 2`.
    pub unitarity: f64,
    /// Generator holonomies commute.
    pub holonomy_commute: f64,
    /// Agreement with matrix-exponential oracles.
    pub exp_oracle: f64,
    /// Newton residual accepted for a zero of the discriminant.
    pub newton_residual: f64,
    /// Location agreement for recovered branch points.
    pub branch_location: f64,
    /// Rounding margin for a log-slope order estimate.
    pub order_rounding: f64,
    /// Distance to ±identity that flags a double point.
    pub identity_point: f64,
    /// Pairing distance in reality classification.
    pub reality_pairing: f64,
    /// Predicted versus measured mean curvature after reconstruction.
    pub sym_curvature: f64,
    /// Closing defect that certifies periodicity.
    pub periodicity: f64,
    /// Unitarity of the S³ Sym product.
    pub sym_unitarity: f64,
    /// `S² + 1` and projection identities.
    pub sphere_square: f64,
    /// Stability of the line bundle under S.
    pub sphere_stability: f64,
    /// Tangency and mean-curvature match of the mean-curvature sphere.
    pub sphere_contact: f64,
    /// Anticommutation and type identities of Hopf fields.
    pub hopf_type: f64,
    /// Euler–Lagrange residual of a Willmore fixture.
    pub willmore: f64,
    /// Flatness of the 4×4 family on a Willmore fixture.
    pub cw_flatness: f64,
    /// Palindromic defect of 4×4 holonomy characteristic polynomials.
    pub palindromic: f64,
    /// Eigenvalue gap and eigenspace detection in case classification.
    pub eigen_cluster: f64,
    /// Gauge invariance of holonomy traces.
    pub gauge_trace: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            unit_norm: 1e-12,
            degenerate_metric: 1e-10,
            det_one: 1e-9,
            frame_flatness: 1e-4,
            flatness_cmc: 1e-6,
            flatness_violation: 1e-3,
            holonomy_identity: 1e-7,
            holonomy_step: 1e-8,
            trace_symmetry: 1e-6,
            unitarity: 1e-7,
            holonomy_commute: 1e-6,
            exp_oracle: 1e-8,
            newton_residual: 1e-10,
            branch_location: 1e-6,
            order_rounding: 0.25,
            identity_point: 1e-5,
            reality_pairing: 1e-6,
            sym_curvature: 1e-3,
            periodicity: 1e-6,
            sym_unitarity: 1e-6,
            sphere_square: 1e-10,
            sphere_stability: 1e-8,
            sphere_contact: 1e-5,
            hopf_type: 1e-8,
            willmore: 1e-5,
            cw_flatness: 1e-5,
            palindromic: 1e-6,
            eigen_cluster: 1e-6,
            gauge_trace: 1e-6,
        }
    }
}

impl Tolerances {
    /// Every field, by name, for echoing and validation.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        match serde_json::to_value(self) {
            Ok(serde_json::Value::Object(map)) => {
                let mut out: Vec<(&'static str, f64)> = Vec::with_capacity(map.len());
                for name in Self::FIELD_NAMES {
                    if let Some(v) = map.get(*name).and_then(|v| v.as_f64()) {
                        out.push((name, v));
                    }
                }
                out
            }
            _ => Vec::new(),
        }
    }

    /// Field names in declaration order.
    pub const FIELD_NAMES: &'static [&'static str] = &[
        "unit_norm",
        "degenerate_metric",
        "det_one",
        "frame_flatness",
        "flatness_cmc",
        "flatness_violation",
        "holonomy_identity",
        "holonomy_step",
        "trace_symmetry",
        "unitarity",
        "holonomy_commute",
        "exp_oracle",
        "newton_residual",
        "branch_location",
        "order_rounding",
        "identity_point",
        "reality_pairing",
        "sym_curvature",
        "periodicity",
        "sym_unitarity",
        "sphere_square",
        "sphere_stability",
        "sphere_contact",
        "hopf_type",
        "willmore",
        "cw_flatness",
        "palindromic",
        "eigen_cluster",
        "gauge_trace",
    ];

    /// Sets one field by name; returns false for unknown names.
    pub fn set(&mut self, name: &str, value: f64) -> bool {
        let mut v = match serde_json::to_value(*self) {
            Ok(v) => v,
            Err(_) => return false,
        };
        match v.as_object_mut() {
            Some(map) if map.contains_key(name) => {
                map.insert(name.to_string(), serde_json::json!(value));
            }
            _ => return false,
        }
        match serde_json::from_value(v) {
            Ok(t) => {
                *self = t;
                true
            }
            Err(_) => false,
        }
    }

    /// Overrides every threshold with one value (used for stress runs).
    pub fn uniform(value: f64) -> Self {
        let mut t = Self::default();
        for name in Self::FIELD_NAMES {
            t.set(name, value);
        }
        t
    }

    /// All thresholds must be finite and strictly positive.
    pub fn validate(&self) -> Result<(), String> {
        for (name, v) in self.entries() {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_and_list_every_field() {
        let t = Tolerances::default();
        assert!(t.validate().is_ok());
        assert_eq!(t.entries().len(), Tolerances::FIELD_NAMES.len());
    }

    #[test]
    fn set_by_name() {
        let mut t = Tolerances::default();
        assert!(t.set("willmore", 1e-3));
        assert_eq!(t.willmore, 1e-3);
        assert!(!t.set("no_such_field", 1.0));
        t.set("det_one", 0.0);
        assert!(t.validate().is_err());
    }
}
