// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use serde::Serialize;

use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RealityType {
    /// Closed under `q ↦ q̄⁻¹`.
    PlusType,
    /// Closed under `q ↦ −q̄⁻¹`.
    MinusType,
    Inconsistent,
}

/// Attempted lift of `λ ↦ ±λ̄⁻¹` to the curve `η² = P(λ)`,
/// `τ(η, λ) = (κ η̄ λ̄^{−(g+1)}, ±λ̄⁻¹)` with `κ² = P(±λ̄⁻¹) / (λ̄^{−(2g+2)} conj P(λ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LiftCheck {
    pub sign: i8,
    pub genus: usize,
    pub kappa: Complex64,
    /// Variation of `κ²` across test points (zero when the lift exists).
    pub ratio_spread: f64,
    /// Largest relative miss of `τ(η, λ)` from the curve.
    pub curve_defect: f64,
    /// `τ²(η) / η` at the test points; `1` for an involution.
    pub square_multiplier: Complex64,
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealityReport {
    pub class: RealityType,
    pub plus_defect: f64,
    pub minus_defect: f64,
    pub lift: Option<LiftCheck>,
    /// Minus-type set whose lift squares to the sheet exchange instead of the
    /// identity.
    pub lift_inconsistent: bool,
}

fn pairing_defect(points: &[Complex64], map: impl Fn(Complex64) -> Complex64) -> f64 {
    points
        .iter()
        .map(|&q| {
            let m = map(q);
            points.iter().map(|&p| (p - m).norm()).fold(f64::INFINITY, f64::min) / q.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

const TEST_POINTS: [(f64, f64); 3] = [(0.7, 0.3), (-1.3, 0.4), (0.2, -1.1)];

pub fn lift_check(points: &[Complex64], sign: i8, tol: &Tolerances) -> Option<LiftCheck> {
    if points.len() < 2 || points.len() % 2 == 1 {
        return None;
    }
    let genus = points.len() / 2 - 1;
    let e = (genus + 1) as i32;
    let p = |l: Complex64| points.iter().fold(Complex64::new(1.0, 0.0), |acc, &q| acc * (l - q));
    let s = sign as f64;
    let mu = |l: Complex64| l.conj().inv() * s;
    let ratios: Vec<Complex64> = TEST_POINTS
        .iter()
        .map(|&(a, b)| {
            let l = Complex64::new(a, b);
            p(mu(l)) / (l.conj().powi(-2 * e) * p(l).conj())
        })
        .collect();
    let ratio_spread = ratios.iter().map(|r| (r - ratios[0]).norm()).fold(0.0, f64::max) / ratios[0].norm();
    let kappa = ratios[0].sqrt();
    let tau = |eta: Complex64, l: Complex64| (kappa * eta.conj() * l.conj().powi(-e), mu(l));
    let mut curve_defect: f64 = 0.0;
    let mut multiplier = Complex64::new(0.0, 0.0);
    for &(a, b) in &TEST_POINTS {
        let l = Complex64::new(a, b);
        let eta = p(l).sqrt();
        let (eta1, l1) = tau(eta, l);
        curve_defect = curve_defect.max((eta1 * eta1 - p(l1)).norm() / p(l1).norm());
        let (eta2, l2) = tau(eta1, l1);
        debug_assert!((l2 - l).norm() < 1e-12 * l.norm().max(1.0));
        multiplier = eta2 / eta;
    }
    let ok = ratio_spread < tol.reality_pairing && curve_defect < tol.reality_pairing;
    Some(LiftCheck {
        sign,
        genus,
        kappa,
        ratio_spread,
        curve_defect,
        square_multiplier: multiplier,
        consistent: ok && (multiplier - 1.0).norm() < tol.reality_pairing,
    })
}

/// Classifies a branch set by the pairing it is closed under and checks the
/// corresponding lift to the curve.
pub fn reality_classify(points: &[Complex64], tol: &Tolerances) -> RealityReport {
    let plus_defect = pairing_defect(points, |q| q.conj().inv());
    let minus_defect = pairing_defect(points, |q| -q.conj().inv());
    let class = if plus_defect <= tol.reality_pairing {
        RealityType::PlusType
    } else if minus_defect <= tol.reality_pairing {
        RealityType::MinusType
    } else {
        RealityType::Inconsistent
    };
    let lift = match class {
        RealityType::PlusType => lift_check(points, 1, tol),
        RealityType::MinusType => lift_check(points, -1, tol),
        RealityType::Inconsistent => None,
    };
    RealityReport {
        class,
        plus_defect,
        minus_defect,
        lift_inconsistent: class == RealityType::MinusType && lift.map_or(true, |l| !l.consistent),
        lift,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classic_examples() {
        let tol = Tolerances::default();
        let real_pair = reality_classify(&[c(2.0, 0.0), c(0.5, 0.0)], &tol);
        assert_eq!(real_pair.class, RealityType::PlusType);
        assert!(real_pair.lift.unwrap().consistent);
        // q̄⁻¹ of 2i is i/2, so this pair is plus type.
        assert_eq!(reality_classify(&[c(0.0, 2.0), c(0.0, 0.5)], &tol).class, RealityType::PlusType);
        let minus = reality_classify(&[c(0.0, 2.0), c(0.0, -0.5)], &tol);
        assert_eq!(minus.class, RealityType::MinusType);
        // Two points: g = 0, even, so the lift squares to η ↦ −η.
        assert!(minus.lift_inconsistent);
        assert!((minus.lift.unwrap().square_multiplier + 1.0).norm() < 1e-9);
        assert_eq!(reality_classify(&[c(0.3, 0.1), c(2.0, 1.0)], &tol).class, RealityType::Inconsistent);
    }

    #[test]
    fn minus_type_parity() {
        let tol = Tolerances::default();
        let reps = [c(0.4, 0.2), c(-0.3, 0.5), c(0.6, -0.1), c(-0.2, -0.45)];
        for g in 0..=3usize {
            let pts: Vec<Complex64> = reps[..g + 1].iter().flat_map(|&q| [q, -q.conj().inv()]).collect();
            let r = reality_classify(&pts, &tol);
            assert_eq!(r.class, RealityType::MinusType);
            assert_eq!(r.lift.unwrap().genus, g);
            assert_eq!(r.lift_inconsistent, g % 2 == 0, "g = {g}: {r:?}");
        }
    }
}
