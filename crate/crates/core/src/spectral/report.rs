// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{BranchPoint, BranchSearch, SpectralError, TraceSample, TraceSource, TraceSweep};
use crate::Tolerances;

/// Unit-circle behaviour of the trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UnitCircleReport {
    pub samples: usize,
    pub max_abs_imag: f64,
    pub max_abs_trace: f64,
    /// Fraction of samples with real trace in `[−2, 2]` (eigenvalues on the
    /// unit circle).
    pub fixed_point_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralCurveData {
    pub branch_points: Vec<BranchPoint>,
    /// Distinct odd-order zeros away from `±I` holonomy, halved.
    pub geometric_genus: usize,
    /// Total multiplicity of zeros away from `±I` holonomy, halved.
    pub arithmetic_genus: usize,
    /// Total multiplicity of all zeros, halved.
    pub arithmetic_genus_with_identity: usize,
    pub identity_points: usize,
    /// `max_i min_j |q_i − q̄_j⁻¹|`.
    pub reality_defect: f64,
    pub simple: bool,
    /// The odd-order count is even, so the normal form has odd degree and the
    /// curve branches over `0` and `∞`.
    pub branched_over_zero_and_infinity: bool,
    pub orders_resolved: bool,
    pub search_complete: bool,
    pub unresolved: usize,
    pub unit_circle: UnitCircleReport,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InvolutionReport {
    /// `max |η η′ − 1|` over holonomy samples.
    pub sigma_defect: f64,
    /// `max |t(λ̄⁻¹) − conj t(λ)|` over the annulus samples.
    pub rho_defect: f64,
    /// The same, divided by `max(1, |t(λ)|)`.
    pub rho_defect_relative: f64,
    pub fixed_point_fraction: f64,
    pub samples: usize,
}

fn unit_circle(samples: &[TraceSample], tol: &Tolerances) -> UnitCircleReport {
    let traces: Vec<Complex64> = samples.iter().filter_map(|s| s.trace).collect();
    let n = traces.len().max(1) as f64;
    UnitCircleReport {
        samples: traces.len(),
        max_abs_imag: traces.iter().map(|t| t.im.abs()).fold(0.0, f64::max),
        max_abs_trace: traces.iter().map(|t| t.norm()).fold(0.0, f64::max),
        fixed_point_fraction: traces
            .iter()
            .filter(|t| t.im.abs() <= tol.unitarity && t.re.abs() <= 2.0 + tol.unitarity)
            .count() as f64
            / n,
    }
}

/// Genus bookkeeping for a branch search.
pub fn curve_report(search: &BranchSearch, sweep: &TraceSweep, tol: &Tolerances) -> SpectralCurveData {
    let pts = &search.points;
    let regular: Vec<&BranchPoint> = pts.iter().filter(|p| !p.is_identity_holonomy).collect();
    let odd = regular.iter().filter(|p| p.order % 2 == 1).count();
    let g = odd / 2;
    let p = regular.iter().map(|b| b.order as usize).sum::<usize>() / 2;
    let p_all = pts.iter().map(|b| b.order as usize).sum::<usize>() / 2;
    let reality_defect = pts
        .iter()
        .map(|a| pts.iter().map(|b| (a.q - b.q.conj().inv()).norm()).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    SpectralCurveData {
        geometric_genus: g,
        arithmetic_genus: p,
        arithmetic_genus_with_identity: p_all,
        identity_points: pts.len() - regular.len(),
        reality_defect,
        simple: p == g,
        branched_over_zero_and_infinity: odd % 2 == 0,
        orders_resolved: pts.iter().all(|b| b.order_resolved),
        search_complete: search.complete,
        unresolved: search.unresolved.len(),
        unit_circle: unit_circle(&sweep.circle, tol),
        branch_points: pts.clone(),
    }
}

/// Measures the hyperelliptic involution `σ: η ↦ η⁻¹`, the reality
/// involution `ρ` over `λ ↦ λ̄⁻¹`, and unit-circle fixed points of `ρ∘σ`.
pub fn involution_report<S: TraceSource + ?Sized>(
    source: &S,
    sweep: &TraceSweep,
    tol: &Tolerances,
) -> Result<InvolutionReport, SpectralError> {
    let sigma_defect = sweep.circle.iter().chain(&sweep.annulus).filter_map(|s| s.sigma_defect).fold(0.0, f64::max);
    let pairs: Vec<(f64, f64)> = sweep
        .annulus
        .par_iter()
        .filter_map(|s| {
            let t = s.trace?;
            let u = source.trace(s.lambda.conj().inv()).ok()?;
            let d = (u - t.conj()).norm();
            Some((d, d / t.norm().max(1.0)))
        })
        .collect();
    Ok(InvolutionReport {
        sigma_defect,
        rho_defect: pairs.iter().map(|p| p.0).fold(0.0, f64::max),
        rho_defect_relative: pairs.iter().map(|p| p.1).fold(0.0, f64::max),
        fixed_point_fraction: unit_circle(&sweep.circle, tol).fixed_point_fraction,
        samples: pairs.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{branch_points, trace_sweep, PlantedDiscriminant, SamplingPlan};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn report(d: &PlantedDiscriminant) -> SpectralCurveData {
        let plan = SamplingPlan::default();
        let tol = Tolerances::default();
        let search = branch_points(d, &plan, &tol).unwrap();
        curve_report(&search, &trace_sweep(d, &plan).unwrap(), &tol)
    }

    #[test]
    fn genus_counts() {
        let none = report(&PlantedDiscriminant::new(1.0, vec![]));
        assert_eq!((none.geometric_genus, none.arithmetic_genus, none.simple), (0, 0, true));
        let one = report(&PlantedDiscriminant::new(1.0, vec![(c(0.4, 0.3), 1)]));
        assert_eq!((one.geometric_genus, one.arithmetic_genus, one.simple), (1, 1, true));
        assert!(one.reality_defect < 1e-6);
        // A double zero on the unit circle plus a simple pair.
        let mixed = report(&PlantedDiscriminant::new(1.0, vec![(c(0.0, 1.0), 1), (c(0.5, 0.0), 1)]));
        assert_eq!(mixed.branch_points.len(), 3);
        assert_eq!((mixed.geometric_genus, mixed.arithmetic_genus, mixed.simple), (1, 2, false));
        assert!(mixed.branched_over_zero_and_infinity);
    }
}
