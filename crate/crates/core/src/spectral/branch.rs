// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{LN_2, PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{SamplingPlan, SpectralError, TraceSource};
use crate::algebra::ComplexMat2;
use crate::Tolerances;

/// A zero of `t² − 4` in `ℂ∖{0}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchPoint {
    pub q: Complex64,
    /// Zero order from the log-slope fit.
    pub order: u32,
    pub order_estimate: f64,
    /// Both slopes round to the same integer within the margin and agree with
    /// the winding number.
    pub order_resolved: bool,
    pub winding: i64,
    /// The holonomy at `q` is `±I` within tolerance.
    pub is_identity_holonomy: bool,
    pub identity_defect: Option<f64>,
    pub residual: f64,
    pub probe_radius: f64,
}

/// A winding seed that did not lead to a certified zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Unresolved {
    pub seed: Complex64,
    pub last: Complex64,
    pub residual: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BranchSearch {
    pub points: Vec<BranchPoint>,
    pub unresolved: Vec<Unresolved>,
    /// Zero count with multiplicity from the winding on the annulus boundary.
    pub expected_multiplicity: Option<i64>,
    /// Sum of the windings of the located points.
    pub found_multiplicity: i64,
    pub complete: bool,
}

/// Argument-principle moments of `D` on a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContourProbe {
    pub center: Complex64,
    pub radius: f64,
    /// `(1/2πi)∮ D′/D`.
    pub winding: Complex64,
    /// `(1/2πi)∮ λ D′/D`, the sum of the enclosed zeros.
    pub first_moment: Complex64,
    /// `(1/2πi)∮ λ² D′/D`.
    pub second_moment: Complex64,
    /// Mean of `log |D|` over the circle.
    pub jensen: f64,
    pub samples: usize,
}

impl ContourProbe {
    pub fn count(&self) -> i64 {
        self.winding.re.round() as i64
    }

    pub fn centroid(&self) -> Complex64 {
        self.first_moment / self.winding.re.round()
    }

    /// Root-mean-square distance of the enclosed zeros from their centroid.
    pub fn spread(&self) -> f64 {
        let n = self.winding.re.round();
        let c = self.centroid();
        (self.second_moment / n - c * c).norm().sqrt()
    }
}

fn eval<S: TraceSource + ?Sized>(source: &S, l: Complex64) -> Option<Complex64> {
    source.discriminant(l).ok().filter(|d| d.is_finite())
}

/// Spectral derivative in the angle of periodic samples.
fn angular_derivative(d: &[Complex64]) -> (Vec<Complex64>, f64) {
    let k = d.len();
    let w = |m: usize| Complex64::from_polar(1.0, -TAU * m as f64 / k as f64);
    let mut coef = vec![Complex64::new(0.0, 0.0); k];
    for (n, c) in coef.iter_mut().enumerate() {
        *c = d.iter().enumerate().map(|(j, &v)| v * w((n * j) % k)).sum::<Complex64>() / k as f64;
    }
    let freq = |n: usize| -> f64 {
        if 2 * n < k {
            n as f64
        } else if 2 * n == k {
            0.0
        } else {
            n as f64 - k as f64
        }
    };
    let peak = coef.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
    let tail = coef
        .iter()
        .enumerate()
        .filter(|(n, _)| freq(*n).abs() >= 3.0 * k as f64 / 8.0)
        .map(|(_, c)| c.norm())
        .fold(0.0, f64::max)
        / peak;
    let out = (0..k)
        .map(|j| {
            coef.iter().enumerate().map(|(n, &c)| c * Complex64::new(0.0, freq(n)) * w((k - (n * j) % k) % k)).sum()
        })
        .collect();
    (out, tail)
}

/// Probes `D` on the circle `|λ − center| = radius`, doubling the sample
/// count until the angular spectrum is resolved.
pub fn contour_probe<S: TraceSource + ?Sized>(
    source: &S,
    center: Complex64,
    radius: f64,
) -> Result<ContourProbe, SpectralError> {
    let mut k = 64;
    loop {
        let pts: Vec<Complex64> =
            (0..k).map(|j| center + Complex64::from_polar(radius, TAU * j as f64 / k as f64)).collect();
        let vals: Vec<Option<Complex64>> = pts.par_iter().map(|&l| eval(source, l)).collect();
        let vals: Option<Vec<Complex64>> = vals.into_iter().collect();
        let d = vals.ok_or_else(|| SpectralError::Evaluation {
            lambda: center,
            reason: "discriminant failed on probe circle".into(),
        })?;
        if d.iter().any(|v| v.norm() == 0.0) {
            return Err(SpectralError::Evaluation { lambda: center, reason: "zero on probe circle".into() });
        }
        let (dphi, tail) = angular_derivative(&d);
        if tail > 1e-10 && k < 1024 {
            k *= 2;
            continue;
        }
        let i = Complex64::new(0.0, 1.0);
        let mut m = [Complex64::new(0.0, 0.0); 3];
        let mut jensen = 0.0;
        for j in 0..k {
            let r = dphi[j] / (i * d[j]);
            m[0] += r;
            m[1] += r * pts[j];
            m[2] += r * pts[j] * pts[j];
            jensen += d[j].norm().ln();
        }
        let kf = k as f64;
        return Ok(ContourProbe {
            center,
            radius,
            winding: m[0] / kf,
            first_moment: m[1] / kf,
            second_moment: m[2] / kf,
            jensen: jensen / kf,
            samples: k,
        });
    }
}

/// Phase increment of `D` along `path(t)`, `t ∈ [a, b]`, bisecting wherever
/// the phase moves by more than π/4 between samples or the midpoint
/// disagrees with the chord (a full turn hidden between two samples).
fn path_phase<S: TraceSource + ?Sized>(
    source: &S,
    path: &(dyn Fn(f64) -> Complex64 + Sync),
    (a, b): (f64, f64),
    (da, db): (Complex64, Complex64),
    depth: u32,
) -> Option<f64> {
    let step = (db / da).arg();
    let m = 0.5 * (a + b);
    let dm = eval(source, path(m)).filter(|d| d.norm() > 0.0)?;
    let (s1, s2) = ((dm / da).arg(), (db / dm).arg());
    if step.abs() < PI / 4.0 && s1.abs() < PI / 4.0 && s2.abs() < PI / 4.0 {
        return Some(s1 + s2);
    }
    if depth == 0 {
        return None;
    }
    Some(
        path_phase(source, path, (a, m), (da, dm), depth - 1)? + path_phase(source, path, (m, b), (dm, db), depth - 1)?,
    )
}

/// Angular offset of the seeding grid, chosen so that real and imaginary axes
/// never lie on a cell edge.
const ANGLE_OFFSET: f64 = 0.318_309_886;

struct Cell {
    index: (usize, usize),
    center: Complex64,
    winding: i64,
    /// Rough diameter, used to decide whether a located zero explains the cell.
    size: f64,
}

/// Grid cell containing `l`, if inside the annulus.
fn cell_index(plan: &SamplingPlan, l: Complex64) -> Option<(usize, usize)> {
    let (nr, na) = (plan.radial, plan.angular);
    let x = (l.norm().ln() - plan.r_min.ln()) / (plan.r_max / plan.r_min).ln() * (nr - 1) as f64;
    if !(x >= 0.0 && x < (nr - 1) as f64) {
        return None;
    }
    let y = (l.arg().rem_euclid(TAU) * na as f64 / TAU - ANGLE_OFFSET).floor().rem_euclid(na as f64);
    Some((x.floor() as usize, y as usize % na))
}

/// Cluster label of every cell; cells sharing an edge or a corner (with the
/// angle wrapping) are in the same cluster.
fn clusters(cells: &[Cell], na: usize) -> Vec<usize> {
    let mut label: Vec<Option<usize>> = vec![None; cells.len()];
    let mut next = 0;
    for start in 0..cells.len() {
        if label[start].is_some() {
            continue;
        }
        label[start] = Some(next);
        let mut stack = vec![start];
        while let Some(a) = stack.pop() {
            let (ia, ja) = cells[a].index;
            for (b, cb) in cells.iter().enumerate() {
                let (ib, jb) = cb.index;
                let dj = ja.abs_diff(jb).min(na - ja.abs_diff(jb));
                if label[b].is_none() && ia.abs_diff(ib) <= 1 && dj <= 1 {
                    label[b] = Some(next);
                    stack.push(b);
                }
            }
        }
        next += 1;
    }
    label.into_iter().map(|l| l.unwrap_or(0)).collect()
}

/// Winding numbers of `D` around every cell of the log-polar grid spanning
/// the annulus. The sum is the zero count of the annulus.
fn grid_cells<S: TraceSource + ?Sized>(source: &S, plan: &SamplingPlan) -> Result<Vec<Cell>, SpectralError> {
    let (nr, na) = (plan.radial, plan.angular);
    let log_r = |x: f64| plan.r_min.ln() + (plan.r_max / plan.r_min).ln() * x / (nr - 1) as f64;
    let ang = |y: f64| TAU * (y + ANGLE_OFFSET) / na as f64;
    let at = |x: f64, y: f64| Complex64::from_polar(log_r(x).exp(), ang(y));
    let vals: Vec<Option<Complex64>> =
        (0..nr * na).into_par_iter().map(|k| eval(source, at((k / na) as f64, (k % na) as f64))).collect();
    let node = |i: usize, j: usize| -> Result<Complex64, SpectralError> {
        vals[i * na + j % na].filter(|d| d.norm() > 0.0).ok_or_else(|| SpectralError::Evaluation {
            lambda: at(i as f64, j as f64),
            reason: "discriminant failed on the seeding grid".into(),
        })
    };
    let fail =
        |l: Complex64| SpectralError::Evaluation { lambda: l, reason: "phase not resolved along a grid edge".into() };
    // Radial edges (i, j) → (i + 1, j) and angular edges (i, j) → (i, j + 1).
    let radial: Vec<Result<f64, SpectralError>> = (0..(nr - 1) * na)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / na, k % na);
            let path = move |t: f64| at(t, j as f64);
            path_phase(source, &path, (i as f64, i as f64 + 1.0), (node(i, j)?, node(i + 1, j)?), 16)
                .ok_or_else(|| fail(at(i as f64 + 0.5, j as f64)))
        })
        .collect();
    let angular: Vec<Result<f64, SpectralError>> = (0..nr * na)
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / na, k % na);
            let path = move |t: f64| at(i as f64, t);
            path_phase(source, &path, (j as f64, j as f64 + 1.0), (node(i, j)?, node(i, j + 1)?), 16)
                .ok_or_else(|| fail(at(i as f64, j as f64 + 0.5)))
        })
        .collect();
    let radial: Vec<f64> = radial.into_iter().collect::<Result<_, _>>()?;
    let angular: Vec<f64> = angular.into_iter().collect::<Result<_, _>>()?;
    let mut cells = Vec::new();
    for i in 0..nr - 1 {
        for j in 0..na {
            // Counter-clockwise in λ: out along ring i's radial edge, round the
            // outer arc, back in, then back along the inner arc.
            let w =
                radial[i * na + j] + angular[(i + 1) * na + j] - radial[i * na + (j + 1) % na] - angular[i * na + j];
            let w = (w / TAU).round() as i64;
            if w != 0 {
                let center = at(i as f64 + 0.5, j as f64 + 0.5);
                let size = (at(i as f64 + 1.0, j as f64 + 1.0) - at(i as f64, j as f64)).norm();
                cells.push(Cell { index: (i, j), center, winding: w, size });
            }
        }
    }
    Ok(cells)
}

/// Newton iteration with steps `m·D/D′`, `m ∈ {1, 2, 3, 4}` chosen to minimize
/// the next `|D|`; multiple zeros converge as fast as simple ones.
fn newton<S: TraceSource + ?Sized>(source: &S, seed: Complex64, budget: usize) -> (Complex64, f64, bool) {
    let mut l = seed;
    let Some(mut d) = eval(source, l) else {
        return (l, f64::INFINITY, false);
    };
    for _ in 0..budget {
        if d.norm() == 0.0 {
            return (l, 0.0, true);
        }
        let h = 1e-6 * l.norm();
        let (Some(dp), Some(dm)) = (eval(source, l + h), eval(source, l - h)) else {
            return (l, d.norm(), false);
        };
        let deriv = (dp - dm) / (2.0 * h);
        if deriv.norm() == 0.0 || !deriv.is_finite() {
            return (l, d.norm(), false);
        }
        let base = d / deriv;
        let mut best: Option<(Complex64, Complex64)> = None;
        for m in 1..=4 {
            let cand = l - base * m as f64;
            if cand.norm() == 0.0 {
                continue;
            }
            if let Some(dc) = eval(source, cand) {
                if best.map_or(true, |(_, b)| dc.norm() < b.norm()) {
                    best = Some((cand, dc));
                }
            }
        }
        let Some((next, dn)) = best else {
            return (l, d.norm(), false);
        };
        if dn.norm() >= d.norm() {
            return (l, d.norm(), true);
        }
        let moved = (next - l).norm();
        l = next;
        d = dn;
        if moved < 1e-13 * l.norm() {
            return (l, d.norm(), true);
        }
    }
    (l, d.norm(), true)
}

fn identity_defect(m: &ComplexMat2) -> f64 {
    let i = ComplexMat2::identity();
    (*m - i).max_abs().min((*m + i).max_abs())
}

/// Certifies and measures one zero near `guess`: contour moments give the
/// count and location, log-slopes of the Jensen means over three radii give
/// the order.
fn certify<S: TraceSource + ?Sized>(
    source: &S,
    guess: Complex64,
    radius: f64,
    tol: &Tolerances,
) -> Result<Option<BranchPoint>, SpectralError> {
    let mut rho = radius;
    let mut probe = contour_probe(source, guess, rho)?;
    for _ in 0..6 {
        if probe.count() <= 0 || probe.spread() <= 1e-3 * rho {
            break;
        }
        rho *= 0.5;
        probe = contour_probe(source, guess, rho)?;
    }
    if probe.count() <= 0 || (probe.winding.re - probe.count() as f64).abs() > 1e-6 {
        return Ok(None);
    }
    // Recentre so the zero sits well inside all three slope circles.
    let center = probe.centroid();
    let p1 = contour_probe(source, center, rho)?;
    if p1.count() != probe.count() {
        return Ok(None);
    }
    let q = p1.centroid();
    let j2 = contour_probe(source, center, rho / 2.0)?.jensen;
    let j3 = contour_probe(source, center, rho / 4.0)?.jensen;
    let s1 = (p1.jensen - j2) / LN_2;
    let s2 = (j2 - j3) / LN_2;
    let estimate = 0.5 * (s1 + s2);
    let order = estimate.round().max(1.0);
    let winding = p1.count();
    let order_resolved =
        (s1 - order).abs() <= tol.order_rounding && (s2 - order).abs() <= tol.order_rounding && order as i64 == winding;
    let identity_defect = match source.holonomy(q) {
        Some(Ok(m)) => Some(identity_defect(&m)),
        _ => None,
    };
    Ok(Some(BranchPoint {
        q,
        order: order as u32,
        order_estimate: estimate,
        order_resolved,
        winding,
        is_identity_holonomy: identity_defect.is_some_and(|d| d < tol.identity_point),
        identity_defect,
        residual: eval(source, q).map_or(f64::INFINITY, |d| d.norm()),
        probe_radius: rho,
    }))
}

/// One zero inside `|λ − center| < radius` that `known` does not account for:
/// Newton from the deflated contour centroid, then certification.
fn rescue<S: TraceSource + ?Sized>(
    source: &S,
    center: Complex64,
    radius: f64,
    known: &[BranchPoint],
    plan: &SamplingPlan,
    tol: &Tolerances,
) -> Option<BranchPoint> {
    let probe = contour_probe(source, center, radius).ok()?;
    let inside = known.iter().filter(|p| (p.q - center).norm() < radius);
    let (count, moment) =
        inside.fold((probe.count(), probe.first_moment), |(n, m), p| (n - p.winding, m - p.q * p.winding as f64));
    if count <= 0 {
        return None;
    }
    let (l, _, ok) = newton(source, moment / count as f64, plan.newton_budget);
    if !ok || !l.is_finite() || l.norm() == 0.0 {
        return None;
    }
    let nearest = known.iter().map(|p| (p.q - l).norm()).fold(f64::INFINITY, f64::min);
    let r = (0.3 * nearest).min(0.25 * l.norm()).min(0.25).min(radius);
    let bp = certify(source, l, r, tol).ok().flatten()?;
    let new = known.iter().all(|p| (p.q - bp.q).norm() >= tol.branch_location * bp.q.norm().max(1.0));
    new.then_some(bp)
}

/// Orders by modulus (quantized, so ties on a circle fall back to the
/// argument), then by argument.
pub(crate) fn sort_key(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    let q = |z: &Complex64| (z.norm() * 1e8).round();
    q(a).total_cmp(&q(b)).then(a.arg().total_cmp(&b.arg()))
}

/// Locates the zeros of `t² − 4` in the annulus of the plan.
///
/// Cells of a log-polar grid with nonzero phase winding seed a
/// multiplicity-adaptive Newton iteration; each end point is then certified
/// by contour moments. The total grid winding is the zero count of the
/// annulus, which the located zeros must reproduce.
pub fn branch_points<S: TraceSource + ?Sized>(
    source: &S,
    plan: &SamplingPlan,
    tol: &Tolerances,
) -> Result<BranchSearch, SpectralError> {
    plan.validate()?;
    let cells = grid_cells(source, plan)?;
    let expected: i64 = cells.iter().map(|c| c.winding).sum();
    let polished: Vec<(Complex64, f64, bool)> =
        cells.par_iter().map(|c| newton(source, c.center, plan.newton_budget)).collect();
    let inside = |l: Complex64| l.norm() >= plan.r_min * 0.9 && l.norm() <= plan.r_max * 1.1 && l.is_finite();

    // Newton stalls at distance ~ε^{1/m} from a zero of order m, so end points
    // of one zero are merged generously; contour moments then separate or
    // confirm them.
    let mut centers: Vec<Complex64> = Vec::new();
    for &(l, _, ok) in &polished {
        if ok && inside(l) && !centers.iter().any(|c| (*c - l).norm() < 2e-3 * l.norm()) {
            centers.push(l);
        }
    }
    centers.sort_by(sort_key);
    let radius_for = |k: usize| -> f64 {
        let c = centers[k];
        let nearest = centers
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != k)
            .map(|(_, o)| (*o - c).norm())
            .fold(f64::INFINITY, f64::min);
        (0.3 * nearest).min(0.25 * c.norm()).min(0.25)
    };
    let certified: Vec<Result<Option<BranchPoint>, SpectralError>> =
        (0..centers.len()).into_par_iter().map(|k| certify(source, centers[k], radius_for(k), tol)).collect();

    let mut points: Vec<BranchPoint> = Vec::new();
    for c in certified {
        let Ok(Some(bp)) = c else { continue };
        if bp.q.norm() < plan.r_min || bp.q.norm() > plan.r_max {
            continue;
        }
        if points.iter().any(|p| (p.q - bp.q).norm() < tol.branch_location * bp.q.norm().max(1.0)) {
            continue;
        }
        points.push(bp);
    }
    // A winding can leak across the edge between two cells when a multiple
    // zero sits close to it, so accounting is per cluster of adjacent cells.
    let cluster = clusters(&cells, plan.angular);
    let n_clusters = cluster.iter().copied().max().map_or(0, |m| m + 1);
    let unexplained = |points: &[BranchPoint]| -> Vec<bool> {
        let mut balance = vec![0i64; n_clusters];
        for (c, &k) in cells.iter().zip(&cluster) {
            balance[k] += c.winding;
        }
        for p in points {
            if let Some(idx) = cell_index(plan, p.q) {
                if let Some(k) = cells.iter().position(|c| c.index == idx) {
                    balance[cluster[k]] -= p.winding;
                }
            }
        }
        balance.iter().map(|&b| b != 0).collect()
    };

    // Cells whose Newton run drifted to another zero: restart from the
    // centroid of the zeros inside a circle around the cell.
    let open = unexplained(&points);
    let orphans: Vec<&Cell> = cells.iter().zip(&cluster).filter(|(_, &k)| open[k]).map(|(c, _)| c).collect();
    let rescued: Vec<Option<BranchPoint>> = orphans
        .par_iter()
        .map(|cell| {
            [1.0, 0.6, 1.5].into_iter().find_map(|f| rescue(source, cell.center, f * cell.size, &points, plan, tol))
        })
        .collect();
    for bp in rescued.into_iter().flatten() {
        if bp.q.norm() < plan.r_min || bp.q.norm() > plan.r_max {
            continue;
        }
        if points.iter().any(|p| (p.q - bp.q).norm() < tol.branch_location * bp.q.norm().max(1.0)) {
            continue;
        }
        points.push(bp);
    }
    points.sort_by(|a, b| sort_key(&a.q, &b.q));

    let open = unexplained(&points);
    let mut unresolved = Vec::new();
    for ((cell, &(l, res, ok)), &k) in cells.iter().zip(&polished).zip(&cluster) {
        if open[k] {
            let reason = if ok { "no zero certified near Newton end point" } else { "Newton failed" };
            unresolved.push(Unresolved { seed: cell.center, last: l, residual: res, reason: reason.into() });
        }
    }
    unresolved.sort_by(|a, b| sort_key(&a.seed, &b.seed));

    let found: i64 = points.iter().map(|p| p.winding).sum();
    Ok(BranchSearch {
        complete: expected == found && unresolved.is_empty(),
        points,
        unresolved,
        expected_multiplicity: Some(expected),
        found_multiplicity: found,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{PlantedDiscriminant, SyntheticTrace};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn probe_counts_and_locates_a_triple_zero() {
        let q = c(0.3, -0.2);
        let s = SyntheticTrace::new(move |l: Complex64| ((l - q).powu(3) * (l + 2.0) + 4.0).sqrt());
        let p = contour_probe(&s, q + 0.01, 0.1).unwrap();
        assert_eq!(p.count(), 3);
        assert!((p.centroid() - q).norm() < 1e-12);
        assert!(p.spread() < 1e-6);
    }

    #[test]
    fn synthetic_trace_roots() {
        let s = SyntheticTrace::new(|l: Complex64| l + l.inv() + 2.0);
        let out = branch_points(&s, &SamplingPlan::default(), &Tolerances::default()).unwrap();
        let r3 = 3f64.sqrt();
        let mut want = [c(-2.0 - r3, 0.0), c(-2.0 + r3, 0.0), c(0.0, 1.0), c(0.0, -1.0)];
        want.sort_by(sort_key);
        assert_eq!(out.points.len(), 4, "{out:?}");
        for (p, w) in out.points.iter().zip(want) {
            assert!((p.q - w).norm() < 1e-8, "{:?} vs {w}", p.q);
            assert_eq!(p.order, 1);
            assert!(p.order_resolved);
        }
        assert!(out.complete, "{out:?}");
    }

    #[test]
    fn planted_orders_recovered() {
        let d = PlantedDiscriminant::new(0.8, vec![(c(0.5, 0.2), 1), (c(-0.3, 0.4), 2), (c(0.1, -0.6), 3)]);
        let out = branch_points(&d, &SamplingPlan::default(), &Tolerances::default()).unwrap();
        let mut want = d.zeros();
        want.sort_by(|a, b| sort_key(&a.0, &b.0));
        assert_eq!(out.points.len(), want.len(), "{out:?}");
        for (p, (q, m)) in out.points.iter().zip(want) {
            assert!((p.q - q).norm() < 1e-6, "{:?} vs {q}", p.q);
            assert_eq!(p.order, m);
            assert!(p.order_resolved, "{p:?}");
        }
        assert!(out.complete);
    }
}
