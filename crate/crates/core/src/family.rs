// SPDX-License-Identifier: Apache-2.0

//! The associated family of flat SL(2, ℂ) connections of a CMC torus,
//!
//! `Ω^λ = Ω⁰ + ½(1 + λ⁻¹)(1 + iH) α′ + ½(1 + λ)(1 − iH) α″`,
//!
//! with flatness tests, parallel frames and holonomy.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{eigen2_continuous, mat_exp, AlgebraError, ComplexMat2, ComplexMat4, Mat};
use crate::immersions::{geometry, maurer_cartan, GeometryReport, ImmersionError, ImmersionGrid};
use crate::torus::{type_split, GridField, OneForm, Stencil, TorusError, TorusLattice};
use crate::transport::{self, line_holonomy, step_coefficients, DEFAULT_SUBSTEPS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FamilyError {
    #[error("the spectral parameter must be nonzero")]
    LambdaZero,
    #[error("family is not flat at λ = {lambda}: residual {residual:.3e} exceeds {threshold:.3e}")]
    NotFlat { lambda: Complex64, residual: f64, threshold: f64 },
    #[error("holonomy step study disagrees by {defect:.3e} (threshold {threshold:.3e}); increase substeps")]
    StepTooCoarse { defect: f64, threshold: f64 },
    #[error("λ-derivative did not converge: step agreement {agreement:.3e}")]
    Derivative { agreement: f64 },
    #[error("generator must be 1 or 2, got {0}")]
    Generator(usize),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Immersion(#[from] ImmersionError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Numerical settings shared by flatness, frame and holonomy computations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyConfig {
    pub substeps: usize,
    pub stencil: Stencil,
    /// Largest plaquette residual accepted before computing frames.
    pub frame_flatness: f64,
    /// Largest relative halving-step disagreement of a holonomy.
    pub holonomy_step: f64,
    /// Relative target for λ-derivatives.
    pub derivative_target: f64,
}

impl Default for FamilyConfig {
    fn default() -> Self {
        Self {
            substeps: DEFAULT_SUBSTEPS,
            stencil: Stencil::Central6,
            frame_flatness: 1e-4,
            holonomy_step: 1e-8,
            derivative_target: 1e-6,
        }
    }
}

/// Closed-form data of the constant-coefficient fixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VacuumParams {
    pub c: Complex64,
}

/// `Ξ(λ) = [[0, λ⁻¹], [1, 0]]`.
pub fn xi(lambda: Complex64) -> ComplexMat2 {
    let zero = Complex64::new(0.0, 0.0);
    ComplexMat2::new(zero, lambda.inv(), Complex64::new(1.0, 0.0), zero)
}

impl VacuumParams {
    /// The exponent `Ξ(λ)(c z − λ c̄ z̄)` with `X(z) = exp(−·)`.
    pub fn exponent(&self, lambda: Complex64, z: Complex64) -> ComplexMat2 {
        xi(lambda).scale(self.c * z - lambda * self.c.conj() * z.conj())
    }

    /// Parallel frame `X_λ(z)` with `X_λ(0) = I`.
    pub fn frame(&self, lambda: Complex64, z: Complex64) -> Result<ComplexMat2, AlgebraError> {
        mat_exp(&-self.exponent(lambda, z))
    }

    /// Closed-form trace `2 cosh w`, `w² = λ⁻¹a² − 2|a|² + λ ā²`, `a = cγ`.
    pub fn trace(&self, lambda: Complex64, gamma: Complex64) -> Complex64 {
        let a = self.c * gamma;
        let w2 = lambda.inv() * a * a - 2.0 * a.norm_sqr() + lambda * a.conj() * a.conj();
        w2.sqrt().cosh() * 2.0
    }

    /// `∂X/∂λ` at `z` through the block exponential
    /// `exp([[A, B], [0, A]]) = [[e^A, L], [0, e^A]]`.
    pub fn frame_dlambda(&self, lambda: Complex64, z: Complex64) -> Result<ComplexMat2, AlgebraError> {
        let a = -self.exponent(lambda, z);
        let zero = Complex64::new(0.0, 0.0);
        let dxi = ComplexMat2::new(zero, -lambda.powi(-2), zero, zero);
        let theta = self.c * z - lambda * self.c.conj() * z.conj();
        let da = -(dxi.scale(theta) + xi(lambda).scale(-self.c.conj() * z.conj()));
        let mut block = ComplexMat4::zero();
        for i in 0..2 {
            for j in 0..2 {
                block[(i, j)] = a[(i, j)];
                block[(i + 2, j + 2)] = a[(i, j)];
                block[(i, j + 2)] = da[(i, j)];
            }
        }
        let e = mat_exp(&block)?;
        Ok(ComplexMat2::from_fn(|i, j| e[(i, j + 2)]))
    }
}

/// A λ-family of connections on the trivial rank-2 bundle over `ℂ/Γ`.
#[derive(Debug, Clone)]
pub struct ConnectionFamily {
    lattice: TorusLattice,
    omega0: Option<OneForm<ComplexMat2>>,
    alpha_prime: OneForm<ComplexMat2>,
    alpha_dprime: OneForm<ComplexMat2>,
    h: f64,
    vacuum: Option<VacuumParams>,
    /// Step coefficients `(γ1/n1, γ2/n2)` of Ω⁰, α′, α″ for fast line holonomies.
    steps: [(GridField<ComplexMat2>, GridField<ComplexMat2>); 3],
}

fn steps_of(form: &OneForm<ComplexMat2>) -> (GridField<ComplexMat2>, GridField<ComplexMat2>) {
    step_coefficients(form)
}

impl ConnectionFamily {
    fn assemble(
        omega0: Option<OneForm<ComplexMat2>>,
        alpha_prime: OneForm<ComplexMat2>,
        alpha_dprime: OneForm<ComplexMat2>,
        h: f64,
        vacuum: Option<VacuumParams>,
    ) -> Self {
        let lattice = *alpha_prime.lattice();
        let zero = OneForm::zero(lattice);
        let steps = [steps_of(omega0.as_ref().unwrap_or(&zero)), steps_of(&alpha_prime), steps_of(&alpha_dprime)];
        Self { lattice, omega0, alpha_prime, alpha_dprime, h, vacuum, steps }
    }

    pub fn lattice(&self) -> &TorusLattice {
        &self.lattice
    }

    /// The constant `H` entering the coefficient functions.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn vacuum(&self) -> Option<&VacuumParams> {
        self.vacuum.as_ref()
    }

    /// The point `λ* = (1 + iH)/(1 − iH)` where `Ω^λ* = Ω⁰ + α′ + α″`.
    pub fn lambda_star(&self) -> Complex64 {
        let i = Complex64::new(0.0, 1.0);
        (1.0 + i * self.h) / (1.0 - i * self.h)
    }

    /// Coefficients `(½(1 + λ⁻¹)(1 + iH), ½(1 + λ)(1 − iH))`.
    pub fn coefficients(&self, lambda: Complex64) -> Result<(Complex64, Complex64), FamilyError> {
        if lambda.norm() == 0.0 || !lambda.is_finite() {
            return Err(FamilyError::LambdaZero);
        }
        let i = Complex64::new(0.0, 1.0);
        Ok(((1.0 + lambda.inv()) * (1.0 + i * self.h) * 0.5, (1.0 + lambda) * (1.0 - i * self.h) * 0.5))
    }

    /// `Ω^λ` as a 1-form.
    pub fn eval(&self, lambda: Complex64) -> Result<OneForm<ComplexMat2>, FamilyError> {
        let (a, b) = self.coefficients(lambda)?;
        let mut form = self.alpha_prime.combine(&self.alpha_dprime, move |p, q| p.scale(a) + q.scale(b))?;
        if let Some(o) = &self.omega0 {
            form = form.add(o)?;
        }
        Ok(form)
    }

    /// Step coefficients of `Ω^λ` along the grid line of a generator through
    /// `base`, starting at `base`.
    pub fn line_nodes(
        &self,
        lambda: Complex64,
        generator: usize,
        base: (usize, usize),
    ) -> Result<Vec<ComplexMat2>, FamilyError> {
        let (a, b) = self.coefficients(lambda)?;
        let pick = |k: usize| if generator == 1 { &self.steps[k].0 } else { &self.steps[k].1 };
        let (o, p, q) = (pick(0), pick(1), pick(2));
        let (n, start) = match generator {
            1 => (self.lattice.n1, base.0),
            2 => (self.lattice.n2, base.1),
            g => return Err(FamilyError::Generator(g)),
        };
        Ok((0..n)
            .map(|k| {
                let idx = (start + k) % n;
                let (i, j) = if generator == 1 { (idx, base.1) } else { (base.0, idx) };
                o.get(i, j) + p.get(i, j).scale(a) + q.get(i, j).scale(b)
            })
            .collect())
    }
}

/// `Ω^λ = ½(1 + λ⁻¹)(1 + iH) α′ + ½(1 + λ)(1 − iH) α″` from a Maurer–Cartan
/// form and the family constant `H`.
pub fn build_family(alpha: &OneForm<ComplexMat2>, h: f64) -> ConnectionFamily {
    let (p, pp) = type_split(alpha);
    ConnectionFamily::assemble(None, p, pp, h, None)
}

/// The family of an immersion together with its geometry.
///
/// The family constant is `−H̄` where `H̄` is the mean of the measured mean
/// curvature: with the normal orientation of
/// [`geometry`](crate::immersions::geometry), that is the sign for which the
/// family is flat.
pub fn family_from_immersion(
    f: &ImmersionGrid,
    stencil: Stencil,
    degenerate_tol: f64,
) -> Result<(ConnectionFamily, GeometryReport), FamilyError> {
    let geo = geometry(f, stencil, degenerate_tol)?;
    let alpha = maurer_cartan(f, stencil)?;
    let h = -geo.mean_curvature_stats().mean;
    Ok((build_family(&alpha, h), geo))
}

/// Constant-coefficient family `Ω^λ = Ξ(λ)(c dz − λ c̄ dz̄)`.
///
/// Built from `Ω⁰ = [[0, −c], [c, 0]] dz + [[0, −c̄], [c̄, 0]] dz̄`,
/// `α′ = 2c N₊ dz`, `α″ = −2c̄ N₋ dz̄` with `H = 0`, where `N₊` and `N₋` are
/// the upper and lower nilpotents. The coefficients do not commute, so the
/// Sym–Bobenko images are genuine surfaces.
pub fn vacuum_family(c: Complex64, lattice: TorusLattice) -> Result<ConnectionFamily, FamilyError> {
    if c.norm() == 0.0 {
        return Err(FamilyError::LambdaZero);
    }
    let zero = Complex64::new(0.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    let base_z = ComplexMat2::new(zero, -c, c, zero);
    let base_zb = ComplexMat2::new(zero, -c.conj(), c.conj(), zero);
    let ap = ComplexMat2::new(zero, c * 2.0, zero, zero);
    let app = ComplexMat2::new(zero, zero, -c.conj() * 2.0, zero);
    // M dz ↦ (M, iM); M dz̄ ↦ (M, −iM).
    let constant = |mz: ComplexMat2, mzb: ComplexMat2| -> Result<OneForm<ComplexMat2>, TorusError> {
        OneForm::new(GridField::constant(lattice, mz + mzb), GridField::constant(lattice, (mz - mzb).scale(i)))
    };
    let omega0 = constant(base_z, base_zb)?;
    let alpha_p = constant(ap, Mat::zero())?;
    let alpha_pp = constant(Mat::zero(), app)?;
    Ok(ConnectionFamily::assemble(Some(omega0), alpha_p, alpha_pp, 0.0, Some(VacuumParams { c })))
}

/// Plaquette and continuum flatness of `Ω^λ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatnessReport {
    pub lambda: Complex64,
    pub plaquette: f64,
    pub continuum: f64,
    /// The larger of the two.
    pub residual: f64,
}

pub fn flatness_residual(
    fam: &ConnectionFamily,
    lambda: Complex64,
    cfg: &FamilyConfig,
) -> Result<FlatnessReport, FamilyError> {
    let form = fam.eval(lambda)?;
    let plaquette = transport::plaquette_residual(&form, cfg.substeps);
    let continuum = transport::curvature_residual(&form, cfg.stencil)?;
    Ok(FlatnessReport { lambda, plaquette, continuum, residual: plaquette.max(continuum) })
}

/// A parallel frame over the closed fundamental domain.
#[derive(Debug, Clone)]
pub struct FrameField {
    pub frames: GridField<ComplexMat2>,
    pub base: (usize, usize),
    pub lambda: Complex64,
    /// Largest `|det X − 1|`.
    pub det_defect: f64,
    /// Path-independence audit on sampled cell diagonals.
    pub path_defect: f64,
    pub flatness: FlatnessReport,
}

/// Cells audited for path independence: a deterministic scatter.
fn audit_cells(l: &TorusLattice) -> Vec<(usize, usize)> {
    (0..16).map(|k| ((k * 7 + 3) % l.n1, (k * 11 + 5) % l.n2)).collect()
}

pub fn parallel_frame(
    fam: &ConnectionFamily,
    lambda: Complex64,
    base: (usize, usize),
    cfg: &FamilyConfig,
) -> Result<FrameField, FamilyError> {
    let flatness = flatness_residual(fam, lambda, cfg)?;
    if !(flatness.plaquette <= cfg.frame_flatness) {
        return Err(FamilyError::NotFlat { lambda, residual: flatness.plaquette, threshold: cfg.frame_flatness });
    }
    let form = fam.eval(lambda)?;
    let frames = transport::frame_field(&form, base, cfg.substeps);
    let det_defect = frames.values().iter().map(|m| (m.det() - 1.0).norm()).fold(0.0, f64::max);
    let path_defect = transport::diagonal_defect(&form, &frames, base, &audit_cells(&fam.lattice), 4 * cfg.substeps);
    Ok(FrameField { frames, base, lambda, det_defect, path_defect, flatness })
}

/// Holonomy of `Ω^λ` along one generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolonomyRecord {
    pub lambda: Complex64,
    pub generator: usize,
    pub matrix: ComplexMat2,
    pub trace: Complex64,
    /// `(η, η⁻¹)` with `|η| ≥ 1`.
    pub eigenvalues: [Complex64; 2],
    pub det_defect: f64,
    /// Relative disagreement with a run at twice the substeps.
    pub step_defect: f64,
}

fn holonomy_matrix(
    fam: &ConnectionFamily,
    lambda: Complex64,
    generator: usize,
    base: (usize, usize),
    substeps: usize,
) -> Result<ComplexMat2, FamilyError> {
    let nodes = fam.line_nodes(lambda, generator, base)?;
    Ok(line_holonomy(&nodes, substeps))
}

/// Holonomy with the halving-step audit.
pub fn holonomy(
    fam: &ConnectionFamily,
    lambda: Complex64,
    generator: usize,
    cfg: &FamilyConfig,
) -> Result<HolonomyRecord, FamilyError> {
    holonomy_at(fam, lambda, generator, (0, 0), cfg)
}

pub fn holonomy_at(
    fam: &ConnectionFamily,
    lambda: Complex64,
    generator: usize,
    base: (usize, usize),
    cfg: &FamilyConfig,
) -> Result<HolonomyRecord, FamilyError> {
    let m = holonomy_matrix(fam, lambda, generator, base, cfg.substeps)?;
    let fine = holonomy_matrix(fam, lambda, generator, base, 2 * cfg.substeps)?;
    let step_defect = (m - fine).max_abs() / m.max_abs().max(1.0);
    if !(step_defect <= cfg.holonomy_step) {
        return Err(FamilyError::StepTooCoarse { defect: step_defect, threshold: cfg.holonomy_step });
    }
    Ok(record(lambda, generator, m, step_defect))
}

/// Holonomy without the step audit (used inside Newton iterations).
pub fn holonomy_fast(
    fam: &ConnectionFamily,
    lambda: Complex64,
    generator: usize,
    cfg: &FamilyConfig,
) -> Result<ComplexMat2, FamilyError> {
    holonomy_matrix(fam, lambda, generator, (0, 0), cfg.substeps)
}

fn record(lambda: Complex64, generator: usize, m: ComplexMat2, step_defect: f64) -> HolonomyRecord {
    let [mut a, mut b] = eigen2_continuous(&m, None);
    if a.norm() < b.norm() {
        std::mem::swap(&mut a, &mut b);
    }
    HolonomyRecord {
        lambda,
        generator,
        matrix: m,
        trace: m.trace(),
        eigenvalues: [a, b],
        det_defect: (m.det() - 1.0).norm(),
        step_defect,
    }
}

/// `∂H/∂λ` together with its step-halving agreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeRecord {
    pub lambda: Complex64,
    pub matrix: ComplexMat2,
    /// Relative disagreement of the extrapolants at `h` and `h/2`.
    pub agreement: f64,
}

/// Central difference in λ with one Richardson step, checked by halving.
fn richardson<T, F>(lambda: Complex64, h: f64, f: F) -> Result<(T, T), FamilyError>
where
    T: Copy + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T> + Send,
    F: Fn(Complex64) -> Result<T, FamilyError> + Sync,
{
    let hs = [h, h / 2.0, h / 4.0];
    let pts: Vec<Complex64> = hs.iter().flat_map(|&s| [lambda + s, lambda - s]).collect();
    let vals: Result<Vec<T>, FamilyError> = pts.par_iter().map(|&p| f(p)).collect();
    let vals = vals?;
    let d = |k: usize| (vals[2 * k] - vals[2 * k + 1]) * (1.0 / (2.0 * hs[k]));
    let r1 = (d(1) * 4.0 - d(0)) * (1.0 / 3.0);
    let r2 = (d(2) * 4.0 - d(1)) * (1.0 / 3.0);
    Ok((r2, r1))
}

fn derivative_step(lambda: Complex64) -> f64 {
    2e-2 * lambda.norm().max(1e-3).min(1.0)
}

pub fn holonomy_dlambda(
    fam: &ConnectionFamily,
    lambda: Complex64,
    generator: usize,
    cfg: &FamilyConfig,
) -> Result<DerivativeRecord, FamilyError> {
    let (fine, coarse) =
        richardson(lambda, derivative_step(lambda), |l| holonomy_matrix(fam, l, generator, (0, 0), cfg.substeps))?;
    let agreement = (fine - coarse).max_abs() / fine.max_abs().max(1.0);
    if !(agreement <= cfg.derivative_target) {
        return Err(FamilyError::Derivative { agreement });
    }
    Ok(DerivativeRecord { lambda, matrix: fine, agreement })
}

/// `∂X/∂λ` of the parallel frame over the closed domain.
#[derive(Debug, Clone)]
pub struct FrameDerivative {
    pub dframes: GridField<ComplexMat2>,
    pub agreement: f64,
}

pub fn frame_dlambda(
    fam: &ConnectionFamily,
    lambda: Complex64,
    base: (usize, usize),
    cfg: &FamilyConfig,
) -> Result<FrameDerivative, FamilyError> {
    let l = fam.lattice;
    let frames_at = |mu: Complex64| -> Result<Vec<ComplexMat2>, FamilyError> {
        let form = fam.eval(mu)?;
        Ok(transport::frame_field(&form, base, cfg.substeps).into_values())
    };
    let h = derivative_step(lambda);
    let hs = [h, h / 2.0, h / 4.0];
    let pts: Vec<Complex64> = hs.iter().flat_map(|&s| [lambda + s, lambda - s]).collect();
    let vals: Result<Vec<Vec<ComplexMat2>>, FamilyError> = pts.par_iter().map(|&p| frames_at(p)).collect();
    let vals = vals?;
    let sites = vals[0].len();
    let mut fine = Vec::with_capacity(sites);
    let mut agreement: f64 = 0.0;
    for s in 0..sites {
        let d = |k: usize| (vals[2 * k][s] - vals[2 * k + 1][s]).scale_re(1.0 / (2.0 * hs[k]));
        let r1 = (d(1).scale_re(4.0) - d(0)).scale_re(1.0 / 3.0);
        let r2 = (d(2).scale_re(4.0) - d(1)).scale_re(1.0 / 3.0);
        agreement = agreement.max((r2 - r1).max_abs() / r2.max_abs().max(1.0));
        fine.push(r2);
    }
    if !(agreement <= cfg.derivative_target) {
        return Err(FamilyError::Derivative { agreement });
    }
    Ok(FrameDerivative { dframes: GridField::from_values(l, false, fine)?, agreement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{clifford_torus, homogeneous_torus};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vac_lattice(n: usize) -> TorusLattice {
        TorusLattice::new(c(PI, 0.0), c(0.0, PI), n, n).unwrap()
    }

    #[test]
    fn coefficient_points() {
        let f = clifford_torus(16).unwrap();
        let (fam, _) = family_from_immersion(&f, Stencil::Central6, 1e-10).unwrap();
        let alpha = maurer_cartan(&f, Stencil::Central6).unwrap();
        let one = fam.eval(c(1.0, 0.0)).unwrap();
        assert!(one.max_distance(&alpha).unwrap() < 1e-12);
        assert!(fam.eval(c(-1.0, 0.0)).unwrap().max_norm() < 1e-12);
        assert!(matches!(fam.eval(c(0.0, 0.0)), Err(FamilyError::LambdaZero)));
        let g = build_family(&alpha, 1.0);
        assert!((g.lambda_star() - c(0.0, 1.0)).norm() < 1e-15);
        let (a, b) = g.coefficients(c(0.0, 1.0)).unwrap();
        assert!((a - 1.0).norm() < 1e-15 && (b - 1.0).norm() < 1e-15);
    }

    #[test]
    fn homogeneous_family_is_flat_and_trivial_at_lambda_star() {
        let cfg = FamilyConfig::default();
        let f = homogeneous_torus(0.6, 64, 64).unwrap();
        let (fam, _) = family_from_immersion(&f, Stencil::Central6, 1e-10).unwrap();
        let r = flatness_residual(&fam, Complex64::from_polar(1.0, PI / 3.0), &cfg).unwrap();
        assert!(r.residual < 1e-6, "{r:?}");
        let hol = holonomy(&fam, fam.lambda_star(), 1, &cfg).unwrap();
        let d = (hol.matrix - ComplexMat2::identity()).max_abs();
        assert!(d < 1e-7, "{d:e} {hol:?}");
    }

    #[test]
    fn vacuum_frames_match_closed_form() {
        let cfg = FamilyConfig::default();
        let l = vac_lattice(32);
        let fam = vacuum_family(c(1.0, 0.0), l).unwrap();
        let v = *fam.vacuum().unwrap();
        let lambda = c(0.6, 0.3);
        let fr = parallel_frame(&fam, lambda, (0, 0), &cfg).unwrap();
        assert!(fr.det_defect < 1e-9);
        assert!(fr.path_defect < 1e-9);
        for (i, j) in [(0, 0), (5, 9), (32, 32), (17, 3)] {
            let z = l.site(i as isize, j as isize);
            let x = v.frame(lambda, z).unwrap();
            let d = (fr.frames.get(i, j) - x).max_abs();
            assert!(d < 1e-8 * x.max_abs().max(1.0), "({i},{j}) {d:e} {:e}", x.max_abs());
        }
        let hol = holonomy(&fam, lambda, 2, &cfg).unwrap();
        assert!((hol.trace - v.trace(lambda, l.gamma2)).norm() < 1e-9);
    }

    #[test]
    fn vacuum_derivative_matches_block_exponential() {
        let cfg = FamilyConfig::default();
        let l = vac_lattice(32);
        let fam = vacuum_family(c(1.0, 0.0), l).unwrap();
        let v = *fam.vacuum().unwrap();
        let lambda = Complex64::from_polar(1.0, 0.4);
        let d = holonomy_dlambda(&fam, lambda, 1, &cfg).unwrap();
        let exact = v.frame_dlambda(lambda, l.gamma1).unwrap();
        assert!((d.matrix - exact).max_abs() < 1e-6 * exact.max_abs().max(1.0));
    }

    #[test]
    fn refuses_frames_of_curved_family() {
        let f = clifford_torus(32).unwrap();
        let alpha = maurer_cartan(&f, Stencil::Central6).unwrap();
        let fam = build_family(&alpha, 0.8);
        let err = parallel_frame(&fam, Complex64::from_polar(1.0, 1.0), (0, 0), &FamilyConfig::default());
        assert!(matches!(err, Err(FamilyError::NotFlat { .. })));
    }
}
