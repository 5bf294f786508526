// SPDX-License-Identifier: Apache-2.0

//! Fixture loading and the end-to-end runs behind the command-line tool.

use std::f64::consts::PI;
use std::fmt;
use std::io::BufReader;
use std::path::PathBuf;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::family::{
    family_from_immersion, flatness_residual, holonomy, vacuum_family, ConnectionFamily, FamilyConfig, FamilyError,
    FlatnessReport,
};
use crate::immersions::{
    clifford_torus, homogeneous_torus, maurer_cartan, maurer_cartan_residual, perturb, su2_defect, FieldStats,
    ImmersionError, ImmersionGrid,
};
use crate::spectral::{
    branch_points, curve_report, involution_report, reality_classify, trace_sweep, FamilyTrace, InvolutionReport,
    RealityReport, SamplingPlan, SpectralCurveData, SpectralError, TraceSweep,
};
use crate::sym::{reconstruct, verify_cmc, ReconstructionReport, SurfaceMesh, SymConfig, SymError};
use crate::torus::{Stencil, TorusError, TorusLattice};
use crate::willmore::{
    a0_form, build_cw_family, case_classify, conformal_gauss_map, cw_flatness, hopf_fields, willmore_residual,
    CaseReport, CwConfig, CwFlatness, CwHolonomy, HopfReport, LagrangeMultiplier, SphereContract, WillmoreError,
    WillmoreResidual,
};
use crate::Tolerances;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("fixture: {0}")]
    Fixture(String),
    #[error("cannot read {path}: {reason}")]
    Load { path: String, reason: String },
    #[error(transparent)]
    Immersion(#[from] ImmersionError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Sym(#[from] SymError),
    #[error(transparent)]
    Willmore(#[from] WillmoreError),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

/// Which surface or family a run starts from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Fixture {
    /// The minimal product torus `r = 1/√2`.
    Clifford,
    /// Product torus of radii `r` and `√(1 − r²)`.
    Homogeneous { r: f64 },
    /// Constant-coefficient family over the lattice `(π, πi)`.
    Vacuum { c: Complex64 },
    /// An immersion grid file.
    File { path: PathBuf },
}

impl fmt::Display for Fixture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fixture::Clifford => write!(f, "clifford"),
            Fixture::Homogeneous { r } => write!(f, "homogeneous:{r}"),
            Fixture::Vacuum { c } => write!(f, "vacuum:{},{}", c.re, c.im),
            Fixture::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for Fixture {
    type Err = String;

    /// `clifford`, `homogeneous:R`, `vacuum:RE[,IM]` or `file:PATH`; a space
    /// may replace the colon.
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        let (head, arg) = match s.split_once([':', ' ']) {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s, None),
        };
        let num = |a: &str| a.parse::<f64>().map_err(|_| format!("not a number: {a:?}"));
        match (head.to_ascii_lowercase().as_str(), arg) {
            ("clifford", None) => Ok(Fixture::Clifford),
            ("homogeneous", Some(a)) => {
                let r = num(a)?;
                if !(r > 0.0 && r < 1.0) {
                    return Err(format!("homogeneous radius {r} outside (0, 1)"));
                }
                Ok(Fixture::Homogeneous { r })
            }
            ("vacuum", Some(a)) => {
                let (re, im) = match a.split_once(',') {
                    Some((x, y)) => (num(x.trim())?, num(y.trim())?),
                    None => (num(a)?, 0.0),
                };
                let c = Complex64::new(re, im);
                if !(c.norm() > 0.0 && c.is_finite()) {
                    return Err("vacuum parameter must be nonzero".into());
                }
                Ok(Fixture::Vacuum { c })
            }
            ("file", Some(a)) if !a.is_empty() => Ok(Fixture::File { path: PathBuf::from(a) }),
            _ => Err(format!("unknown fixture {s:?}; expected clifford, homogeneous:R, vacuum:RE[,IM] or file:PATH")),
        }
    }
}

/// Grid size and optional normal perturbation applied to immersion fixtures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixtureOptions {
    pub resolution: usize,
    pub perturbation: f64,
    pub mode: (i32, i32),
}

impl Default for FixtureOptions {
    fn default() -> Self {
        Self { resolution: 64, perturbation: 0.0, mode: PERTURBATION_MODE }
    }
}

/// Normal bump mode of the perturbed control surface.
pub const PERTURBATION_MODE: (i32, i32) = (1, 2);

/// Amplitude of the perturbed control surface.
pub const PERTURBATION_AMPLITUDE: f64 = 0.05;

/// The vacuum lattice `Γ = πℤ + πiℤ` at `n × n`.
pub fn vacuum_lattice(n: usize) -> Result<TorusLattice, TorusError> {
    TorusLattice::new(Complex64::new(PI, 0.0), Complex64::new(0.0, PI), n, n)
}

/// A loaded fixture: an immersion, or a family given directly.
#[derive(Debug, Clone)]
pub enum Loaded {
    Immersion(ImmersionGrid),
    Family(ConnectionFamily),
}

pub fn load_fixture(fixture: &Fixture, opts: &FixtureOptions, tol: &Tolerances) -> Result<Loaded, PipelineError> {
    let n = opts.resolution;
    let grid = match fixture {
        Fixture::Clifford => clifford_torus(n)?,
        Fixture::Homogeneous { r } => homogeneous_torus(*r, n, n)?,
        Fixture::Vacuum { c } => {
            if opts.perturbation != 0.0 {
                return Err(PipelineError::Fixture("perturbation applies to immersion fixtures only".into()));
            }
            return Ok(Loaded::Family(vacuum_family(*c, vacuum_lattice(n)?)?));
        }
        Fixture::File { path } => {
            let file = std::fs::File::open(path)
                .map_err(|e| PipelineError::Load { path: path.display().to_string(), reason: e.to_string() })?;
            ImmersionGrid::read_csv(BufReader::new(file), tol.unit_norm.max(1e-12))?
        }
    };
    if opts.perturbation == 0.0 {
        return Ok(Loaded::Immersion(grid));
    }
    Ok(Loaded::Immersion(perturb(&grid, opts.perturbation, opts.mode, Stencil::Central6, tol.degenerate_metric)?))
}

/// Shape checks of an immersion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometrySummary {
    pub conformality_defect: f64,
    pub normal_defect: f64,
    pub mean_curvature: FieldStats,
    pub conformal_factor: FieldStats,
    /// `dα + α∧α` of the Maurer–Cartan form.
    pub maurer_cartan_residual: f64,
    pub su2_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlatnessSweep {
    pub samples: Vec<FlatnessReport>,
    pub max_residual: f64,
    pub threshold: f64,
    pub flat: bool,
}

/// Present when some sampled family member is curved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatnessViolation {
    pub lambda: Complex64,
    pub residual: f64,
    pub threshold: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrivialPoint {
    pub lambda: Complex64,
    /// `max ‖H^{λ*}(γ_k) − I‖` over both generators.
    pub identity_defect: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeneratorSpectrum {
    pub generator: usize,
    pub curve: SpectralCurveData,
    pub involutions: InvolutionReport,
    /// Classification of the branch points away from `±I` holonomy.
    pub reality: RealityReport,
    #[serde(skip)]
    pub sweep: TraceSweep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GenusSummary {
    pub geometric_genus: usize,
    pub arithmetic_genus: usize,
    pub arithmetic_genus_with_identity: usize,
    pub simple: bool,
    /// Both generators give the same counts.
    pub generators_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub fixture: String,
    pub geometry: Option<GeometrySummary>,
    pub family_h: f64,
    pub lambda_star: Complex64,
    pub flatness: FlatnessSweep,
    pub flatness_violation: Option<FlatnessViolation>,
    pub trivial_point: Option<TrivialPoint>,
    pub genus: Option<GenusSummary>,
    pub spectra: Vec<GeneratorSpectrum>,
    /// Why the spectral search was not run.
    pub spectral_skipped: Option<String>,
}

/// Unit-circle points `e^{2πi(k + ½)/n}`.
pub fn circle_sample(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * (k as f64 + 0.5) / n as f64)).collect()
}

pub fn family_of(
    loaded: &Loaded,
    tol: &Tolerances,
) -> Result<(ConnectionFamily, Option<GeometrySummary>), PipelineError> {
    match loaded {
        Loaded::Family(f) => Ok((f.clone(), None)),
        Loaded::Immersion(grid) => {
            let (fam, geo) = family_from_immersion(grid, Stencil::Central6, tol.degenerate_metric)?;
            let alpha = maurer_cartan(grid, Stencil::Central6)?;
            let summary = GeometrySummary {
                conformality_defect: geo.conformality_defect,
                normal_defect: geo.normal_defect,
                mean_curvature: geo.mean_curvature_stats(),
                conformal_factor: FieldStats::of(geo.conformal_factor.values()),
                maurer_cartan_residual: maurer_cartan_residual(&alpha, Stencil::Central6)?,
                su2_defect: su2_defect(&alpha),
            };
            Ok((fam, Some(summary)))
        }
    }
}

/// Geometry, flatness on the unit circle, the trivial point, and for flat
/// families the spectral curve of each generator.
pub fn analyze(
    loaded: &Loaded,
    label: &str,
    plan: &SamplingPlan,
    tol: &Tolerances,
    cfg: &FamilyConfig,
) -> Result<AnalysisReport, PipelineError> {
    let (fam, geometry) = family_of(loaded, tol)?;
    let samples =
        circle_sample(16).into_iter().map(|l| flatness_residual(&fam, l, cfg)).collect::<Result<Vec<_>, _>>()?;
    let worst = samples.iter().copied().max_by(|a, b| a.residual.total_cmp(&b.residual));
    let max_residual = worst.map_or(0.0, |w| w.residual);
    let flat = max_residual <= tol.flatness_cmc;
    let flatness = FlatnessSweep { samples, max_residual, threshold: tol.flatness_cmc, flat };
    let flatness_violation = match worst {
        Some(w) if !flat => {
            Some(FlatnessViolation { lambda: w.lambda, residual: w.residual, threshold: tol.flatness_cmc })
        }
        _ => None,
    };
    let mut report = AnalysisReport {
        fixture: label.to_string(),
        geometry,
        family_h: fam.h(),
        lambda_star: fam.lambda_star(),
        flatness,
        flatness_violation,
        trivial_point: None,
        genus: None,
        spectra: Vec::new(),
        spectral_skipped: None,
    };
    if !flat {
        report.spectral_skipped = Some("family is not flat".into());
        return Ok(report);
    }
    let ls = fam.lambda_star();
    let mut defect: f64 = 0.0;
    for g in [1, 2] {
        let h = holonomy(&fam, ls, g, cfg)?;
        defect = defect.max((h.matrix - crate::algebra::ComplexMat2::identity()).max_abs());
    }
    report.trivial_point = Some(TrivialPoint { lambda: ls, identity_defect: defect });
    for g in [1, 2] {
        report.spectra.push(generator_spectrum(&fam, g, plan, tol, cfg)?);
    }
    let c: Vec<&SpectralCurveData> = report.spectra.iter().map(|s| &s.curve).collect();
    let agree = c
        .windows(2)
        .all(|w| w[0].geometric_genus == w[1].geometric_genus && w[0].arithmetic_genus == w[1].arithmetic_genus);
    report.genus = Some(GenusSummary {
        geometric_genus: c[0].geometric_genus,
        arithmetic_genus: c[0].arithmetic_genus,
        arithmetic_genus_with_identity: c[0].arithmetic_genus_with_identity,
        simple: c.iter().all(|d| d.simple),
        generators_agree: agree,
    });
    Ok(report)
}

pub fn generator_spectrum(
    fam: &ConnectionFamily,
    generator: usize,
    plan: &SamplingPlan,
    tol: &Tolerances,
    cfg: &FamilyConfig,
) -> Result<GeneratorSpectrum, PipelineError> {
    let source = FamilyTrace::new(fam, generator, *cfg);
    let sweep = trace_sweep(&source, plan)?;
    let search = branch_points(&source, plan, tol)?;
    let curve = curve_report(&search, &sweep, tol);
    let involutions = involution_report(&source, &sweep, tol)?;
    let regular: Vec<Complex64> = curve.branch_points.iter().filter(|b| !b.is_identity_holonomy).map(|b| b.q).collect();
    let reality = reality_classify(&regular, tol);
    Ok(GeneratorSpectrum { generator, curve, involutions, reality, sweep })
}

/// Sym–Bobenko reconstruction of a flat family and its curvature check.
pub fn reconstruct_surface(
    loaded: &Loaded,
    sym: &SymConfig,
    tol: &Tolerances,
    cfg: &FamilyConfig,
) -> Result<(SurfaceMesh, ReconstructionReport), PipelineError> {
    sym.validate()?;
    let (fam, _) = family_of(loaded, tol)?;
    let mut mesh = reconstruct(&fam, sym, (0, 0), cfg, tol.sym_unitarity)?;
    let report = verify_cmc(&mut mesh, Some(sym.predicted_mean_curvature()), tol.degenerate_metric)?;
    Ok((mesh, report))
}

/// Conformal Gauss map, Hopf fields and the 4×4 family of an immersion with
/// vanishing Lagrange multiplier.
#[derive(Debug, Clone, Serialize)]
pub struct CwAnalysis {
    pub contract: SphereContract,
    pub hopf: HopfReport,
    pub willmore: WillmoreResidual,
    pub projection_defect: f64,
    pub flatness: Vec<CwFlatness>,
    pub max_flatness: f64,
    pub classification: CaseReport,
    #[serde(skip)]
    pub holonomies: Vec<CwHolonomy>,
}

/// Stencil for Hopf fields: they are derivatives of `S`, which is itself
/// built from first derivatives, so the spectral stencil keeps the type
/// identities at rounding level.
pub const HOPF_STENCIL: Stencil = Stencil::Spectral;

pub fn cw_analysis(
    grid: &ImmersionGrid,
    mus: &[Complex64],
    tol: &Tolerances,
    cfg: &CwConfig,
) -> Result<CwAnalysis, PipelineError> {
    let geo = crate::immersions::geometry(grid, Stencil::Central6, tol.degenerate_metric)?;
    let s = conformal_gauss_map(grid, &geo, tol)?;
    let hopf = hopf_fields(&s, HOPF_STENCIL)?;
    let nu = LagrangeMultiplier::zero(*s.lattice());
    let willmore = willmore_residual(&hopf, &nu, HOPF_STENCIL)?;
    let fam = build_cw_family(&s, &a0_form(&hopf, &nu)?, tol.sphere_square)?;
    let flatness = mus.iter().map(|&mu| cw_flatness(&fam, mu, cfg)).collect::<Result<Vec<_>, _>>()?;
    let (classification, holonomies) = case_classify(&fam, mus, cfg, tol.eigen_cluster)?;
    Ok(CwAnalysis {
        contract: s.contract,
        hopf: hopf.report,
        willmore,
        projection_defect: fam.projection_defect,
        max_flatness: flatness.iter().map(|f| f.residual).fold(0.0, f64::max),
        flatness,
        classification,
        holonomies,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_syntax() {
        assert_eq!("clifford".parse::<Fixture>().unwrap(), Fixture::Clifford);
        assert_eq!("homogeneous:0.6".parse::<Fixture>().unwrap(), Fixture::Homogeneous { r: 0.6 });
        assert_eq!("homogeneous 0.6".parse::<Fixture>().unwrap(), Fixture::Homogeneous { r: 0.6 });
        assert_eq!("vacuum:1".parse::<Fixture>().unwrap(), Fixture::Vacuum { c: Complex64::new(1.0, 0.0) });
        assert_eq!("vacuum:1,-2".parse::<Fixture>().unwrap(), Fixture::Vacuum { c: Complex64::new(1.0, -2.0) });
        assert!("homogeneous:1.5".parse::<Fixture>().is_err());
        assert!("vacuum:0".parse::<Fixture>().is_err());
        assert!("torus".parse::<Fixture>().is_err());
        for f in ["clifford", "homogeneous:0.6", "vacuum:1,0.5", "file:a/b.csv"] {
            let parsed: Fixture = f.parse().unwrap();
            assert_eq!(parsed.to_string().parse::<Fixture>().unwrap(), parsed);
        }
    }

    #[test]
    fn perturbed_clifford_is_not_analyzed_spectrally() {
        let tol = Tolerances::default();
        let opts = FixtureOptions { resolution: 32, perturbation: PERTURBATION_AMPLITUDE, ..Default::default() };
        let loaded = load_fixture(&Fixture::Clifford, &opts, &tol).unwrap();
        let r = analyze(&loaded, "p", &SamplingPlan::default(), &tol, &FamilyConfig::default()).unwrap();
        let v = r.flatness_violation.unwrap();
        assert!(v.residual > 1e-3);
        assert!(r.spectra.is_empty() && r.spectral_skipped.is_some());
    }
}
