// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{SphereCongruence, WillmoreError};
use crate::algebra::{common_eigenspace_dim, eigenvalues, palindromic_defect, CharPoly4, ComplexMat4, Mat};
use crate::torus::{partial_derivatives, GridField, OneForm, Stencil, TorusLattice};
use crate::transport;

/// A μ-family of connections on the trivial ℂ⁴ bundle.
pub trait MuConnection: Sync {
    fn lattice(&self) -> &TorusLattice;
    /// Connection coefficients `Ω` of `d + Ω` at `μ`.
    fn connection(&self, mu: Complex64) -> Result<OneForm<ComplexMat4>, WillmoreError>;
}

/// `d + (μ − 1) P₊A₀ + (μ⁻¹ − 1) P₋A₀` with `P± = ½(1 ∓ iS)`.
#[derive(Debug, Clone)]
pub struct CwFamily {
    pub s: GridField<ComplexMat4>,
    plus: OneForm<ComplexMat4>,
    minus: OneForm<ComplexMat4>,
    /// Largest of `‖P±² − P±‖`, `‖P₊P₋‖` and `‖P₊ + P₋ − 1‖`.
    pub projection_defect: f64,
}

fn projectors(s: &ComplexMat4) -> (ComplexMat4, ComplexMat4) {
    let id = Mat::<4>::identity();
    let is = s.scale(Complex64::new(0.0, 1.0));
    ((id - is) * 0.5, (id + is) * 0.5)
}

pub fn build_cw_family(s: &SphereCongruence, a0: &OneForm<ComplexMat4>, tol: f64) -> Result<CwFamily, WillmoreError> {
    let id = Mat::<4>::identity();
    let mut defect: f64 = 0.0;
    for m in s.s.values() {
        let (p, q) = projectors(m);
        defect = defect
            .max((p * p - p).max_abs())
            .max((q * q - q).max_abs())
            .max((p * q).max_abs())
            .max((p + q - id).max_abs());
    }
    if !(defect <= tol) {
        return Err(WillmoreError::Contract { check: "projection identities", value: defect, threshold: tol });
    }
    let apply = |which: usize| -> Result<OneForm<ComplexMat4>, WillmoreError> {
        let f = |m: &ComplexMat4, a: &ComplexMat4| {
            let (p, q) = projectors(m);
            if which == 0 {
                p * *a
            } else {
                q * *a
            }
        };
        Ok(OneForm::new(s.s.zip(&a0.dx, f)?, s.s.zip(&a0.dy, f)?)?)
    };
    Ok(CwFamily { s: s.s.clone(), plus: apply(0)?, minus: apply(1)?, projection_defect: defect })
}

impl MuConnection for CwFamily {
    fn lattice(&self) -> &TorusLattice {
        self.s.lattice()
    }

    fn connection(&self, mu: Complex64) -> Result<OneForm<ComplexMat4>, WillmoreError> {
        if mu.norm() == 0.0 {
            return Err(WillmoreError::MuZero);
        }
        let a = mu - 1.0;
        let b = mu.inv() - 1.0;
        Ok(self.plus.combine(&self.minus, move |p, m| p.scale(a) + m.scale(b))?)
    }
}

/// The family after the pointwise gauge `𝔤 = ½((μ + 1) − i(μ − 1)S)`.
#[derive(Debug, Clone)]
pub struct GaugedCwFamily {
    pub inner: CwFamily,
    ds: OneForm<ComplexMat4>,
}

pub fn gauge_transform(fam: &CwFamily, stencil: Stencil) -> Result<GaugedCwFamily, WillmoreError> {
    let (sx, sy) = partial_derivatives(&fam.s, stencil)?;
    Ok(GaugedCwFamily { inner: fam.clone(), ds: OneForm::new(sx, sy)? })
}

impl GaugedCwFamily {
    pub fn gauge(&self, mu: Complex64, s: &ComplexMat4) -> ComplexMat4 {
        let id = Mat::<4>::identity();
        (id.scale(mu + 1.0) - s.scale(Complex64::new(0.0, 1.0) * (mu - 1.0))) * 0.5
    }

    /// Largest `‖𝔤S − S𝔤‖` at `μ`.
    pub fn commutator_defect(&self, mu: Complex64) -> f64 {
        self.inner
            .s
            .values()
            .iter()
            .map(|s| {
                let g = self.gauge(mu, s);
                (g * *s - *s * g).max_abs()
            })
            .fold(0.0, f64::max)
    }
}

impl MuConnection for GaugedCwFamily {
    fn lattice(&self) -> &TorusLattice {
        self.inner.lattice()
    }

    /// `𝔤Ω𝔤⁻¹ − d𝔤 𝔤⁻¹`, the coefficients seen by the frame `𝔤X`.
    fn connection(&self, mu: Complex64) -> Result<OneForm<ComplexMat4>, WillmoreError> {
        let omega = self.inner.connection(mu)?;
        let s = &self.inner.s;
        let vals = s.values();
        let mut inv = Vec::with_capacity(vals.len());
        for m in vals {
            let g = self.gauge(mu, m);
            inv.push(g.inverse().map_err(|_| WillmoreError::SingularGauge { mu })?);
        }
        let inv = GridField::from_values(*s.lattice(), true, inv)?;
        let dg_scale = Complex64::new(0.0, -0.5) * (mu - 1.0);
        let conj =
            |o: &GridField<ComplexMat4>, d: &GridField<ComplexMat4>| -> Result<GridField<ComplexMat4>, WillmoreError> {
                let n = vals.len();
                let out: Vec<ComplexMat4> = (0..n)
                    .map(|k| {
                        let g = self.gauge(mu, &vals[k]);
                        let gi = inv.values()[k];
                        g * o.values()[k] * gi - d.values()[k].scale(dg_scale) * gi
                    })
                    .collect();
                Ok(GridField::from_values(*s.lattice(), true, out)?)
            };
        Ok(OneForm::new(conj(&omega.dx, &self.ds.dx)?, conj(&omega.dy, &self.ds.dy)?)?)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CwConfig {
    pub substeps: usize,
    pub stencil: Stencil,
    /// Largest relative halving-step disagreement of a holonomy.
    pub holonomy_step: f64,
}

impl Default for CwConfig {
    fn default() -> Self {
        Self { substeps: 16, stencil: Stencil::Central6, holonomy_step: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CwFlatness {
    pub mu: Complex64,
    pub plaquette: f64,
    pub continuum: f64,
    pub residual: f64,
}

pub fn cw_flatness(fam: &impl MuConnection, mu: Complex64, cfg: &CwConfig) -> Result<CwFlatness, WillmoreError> {
    let form = fam.connection(mu)?;
    let plaquette = transport::plaquette_residual(&form, cfg.substeps);
    let continuum = transport::curvature_residual(&form, cfg.stencil)?;
    Ok(CwFlatness { mu, plaquette, continuum, residual: plaquette.max(continuum) })
}

#[derive(Debug, Clone, Serialize)]
pub struct CwHolonomy {
    pub mu: Complex64,
    pub generator: usize,
    pub matrix: ComplexMat4,
    pub trace: Complex64,
    /// Sorted by decreasing modulus, then argument.
    pub eigenvalues: [Complex64; 4],
    pub charpoly: CharPoly4,
    pub det_defect: f64,
    pub palindromic_defect: f64,
    pub step_defect: f64,
}

/// Transport around generator 1 or 2 from site `(0, 0)`, audited against a
/// run with twice the substeps.
pub fn cw_holonomy(
    fam: &impl MuConnection,
    mu: Complex64,
    generator: usize,
    cfg: &CwConfig,
) -> Result<CwHolonomy, WillmoreError> {
    let form = fam.connection(mu)?;
    let m = transport::holonomy(&form, generator, (0, 0), cfg.substeps);
    let fine = transport::holonomy(&form, generator, (0, 0), 2 * cfg.substeps);
    let step_defect = (m - fine).max_abs() / m.max_abs().max(1.0);
    if !(step_defect <= cfg.holonomy_step) {
        return Err(WillmoreError::StepTooCoarse { defect: step_defect, threshold: cfg.holonomy_step });
    }
    let mut eig = eigenvalues(&m);
    eig.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));
    let charpoly = CharPoly4::of(&m);
    Ok(CwHolonomy {
        mu,
        generator,
        matrix: m,
        trace: m.trace(),
        eigenvalues: eig,
        palindromic_defect: palindromic_defect(&charpoly),
        charpoly,
        det_defect: (m.det() - 1.0).norm(),
        step_defect,
    })
}

/// Eight sample points: four on the unit circle, two inside, two outside.
pub fn default_mu_grid() -> Vec<Complex64> {
    let radii = [1.0, 0.6, 1.0, 1.7, 1.0, 0.6, 1.0, 1.7];
    radii.iter().enumerate().map(|(k, &r)| Complex64::from_polar(r, 2.0 * PI * (k as f64 + 0.37) / 8.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WillmoreCase {
    /// Four distinct holonomy eigenvalues at generic μ.
    Case1,
    /// A common two-dimensional eigenspace with eigenvalue 1.
    Case2,
    Undetermined,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseSample {
    pub mu: Complex64,
    /// Dimension of the joint eigenvalue-1 eigenspace of both generators.
    pub common_dim_one: usize,
    /// Smallest pairwise eigenvalue distance, per generator.
    pub min_gap: [f64; 2],
    pub distinct: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseReport {
    pub case: WillmoreCase,
    pub tolerance: f64,
    pub case2_samples: usize,
    pub distinct_samples: usize,
    pub samples: Vec<CaseSample>,
}

fn min_gap(eig: &[Complex64; 4]) -> f64 {
    let mut g = f64::INFINITY;
    for a in 0..4 {
        for b in a + 1..4 {
            g = g.min((eig[a] - eig[b]).norm());
        }
    }
    g
}

/// Classifies a holonomy sweep `(μ, H₁, H₂)`.
///
/// Case 2 needs the joint eigenvalue-1 eigenspace to be at least
/// two-dimensional at every sample. Case 1 needs four eigenvalues separated
/// by more than `tol` (relative to the spectral radius) at a strict majority
/// of samples.
pub fn classify_holonomies(samples: &[(Complex64, ComplexMat4, ComplexMat4)], tol: f64) -> CaseReport {
    let out: Vec<CaseSample> = samples
        .iter()
        .map(|(mu, h1, h2)| {
            let gap = |m: &ComplexMat4| {
                let e = eigenvalues(m);
                let scale = e.iter().map(|z| z.norm()).fold(1.0, f64::max);
                min_gap(&e) / scale
            };
            let min_gap = [gap(h1), gap(h2)];
            CaseSample {
                mu: *mu,
                common_dim_one: common_eigenspace_dim(&[*h1, *h2], Complex64::new(1.0, 0.0), tol),
                min_gap,
                distinct: min_gap[0] > tol || min_gap[1] > tol,
            }
        })
        .collect();
    let case2_samples = out.iter().filter(|s| s.common_dim_one >= 2).count();
    let distinct_samples = out.iter().filter(|s| s.distinct).count();
    let case = if !out.is_empty() && case2_samples == out.len() {
        WillmoreCase::Case2
    } else if 2 * distinct_samples > out.len() {
        WillmoreCase::Case1
    } else {
        WillmoreCase::Undetermined
    };
    CaseReport { case, tolerance: tol, case2_samples, distinct_samples, samples: out }
}

/// Holonomies of both generators over `mus`, then [`classify_holonomies`].
pub fn case_classify(
    fam: &impl MuConnection,
    mus: &[Complex64],
    cfg: &CwConfig,
    tol: f64,
) -> Result<(CaseReport, Vec<CwHolonomy>), WillmoreError> {
    let pairs: Vec<(CwHolonomy, CwHolonomy)> = mus
        .par_iter()
        .map(|&mu| Ok((cw_holonomy(fam, mu, 1, cfg)?, cw_holonomy(fam, mu, 2, cfg)?)))
        .collect::<Result<_, WillmoreError>>()?;
    let samples: Vec<_> = pairs.iter().map(|(a, b)| (a.mu, a.matrix, b.matrix)).collect();
    let report = classify_holonomies(&samples, tol);
    Ok((report, pairs.into_iter().flat_map(|(a, b)| [a, b]).collect()))
}

/// CSV with a schema line, then
/// `generator,mu_re,mu_im,eta1_re,eta1_im,…,eta4_re,eta4_im`.
pub fn write_cw_spectra_csv(records: &[CwHolonomy], mut w: impl Write) -> std::io::Result<()> {
    writeln!(w, "# schema_version={} kind=cw-spectra", crate::SCHEMA_VERSION)?;
    write!(w, "generator,mu_re,mu_im")?;
    for k in 1..=4 {
        write!(w, ",eta{k}_re,eta{k}_im")?;
    }
    writeln!(w)?;
    for r in records {
        write!(w, "{},{:e},{:e}", r.generator, r.mu.re, r.mu.im)?;
        for e in &r.eigenvalues {
            write!(w, ",{:e},{:e}", e.re, e.im)?;
        }
        writeln!(w)?;
    }
    Ok(())
}
