// SPDX-License-Identifier: Apache-2.0

//! Sym–Bobenko reconstruction of CMC surfaces in S³, ℝ³ and H³ from parallel
//! frames of the associated family, with an independent curvature check.

mod export;
mod verify;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{mat2_to_quat, ComplexMat2, Quaternion};
use crate::family::{
    frame_dlambda, parallel_frame, ConnectionFamily, FamilyConfig, FamilyError, FrameDerivative, FrameField,
};
use crate::torus::{GridField, TorusError, TorusLattice};

pub use export::{poincare_ball, stereographic, write_obj, write_vertices_csv};
pub use verify::{periodicity_check, verify_cmc, ReconstructionReport};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SymError {
    #[error("invalid Sym points: {0}")]
    Config(String),
    #[error("S³ product is not unitary: defect {defect:.3e} at site ({i},{j})")]
    NonUnitary { i: usize, j: usize, defect: f64 },
    #[error("frame λ-derivative vanishes: the family does not depend on λ")]
    DegenerateDerivative,
    #[error("H³ representative is not positive definite at site ({i},{j})")]
    NotPositive { i: usize, j: usize },
    #[error("degenerate mesh cell at ({i},{j}): area {area:.3e}")]
    Degenerate { i: usize, j: usize, area: f64 },
    #[error("frames do not share a grid, base point or family")]
    Mismatch,
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Torus(#[from] TorusError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceForm {
    S3,
    R3,
    H3,
}

impl std::str::FromStr for SpaceForm {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "s3" => Ok(SpaceForm::S3),
            "r3" => Ok(SpaceForm::R3),
            "h3" => Ok(SpaceForm::H3),
            other => Err(format!("unknown space form {other:?}; expected s3, r3 or h3")),
        }
    }
}

/// Space form and Sym points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymConfig {
    pub case: SpaceForm,
    pub lambda0: Complex64,
    pub lambda1: Complex64,
}

impl SymConfig {
    pub fn s3(lambda0: Complex64, lambda1: Complex64) -> Result<Self, SymError> {
        let c = Self { case: SpaceForm::S3, lambda0, lambda1 };
        c.validate()?;
        Ok(c)
    }

    pub fn r3(lambda0: Complex64) -> Result<Self, SymError> {
        let c = Self { case: SpaceForm::R3, lambda0, lambda1: lambda0 };
        c.validate()?;
        Ok(c)
    }

    /// `λ1 = λ̄0⁻¹`.
    pub fn h3(lambda0: Complex64) -> Result<Self, SymError> {
        let c = Self { case: SpaceForm::H3, lambda0, lambda1: lambda0.conj().inv() };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), SymError> {
        let on_circle = |l: Complex64| (l.norm() - 1.0).abs() < 1e-12;
        let err = |m: &str| Err(SymError::Config(m.into()));
        match self.case {
            SpaceForm::S3 => {
                if !on_circle(self.lambda0) || !on_circle(self.lambda1) {
                    return err("S³ Sym points must lie on the unit circle");
                }
                if (self.lambda0 - self.lambda1).norm() < 1e-12 {
                    return err("S³ Sym points must be distinct");
                }
            }
            SpaceForm::R3 => {
                if !on_circle(self.lambda0) {
                    return err("the ℝ³ Sym point must lie on the unit circle");
                }
            }
            SpaceForm::H3 => {
                if !(self.lambda0.norm() > 0.0 && self.lambda0.norm() < 1.0) {
                    return err("the H³ Sym point must satisfy 0 < |λ0| < 1");
                }
                if (self.lambda1 - self.lambda0.conj().inv()).norm() > 1e-12 * self.lambda1.norm() {
                    return err("the second H³ Sym point must be conj(λ0)⁻¹");
                }
            }
        }
        Ok(())
    }

    /// Mean curvature the formula predicts.
    pub fn predicted_mean_curvature(&self) -> f64 {
        let i = Complex64::new(0.0, 1.0);
        match self.case {
            SpaceForm::S3 => (i * (self.lambda0 + self.lambda1) / (self.lambda0 - self.lambda1)).re,
            SpaceForm::R3 => 1.0,
            SpaceForm::H3 => {
                let a = self.lambda0.norm_sqr();
                (1.0 + a) / (1.0 - a)
            }
        }
    }
}

/// A reconstructed surface over the closed fundamental domain.
///
/// Vertices are stored as 4-vectors: unit quaternions for S³, imaginary
/// quaternions `(0, x, y, z)` for ℝ³, and hyperboloid points
/// `(x0, x1, x2, x3)` with `−x0² + x1² + x2² + x3² = −1` for H³.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub target: SpaceForm,
    pub vertices: GridField<Quaternion>,
    /// Filled by [`verify_cmc`].
    pub mean_curvature: Option<GridField<f64>>,
    pub diagnostics: SymDiagnostics,
}

/// By-products of a reconstruction that do not enter the vertices.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct SymDiagnostics {
    /// S³: `max ‖M M† − I‖`.
    pub unitarity_defect: f64,
    /// ℝ³: largest discarded trace and Hermitian parts.
    pub discarded_trace: f64,
    pub discarded_hermitian: f64,
    /// H³: `max ‖M − M†‖ / ‖M‖`.
    pub hermitian_defect: f64,
    /// Largest deviation from the target's defining quadric.
    pub model_defect: f64,
}

impl SurfaceMesh {
    pub fn lattice(&self) -> &TorusLattice {
        self.vertices.lattice()
    }

    /// Grid quads as corner index lists into the row-major vertex array.
    pub fn faces(&self) -> Vec<[usize; 4]> {
        let (m1, m2) = self.vertices.dims();
        let mut out = Vec::with_capacity((m1 - 1) * (m2 - 1));
        for i in 0..m1 - 1 {
            for j in 0..m2 - 1 {
                let k = i * m2 + j;
                out.push([k, k + m2, k + m2 + 1, k + 1]);
            }
        }
        out
    }
}

fn check_pair(a: &FrameField, b: &FrameField) -> Result<(), SymError> {
    if a.frames.lattice() != b.frames.lattice() || a.base != b.base || a.frames.is_periodic() != b.frames.is_periodic()
    {
        return Err(SymError::Mismatch);
    }
    Ok(())
}

fn site_of(field: &GridField<ComplexMat2>, k: usize) -> (usize, usize) {
    let (_, m2) = field.dims();
    (k / m2, k % m2)
}

/// `f = X_{λ0}⁻¹ X_{λ1}` read as a unit quaternion.
pub fn sym_s3(x0: &FrameField, x1: &FrameField, unitarity_tol: f64) -> Result<SurfaceMesh, SymError> {
    check_pair(x0, x1)?;
    let mut defect: f64 = 0.0;
    let mut verts = Vec::with_capacity(x0.frames.values().len());
    for (k, (a, b)) in x0.frames.values().iter().zip(x1.frames.values()).enumerate() {
        let m = a.inverse2() * *b;
        let d = (m * m.adjoint() - ComplexMat2::identity()).max_abs();
        if !(d <= unitarity_tol) {
            let (i, j) = site_of(&x0.frames, k);
            return Err(SymError::NonUnitary { i, j, defect: d });
        }
        defect = defect.max(d);
        verts.push(mat2_to_quat(&m));
    }
    let model = verts.iter().map(|q| (q.norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(SurfaceMesh {
        target: SpaceForm::S3,
        vertices: GridField::from_values(*x0.frames.lattice(), x0.frames.is_periodic(), verts)?,
        mean_curvature: None,
        diagnostics: SymDiagnostics { unitarity_defect: defect, model_defect: model, ..Default::default() },
    })
}

/// `f = X⁻¹ ∂X/∂λ` at `λ0`, rotated by `−iλ0` and reduced to its trace-free
/// anti-Hermitian part, read as a vector in Im ℍ ≅ ℝ³ and scaled by 2 (the
/// quaternion `i` has coordinate 1 while `quat_to_mat2(i)` has eigenvalues
/// `±i`, so this is the scale at which `|H| = 1`).
pub fn sym_r3(x: &FrameField, dx: &FrameDerivative, lambda0: Complex64) -> Result<SurfaceMesh, SymError> {
    if x.frames.lattice() != dx.dframes.lattice() {
        return Err(SymError::Mismatch);
    }
    if dx.dframes.max_norm() < 1e-12 {
        return Err(SymError::DegenerateDerivative);
    }
    let rot = Complex64::new(0.0, -1.0) * lambda0;
    let mut trace: f64 = 0.0;
    let mut herm: f64 = 0.0;
    let mut verts = Vec::with_capacity(x.frames.values().len());
    for (a, d) in x.frames.values().iter().zip(dx.dframes.values()) {
        let r = (a.inverse2() * *d).scale(rot);
        let su2 = r.su2_part();
        trace = trace.max(r.trace().norm());
        herm = herm.max(((r + r.adjoint()).scale_re(0.5)).max_abs());
        let q = mat2_to_quat(&su2);
        verts.push(Quaternion::new(0.0, 2.0 * q.x, 2.0 * q.y, 2.0 * q.z));
    }
    Ok(SurfaceMesh {
        target: SpaceForm::R3,
        vertices: GridField::from_values(*x.frames.lattice(), x.frames.is_periodic(), verts)?,
        mean_curvature: None,
        diagnostics: SymDiagnostics { discarded_trace: trace, discarded_hermitian: herm, ..Default::default() },
    })
}

/// Hyperboloid coordinates of a Hermitian matrix with unit determinant.
pub fn hermitian_to_hyperboloid(a: &ComplexMat2) -> Quaternion {
    Quaternion::new(0.5 * (a[(0, 0)] + a[(1, 1)]).re, a[(0, 1)].re, -a[(0, 1)].im, 0.5 * (a[(0, 0)] - a[(1, 1)]).re)
}

/// `M = X_{λ0}⁻¹ X_{λ̄0⁻¹}`, normalized to unit determinant, read in the
/// hyperboloid model of H³.
///
/// The reality symmetry of the family makes `M` Hermitian positive; its
/// deviation from Hermitian is reported as a diagnostic.
pub fn sym_h3(x0: &FrameField, x1: &FrameField) -> Result<SurfaceMesh, SymError> {
    check_pair(x0, x1)?;
    let mut herm: f64 = 0.0;
    let mut model: f64 = 0.0;
    let mut verts = Vec::with_capacity(x0.frames.values().len());
    for (k, (a, b)) in x0.frames.values().iter().zip(x1.frames.values()).enumerate() {
        let m = a.inverse2() * *b;
        let m = m.scale(m.det().sqrt().inv());
        herm = herm.max((m - m.adjoint()).max_abs() / m.max_abs());
        let h = (m + m.adjoint()).scale_re(0.5);
        if !(h.trace().re > 0.0 && h.det().re > 0.0) {
            let (i, j) = site_of(&x0.frames, k);
            return Err(SymError::NotPositive { i, j });
        }
        let p = hermitian_to_hyperboloid(&h);
        model = model.max((-p.w * p.w + p.x * p.x + p.y * p.y + p.z * p.z + 1.0).abs());
        verts.push(p);
    }
    Ok(SurfaceMesh {
        target: SpaceForm::H3,
        vertices: GridField::from_values(*x0.frames.lattice(), x0.frames.is_periodic(), verts)?,
        mean_curvature: None,
        diagnostics: SymDiagnostics { hermitian_defect: herm, model_defect: model, ..Default::default() },
    })
}

/// Frames at the Sym points of `cfg` and the resulting mesh.
pub fn reconstruct(
    fam: &ConnectionFamily,
    cfg: &SymConfig,
    base: (usize, usize),
    fcfg: &FamilyConfig,
    unitarity_tol: f64,
) -> Result<SurfaceMesh, SymError> {
    cfg.validate()?;
    match cfg.case {
        SpaceForm::S3 => {
            let a = parallel_frame(fam, cfg.lambda0, base, fcfg)?;
            let b = parallel_frame(fam, cfg.lambda1, base, fcfg)?;
            sym_s3(&a, &b, unitarity_tol)
        }
        SpaceForm::R3 => {
            let a = parallel_frame(fam, cfg.lambda0, base, fcfg)?;
            let d = frame_dlambda(fam, cfg.lambda0, base, fcfg)?;
            sym_r3(&a, &d, cfg.lambda0)
        }
        SpaceForm::H3 => {
            let a = parallel_frame(fam, cfg.lambda0, base, fcfg)?;
            let b = parallel_frame(fam, cfg.lambda1, base, fcfg)?;
            sym_h3(&a, &b)
        }
    }
}
