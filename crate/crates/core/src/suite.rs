// SPDX-License-Identifier: Apache-2.0

//! The verification suite: every module invariant measured on the standard
//! fixtures and compared against a [`Tolerances`] record.
//!
//! Construction settings (integrator substeps, frame flatness gates) are
//! fixed; only the pass/fail thresholds come from the configuration, so a
//! tightened record changes verdicts but never the measured values. Random
//! inputs are drawn from a ChaCha stream seeded by the configuration, and
//! the report contains no timings, so equal configurations give
//! byte-identical JSON.

use std::f64::consts::{FRAC_PI_4, TAU};
use std::fmt::Display;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::{
    eigen, mat2_to_quat, mat_exp, pair_residual, palindromic_defect, quat_to_mat2, CharPoly4, ComplexMat2, ComplexMat4,
    Mat, Quaternion,
};
use crate::family::{flatness_residual, holonomy, holonomy_fast, FamilyConfig};
use crate::immersions::{geometry, homogeneous_mean_curvature, homogeneous_torus};
use crate::pipeline::{
    circle_sample, family_of, load_fixture, vacuum_lattice, Fixture, FixtureOptions, Loaded, HOPF_STENCIL,
    PERTURBATION_AMPLITUDE,
};
use crate::spectral::{
    branch_points, curve_report, reality_classify, trace_sweep, PlantedDiscriminant, RealityType, SamplingPlan,
};
use crate::sym::{reconstruct, verify_cmc, SymConfig};
use crate::torus::{hodge_star, partial_derivatives, type_split, GridField, OneForm, Stencil, TorusLattice};
use crate::transport;
use crate::willmore::{
    a0_form, build_cw_family, case_classify, conformal_gauss_map, cw_flatness, cw_holonomy, default_mu_grid,
    gauge_transform, hopf_fields, line_bundle, willmore_residual, CwConfig, CwFamily, LagrangeMultiplier,
    QuaternionicBundle,
};
use crate::{Tolerances, SCHEMA_VERSION};

/// Inputs of a suite run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    /// Grid size of every fixture.
    pub resolution: usize,
    pub seed: u64,
    pub plan: SamplingPlan,
    pub tolerances: Tolerances,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { resolution: 64, seed: 0, plan: SamplingPlan::default(), tolerances: Tolerances::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    /// Pass when `measured ≤ threshold`.
    AtMost,
    /// Pass when `measured > threshold`.
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub relation: Relation,
    /// `null` when the measurement itself failed.
    pub measured: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A measured fact with no pass/fail verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub module: String,
    pub name: String,
    pub value: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub config: SuiteConfig,
    pub checks: Vec<Check>,
    pub observations: Vec<Observation>,
    pub passed: usize,
    pub failed: usize,
}

impl VerifyReport {
    pub fn all_pass(&self) -> bool {
        self.failed == 0
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

struct Recorder {
    module: &'static str,
    checks: Vec<Check>,
    observations: Vec<Observation>,
}

impl Recorder {
    fn push(&mut self, name: String, relation: Relation, measured: f64, threshold: f64) {
        let pass = match relation {
            Relation::AtMost => measured <= threshold,
            Relation::Above => measured > threshold,
        };
        let finite = measured.is_finite();
        self.checks.push(Check {
            module: self.module.into(),
            name,
            relation,
            measured: finite.then_some(measured),
            threshold,
            pass: pass && finite,
            error: (!finite).then(|| "non-finite measurement".to_string()),
        });
    }

    fn at_most(&mut self, name: impl Into<String>, measured: f64, threshold: f64) {
        self.push(name.into(), Relation::AtMost, measured, threshold);
    }

    fn above(&mut self, name: impl Into<String>, measured: f64, threshold: f64) {
        self.push(name.into(), Relation::Above, measured, threshold);
    }

    fn failed(&mut self, name: impl Into<String>, relation: Relation, threshold: f64, err: impl Display) {
        self.checks.push(Check {
            module: self.module.into(),
            name: name.into(),
            relation,
            measured: None,
            threshold,
            pass: false,
            error: Some(err.to_string()),
        });
    }

    fn observe(&mut self, name: impl Into<String>, value: impl Serialize) {
        self.observations.push(Observation {
            module: self.module.into(),
            name: name.into(),
            value: serde_json::to_value(value).unwrap_or(serde_json::Value::Null),
        });
    }
}

/// Runs every check. Measurement errors become failed checks.
pub fn run_suite(cfg: &SuiteConfig) -> VerifyReport {
    let mut rec = Recorder { module: "", checks: Vec::new(), observations: Vec::new() };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tol = &cfg.tolerances;
    let n = cfg.resolution;

    rec.module = "algebra";
    algebra_checks(&mut rec, &mut rng, tol);
    rec.module = "torus";
    torus_checks(&mut rec, &mut rng, tol, n);
    rec.module = "transport";
    transport_checks(&mut rec, &mut rng, tol);
    rec.module = "cmc_family";
    family_checks(&mut rec, tol, n);
    rec.module = "spectral";
    spectral_checks(&mut rec, &mut rng, tol, n, &cfg.plan);
    rec.module = "sym";
    sym_checks(&mut rec, tol, n);
    rec.module = "willmore";
    willmore_checks(&mut rec, &mut rng, tol, n);

    let passed = rec.checks.iter().filter(|c| c.pass).count();
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        config: *cfg,
        failed: rec.checks.len() - passed,
        passed,
        checks: rec.checks,
        observations: rec.observations,
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    )
}

fn random_mat<const N: usize>(rng: &mut ChaCha8Rng, scale: f64) -> Mat<N> {
    Mat::from_fn(|_, _| c(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale)))
}

fn algebra_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng, tol: &Tolerances) {
    let mut hom: f64 = 0.0;
    let mut round: f64 = 0.0;
    for _ in 0..32 {
        let (p, q) = (random_quaternion(rng), random_quaternion(rng));
        hom = hom.max((quat_to_mat2(p * q) - quat_to_mat2(p) * quat_to_mat2(q)).max_abs());
        round = round.max((mat2_to_quat(&quat_to_mat2(p)) - p).norm());
    }
    rec.at_most("quaternion embedding is multiplicative", hom, tol.unit_norm);
    rec.at_most("quaternion embedding round trip", round, tol.unit_norm);

    let mut inverse: f64 = 0.0;
    let mut det: f64 = 0.0;
    let mut eig: f64 = 0.0;
    let mut pal: f64 = 0.0;
    for _ in 0..16 {
        let a: ComplexMat4 = random_mat(rng, 1.0);
        let trace_free = a - ComplexMat4::identity().scale(a.trace() / 4.0);
        match (mat_exp(&a), mat_exp(&-a), mat_exp(&trace_free)) {
            (Ok(e), Ok(f), Ok(g)) => {
                inverse = inverse.max((e * f - ComplexMat4::identity()).max_abs());
                det = det.max((g.det() - 1.0).norm());
            }
            (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => {
                rec.failed("matrix exponential", Relation::AtMost, tol.exp_oracle, e);
                return;
            }
        }
        for p in eigen(&a) {
            eig = eig.max(pair_residual(&a, &p) / a.norm());
        }
        // A symplectic-type spectrum {η, η⁻¹, ζ, ζ⁻¹} conjugated by a random
        // basis change has a palindromic characteristic polynomial.
        let (eta, zeta) = (c(rng.gen_range(0.5..2.0), rng.gen_range(-1.0..1.0)), c(rng.gen_range(-2.0..-0.5), 0.3));
        let u: ComplexMat4 = random_mat::<4>(rng, 1.0) + ComplexMat4::identity().scale_re(3.0);
        if let Ok(ui) = u.inverse() {
            let m = u * Mat::diag([eta, eta.inv(), zeta, zeta.inv()]) * ui;
            pal = pal.max(palindromic_defect(&CharPoly4::of(&m)));
        }
    }
    rec.at_most("exp(A) exp(-A) = I", inverse, tol.exp_oracle);
    rec.at_most("det exp(A) = 1 for trace-free A", det, tol.det_one);
    rec.at_most("eigenpair residual (relative)", eig, tol.eigen_cluster);
    rec.at_most("reciprocal spectrum gives palindromic polynomial", pal, tol.palindromic);
}

fn torus_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng, tol: &Tolerances, n: usize) {
    let lattice = match TorusLattice::new(c(1.0, 0.0), c(0.3, 0.9), n, n) {
        Ok(l) => l,
        Err(e) => return rec.failed("lattice", Relation::AtMost, 0.0, e),
    };
    let (m1, m2, phase) = (1.0, rng.gen_range(1..4) as f64, rng.gen_range(0.0..TAU));
    // Periodic function of the lattice coordinates (s, t).
    let f = GridField::from_fn(lattice, |i, j| {
        let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
        (TAU * (m1 * s + m2 * t) + phase).sin()
    });
    let exact_ds = |i: usize, j: usize| {
        let (s, t) = (i as f64 / n as f64, j as f64 / n as f64);
        TAU * m1 * (TAU * (m1 * s + m2 * t) + phase).cos()
    };
    // ∂/∂s = γ1·∇, so fx·γ1.re + fy·γ1.im recovers it.
    let g1 = lattice.gamma1;
    for stencil in [Stencil::Central6, Stencil::Spectral] {
        match partial_derivatives(&f, stencil) {
            Ok((fx, fy)) => {
                let mut err: f64 = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        let ds = fx.get(i, j) * g1.re + fy.get(i, j) * g1.im;
                        err = err.max((ds - exact_ds(i, j)).abs());
                    }
                }
                let threshold = if stencil == Stencil::Spectral { tol.exp_oracle } else { tol.flatness_cmc };
                rec.at_most(format!("{stencil:?} derivative of a lattice harmonic"), err, threshold);
            }
            Err(e) => rec.failed(format!("{stencil:?} derivative"), Relation::AtMost, tol.flatness_cmc, e),
        }
    }
    let fc = f.map(|v| c(*v, 0.0));
    let form = match OneForm::new(fc.clone(), fc.map(|v| v * v)) {
        Ok(form) => form,
        Err(e) => return rec.failed("one-form", Relation::AtMost, 0.0, e),
    };
    match hodge_star(&hodge_star(&form)).add(&form) {
        Ok(s) => rec.at_most("** = -1 on one-forms", s.max_norm(), tol.unit_norm),
        Err(e) => rec.failed("** = -1 on one-forms", Relation::AtMost, tol.unit_norm, e),
    }
    let (p, q) = type_split(&form);
    match p.add(&q).and_then(|s| s.max_distance(&form)) {
        Ok(d) => rec.at_most("type split reassembles", d, tol.unit_norm),
        Err(e) => rec.failed("type split reassembles", Relation::AtMost, tol.unit_norm, e),
    }
}

fn transport_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng, tol: &Tolerances) {
    let cx: ComplexMat2 = random_mat(rng, 1.0);
    let oracle = match mat_exp(&-cx) {
        Ok(m) => m,
        Err(e) => return rec.failed("exp oracle", Relation::AtMost, tol.exp_oracle, e),
    };
    // 128 cells × 16 substeps = 2048 RK4 steps.
    let l = TorusLattice::unit_square(128).expect("valid lattice");
    let form = OneForm::new(GridField::constant(l, cx), GridField::constant(l, Mat::zero())).expect("same grid");
    let h = transport::holonomy(&form, 1, (0, 0), 16);
    rec.at_most("constant holonomy matches exp (2048 steps)", (h - oracle).max_abs(), tol.exp_oracle);

    let exact = oracle;
    let errs: Vec<f64> = [16, 32, 64].iter().map(|&s| (transport::integrate(|_| cx, s) - exact).max_abs()).collect();
    let orders: Vec<f64> = errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let miss = orders.iter().map(|o| (o - 4.0).abs()).fold(0.0, f64::max);
    rec.at_most("RK4 convergence order within margin of 4", miss, tol.order_rounding);
}

fn homogeneous_radii() -> [f64; 4] {
    [0.5, 0.6, std::f64::consts::FRAC_1_SQRT_2, 0.8]
}

/// Annulus sample of 64 points with radii in `[½, 2]`.
pub fn annulus_sample() -> Vec<Complex64> {
    let mut out = Vec::with_capacity(64);
    for a in 0..8 {
        let r = 0.5 * 4f64.powf(a as f64 / 7.0);
        for b in 0..8 {
            out.push(Complex64::from_polar(r, TAU * (b as f64 + 0.3) / 8.0));
        }
    }
    out
}

fn family_checks(rec: &mut Recorder, tol: &Tolerances, n: usize) {
    let cfg = FamilyConfig::default();
    let circle = circle_sample(16);
    for r in homogeneous_radii() {
        let label = format!("r={r:.4}");
        let loaded = match homogeneous_torus(r, n, n) {
            Ok(g) => Loaded::Immersion(g),
            Err(e) => {
                rec.failed(format!("{label} fixture"), Relation::AtMost, 0.0, e);
                continue;
            }
        };
        let fam = match family_of(&loaded, &construction_tolerances()) {
            Ok((fam, geo)) => {
                if let Some(g) = geo {
                    let expect = homogeneous_mean_curvature(r);
                    let dev = (g.mean_curvature.max - expect).abs().max((g.mean_curvature.min - expect).abs());
                    rec.at_most(format!("{label} measured H matches closed form"), dev, tol.sphere_contact);
                    rec.at_most(format!("{label} conformality"), g.conformality_defect, tol.sphere_contact);
                }
                fam
            }
            Err(e) => {
                rec.failed(format!("{label} family"), Relation::AtMost, tol.flatness_cmc, e);
                continue;
            }
        };
        let flat: Result<f64, _> = circle
            .iter()
            .map(|&l| flatness_residual(&fam, l, &cfg).map(|f| f.residual))
            .try_fold(0.0, |a: f64, b| b.map(|b| a.max(b)));
        match flat {
            Ok(v) => rec.at_most(format!("{label} flat on 16 unit-circle points"), v, tol.flatness_cmc),
            Err(e) => rec.failed(format!("{label} flatness"), Relation::AtMost, tol.flatness_cmc, e),
        }
        let mut trivial: f64 = 0.0;
        let mut commute: f64 = 0.0;
        for g in [1, 2] {
            match holonomy(&fam, fam.lambda_star(), g, &cfg) {
                Ok(h) => trivial = trivial.max((h.matrix - ComplexMat2::identity()).max_abs()),
                Err(e) => rec.failed(format!("{label} holonomy at λ*"), Relation::AtMost, tol.holonomy_identity, e),
            }
        }
        rec.at_most(format!("{label} holonomy at λ* is the identity"), trivial, tol.holonomy_identity);
        let mut sym: f64 = 0.0;
        for &l in &annulus_sample() {
            let pair = (
                holonomy_fast(&fam, l, 1, &cfg),
                holonomy_fast(&fam, l.conj().inv(), 1, &cfg),
                holonomy_fast(&fam, l, 2, &cfg),
            );
            if let (Ok(a), Ok(b), Ok(h2)) = pair {
                sym = sym.max((b.trace() - a.trace().conj()).norm());
                commute = commute.max((a * h2 - h2 * a).max_abs() / (a.max_abs() * h2.max_abs()).max(1.0));
            } else {
                sym = f64::NAN;
            }
        }
        rec.at_most(format!("{label} tr H(1/conj λ) = conj tr H(λ) on the annulus"), sym, tol.trace_symmetry);
        rec.at_most(format!("{label} generator holonomies commute"), commute, tol.holonomy_commute);
        let (mut im, mut over) = (0.0f64, 0.0f64);
        for &l in &circle_sample(64) {
            match holonomy_fast(&fam, l, 1, &cfg) {
                Ok(h) => {
                    let t = h.trace();
                    im = im.max(t.im.abs());
                    over = over.max(t.norm() - 2.0);
                }
                Err(_) => im = f64::NAN,
            }
        }
        rec.at_most(format!("{label} |Im tr| on the unit circle"), im, tol.unitarity);
        rec.at_most(format!("{label} |tr| - 2 on the unit circle"), over, tol.unitarity);
    }
    let opts = FixtureOptions { resolution: n, perturbation: PERTURBATION_AMPLITUDE, ..Default::default() };
    let build = construction_tolerances();
    let perturbed = load_fixture(&Fixture::Clifford, &opts, &build).and_then(|l| family_of(&l, &build));
    match perturbed {
        Ok((fam, _)) => {
            let worst = circle
                .iter()
                .filter_map(|&l| flatness_residual(&fam, l, &cfg).ok())
                .map(|f| f.residual)
                .fold(0.0, f64::max);
            rec.above("perturbed Clifford torus is curved at some λ", worst, tol.flatness_violation);
        }
        Err(e) => rec.failed("perturbed Clifford torus", Relation::Above, tol.flatness_violation, e),
    }
}

/// A reality-symmetric planted discriminant with genus at most 3.
pub fn planted_case(rng: &mut impl Rng) -> PlantedDiscriminant {
    let genus = rng.gen_range(0..=3usize);
    let even = usize::from(rng.gen_bool(0.5));
    let mut pairs: Vec<(Complex64, u32)> = Vec::new();
    while pairs.len() < genus + even {
        let q = Complex64::from_polar(rng.gen_range(1.3..3.5), rng.gen_range(0.0..TAU));
        let far = pairs.iter().all(|(p, _)| (p - q).norm() > 0.4 && (p.conj().inv() - q.conj().inv()).norm() > 0.12);
        if far {
            pairs.push((q, if pairs.len() < genus { 1 } else { 2 }));
        }
    }
    PlantedDiscriminant::new(rng.gen_range(0.5..2.0), pairs)
}

/// Largest location error and whether counts and orders match.
pub fn planted_recovery(d: &PlantedDiscriminant, plan: &SamplingPlan, tol: &Tolerances) -> (f64, bool) {
    let search = match branch_points(d, plan, tol) {
        Ok(s) => s,
        Err(_) => return (f64::NAN, false),
    };
    let want = d.zeros();
    let mut worst: f64 = 0.0;
    let mut orders = search.points.len() == want.len() && search.complete;
    for (q, m) in want {
        match search.points.iter().min_by(|a, b| (a.q - q).norm().total_cmp(&(b.q - q).norm())) {
            Some(p) => {
                worst = worst.max((p.q - q).norm());
                orders &= p.order == m;
            }
            None => orders = false,
        }
    }
    (worst, orders)
}

fn spectral_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng, tol: &Tolerances, n: usize, plan: &SamplingPlan) {
    let cfg = FamilyConfig::default();
    let mut fixtures: Vec<(String, Loaded)> = Vec::new();
    match vacuum_lattice(n)
        .map_err(|e| e.to_string())
        .and_then(|l| crate::family::vacuum_family(c(1.0, 0.0), l).map_err(|e| e.to_string()))
    {
        Ok(f) => fixtures.push(("vacuum c=1".into(), Loaded::Family(f))),
        Err(e) => rec.failed("vacuum fixture", Relation::AtMost, 0.0, e),
    }
    for r in homogeneous_radii() {
        if let Ok(g) = homogeneous_torus(r, n, n) {
            fixtures.push((format!("r={r:.4}"), Loaded::Immersion(g)));
        }
    }
    for (label, loaded) in &fixtures {
        let fam = match family_of(loaded, &construction_tolerances()) {
            Ok((f, _)) => f,
            Err(e) => {
                rec.failed(format!("{label} family"), Relation::AtMost, 0.0, e);
                continue;
            }
        };
        for g in [1, 2] {
            let source = crate::spectral::FamilyTrace::new(&fam, g, cfg);
            let run = trace_sweep(&source, plan).and_then(|s| branch_points(&source, plan, tol).map(|b| (s, b)));
            match run {
                Ok((sweep, search)) => {
                    let curve = curve_report(&search, &sweep, tol);
                    let name = format!("{label} generator {g}");
                    rec.at_most(format!("{name} g + p"), (curve.geometric_genus + curve.arithmetic_genus) as f64, 0.0);
                    rec.at_most(
                        format!("{name} simple (p - g)"),
                        (curve.arithmetic_genus as f64 - curve.geometric_genus as f64).abs(),
                        0.0,
                    );
                    rec.at_most(
                        format!("{name} search completeness (unresolved seeds)"),
                        curve.unresolved as f64 + if curve.search_complete { 0.0 } else { 1.0 },
                        0.0,
                    );
                    rec.at_most(
                        format!("{name} branch set reality defect"),
                        curve.reality_defect,
                        tol.branch_location.max(tol.reality_pairing),
                    );
                    rec.observe(format!("{name} zeros at ±I holonomy"), curve.identity_points);
                }
                Err(e) => rec.failed(format!("{label} generator {g} spectral search"), Relation::AtMost, 0.0, e),
            }
        }
    }

    let (mut worst, mut all_orders) = (0.0f64, true);
    for _ in 0..20 {
        let d = planted_case(rng);
        let (err, ok) = planted_recovery(&d, plan, tol);
        worst = worst.max(err);
        all_orders &= ok;
    }
    rec.at_most("planted branch points located (20 cases)", worst, tol.branch_location);
    rec.at_most("planted counts and orders wrong (cases)", if all_orders { 0.0 } else { 1.0 }, 0.0);

    let mut misclassified = 0usize;
    let mut unflagged = 0usize;
    for g in 0..=3usize {
        let reps: Vec<Complex64> = (0..=g)
            .map(|k| {
                Complex64::from_polar(
                    rng.gen_range(0.3..0.8),
                    TAU * (k as f64 + rng.gen_range(0.1..0.9)) / (g + 1) as f64,
                )
            })
            .collect();
        let plus: Vec<Complex64> = reps.iter().flat_map(|&q| [q, q.conj().inv()]).collect();
        let minus: Vec<Complex64> = reps.iter().flat_map(|&q| [q, -q.conj().inv()]).collect();
        let p = reality_classify(&plus, tol);
        let m = reality_classify(&minus, tol);
        misclassified += usize::from(p.class != RealityType::PlusType) + usize::from(m.class != RealityType::MinusType);
        if m.lift_inconsistent != (g % 2 == 0) {
            unflagged += 1;
        }
    }
    rec.at_most("reality pairings misclassified", misclassified as f64, 0.0);
    rec.at_most("minus-type lift parity not detected", unflagged as f64, 0.0);
}

fn sym_checks(rec: &mut Recorder, tol: &Tolerances, n: usize) {
    let cfg = FamilyConfig::default();
    let fam = match vacuum_lattice(n)
        .map_err(|e| e.to_string())
        .and_then(|l| crate::family::vacuum_family(c(1.0, 0.0), l).map_err(|e| e.to_string()))
    {
        Ok(f) => f,
        Err(e) => return rec.failed("vacuum fixture", Relation::AtMost, 0.0, e),
    };
    let cases: [(&str, Result<SymConfig, crate::sym::SymError>); 4] = [
        ("S3 minimal (1, -1)", SymConfig::s3(c(1.0, 0.0), c(-1.0, 0.0))),
        ("S3 e^{±iπ/4}", SymConfig::s3(Complex64::from_polar(1.0, FRAC_PI_4), Complex64::from_polar(1.0, -FRAC_PI_4))),
        ("R3 λ0 = 1", SymConfig::r3(c(1.0, 0.0))),
        ("H3 λ0 = 1/2", SymConfig::h3(c(0.5, 0.0))),
    ];
    for (label, sc) in cases {
        let run = sc.map_err(|e| e.to_string()).and_then(|sc| {
            let mut mesh = reconstruct(&fam, &sc, (0, 0), &cfg, f64::INFINITY).map_err(|e| e.to_string())?;
            let pred = sc.predicted_mean_curvature();
            let unitarity = mesh.diagnostics.unitarity_defect;
            let rep = verify_cmc(&mut mesh, Some(pred), Tolerances::default().degenerate_metric)
                .map_err(|e| e.to_string())?;
            Ok((pred, unitarity, rep))
        });
        match run {
            Ok((pred, unitarity, rep)) => {
                if label.starts_with("S3") {
                    rec.at_most(format!("{label} Sym frames are unitary"), unitarity, tol.sym_unitarity);
                }
                if pred == 0.0 {
                    rec.at_most(format!("{label} max |H|"), rep.measured.max_abs, 0.1 * tol.sym_curvature);
                } else {
                    // The sign of H is fixed by the normal orientation, a convention.
                    let dev = rep.abs_deviation.unwrap_or(f64::NAN);
                    rec.at_most(format!("{label} |H| matches prediction {pred:.4}"), dev, tol.sym_curvature);
                    rec.at_most(format!("{label} H is constant"), rep.constancy, tol.sym_curvature);
                }
                let closing = rep.periodicity[0].max(rep.periodicity[1]);
                // Only Sym points with trivial holonomy close the surface.
                if label.starts_with("S3 minimal") {
                    rec.at_most(format!("{label} closes up"), closing, tol.periodicity);
                } else {
                    rec.observe(format!("{label} closing defect"), rep.periodicity);
                }
            }
            Err(e) => rec.failed(label, Relation::AtMost, tol.sym_curvature, e),
        }
    }
}

/// Settings used to build fixtures. The configured tolerances only set thresholds,
/// so tightening them never changes what gets measured.
fn construction_tolerances() -> Tolerances {
    Tolerances {
        sphere_square: f64::INFINITY,
        sphere_stability: f64::INFINITY,
        sphere_contact: f64::INFINITY,
        sym_unitarity: f64::INFINITY,
        ..Tolerances::default()
    }
}

fn willmore_checks(rec: &mut Recorder, rng: &mut ChaCha8Rng, tol: &Tolerances, n: usize) {
    let s = QuaternionicBundle::structure_report();
    let worst = s.i_square.max(s.j_square).max(s.anticommute).max(s.right_j);
    rec.at_most("quaternionic structure identities on C^4", worst, tol.unit_norm);

    let loose = construction_tolerances();
    let cwcfg = CwConfig::default();
    let opts = FixtureOptions { resolution: n, ..Default::default() };
    let perturbed = FixtureOptions { perturbation: PERTURBATION_AMPLITUDE, ..opts };
    let fixtures = [
        ("clifford", Fixture::Clifford, opts),
        ("r=0.6", Fixture::Homogeneous { r: 0.6 }, opts),
        ("perturbed clifford", Fixture::Clifford, perturbed),
    ];
    let mut clifford_family: Option<CwFamily> = None;
    for (label, fixture, o) in fixtures {
        let grid = match load_fixture(&fixture, &o, &loose) {
            Ok(Loaded::Immersion(g)) => g,
            Ok(Loaded::Family(_)) => continue,
            Err(e) => {
                rec.failed(format!("{label} fixture"), Relation::AtMost, 0.0, e);
                continue;
            }
        };
        let line = line_bundle(&grid);
        rec.at_most(format!("{label} sphere representatives are null"), line.nullity_defect(), tol.unit_norm * 10.0);
        rec.at_most(format!("{label} L is quaternionic"), line.j_stability(), tol.unit_norm * 10.0);
        let sc = geometry(&grid, Stencil::Central6, loose.degenerate_metric)
            .map_err(|e| e.to_string())
            .and_then(|g| conformal_gauss_map(&grid, &g, &loose).map_err(|e| e.to_string()));
        let s = match sc {
            Ok(s) => s,
            Err(e) => {
                rec.failed(format!("{label} conformal Gauss map"), Relation::AtMost, tol.sphere_square, e);
                continue;
            }
        };
        let k = s.contract;
        rec.at_most(format!("{label} S² = -1"), k.square, tol.sphere_square);
        rec.at_most(format!("{label} S-stability of L"), k.stability, tol.sphere_stability);
        rec.at_most(format!("{label} sphere tangency"), k.tangency, tol.sphere_contact);
        rec.at_most(format!("{label} mean-curvature match"), k.curvature_match, tol.sphere_contact);
        rec.at_most(format!("{label} S is quaternionic-linear"), k.quaternionic_linearity, tol.sphere_square);
        let hopf = match hopf_fields(&s, HOPF_STENCIL) {
            Ok(h) => h,
            Err(e) => {
                rec.failed(format!("{label} Hopf fields"), Relation::AtMost, tol.hopf_type, e);
                continue;
            }
        };
        let r = &hopf.report;
        rec.at_most(format!("{label} A, Q anticommute with S"), r.anticommute_a.max(r.anticommute_q), tol.hopf_type);
        rec.at_most(format!("{label} *A = SA and *Q = -SQ"), r.type_a.max(r.type_q), tol.hopf_type);
        let nu = LagrangeMultiplier::zero(*s.lattice());
        let fam = match a0_form(&hopf, &nu).and_then(|a0| build_cw_family(&s, &a0, f64::INFINITY)) {
            Ok(f) => f,
            Err(e) => {
                rec.failed(format!("{label} CW family"), Relation::AtMost, tol.cw_flatness, e);
                continue;
            }
        };
        rec.at_most(format!("{label} projection identities"), fam.projection_defect, tol.sphere_square);
        let mus = default_mu_grid();
        let flat =
            mus.iter().filter_map(|&mu| cw_flatness(&fam, mu, &cwcfg).ok()).map(|f| f.residual).fold(0.0, f64::max);
        if label == "perturbed clifford" {
            rec.above(format!("{label} CW family is curved at some μ"), flat, tol.flatness_violation);
            continue;
        }
        match willmore_residual(&hopf, &nu, HOPF_STENCIL) {
            Ok(w) if label == "clifford" => {
                rec.at_most(format!("{label} Willmore residual d(2*A + ν)"), w.residual, tol.willmore)
            }
            Ok(w) => rec.observe(format!("{label} Willmore residual d(2*A + ν)"), w.residual),
            Err(e) => rec.failed(format!("{label} Willmore residual"), Relation::AtMost, tol.willmore, e),
        }
        if label == "clifford" {
            rec.at_most(format!("{label} CW flatness on 8 μ"), flat, tol.cw_flatness);
            clifford_family = Some(fam);
        }
    }

    let Some(fam) = clifford_family else { return };
    let mus = default_mu_grid();
    let mut pal: f64 = 0.0;
    let mut det: f64 = 0.0;
    let mut conj: f64 = 0.0;
    for &mu in &mus {
        for g in [1, 2] {
            match (cw_holonomy(&fam, mu, g, &cwcfg), cw_holonomy(&fam, mu.conj().inv(), g, &cwcfg)) {
                (Ok(a), Ok(b)) => {
                    pal = pal.max(a.palindromic_defect);
                    det = det.max(a.det_defect);
                    conj = conj.max((b.trace - a.trace.conj()).norm());
                }
                (Err(e), _) | (_, Err(e)) => {
                    rec.failed(format!("CW holonomy μ={mu:.3}"), Relation::AtMost, tol.palindromic, e)
                }
            }
        }
    }
    rec.at_most("clifford CW holonomy palindromic", pal, tol.palindromic);
    rec.at_most("clifford CW holonomy det = 1", det, tol.det_one);
    rec.at_most("clifford CW trace conjugation under μ ↦ 1/conj μ", conj, tol.trace_symmetry);
    match (cw_holonomy(&fam, c(1.0, 0.0), 1, &cwcfg), cw_holonomy(&fam, c(1.0, 0.0), 2, &cwcfg)) {
        (Ok(a), Ok(b)) => {
            let d = (a.matrix - ComplexMat4::identity()).max_abs().max((b.matrix - ComplexMat4::identity()).max_abs());
            rec.at_most("clifford CW holonomy at μ = 1 is the identity", d, tol.holonomy_step);
        }
        (Err(e), _) | (_, Err(e)) => rec.failed("CW holonomy at μ = 1", Relation::AtMost, tol.holonomy_step, e),
    }
    match gauge_transform(&fam, HOPF_STENCIL) {
        Ok(gauged) => {
            let mut trace: f64 = 0.0;
            let mut comm: f64 = 0.0;
            for _ in 0..3 {
                let mu = Complex64::from_polar(rng.gen_range(0.7..1.4), rng.gen_range(0.0..TAU));
                comm = comm.max(gauged.commutator_defect(mu));
                for g in [1, 2] {
                    match (cw_holonomy(&fam, mu, g, &cwcfg), cw_holonomy(&gauged, mu, g, &cwcfg)) {
                        (Ok(a), Ok(b)) => trace = trace.max((a.trace - b.trace).norm()),
                        _ => trace = f64::NAN,
                    }
                }
            }
            rec.at_most("gauge leaves CW holonomy traces invariant", trace, tol.gauge_trace);
            rec.at_most("gauge commutes with S", comm, tol.unit_norm);
        }
        Err(e) => rec.failed("gauge transform", Relation::AtMost, tol.gauge_trace, e),
    }
    match case_classify(&fam, &mus, &cwcfg, tol.eigen_cluster) {
        Ok((report, _)) => {
            rec.observe("clifford CW case", report.case);
            rec.observe(
                "clifford joint eigenvalue-1 eigenspace dimensions",
                report.samples.iter().map(|s| s.common_dim_one).collect::<Vec<_>>(),
            );
        }
        Err(e) => rec.failed("CW case classification", Relation::AtMost, tol.eigen_cluster, e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_cases_are_reality_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let d = planted_case(&mut rng);
            assert!(d.genus() <= 3);
            for (q, _) in d.zeros() {
                let partner = q.conj().inv();
                assert!(d.zeros().iter().any(|(p, _)| (p - partner).norm() < 1e-12));
            }
        }
    }

    #[test]
    fn annulus_sample_is_closed_under_reflection_radius() {
        let pts = annulus_sample();
        assert_eq!(pts.len(), 64);
        let radii: Vec<f64> = pts.iter().map(|p| p.norm()).collect();
        assert!((radii[0] - 0.5).abs() < 1e-15 && (radii[63] - 2.0).abs() < 1e-12);
    }
}
