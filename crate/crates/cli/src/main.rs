// SPDX-License-Identifier: Apache-2.0

//! `cmc`: analyze, reconstruct, verify and export.
//!
//! Exit status is 0 on success, 1 when a verification or curvature check
//! fails and 2 for usage, configuration or input errors.

mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use cmc_spectral::algebra::Quaternion;
use cmc_spectral::family::FamilyConfig;
use cmc_spectral::pipeline::{
    analyze, cw_analysis, family_of, generator_spectrum, load_fixture, reconstruct_surface, Loaded, PipelineError,
};
use cmc_spectral::spectral::write_sweep_csv;
use cmc_spectral::suite::{run_suite, SuiteConfig};
use cmc_spectral::sym::{write_obj, write_vertices_csv, SpaceForm, SymConfig};
use cmc_spectral::willmore::{default_mu_grid, write_cw_spectra_csv, CwConfig};
use cmc_spectral::SCHEMA_VERSION;
use num_complex::Complex64;
use serde::Serialize;

use config::{parse_complex, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "cmc", version, about = "Spectral analysis of constant mean curvature tori")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Geometry, flatness, trivial point and spectral curve of a fixture.
    Analyze(Common),
    /// Sym–Bobenko surface from the family of a fixture.
    Reconstruct {
        #[command(flatten)]
        common: Common,
        /// Target space form: s3, r3 or h3.
        #[arg(long, default_value = "s3")]
        space: SpaceForm,
        /// First Sym point, `RE[,IM]` or `cis:THETA`.
        #[arg(long, value_parser = parse_complex, default_value = "1")]
        lambda0: Complex64,
        /// Second Sym point (S³ only).
        #[arg(long, value_parser = parse_complex, default_value = "-1")]
        lambda1: Complex64,
        /// Projection pole for S³ meshes, as `W,X,Y,Z`.
        #[arg(long, value_parser = parse_pole, default_value = "-1,0,0,0")]
        pole: Quaternion,
    },
    /// Runs every invariant check and reports pass/fail with measured values.
    Verify(Common),
    /// Trace sweeps, branch points and 4×4 holonomy spectra.
    SpectralExport(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// `key = value` configuration file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// clifford, homogeneous:R, vacuum:RE[,IM] or file:PATH.
    #[arg(long)]
    fixture: Option<String>,
    #[arg(long)]
    resolution: Option<usize>,
    /// Amplitude of the normal bump on immersion fixtures.
    #[arg(long)]
    perturbation: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Extra setting such as `tol.willmore=1e-6` or `plan.radial=24`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    settings: Vec<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let direct = [
            ("fixture", self.fixture.clone()),
            ("resolution", self.resolution.map(|v| v.to_string())),
            ("perturbation", self.perturbation.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("out", self.out.as_ref().map(|p| p.display().to_string())),
        ];
        for (k, v) in direct {
            if let Some(v) = v {
                cfg.set(k, &v)?;
            }
        }
        for s in &self.settings {
            let (k, v) = s.split_once('=').with_context(|| format!("--set expects KEY=VALUE, got {s:?}"))?;
            cfg.set(k, v)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn parse_pole(s: &str) -> Result<Quaternion, String> {
    let v: Vec<f64> =
        s.split(',').map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let [w, x, y, z] = v[..] else { return Err("pole needs four components".into()) };
    let q = Quaternion::new(w, x, y, z);
    if !(q.norm() > 0.0) {
        return Err("pole must be nonzero".into());
    }
    Ok(q * (1.0 / q.norm()))
}

/// Every JSON artifact: schema, tool version and configuration echo around
/// the payload.
#[derive(Serialize)]
struct Bundle<'a, C: Serialize, T: Serialize> {
    schema_version: u32,
    kind: &'a str,
    tool_version: &'a str,
    config: &'a C,
    report: &'a T,
}

fn write_json<C: Serialize, T: Serialize>(
    dir: &Path,
    name: &str,
    kind: &str,
    config: &C,
    report: &T,
) -> Result<PathBuf> {
    let path = dir.join(name);
    let bundle =
        Bundle { schema_version: SCHEMA_VERSION, kind, tool_version: env!("CARGO_PKG_VERSION"), config, report };
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?);
    serde_json::to_writer_pretty(&mut w, &bundle)?;
    writeln!(w)?;
    w.flush()?;
    Ok(path)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let path = dir.join(name);
    Ok(BufWriter::new(File::create(&path).with_context(|| format!("cannot create {}", path.display()))?))
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure { code: 1, error: e.into() }
    }
}

fn usage(e: impl Into<anyhow::Error>) -> Failure {
    Failure { code: 2, error: e.into() }
}

fn load(cfg: &RunConfig) -> Result<Loaded, Failure> {
    load_fixture(&cfg.fixture, &cfg.fixture_options(), &cfg.tolerances).map_err(|e| match e {
        PipelineError::Fixture(_) | PipelineError::Load { .. } => usage(e),
        other => other.into(),
    })
}

fn prepare(common: &Common) -> Result<RunConfig, Failure> {
    let cfg = common.resolve().map_err(usage)?;
    std::fs::create_dir_all(&cfg.out).with_context(|| format!("cannot create {}", cfg.out.display())).map_err(usage)?;
    Ok(cfg)
}

fn run_analyze(common: &Common) -> Result<u8, Failure> {
    let cfg = prepare(common)?;
    let loaded = load(&cfg)?;
    let report = analyze(&loaded, &cfg.fixture.to_string(), &cfg.plan, &cfg.tolerances, &FamilyConfig::default())?;
    for s in &report.spectra {
        write_sweep_csv(&s.sweep, create(&cfg.out, &format!("trace_sweep_g{}.csv", s.generator))?)?;
    }
    let path = write_json(&cfg.out, "analyze.json", "analyze", &cfg, &report)?;
    println!("fixture {}", report.fixture);
    if let Some(g) = &report.geometry {
        println!(
            "  mean curvature {:.6} (spread {:.2e})",
            g.mean_curvature.mean,
            g.mean_curvature.max - g.mean_curvature.min
        );
    }
    println!(
        "  family H {:.6}, flat: {} (max residual {:.2e})",
        report.family_h, report.flatness.flat, report.flatness.max_residual
    );
    if let Some(v) = &report.flatness_violation {
        println!("  flatness violation at λ = {:.4}: {:.3e} > {:.1e}", v.lambda, v.residual, v.threshold);
    }
    if let Some(t) = &report.trivial_point {
        println!("  trivial point λ* = {:.4}, identity defect {:.2e}", t.lambda, t.identity_defect);
    }
    if let Some(g) = &report.genus {
        println!("  g = {}, p = {}, simple = {}", g.geometric_genus, g.arithmetic_genus, g.simple);
    }
    println!("report: {}", path.display());
    Ok(0)
}

fn run_reconstruct(
    common: &Common,
    space: SpaceForm,
    l0: Complex64,
    l1: Complex64,
    pole: Quaternion,
) -> Result<u8, Failure> {
    let sym = match space {
        SpaceForm::S3 => SymConfig::s3(l0, l1),
        SpaceForm::R3 => SymConfig::r3(l0),
        SpaceForm::H3 => SymConfig::h3(l0),
    }
    .map_err(usage)?;
    let cfg = prepare(common)?;
    let loaded = load(&cfg)?;
    let (mesh, report) = reconstruct_surface(&loaded, &sym, &cfg.tolerances, &FamilyConfig::default())?;
    write_obj(&mesh, pole, create(&cfg.out, "surface.obj")?)?;
    write_vertices_csv(&mesh, create(&cfg.out, "vertices.csv")?)?;
    #[derive(Serialize)]
    struct Echo<'a> {
        run: &'a RunConfig,
        sym: &'a SymConfig,
        pole: [f64; 4],
    }
    let echo = Echo { run: &cfg, sym: &sym, pole: pole.to_array() };
    let path = write_json(&cfg.out, "reconstruct.json", "reconstruct", &echo, &report)?;
    let deviation = report.abs_deviation.unwrap_or(f64::NAN);
    let ok = deviation <= cfg.tolerances.sym_curvature;
    println!("{:?} surface, predicted H {:.6}", report.target, sym.predicted_mean_curvature());
    println!(
        "  measured H mean {:.6}, |H| deviation {:.3e} (tolerance {:.1e}): {}",
        report.measured.mean,
        deviation,
        cfg.tolerances.sym_curvature,
        if ok { "ok" } else { "FAILED" }
    );
    println!("  closing defect {:.3e}, {:.3e}", report.periodicity[0], report.periodicity[1]);
    println!("report: {}", path.display());
    Ok(if ok { 0 } else { 1 })
}

fn run_verify(common: &Common) -> Result<u8, Failure> {
    let cfg = prepare(common)?;
    let suite = SuiteConfig { resolution: cfg.resolution, seed: cfg.seed, plan: cfg.plan, tolerances: cfg.tolerances };
    let report = run_suite(&suite);
    let path = write_json(&cfg.out, "verify.json", "verify", &suite, &report)?;
    for c in report.failures() {
        let measured = c.measured.map_or_else(|| c.error.clone().unwrap_or_default(), |m| format!("{m:.3e}"));
        println!("FAIL [{}] {}: measured {} vs threshold {:.1e}", c.module, c.name, measured, c.threshold);
    }
    println!("{} passed, {} failed", report.passed, report.failed);
    println!("report: {}", path.display());
    Ok(if report.all_pass() { 0 } else { 1 })
}

fn run_export(common: &Common) -> Result<u8, Failure> {
    let cfg = prepare(common)?;
    let loaded = load(&cfg)?;
    let fcfg = FamilyConfig::default();
    let (fam, _) = family_of(&loaded, &cfg.tolerances)?;
    let mut spectra = Vec::new();
    for g in [1, 2] {
        let s = generator_spectrum(&fam, g, &cfg.plan, &cfg.tolerances, &fcfg)?;
        write_sweep_csv(&s.sweep, create(&cfg.out, &format!("trace_sweep_g{g}.csv"))?)?;
        println!(
            "generator {g}: {} branch points, g = {}, p = {}",
            s.curve.branch_points.len(),
            s.curve.geometric_genus,
            s.curve.arithmetic_genus
        );
        spectra.push(s);
    }
    write_json(&cfg.out, "branch_points.json", "branch-points", &cfg, &spectra)?;
    if let Loaded::Immersion(grid) = &loaded {
        let cw = cw_analysis(grid, &default_mu_grid(), &cfg.tolerances, &CwConfig::default())?;
        write_cw_spectra_csv(&cw.holonomies, create(&cfg.out, "cw_spectra.csv")?)?;
        write_json(&cfg.out, "cw_classification.json", "cw-classification", &cfg, &cw)?;
        println!("4x4 family: max flatness {:.2e}, case {:?}", cw.max_flatness, cw.classification.case);
    }
    println!("artifacts in {}", cfg.out.display());
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match &cli.command {
        Command::Analyze(c) => run_analyze(c),
        Command::Reconstruct { common, space, lambda0, lambda1, pole } => {
            run_reconstruct(common, *space, *lambda0, *lambda1, *pole)
        }
        Command::Verify(c) => run_verify(c),
        Command::SpectralExport(c) => run_export(c),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
