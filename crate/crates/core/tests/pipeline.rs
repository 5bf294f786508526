// SPDX-License-Identifier: Apache-2.0

use cmc_spectral::family::FamilyConfig;
use cmc_spectral::immersions::clifford_torus;
use cmc_spectral::pipeline::{analyze, load_fixture, reconstruct_surface, Fixture, FixtureOptions, Loaded};
use cmc_spectral::spectral::SamplingPlan;
use cmc_spectral::suite::{run_suite, Relation, SuiteConfig};
use cmc_spectral::sym::SymConfig;
use cmc_spectral::Tolerances;
use num_complex::Complex64;

fn opts(n: usize, perturbation: f64) -> FixtureOptions {
    FixtureOptions { resolution: n, perturbation, ..Default::default() }
}

#[test]
fn clifford_analysis_has_genus_zero() {
    let tol = Tolerances::default();
    let loaded = load_fixture(&Fixture::Clifford, &opts(64, 0.0), &tol).unwrap();
    let r = analyze(&loaded, "clifford", &SamplingPlan::default(), &tol, &FamilyConfig::default()).unwrap();
    let g = r.genus.unwrap();
    assert_eq!((g.geometric_genus, g.arithmetic_genus, g.simple), (0, 0, true));
    assert!(g.generators_agree);
    assert!(r.flatness.flat && r.flatness_violation.is_none());
    assert!(r.trivial_point.unwrap().identity_defect < tol.holonomy_identity);
    assert!(r.family_h.abs() < 1e-10);
}

#[test]
fn perturbed_analysis_reports_violation() {
    let tol = Tolerances::default();
    let loaded = load_fixture(&Fixture::Clifford, &opts(32, 0.05), &tol).unwrap();
    let r = analyze(&loaded, "perturbed", &SamplingPlan::default(), &tol, &FamilyConfig::default()).unwrap();
    let v = r.flatness_violation.unwrap();
    assert!(v.residual > tol.flatness_violation);
    assert!(r.spectra.is_empty() && r.spectral_skipped.is_some());
}

#[test]
fn grid_file_fixture_matches_built_in() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("clifford.csv");
    let grid = clifford_torus(32).unwrap();
    cmc_spectral::torus::io::write_csv(grid.field(), std::fs::File::create(&path).unwrap()).unwrap();
    let tol = Tolerances::default();
    let fixture: Fixture = format!("file:{}", path.display()).parse().unwrap();
    let Loaded::Immersion(read) = load_fixture(&fixture, &opts(32, 0.0), &tol).unwrap() else {
        panic!("file fixtures are immersions");
    };
    let diff = grid.field().max_distance(read.field()).unwrap();
    assert!(diff < 1e-15, "{diff}");
}

#[test]
fn missing_grid_file_is_a_load_error() {
    let tol = Tolerances::default();
    let fixture = Fixture::File { path: "/nonexistent/grid.csv".into() };
    assert!(load_fixture(&fixture, &opts(32, 0.0), &tol).is_err());
}

#[test]
fn vacuum_reconstruction_in_h3() {
    let tol = Tolerances::default();
    let loaded = load_fixture(&Fixture::Vacuum { c: Complex64::new(1.0, 0.0) }, &opts(64, 0.0), &tol).unwrap();
    let sym = SymConfig::h3(Complex64::new(0.5, 0.0)).unwrap();
    let (mesh, report) = reconstruct_surface(&loaded, &sym, &tol, &FamilyConfig::default()).unwrap();
    assert!(report.abs_deviation.unwrap() < 1e-3);
    assert!(mesh.diagnostics.model_defect < 1e-8);
}

#[test]
fn tightened_tolerances_fail_with_measurements() {
    let loose = run_suite(&SuiteConfig { resolution: 16, ..Default::default() });
    let tight =
        run_suite(&SuiteConfig { resolution: 16, tolerances: Tolerances::uniform(1e-15), ..Default::default() });
    assert!(tight.failed > loose.failed);
    // Every check measured under default tolerances is measured again.
    for (a, b) in loose.checks.iter().zip(&tight.checks) {
        assert_eq!(a.name, b.name);
        if a.measured.is_some() && b.relation == Relation::AtMost && b.threshold == 1e-15 {
            assert_eq!(a.measured, b.measured, "{}", a.name);
        }
    }
    assert!(tight.failures().all(|c| c.measured.is_some() || c.error.is_some()));
}

#[test]
fn seed_changes_keep_the_verdicts() {
    let verdicts = |seed| {
        let r = run_suite(&SuiteConfig { resolution: 32, seed, ..Default::default() });
        r.checks.into_iter().map(|c| (c.name, c.pass)).collect::<Vec<_>>()
    };
    assert_eq!(verdicts(1), verdicts(2));
}
