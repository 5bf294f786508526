// SPDX-License-Identifier: Apache-2.0

use cmc_spectral::algebra::{
    eigen, mat2_to_quat, mat_exp, pair_residual, palindromic_defect, quat_to_mat2, CharPoly4, ComplexMat2, ComplexMat4,
    Mat, Quaternion,
};
use cmc_spectral::pipeline::Fixture;
use cmc_spectral::spectral::{reality_classify, PlantedDiscriminant, RealityType, TraceSource};
use cmc_spectral::torus::{hodge_star, type_split, GridField, OneForm, TorusLattice};
use cmc_spectral::willmore::QuaternionicBundle;
use cmc_spectral::Tolerances;
use num_complex::Complex64;
use proptest::prelude::*;

fn quaternion() -> impl Strategy<Value = Quaternion> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(w, x, y, z)| Quaternion::new(w, x, y, z))
}

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(a, b)| Complex64::new(a, b))
}

fn mat4(r: f64) -> impl Strategy<Value = ComplexMat4> {
    proptest::collection::vec(complex(r), 16).prop_map(|v| Mat::from_fn(|i, j| v[4 * i + j]))
}

fn mat2(r: f64) -> impl Strategy<Value = ComplexMat2> {
    proptest::collection::vec(complex(r), 4).prop_map(|v| Mat::from_fn(|i, j| v[2 * i + j]))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quaternion_embedding_is_an_algebra_map(p in quaternion(), q in quaternion()) {
        let lhs = quat_to_mat2(p * q);
        let rhs = quat_to_mat2(p) * quat_to_mat2(q);
        prop_assert!((lhs - rhs).max_abs() < 1e-12);
        prop_assert!((quat_to_mat2(p).det().re - p.norm() * p.norm()).abs() < 1e-12);
        prop_assert!((mat2_to_quat(&quat_to_mat2(p)) - p).norm() < 1e-14);
    }

    #[test]
    fn exp_of_negative_is_inverse(a in mat4(1.5)) {
        let e = mat_exp(&a).unwrap();
        let f = mat_exp(&-a).unwrap();
        prop_assert!((e * f - ComplexMat4::identity()).max_abs() < 1e-9);
    }

    #[test]
    fn exp_determinant_is_exp_trace(a in mat2(2.0)) {
        let e = mat_exp(&a).unwrap();
        let expected = a.trace().exp();
        prop_assert!((e.det() - expected).norm() < 1e-9 * expected.norm().max(1.0));
    }

    #[test]
    fn eigenpairs_have_small_residual(a in mat4(1.0)) {
        let scale = a.max_abs().max(1e-3);
        for p in eigen(&a) {
            prop_assert!(pair_residual(&a, &p) < 1e-9 * scale * 4.0);
        }
    }

    #[test]
    fn reciprocal_spectra_are_palindromic(
        eta in (0.3..3.0f64, -3.0..3.0f64),
        zeta in (0.3..3.0f64, -3.0..3.0f64),
        u in mat4(0.4),
    ) {
        let (eta, zeta) = (Complex64::from_polar(eta.0, eta.1), Complex64::from_polar(zeta.0, zeta.1));
        let u = u + ComplexMat4::identity().scale_re(2.0);
        let m = u * Mat::diag([eta, eta.inv(), zeta, zeta.inv()]) * u.inverse().unwrap();
        prop_assert!(palindromic_defect(&CharPoly4::of(&m)) < 1e-8);
        let p = CharPoly4::of(&m);
        for z in [eta, eta.inv(), zeta, zeta.inv()] {
            prop_assert!(p.eval(z).norm() < 1e-8 * (1.0 + z.norm()).powi(4));
        }
    }

    #[test]
    fn hodge_star_squares_to_minus_one(v in proptest::collection::vec(complex(1.0), 128)) {
        let l = TorusLattice::new(Complex64::new(1.0, 0.0), Complex64::new(0.2, 1.1), 8, 8).unwrap();
        let f = |off: usize| {
            let v = v.clone();
            GridField::from_fn(l, move |i, j| v[off + 8 * i + j])
        };
        let a = OneForm::new(f(0), f(64)).unwrap();
        let back = hodge_star(&hodge_star(&a)).add(&a).unwrap();
        prop_assert!(back.max_norm() < 1e-15);
        let (p, q) = type_split(&a);
        prop_assert!(p.add(&q).unwrap().max_distance(&a).unwrap() < 1e-14);
    }

    #[test]
    fn quaternionic_structure_is_antilinear_and_squares_to_minus_one(v in proptest::collection::vec(complex(1.0), 4), s in complex(2.0)) {
        let v = [v[0], v[1], v[2], v[3]];
        let j = QuaternionicBundle::quaternionic_structure;
        let jj = j(j(v));
        prop_assert!(jj.iter().zip(&v).all(|(a, b)| (a + b).norm() < 1e-14));
        let scaled = j(v.map(|x| x * s));
        let expected = j(v).map(|x| x * s.conj());
        prop_assert!(scaled.iter().zip(&expected).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn reality_pairings_are_recognised(reps in proptest::collection::vec((0.2..0.8f64, 0.0..std::f64::consts::TAU), 1..5)) {
        let reps: Vec<Complex64> = reps.iter().map(|&(r, t)| Complex64::from_polar(r, t)).collect();
        // Skip sets whose points nearly collide.
        let close = reps.iter().enumerate().any(|(a, p)| reps.iter().skip(a + 1).any(|q| (p - q).norm() < 0.05));
        prop_assume!(!close);
        let tol = Tolerances::default();
        let plus: Vec<Complex64> = reps.iter().flat_map(|&q| [q, 1.0 / q.conj()]).collect();
        prop_assert_eq!(reality_classify(&plus, &tol).class, RealityType::PlusType);
        let minus: Vec<Complex64> = reps.iter().flat_map(|&q| [q, -1.0 / q.conj()]).collect();
        let m = reality_classify(&minus, &tol);
        prop_assert_eq!(m.class, RealityType::MinusType);
        prop_assert_eq!(m.lift_inconsistent, (reps.len() - 1) % 2 == 0);
    }

    #[test]
    fn planted_discriminant_vanishes_at_planted_points(
        pairs in proptest::collection::vec(((1.2..3.0f64, 0.0..6.28f64), 1u32..3), 1..4),
        kappa in 0.5..2.0f64,
    ) {
        let pairs: Vec<(Complex64, u32)> = pairs.iter().map(|&((r, t), m)| (Complex64::from_polar(r, t), m)).collect();
        let odd = pairs.iter().filter(|(_, m)| m % 2 == 1).count();
        let d = PlantedDiscriminant::new(kappa, pairs);
        prop_assert_eq!(d.genus(), odd);
        for (q, _) in d.zeros() {
            prop_assert!(d.discriminant(q).unwrap().norm() < 1e-10);
        }
    }

    #[test]
    fn fixture_syntax_round_trips(r in 0.01..0.99f64, re in -3.0..3.0f64, im in -3.0..3.0f64) {
        for f in [Fixture::Clifford, Fixture::Homogeneous { r }, Fixture::Vacuum { c: Complex64::new(re, im) }] {
            if matches!(f, Fixture::Vacuum { c } if c.norm() == 0.0) {
                continue;
            }
            prop_assert_eq!(f.to_string().parse::<Fixture>().unwrap(), f);
        }
    }

    #[test]
    fn tolerance_fields_round_trip_by_name(idx in 0..Tolerances::FIELD_NAMES.len(), v in 1e-14..1.0f64) {
        let name = Tolerances::FIELD_NAMES[idx];
        let mut t = Tolerances::default();
        prop_assert!(t.set(name, v));
        let entries = t.entries();
        prop_assert_eq!(entries.len(), Tolerances::FIELD_NAMES.len());
        prop_assert!(entries.iter().any(|&(n, x)| n == name && x == v));
        prop_assert!(t.validate().is_ok());
        prop_assert!(!t.clone().set("no_such_field", v));
    }
}
