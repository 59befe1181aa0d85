use ergolab_core::averaging::{empirical_measure, trace, EmpiricalMeasure};
use ergolab_core::decomposition::MeasureDistance;
use ergolab_core::matrix::IntMatrix;
use ergolab_core::summation::{cesaro, riesz_log, validate_method};
use ergolab_core::systems::{affine_torus, interval_map, IntervalMap, PointRepr};
use ergolab_core::tameness::{decide_tame, flatness_lp, grid_norm, shifted_values};
use ergolab_core::systems::rotation;
use ergolab_core::Rational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn cat() -> IntMatrix {
    IntMatrix::from_i64_rows(&[[2, 1], [1, 1]]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_rows_sum_to_one(n in 0usize..60) {
        for row in [cesaro::<Rational>().row(n).unwrap(), riesz_log::<Rational>().row(n).unwrap()] {
            prop_assert_eq!(row.sum(), Rational::one());
        }
    }

    #[test]
    fn empirical_measures_are_probabilities(a in 0i64..30, b in 0i64..30, n in 0usize..200) {
        let s = affine_torus(cat(), vec![q(0, 1), q(1, 3)]).unwrap();
        let start = PointRepr::rational(vec![q(a, 31), q(b, 31)]);
        let mu = empirical_measure::<Rational>(&s, &riesz_log(), &start, n).unwrap();
        prop_assert_eq!(mu.normalization(), Rational::one());
        prop_assert_eq!(mu.pushforward(&s).unwrap().normalization(), Rational::one());
    }

    #[test]
    fn cesaro_residual_bound(a in 0i64..63, n in 1usize..400) {
        let s = affine_torus(IntMatrix::from_i64_rows(&[[3]]).unwrap(), vec![q(1, 2)]).unwrap();
        let t = trace::<Rational>(&s, &cesaro(), &PointRepr::rational(vec![q(a, 63)]), &[n]).unwrap();
        for (j, x) in t.observables.iter().enumerate() {
            let r = t.residuals[j][0].clone();
            let bound = 2.0 * x.sup_norm() / (n + 1) as f64;
            prop_assert!(ergolab_core::scalar::rational_to_f64(&r) <= bound * (1.0 + 1e-12));
        }
    }

    #[test]
    fn tameness_is_a_conjugacy_invariant(e in prop::array::uniform4(-2i64..=2), k in -3i64..=3) {
        let a = IntMatrix::from_i64_rows(&[[e[0], e[1]], [e[2], e[3]]]).unwrap();
        let p = IntMatrix::from_i64_rows(&[[1, k], [0, 1]]).unwrap();
        let p_inv = IntMatrix::from_i64_rows(&[[1, -k], [0, 1]]).unwrap();
        let b = &(&p * &a) * &p_inv;
        prop_assert_eq!(decide_tame(&a).unwrap().verdict, decide_tame(&b).unwrap().verdict);
    }

    #[test]
    fn metric_axioms(xs in prop::collection::vec((0.0f64..1.0, 0.01f64..1.0), 3..9)) {
        let s = interval_map(IntervalMap::Square).unwrap();
        let metric = MeasureDistance::for_system(&s);
        let m = |atoms: &[(f64, f64)]| {
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            EmpiricalMeasure::new(atoms.iter().map(|(t, w)| (PointRepr::real(vec![*t]), w / total))).unwrap()
        };
        let third = xs.len() / 3;
        let (a, b, c) = (m(&xs[..third]), m(&xs[third..2 * third]), m(&xs[2 * third..]));
        let d = |x: &EmpiricalMeasure<f64>, y: &EmpiricalMeasure<f64>| metric.distance(x, y).unwrap();
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }
}

#[test]
fn validate_pass_tracks_threshold() {
    let strict = validate_method(&cesaro::<f64>(), 50, 1e-3).unwrap();
    let loose = validate_method(&cesaro::<f64>(), 50, 0.1).unwrap();
    assert!(!strict.pass && loose.pass);
    assert!(strict.row_sum_defect.is_zero() || strict.row_sum_defect < 1e-15);
}

#[test]
fn flatness_value_is_grid_norm_of_unit_coefficients() {
    let s = rotation(0.3f64);
    let x = s.observable("cos2").unwrap();
    let grid = s.default_grid(40, false).unwrap();
    let r = flatness_lp(&s, x, &[0, 1, 3, 4], &grid).unwrap();
    let l1: f64 = r.coefficients.iter().map(|c| c.abs()).sum();
    assert!((l1 - 1.0).abs() < 1e-12);
    let values = shifted_values(&s, x, &[0, 1, 3, 4], &grid).unwrap();
    assert_eq!(r.value, grid_norm(&values, &r.coefficients));
    assert!(r.value >= r.lp_objective - 1e-9);
}
