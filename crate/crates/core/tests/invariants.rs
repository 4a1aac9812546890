use std::sync::OnceLock;

use hypdeform::chart::grid::{Grid2, Grid3, ScalarField};
use hypdeform::chart::{cumint, diff_u, diff_uu, diff_uv, diff_v, diff_vv, Axis};
use hypdeform::defdata::{build_pair, ch_membership, example_family, warped_support, DeformationDatum};
use hypdeform::gaussmap::{build_geometry, clifford_torus, rotational_isothermic, ChartGeometry, RadiusProfile};
use hypdeform::reconstruct::{gauss_param_f, metric_deviation, ImmersionSample};
use hypdeform::report::Json;
use hypdeform::triple::{triple_from_pair, verify_triple};
use nalgebra::{DMatrix, DVector, Rotation3};
use proptest::prelude::*;

fn grid(n: usize) -> Grid2 {
    Grid2::square(0.0, 1.0, n).unwrap()
}

fn rotational(n: usize, amplitude: f64) -> ChartGeometry {
    let p = RadiusProfile { amplitude, ..RadiusProfile::default() };
    build_geometry(&rotational_isothermic(&p, grid(n)).unwrap()).unwrap()
}

fn f_sample() -> &'static ImmersionSample {
    static S: OnceLock<ImmersionSample> = OnceLock::new();
    S.get_or_init(|| {
        let geom = build_geometry(&clifford_torus(grid(12)).unwrap()).unwrap();
        let s = warped_support(&geom, &[1.0; 12]).unwrap();
        gauss_param_f(&geom, &s, Grid3::new(geom.grid, -0.1, 0.1, 5).unwrap()).unwrap().sample
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn cumint_is_exact_on_affine_integrands(a in -5.0f64..5.0, b in -5.0f64..5.0, c in -5.0f64..5.0, n in 8usize..40) {
        let g = grid(n);
        let f = ScalarField::from_fn(g, |u, v| a + b * u + c * v);
        let iu = cumint(&f, Axis::U).unwrap();
        let iv = cumint(&f, Axis::V).unwrap();
        let eu = ScalarField::from_fn(g, |u, v| a * u + 0.5 * b * u * u + c * v * u);
        let ev = ScalarField::from_fn(g, |u, v| a * v + b * u * v + 0.5 * c * v * v);
        prop_assert!(iu.sub(&eu).max_abs(0).value < 1e-12);
        prop_assert!(iv.sub(&ev).max_abs(0).value < 1e-12);
    }

    #[test]
    fn differences_are_exact_on_quadratics(k in proptest::array::uniform6(-3.0f64..3.0), n in 8usize..40) {
        let g = grid(n);
        let f = ScalarField::from_fn(g, |u, v| k[0] + k[1] * u + k[2] * v + k[3] * u * u + k[4] * u * v + k[5] * v * v);
        let close = |x: &ScalarField, e: &dyn Fn(f64, f64) -> f64| x.sub(&ScalarField::from_fn(g, e)).max_abs(0).value < 1e-8;
        prop_assert!(close(&diff_u(&f).unwrap(), &|u, v| k[1] + 2.0 * k[3] * u + k[4] * v));
        prop_assert!(close(&diff_v(&f).unwrap(), &|u, v| k[2] + k[4] * u + 2.0 * k[5] * v));
        prop_assert!(close(&diff_uu(&f).unwrap(), &|_, _| 2.0 * k[3]));
        prop_assert!(close(&diff_vv(&f).unwrap(), &|_, _| 2.0 * k[5]));
        prop_assert!(close(&diff_uv(&f).unwrap(), &|_, _| k[4]));
    }

    #[test]
    fn metric_is_invariant_under_rigid_motions(
        angles in proptest::array::uniform3(-3.0f64..3.0),
        shift in proptest::array::uniform4(-10.0f64..10.0),
    ) {
        let f = f_sample();
        let r3 = Rotation3::from_euler_angles(angles[0], angles[1], angles[2]);
        let mut r = DMatrix::identity(4, 4);
        r.view_mut((1, 1), (3, 3)).copy_from(r3.matrix());
        let moved = f.moved(&r, &DVector::from_column_slice(&shift));
        prop_assert!(metric_deviation(f, &moved).unwrap().value < 1e-12);
    }

    #[test]
    fn report_bytes_ignore_insertion_order(vals in proptest::collection::vec(-1e9f64..1e9, 1..12), seed in any::<u64>()) {
        let keys: Vec<String> = (0..vals.len()).map(|k| format!("k{k:02}")).collect();
        let mut a = Json::map();
        for (k, v) in keys.iter().zip(&vals) {
            a.set(k, *v);
        }
        let mut order: Vec<usize> = (0..vals.len()).collect();
        order.sort_by_key(|i| (*i as u64).wrapping_mul(seed | 1).rotate_left(17));
        let mut b = Json::map();
        for i in order {
            b.set(&keys[i], vals[i]);
        }
        prop_assert_eq!(a.to_pretty(), b.to_pretty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn tau_recovers_the_pair(c in 3.0f64..6.0, d in 1.5f64..3.0, amplitude in 0.0f64..0.2) {
        let geom = rotational(24, amplitude);
        let (u, v) = example_family(&geom, c, d).unwrap();
        let datum = build_pair(&geom, &u, &v).unwrap();
        let t = triple_from_pair(&geom, &datum).unwrap();
        for k in 0..geom.grid.len() {
            let (t1, t2) = (t.diag.tau1.data[k].re, t.diag.tau2.data[k].re);
            let phi = 1.0 / (t1 + t2 - 2.0);
            let psi = 1.0 / (1.0 / t1 + 1.0 / t2 - 2.0);
            prop_assert!((phi - datum.phi.data[k]).abs() < 1e-10);
            prop_assert!((psi - datum.psi.data[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn swapping_the_pair_keeps_verdicts(c in 3.0f64..6.0, d in 1.5f64..3.0, amplitude in 0.0f64..0.2) {
        let geom = rotational(24, amplitude);
        let (u, v) = example_family(&geom, c, d).unwrap();
        let datum = build_pair(&geom, &u, &v).unwrap();
        let t = triple_from_pair(&geom, &datum).unwrap();
        let s = warped_support(&geom, &[1.0; 24]).unwrap();
        let a = verify_triple(&geom, &t, &s, None).unwrap();
        let b = verify_triple(&geom, &t.swapped(), &s, None).unwrap();
        for (k, check) in &a.0 {
            prop_assert_eq!(check.pass, b.get(k).unwrap().pass, "{}", k);
        }
    }

    #[test]
    fn membership_survives_refinement(c in 3.0f64..6.0, d in 1.5f64..3.0, amplitude in 0.0f64..0.2) {
        let run = |n: usize| {
            let geom = rotational(n, amplitude);
            let (u, v) = example_family(&geom, c, d).unwrap();
            let tol = 50.0 * geom.grid.h2();
            (ch_membership(&DeformationDatum::Hyperbolic(build_pair(&geom, &u, &v).unwrap()), Some(tol)), tol)
        };
        let (coarse, tol) = run(24);
        prop_assume!(coarse.pass && coarse.max_residual * 10.0 <= tol);
        prop_assert!(run(48).0.pass);
    }
}
