use proptest::prelude::*;

use schlicht::classifiers::{certify, ClassSpec, DiskGrid};
use schlicht::functions::AnalyticFunction;
use schlicht::operators::{apply_inverse_multiplier, apply_multiplier, OperatorSpec};
use schlicht::series::{max_coeff_distance, CoefficientSeries};
use schlicht::Complex;

const ORDER: usize = 16;

fn coeff() -> impl Strategy<Value = Complex> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex::new(re, im))
}

fn series() -> impl Strategy<Value = CoefficientSeries> {
    prop::collection::vec(coeff(), ORDER + 1).prop_map(|c| CoefficientSeries::new(c).unwrap())
}

fn normalized() -> impl Strategy<Value = CoefficientSeries> {
    prop::collection::vec(coeff(), ORDER - 1).prop_map(|tail| {
        let mut c = vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)];
        c.extend(tail);
        CoefficientSeries::new(c).unwrap()
    })
}

fn with_unit_constant() -> impl Strategy<Value = CoefficientSeries> {
    prop::collection::vec(coeff().prop_map(|z| z * 0.3), ORDER).prop_map(|tail| {
        let mut c = vec![Complex::new(1.0, 0.0)];
        c.extend(tail);
        CoefficientSeries::new(c).unwrap()
    })
}

fn operator() -> impl Strategy<Value = OperatorSpec> {
    prop_oneof![
        (-0.9f64..4.0).prop_map(|c| OperatorSpec::bernardi(c).unwrap()),
        (0.1f64..3.0).prop_map(|s| OperatorSpec::jks(s).unwrap()),
    ]
}

/// Multiplier written out directly from its closed form.
fn oracle_multiplier(op: &OperatorSpec, n: usize) -> f64 {
    match *op {
        OperatorSpec::Bernardi { c } => (c + 1.0) / (n as f64 + c),
        OperatorSpec::Jks { sigma } => (2.0 / (n as f64 + 1.0)).powf(sigma),
    }
}

fn scaled_distance(a: &CoefficientSeries, b: &CoefficientSeries) -> f64 {
    max_coeff_distance(a, b) / a.max_abs_coeff().max(b.max_abs_coeff()).max(1.0)
}

proptest! {
    #[test]
    fn cauchy_product_commutes(a in series(), b in series()) {
        prop_assert!(scaled_distance(&a.cauchy_product(&b), &b.cauchy_product(&a)) <= 1e-14);
    }

    #[test]
    fn cauchy_product_associates(a in series(), b in series(), c in series()) {
        let left = a.cauchy_product(&b).cauchy_product(&c);
        let right = a.cauchy_product(&b.cauchy_product(&c));
        prop_assert!(scaled_distance(&left, &right) <= 1e-12);
    }

    #[test]
    fn reciprocal_is_an_involution(a in with_unit_constant()) {
        let back = a.reciprocal().unwrap().reciprocal().unwrap();
        prop_assert!(scaled_distance(&a, &back) <= 1e-10);
        let one = a.cauchy_product(&a.reciprocal().unwrap());
        prop_assert!(scaled_distance(&one, &CoefficientSeries::constant(Complex::new(1.0, 0.0), ORDER)) <= 1e-10);
    }

    #[test]
    fn operators_are_linear(op in operator(), a in normalized(), b in normalized(), s in coeff()) {
        let lhs = apply_multiplier(&op, &(&a + &b.scale(s))).unwrap();
        let rhs = &apply_multiplier(&op, &a).unwrap() + &apply_multiplier(&op, &b).unwrap().scale(s);
        prop_assert!(scaled_distance(&lhs, &rhs) <= 1e-14);
    }

    #[test]
    fn multiplier_matches_closed_form(op in operator(), a in normalized()) {
        let image = apply_multiplier(&op, &a).unwrap();
        for n in 1..=ORDER {
            let expected = a.coeff(n) * oracle_multiplier(&op, n);
            prop_assert!((image.coeff(n) - expected).norm() <= 1e-14 * expected.norm().max(1.0));
        }
    }

    #[test]
    fn bernardi_log_derivative_against_oracle(c in -0.9f64..4.0, a in normalized()) {
        // z(L_c f)' + c L_c f has coefficients (n + c)(c + 1)/(n + c) a_n = (c + 1) a_n.
        let l = apply_multiplier(&OperatorSpec::bernardi(c).unwrap(), &a).unwrap();
        let lhs = &l.z_derivative() + &l.scale(Complex::new(c, 0.0));
        for n in 1..=ORDER {
            let expected = a.coeff(n) * (c + 1.0);
            prop_assert!((lhs.coeff(n) - expected).norm() <= 1e-12 * (c.abs() + 1.0) * ORDER as f64);
        }
    }

    #[test]
    fn operators_commute(c in -0.9f64..4.0, sigma in 0.1f64..3.0, a in normalized()) {
        let l = OperatorSpec::bernardi(c).unwrap();
        let i = OperatorSpec::jks(sigma).unwrap();
        let li = apply_multiplier(&l, &apply_multiplier(&i, &a).unwrap()).unwrap();
        let il = apply_multiplier(&i, &apply_multiplier(&l, &a).unwrap()).unwrap();
        prop_assert!(scaled_distance(&li, &il) <= 1e-14);
    }

    #[test]
    fn inverse_multiplier_round_trips(op in operator(), a in normalized()) {
        let back = apply_inverse_multiplier(&op, &apply_multiplier(&op, &a).unwrap()).unwrap();
        prop_assert!(scaled_distance(&a, &back) <= 1e-12);
    }

    #[test]
    fn operators_commute_with_z_derivative(op in operator(), a in normalized()) {
        let lhs = apply_multiplier(&op, &a.z_derivative()).unwrap();
        let rhs = apply_multiplier(&op, &a).unwrap().z_derivative();
        prop_assert!(scaled_distance(&lhs, &rhs) <= 1e-13);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn refinement_never_raises_the_margin(a in normalized(), lambda in 0.0f64..0.9) {
        let f = AnalyticFunction::from_series(a.clone(), "prop");
        let small = a.map_indexed(|n, v| if n >= 2 { v * 0.05 } else { v });
        let f_small = AnalyticFunction::from_series(small, "prop-small");
        let grid = DiskGrid::new(vec![0.2, 0.5, 0.8], 32).unwrap();
        let fine = grid.refined_to(2);
        prop_assert!(grid.is_subset_of(&fine));
        for f in [&f, &f_small] {
            let spec = ClassSpec::starlike(lambda).unwrap();
            let coarse = certify(f, &spec, &grid, None).unwrap();
            let refined = certify(f, &spec, &fine, None).unwrap();
            prop_assert!(refined.margin <= coarse.margin + 1e-9 * coarse.margin.abs().max(1.0));
        }
    }
}
