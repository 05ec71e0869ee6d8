mod common;

use contact_core::calculus::{
    gradient_at, hessian_at, lie_bracket_at, lie_derivative_form, parse_field, to_source, Params, ScalarField,
    VectorFieldExpr,
};
use contact_core::{DarbouxChart, Error};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{fd_gradient, random_points, random_polynomial};

const CORPUS: &[&str] = &[
    "0",
    "1",
    "-1",
    "2.5e-3",
    "x1",
    "y1",
    "z",
    "-z",
    "--x1",
    "x1 + y1",
    "x1 - y1 - z",
    "x1 - (y1 - z)",
    "x1 * y1 / z",
    "x1 / (y1 * z)",
    "x1 / y1 / z",
    "x1^2",
    "x1^2^3",
    "(x1^2)^3",
    "-x1^2",
    "(-x1)^2",
    "x1^-1",
    "x1^0.5",
    "x1^y1",
    "2^x1",
    "exp(x1)",
    "log(1 + x1^2)",
    "sin(x1) * cos(y1)",
    "exp(-z) * sin(x1 + y1)",
    "(x1^2 + y1^2)/2 + 0.1*z",
    "(x1^2 + y1^2)/2 + $gamma*z",
    "$gamma * $gamma * x1",
    "x2 * y2 - x1 * y1",
    "cos(x2) + (y1^2 + y2^2)/2 + y1",
    "exp(x1/2)*y2 - z*y1",
    "sin(x2*z) + exp(y1/3)",
    "1/(1 + x1^2 + y2^2)",
    "log(exp(z))",
    "sin(sin(sin(x1)))",
    "x1*(y1 + z)*(x2 - y2)",
    "(x1 + 1)^3 - 3*(x1 + 1)",
    "z^2 - 2*z + 1",
    "-(x1 - y1)",
    "- (x1 + y1) * z",
    "x1 - -y1",
    "1e3 * x1 + 1E-3 * y1",
    "cos(0)",
    "exp(0) * z",
    "y1 * diff(z, z)",
    "diff(x1^3, x1)",
    "diff(diff(sin(x1*y1), x1), y1)",
    "x2^2 / (1 + exp(-y2))",
    "(x1 - x2)^2 + (y1 - y2)^2 + z^2",
    "sin(x1)^2 + cos(x1)^2",
    "0.3 * z^2 + cos(x2)",
];

fn chart2() -> DarbouxChart {
    DarbouxChart::new(2).unwrap()
}

fn params() -> Params {
    Params::from([("gamma".to_string(), 0.1)])
}

fn same_value(a: &ScalarField, b: &ScalarField, p: &[f64]) -> bool {
    match (a.value(p), b.value(p)) {
        (Ok(u), Ok(v)) => (u - v).abs() <= 1e-12 * u.abs().max(1.0) || (u.is_nan() && v.is_nan()),
        (Err(_), Err(_)) => true,
        _ => false,
    }
}

#[test]
fn corpus_round_trips() {
    let chart = chart2();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let points = random_points(&mut rng, &chart, 20, 1.5);
    assert!(CORPUS.len() >= 50);
    for src in CORPUS {
        let f = parse_field(src, &chart, &params()).unwrap_or_else(|e| panic!("{src}: {e}"));
        let printed = to_source(&f, &chart);
        let g = parse_field(&printed, &chart, &params()).unwrap_or_else(|e| panic!("{printed}: {e}"));
        assert_eq!(to_source(&g, &chart), printed, "printing is not a fixed point for {src}");
        for p in &points {
            assert!(same_value(&f, &g, p.as_slice()), "{src} vs {printed} at {:?}", p.as_slice());
        }
    }
}

#[test]
fn parse_examples() {
    let c1 = DarbouxChart::new(1).unwrap();
    let f = parse_field("(x1^2 + y1^2)/2 + 0.1*z", &c1, &Params::new()).unwrap();
    assert!((f.value(&[1.0, 1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
    let z = parse_field("z", &c1, &Params::new()).unwrap();
    let g = gradient_at(&z, &[0.3, -2.0, 5.0]).unwrap();
    assert_eq!(g.as_slice(), &[0.0, 0.0, 1.0]);
    let err = parse_field("foo(x1)", &c1, &Params::new()).unwrap_err();
    assert!(err.to_string().contains("foo"), "{err}");
}

#[test]
fn out_of_chart_coordinate_is_rejected() {
    let c1 = DarbouxChart::new(1).unwrap();
    assert!(parse_field("x2", &c1, &Params::new()).is_err());
    assert!(parse_field("$missing * z", &c1, &Params::new()).is_err());
}

#[test]
fn damped_oscillator_gradient_and_hessian_against_finite_differences() {
    let c1 = DarbouxChart::new(1).unwrap();
    let f = parse_field("(x1^2 + y1^2)/2 + $gamma*z", &c1, &params()).unwrap();
    let p = [1.0, 2.0, 0.0];
    let g = gradient_at(&f, &p).unwrap();
    let fd = fd_gradient(&f, &p, 1e-5);
    for k in 0..3 {
        assert!((g[k] - fd[k]).abs() <= 1e-6);
    }
    assert!((g - DVector::from_vec(vec![1.0, 2.0, 0.1])).amax() < 1e-14);
    let h = hessian_at(&f, &p).unwrap();
    assert!((h - nalgebra::DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, 0.0]))).amax() < 1e-14);
}

/// Hessian by central differences of the exact gradient.
fn fd_hessian(f: &ScalarField, p: &[f64], h: f64) -> nalgebra::DMatrix<f64> {
    let n = p.len();
    let mut out = nalgebra::DMatrix::zeros(n, n);
    for k in 0..n {
        let mut a = p.to_vec();
        let mut b = p.to_vec();
        a[k] += h;
        b[k] -= h;
        let d = (gradient_at(f, &a).unwrap() - gradient_at(f, &b).unwrap()) / (2.0 * h);
        out.set_column(k, &d);
    }
    out
}

#[test]
fn derivatives_agree_with_finite_differences_on_random_fields() {
    let chart = chart2();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let transcendental = parse_field("sin(x1*y2) + exp(z/2)*cos(x2) + log(2 + y1^2)", &chart, &Params::new()).unwrap();
    for trial in 0..10 {
        let f = if trial % 2 == 0 {
            random_polynomial(&mut rng, chart.dim(), 3)
        } else {
            random_polynomial(&mut rng, chart.dim(), 2) * transcendental.clone()
        };
        for p in random_points(&mut rng, &chart, 10, 1.0) {
            let q = p.as_slice();
            let g = gradient_at(&f, q).unwrap();
            let fd = fd_gradient(&f, q, 1e-5);
            for k in 0..chart.dim() {
                assert!((g[k] - fd[k]).abs() <= 1e-6 * g[k].abs().max(1.0), "gradient slot {k}");
            }
            let h = hessian_at(&f, q).unwrap();
            assert!((&h - h.transpose()).amax() <= 1e-12);
            let fdh = fd_hessian(&f, q, 1e-5);
            assert!((&h - &fdh).amax() <= 1e-6 * h.amax().max(1.0));
        }
    }
}

fn random_field(rng: &mut ChaCha8Rng, chart: &DarbouxChart, degree: u32) -> VectorFieldExpr {
    VectorFieldExpr::new((0..chart.dim()).map(|_| random_polynomial(rng, chart.dim(), degree)).collect())
}

#[test]
fn lie_bracket_is_bilinear_antisymmetric_and_satisfies_jacobi() {
    let chart = chart2();
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let x = random_field(&mut rng, &chart, 2);
    let y = random_field(&mut rng, &chart, 2);
    let w = random_field(&mut rng, &chart, 2);
    let xy = contact_core::calculus::lie_bracket_field(&x, &y);
    let yw = contact_core::calculus::lie_bracket_field(&y, &w);
    let wx = contact_core::calculus::lie_bracket_field(&w, &x);
    let combo = x.add(&y.scale(&ScalarField::constant(2.5)));
    for p in random_points(&mut rng, &chart, 30, 1.0) {
        let q = p.as_slice();
        assert!(lie_bracket_at(&x, &x, q).unwrap().amax() <= 1e-12);
        let anti = lie_bracket_at(&x, &y, q).unwrap() + lie_bracket_at(&y, &x, q).unwrap();
        assert!(anti.amax() <= 1e-12);
        let lin = lie_bracket_at(&combo, &w, q).unwrap()
            - lie_bracket_at(&x, &w, q).unwrap()
            - lie_bracket_at(&y, &w, q).unwrap() * 2.5;
        assert!(lin.amax() <= 1e-10);
        let jac = lie_bracket_at(&x, &yw, q).unwrap() + lie_bracket_at(&y, &wx, q).unwrap() + lie_bracket_at(&w, &xy, q).unwrap();
        assert!(jac.amax() <= 1e-8, "Jacobi residual {}", jac.amax());
    }
}

/// Flow of a constant field is a translation; the pullback of η by it, differentiated at s = 0.
#[test]
fn lie_derivative_of_eta_along_translations_matches_pullback() {
    let c1 = DarbouxChart::new(1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for v in [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.3, -0.4, 2.0]] {
        let x = VectorFieldExpr::constant(&DVector::from_row_slice(&v));
        for p in random_points(&mut rng, &c1, 10, 1.0) {
            let q = p.as_slice();
            let s = 1e-5;
            let shifted = |sign: f64| -> Vec<f64> { q.iter().zip(&v).map(|(a, b)| a + sign * s * b).collect() };
            let fd = (c1.eta_components(&shifted(1.0)) - c1.eta_components(&shifted(-1.0))) / (2.0 * s);
            let l = lie_derivative_form(&c1, &x, &p).unwrap().into_components();
            assert!((l - fd).amax() <= 1e-8);
        }
    }
}

#[test]
fn lie_derivative_of_hamiltonian_field_of_gamma_z() {
    let c1 = DarbouxChart::new(1).unwrap();
    let gamma = 0.7;
    let h = ScalarField::var(c1.z()) * gamma;
    let xh = contact_core::dynamics::hamiltonian_vector_field(&c1, &h);
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for p in random_points(&mut rng, &c1, 20, 2.0) {
        let l = lie_derivative_form(&c1, &xh, &p).unwrap().into_components();
        let expected = c1.eta_components(p.as_slice()) * -gamma;
        assert!((l - expected).amax() <= 1e-12);
    }
}

#[test]
fn evaluation_errors_surface_as_errors() {
    let c1 = DarbouxChart::new(1).unwrap();
    let f = parse_field("log(x1)", &c1, &Params::new()).unwrap();
    assert!(f.value(&[-1.0, 0.0, 0.0]).is_err());
    let e = gradient_at(&f, &[-1.0, 0.0, 0.0]).unwrap_err();
    assert!(!matches!(e, Error::Parse(_)));
}

fn expr_strategy() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        Just("x1".to_string()),
        Just("x2".to_string()),
        Just("y1".to_string()),
        Just("y2".to_string()),
        Just("z".to_string()),
        Just("$gamma".to_string()),
        (-50i32..50).prop_map(|k| format!("{}", k as f64 / 8.0)),
    ];
    leaf.prop_recursive(5, 40, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a} + {b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} - {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} * {b}")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("{a} / ({b})")),
            (inner.clone(), 0u32..4).prop_map(|(a, k)| format!("({a})^{k}")),
            inner.clone().prop_map(|a| format!("-{a}")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.clone().prop_map(|a| format!("cos({a})")),
            inner.clone().prop_map(|a| format!("exp(({a})/10)")),
            inner.prop_map(|a| format!("log(1 + ({a})^2)")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_expressions_reparse_to_the_same_function(
        src in expr_strategy(),
        p in proptest::collection::vec(-1.5f64..1.5, 5),
    ) {
        let chart = chart2();
        let f = parse_field(&src, &chart, &params()).unwrap();
        let printed = to_source(&f, &chart);
        let g = parse_field(&printed, &chart, &params()).unwrap();
        prop_assert!(same_value(&f, &g, &p), "{} -> {}", src, printed);
    }

    #[test]
    fn gradient_matches_finite_differences(
        src in expr_strategy(),
        p in proptest::collection::vec(-1.0f64..1.0, 5),
    ) {
        let chart = chart2();
        let f = parse_field(&src, &chart, &params()).unwrap();
        if let Ok(g) = gradient_at(&f, &p) {
            // Skip points near a pole, where the difference quotient is meaningless.
            let scale = g.amax().max(1.0);
            prop_assume!(scale < 1e4);
            let h = 1e-6;
            for k in 0..5 {
                let mut a = p.clone();
                let mut b = p.clone();
                a[k] += h;
                b[k] -= h;
                if let (Ok(fa), Ok(fb)) = (f.value(&a), f.value(&b)) {
                    let fd = (fa - fb) / (2.0 * h);
                    prop_assert!((g[k] - fd).abs() <= 1e-4 * scale, "slot {} of {}", k, src);
                }
            }
        }
    }
}
