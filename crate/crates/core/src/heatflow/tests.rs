use super::*;
use crate::kernels::{moment_flow_f, poly_flow, Coordinate, Harmonic, ZonalHarmonic};
use proptest::prelude::*;

fn params(a: f64, n: usize) -> DeformParams {
    DeformParams::new(a, n).unwrap()
}

fn point(r: f64, n: usize) -> PolarPoint {
    let mut e: Vec<f64> = (0..n).map(|k| 1.0 + 0.3 * k as f64).collect();
    let s = e.iter().map(|v| v * v).sum::<f64>().sqrt();
    e.iter_mut().for_each(|v| *v /= s);
    PolarPoint::new(r, e).unwrap()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * b.abs().max(1e-300)
}

#[test]
fn radial_rule_exactness() {
    let p = params(1.0, 3);
    for n in [4, 8, 16] {
        let rule = QuadratureRule::new(&p, n, 8, 2, 0, 1.0).unwrap();
        assert!(rule.radial.weights.iter().all(|&w| w > 0.0));
        assert!(rule.angular.weights.iter().all(|&w| w > 0.0));
        for k in 0..2 * n {
            let got: f64 = rule.radial.nodes.iter().zip(&rule.radial.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
            let want = ln_gamma_pos(p.lambda_a + k as f64 + 1.0).exp();
            assert!(close(got, want, 1e-12), "n = {n}, k = {k}: {got} vs {want}");
        }
    }
    assert!(QuadratureRule::new(&p, 1, 8, 2, 0, 1.0).is_err());
    assert!(QuadratureRule::new(&p, 8, 8, 2, 0, 0.0).is_err());
}

#[test]
fn weighted_integral_examples() {
    for (a, n) in [(1.0, 3), (2.0 / 3.0, 2), (3.0, 4), (2.0, 5)] {
        let p = params(a, n);
        let rule = QuadratureRule::default_for(&p);
        let f = ScalarField::radial(0.0, move |r| (-r.powf(a) / a).exp());
        let v = weighted_integral(&p, &f, &rule).unwrap();
        assert!(close(v, 1.0 / p.c_a, 1e-12), "a = {a}, N = {n}: {v} vs {}", 1.0 / p.c_a);

        let g = ScalarField::radial(1.0, move |r| (-r.powf(a) / a).exp() * r.powf(a));
        let want = a.powf(p.lambda_a + 1.0) * ln_gamma_pos(p.lambda_a + 2.0).exp() * p.sphere_volume();
        assert!(close(weighted_integral(&p, &g, &rule).unwrap(), want, 1e-12));

        let odd = ScalarField::new(0.0, move |y: &[f64]| {
            let r = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            y[0] * (1.0 + y[1].powi(2)) * (-r.powf(a) / a).exp()
        });
        assert!(weighted_integral(&p, &odd, &rule).unwrap().abs() < 1e-12);
    }
}

#[test]
fn weighted_integral_flags_divergence() {
    let p = params(1.0, 3);
    let rule = QuadratureRule::default_for(&p);
    let f = ScalarField::radial(0.0, |r| (0.5 * r).exp());
    assert!(matches!(weighted_integral(&p, &f, &rule), Err(Error::QuadratureNonConvergence(_))));
}

#[test]
fn total_mass_is_one() {
    for (a, n) in [(1.0, 3), (2.0, 3), (2.0 / 3.0, 2), (3.0, 4)] {
        let p = params(a, n);
        let rule = QuadratureRule::default_for(&p);
        for t in [0.1, 1.0, 10.0] {
            let req = FlowRequest::new(p, t, ScalarField::constant(1.0)).unwrap();
            for r in [0.0, 0.7, 2.0] {
                let v = heat_flow(&req, &point(r, n), &rule).unwrap();
                assert!((v - 1.0).abs() < 1e-10, "a = {a}, N = {n}, t = {t}, r = {r}: {v}");
            }
        }
    }
}

#[test]
fn moments_match_closed_form() {
    let p = params(1.5, 3);
    let rule = QuadratureRule::default_for(&p);
    for m in 0..=4usize {
        let u = ScalarField::radial(m as f64, move |r| r.powf(1.5 * m as f64));
        let req = FlowRequest::new(p, 0.6, u).unwrap();
        for r in [0.0, 1.1] {
            let x = point(r, 3);
            let want = moment_flow_f(&p, m, 0.6, r.powf(1.5)).unwrap();
            let got = heat_flow(&req, &x, &rule).unwrap();
            assert!(close(got, want, 1e-9), "m = {m}, r = {r}: {got} vs {want}");
        }
    }
}

#[test]
fn polynomial_type_flow() {
    let p = params(1.0, 3);
    let rule = QuadratureRule::default_for(&p);
    let x = point(0.9, 3);
    let xc = x.cartesian();
    for m in 0..=2usize {
        let h1 = Coordinate(2);
        let u = ScalarField::new(m as f64 + 1.0, move |y: &[f64]| {
            y.iter().map(|v| v * v).sum::<f64>().sqrt().powi(m as i32) * y[2]
        });
        let got = heat_flow(&FlowRequest::new(p, 0.4, u).unwrap(), &x, &rule).unwrap();
        let want = poly_flow(&p, m, &h1, 0.4, &xc).unwrap();
        assert!(close(got, want, 1e-8), "l = 1, m = {m}: {got} vs {want}");

        let h2 = ZonalHarmonic { axis: vec![1.0, 0.0, 0.0], m: 2 };
        let want = poly_flow(&p, m, &h2, 0.4, &xc).unwrap();
        let h2c = ZonalHarmonic { axis: vec![1.0, 0.0, 0.0], m: 2 };
        let u = ScalarField::new(m as f64 + 2.0, move |y: &[f64]| {
            y.iter().map(|v| v * v).sum::<f64>().sqrt().powi(m as i32) * h2c.eval(y)
        });
        let got = heat_flow(&FlowRequest::new(p, 0.4, u).unwrap(), &x, &rule).unwrap();
        assert!(close(got, want, 1e-8), "l = 2, m = {m}: {got} vs {want}");
    }
}

#[test]
fn bounded_field_stays_in_range() {
    let p = params(2.0 / 3.0, 2);
    let rule = QuadratureRule::default_for(&p);
    let u = ScalarField::new(0.0, |y: &[f64]| (3.0 * y[0]).sin() * (y[1]).cos()).with_bounds(-1.0, 1.0);
    let xs: Vec<PolarPoint> = [0.0, 0.4, 1.5, 3.0].iter().map(|&r| point(r, 2)).collect();
    let scan = max_principle_scan(&p, &u, &[0.05, 0.5, 2.0], &xs, &rule).unwrap();
    assert_eq!(scan.evaluations, 12);
    assert!(scan.worst_violation <= 0.0, "{scan:?}");

    let c = ScalarField::constant(0.25);
    let scan = max_principle_scan(&p, &c, &[0.3], &xs, &rule).unwrap();
    assert!((scan.max_flow - 0.25).abs() < 1e-13 && (scan.min_flow - 0.25).abs() < 1e-13);

    let bump = ScalarField::radial(0.0, |r| 0.5 * (1.0 - ((r - 1.0) * 8.0).tanh())).with_bounds(0.0, 1.0);
    let p3 = params(1.0, 3);
    let rule3 = QuadratureRule::default_for(&p3);
    let scan = max_principle_scan(&p3, &bump, &[0.01, 0.1], &[point(0.2, 3), point(1.0, 3)], &rule3).unwrap();
    assert!(max_principle_scan(&p3, &bump, &[0.1], &[point(0.2, 3)], &rule).is_err());
    assert!(scan.max_flow <= 1.0 && scan.min_flow >= 0.0);
    assert!(max_principle_scan(&p, &ScalarField::new(0.0, |_| 0.0), &[1.0], &xs, &rule).is_err());
}

#[test]
fn residuals() {
    // a = 2: Gaussian initial data
    let p = params(2.0, 3);
    let rule = QuadratureRule::default_for(&p);
    let u = ScalarField::new(0.0, |y: &[f64]| (-0.5 * (y[0] - 0.3).powi(2) - 0.5 * y[1] * y[1] - 0.5 * y[2] * y[2]).exp());
    let res = heat_equation_residual(&FlowRequest::new(p, 0.5, u).unwrap(), &[0.4, 0.2, -0.3], 0.02, &rule).unwrap();
    assert!(res.relative() < 1e-4, "{res:?}");

    // |y|^a flows to |x|^a + a(λ+1)t, linear in t
    let p = params(1.0, 3);
    let u = ScalarField::radial(1.0, |r| r);
    let req = FlowRequest::new(p, 0.5, u).unwrap();
    assert!(heat_equation_residual(&req, &[0.4, 0.7, -0.3], 0.02, &rule).is_err());
    let rule = QuadratureRule::default_for(&p);
    let res = heat_equation_residual(&req, &[0.4, 0.7, -0.3], 0.02, &rule).unwrap();
    assert!(res.residual.abs() < 1e-6, "{res:?}");
    assert!(close(res.dt, 2.0, 1e-6));

    for (a, n) in [(1.0, 3), (2.0 / 3.0, 2), (3.0, 4)] {
        let p = params(a, n);
        let y = point(1.2, n);
        let mut x = vec![0.3; n];
        x[0] = 0.8;
        let res = kernel_heat_residual(&p, &x, &y, 0.7, 0.01).unwrap();
        assert!(res.relative() < 1e-6, "a = {a}: {res:?}");
    }
    assert!(kernel_heat_residual(&p, &[0.0, 0.0, 0.0], &point(1.0, 3), 1.0, 0.01).is_err());
}

#[test]
fn initial_condition() {
    let p = params(1.0, 3);
    let rule = QuadratureRule::default_for(&p);
    let ts = [1e-1, 1e-2, 1e-3, 1e-4];
    let tab = initial_condition_check(&p, &ScalarField::constant(1.0), &point(1.0, 3), &ts, &rule).unwrap();
    assert!(tab.rows.iter().all(|r| r.1 < 1e-12));

    let tab = initial_condition_check(&p, &ScalarField::radial(1.0, |r| r), &point(1.0, 3), &ts, &rule).unwrap();
    for (t, gap) in &tab.rows {
        assert!(close(*gap, 2.0 * t, 1e-8), "t = {t}: {gap}");
    }
    assert!(tab.monotone);

    let u = ScalarField::new(0.0, |y: &[f64]| y[0].cos());
    let tab = initial_condition_check(&p, &u, &point(0.0, 3), &ts, &rule).unwrap();
    assert!(tab.monotone && tab.final_gap < 1e-6, "{tab:?}");
    assert!(initial_condition_check(&p, &u, &point(0.0, 3), &[0.1, 0.2], &rule).is_err());
}

#[test]
fn composition_rules() {
    let p = params(1.0, 3);
    let rule = QuadratureRule::default_for(&p);
    let c = composition_check(&p, 0.3, 0.5, &ScalarField::constant(1.0), &point(0.8, 3), &rule).unwrap();
    assert!((c.lhs - 1.0).abs() < 1e-12 && (c.rhs - 1.0).abs() < 1e-12);

    // x = 0 against h_a(0, z; t1 + t2)
    for (a, n) in [(1.0, 3), (2.0 / 3.0, 2), (3.0, 4)] {
        let p = params(a, n);
        let rule = QuadratureRule::default_for(&p);
        let c = composition_kernel_check(&p, &point(0.0, n), &point(1.3, n), 0.4, 0.7, &rule).unwrap();
        assert!(c.gap < 1e-8, "a = {a}: {c:?}");
    }

    let u = ScalarField::radial(0.0, |r| 0.3 + 0.5 * (1.7 * r).sin() * (-0.2 * r).exp());
    let c = composition_check(&p, 0.4, 0.6, &u, &point(1.1, 3), &rule).unwrap();
    assert!(c.gap < 1e-8, "{c:?}");

    // a field with angular dependence, on a smaller rule
    let small = QuadratureRule::new(&p, 32, 32, 6, 0, 1.0).unwrap();
    let u = ScalarField::new(0.0, |y: &[f64]| (0.8 * y[0] - 0.5 * y[1]).cos() / (1.0 + 0.1 * y[2] * y[2]));
    let c = composition_check(&p, 0.3, 0.5, &u, &point(0.9, 3), &small).unwrap();
    assert!(c.gap < 1e-5, "{c:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn flow_is_monotone(c0 in -1.0f64..1.0, c1 in -1.0f64..1.0, k in 0.2f64..2.0, r in 0.0f64..2.0, t in 0.05f64..2.0) {
        let p = params(1.0, 3);
        let rule = QuadratureRule::new(&p, 48, 32, 6, 0, 1.0).unwrap();
        let u = ScalarField::new(0.0, move |y: &[f64]| c0 + c1 * (k * y[0]).sin());
        // v - u = 1 + cos²(k y_1) >= 0
        let v = ScalarField::new(0.0, move |y: &[f64]| c0 + c1 * (k * y[0]).sin() + 1.0 + (k * y[1]).cos().powi(2));
        let x = point(r, 3);
        let hu = heat_flow_fixed(&FlowRequest::new(p, t, u).unwrap(), &x, &rule).unwrap().value;
        let hv = heat_flow_fixed(&FlowRequest::new(p, t, v).unwrap(), &x, &rule).unwrap().value;
        prop_assert!(hu <= hv);
    }

    #[test]
    fn growth_is_preserved(cs in prop::collection::vec(-1.0f64..1.0, 3), r in 0.0f64..3.0, t in 0.05f64..3.0) {
        // |u| <= C(1 + |y|^{2a}) with C = Σ|c_k|
        let p = params(2.0 / 3.0, 2);
        let rule = QuadratureRule::default_for(&p);
        let c = cs.iter().map(|v| v.abs()).sum::<f64>();
        let u = ScalarField::new(2.0, move |y: &[f64]| {
            let s = y.iter().map(|v| v * v).sum::<f64>().sqrt().powf(2.0 / 3.0);
            cs[0] + cs[1] * s * (y[0]).sin() + cs[2] * s * s * (y[1]).cos()
        });
        let x = point(r, 2);
        let v = heat_flow_fixed(&FlowRequest::new(p, t, u).unwrap(), &x, &rule).unwrap().value;
        let bound = c * (1.0 + moment_flow_f(&p, 2, t, r.powf(2.0 / 3.0)).unwrap());
        prop_assert!(v.abs() <= bound * (1.0 + 1e-12));
    }
}
