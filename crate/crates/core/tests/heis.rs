use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use szego_core::heis::*;
use szego_core::quadrature::{composite_gauss_legendre, uniform_breaks};
use szego_core::{Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn gaussian() -> Arc<dyn FieldEvaluator> {
    Arc::new(GaussianTerms::gaussian(1, 1.0, 1.0))
}

#[test]
fn parabolic_scale_examples() {
    let s = ScaleParam::new(2.0).unwrap();
    let (z, t) = parabolic_scale(&s, &[c(1.0, 0.0)], 3.0);
    assert_eq!((z[0], t), (c(2.0, 0.0), 12.0));
    let id = ScaleParam::new(1.0).unwrap();
    let p = [c(0.3, -1.7)];
    assert_eq!(parabolic_scale(&id, &p, 2.5), (p.to_vec(), 2.5));
    let three = ScaleParam::new(3.0).unwrap();
    let third = ScaleParam::new(1.0 / 3.0).unwrap();
    let (z1, t1) = parabolic_scale(&three, &p, 2.5);
    let (z2, t2) = parabolic_scale(&third, &z1, t1);
    assert!((z2[0] - p[0]).norm() < 1e-15 && (t2 - 2.5).abs() < 1e-15);
}

#[test]
fn scale_param_validation() {
    assert!(ScaleParam::new(0.0).is_err());
    assert!(ScaleParam::with_theta(2.0, 1.0).is_err());
    assert!(ScaleParam::with_theta(2.0, 0.3).is_ok());
}

#[test]
fn group_law_on_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let ls = [0.5, 1.0, 2.0, 4.0];
    for &l in &ls {
        for &m in &ls {
            let sl = ScaleParam::new(l).unwrap();
            let sm = ScaleParam::new(m).unwrap();
            let slm = ScaleParam::new(l * m).unwrap();
            for _ in 0..100 {
                let z = [c(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0))];
                let t = rng.gen_range(-20.0..20.0);
                let (z1, t1) = parabolic_scale(&sm, &z, t);
                let (z2, t2) = parabolic_scale(&sl, &z1, t1);
                let (z3, t3) = parabolic_scale(&slm, &z, t);
                // powers of two compose without rounding
                assert_eq!(z2, z3);
                assert_eq!(t2, t3);
            }
        }
    }
}

proptest! {
    #[test]
    fn group_law_general_factors(l in 0.1f64..10.0, m in 0.1f64..10.0, x in -5.0f64..5.0, y in -5.0f64..5.0, t in -50.0f64..50.0) {
        let (z1, t1) = parabolic_scale(&ScaleParam::new(m).unwrap(), &[c(x, y)], t);
        let (z2, t2) = parabolic_scale(&ScaleParam::new(l).unwrap(), &z1, t1);
        let (z3, t3) = parabolic_scale(&ScaleParam::new(l * m).unwrap(), &[c(x, y)], t);
        prop_assert!((z2[0] - z3[0]).norm() <= 4.0 * f64::EPSILON * z3[0].norm().max(1e-300));
        prop_assert!((t2 - t3).abs() <= 4.0 * f64::EPSILON * t3.abs());
    }
}

#[test]
fn pullback_examples() {
    let g = GridSpec::new(1, 32, 4.0, 64, 4.0).unwrap();
    let f = SampledField::from_evaluator(&g, gaussian()).unwrap();
    let f2 = pullback(&f, &ScaleParam::new(2.0).unwrap()).unwrap();
    let origin = 16 * 32 * 64 + 16 * 64 + 32;
    assert_eq!(f2.values[origin], f.values[origin]);
    assert_eq!(f2.values[origin], c(1.0, 0.0));
    // exp(-4|z|^2 - 16 t^2) at a lattice point
    let k = 20 * 32 * 64 + 13 * 64 + 37;
    let (x, y, t): (f64, f64, f64) = (-4.0 + 20.0 * 0.25, -4.0 + 13.0 * 0.25, -4.0 + 37.0 * 0.125);
    let expect: f64 = (-4.0 * (x * x + y * y) - 16.0 * t * t).exp();
    assert!((f2.values[k].re - expect).abs() < 1e-15 * expect.max(1e-300) + 1e-300);
    let f1 = pullback(&f, &ScaleParam::new(1.0).unwrap()).unwrap();
    assert_eq!(f1.values, f.values);
    let grid_only = SampledField::from_values(&g, f.values.clone(), "samples").unwrap();
    assert!(matches!(
        pullback(&grid_only, &ScaleParam::new(2.0).unwrap()),
        Err(Error::MissingEvaluator(_))
    ));
}

#[test]
fn sampled_values_match_evaluator() {
    let g = GridSpec::new(1, 16, 3.0, 32, 3.0).unwrap();
    let ev = gaussian();
    let f = SampledField::from_evaluator(&g, ev.clone()).unwrap();
    let zt = g.z_table();
    let ta = g.t_axis();
    for (k, v) in f.values.iter().enumerate() {
        let e = ev.eval(&zt[k / 32..k / 32 + 1], ta[k % 32]);
        assert!((v - e).norm() <= 1e-12 * e.norm());
    }
}

fn lp_sum(f: &SampledField, p: f64) -> f64 {
    f.values.iter().map(|v| v.norm().powf(p)).sum::<f64>() * f.grid.cell()
}

#[test]
fn pullback_l2_scaling_against_gaussian_integrals() {
    // ∫ e^{-2|z|^2-2t^2} = (π/2)·sqrt(π/2)
    let base = PI / 2.0 * (PI / 2.0).sqrt();
    let g = GridSpec::new(1, 96, 4.5, 256, 4.0).unwrap();
    let f = SampledField::from_evaluator(&g, gaussian()).unwrap();
    assert!((lp_sum(&f, 2.0) - base).abs() < 1e-8 * base, "{} vs {base}", lp_sum(&f, 2.0));
    for lambda in [2.0, 4.0] {
        let fl = pullback(&f, &ScaleParam::new(lambda).unwrap()).unwrap();
        let expect = base * lambda.powi(-4);
        assert!((lp_sum(&fl, 2.0) - expect).abs() < 1e-7 * expect, "lambda {lambda}");
    }
}

#[test]
fn homogeneity_of_lp_integrals() {
    let g = GridSpec::new(1, 64, 4.5, 512, 4.0).unwrap();
    let f = SampledField::from_evaluator(&g, gaussian()).unwrap();
    for p in [1.0, 2.0, 4.0] {
        let base = lp_sum(&f, p);
        let fl = pullback(&f, &ScaleParam::new(2.0).unwrap()).unwrap();
        let ratio = lp_sum(&fl, p) / base;
        assert!((ratio - 2f64.powi(-4)).abs() < 1e-8, "p {p}: {ratio}");
    }
}

fn bump_integral(a: f64, b: f64, deriv: usize) -> f64 {
    // independent oracle: jets of φ via truncated Taylor arithmetic, fine composite Gauss–Legendre
    let rule = composite_gauss_legendre(&uniform_breaks(a, b, 400), 16);
    rule.nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&x, &w)| w * bump_jet(a, b, x)[deriv].abs())
        .sum()
}

/// `[φ, φ', φ'', φ''']` at `x` for `φ = exp(4/(b−a)² − 1/((x−a)(b−x)))`.
fn bump_jet(a: f64, b: f64, x: f64) -> [f64; 4] {
    if x <= a || x >= b {
        return [0.0; 4];
    }
    // q = (x−a)(b−x), u = −1/q, φ = C e^u
    let q = [(x - a) * (b - x), (a + b) - 2.0 * x, -2.0, 0.0];
    // reciprocal series r = 1/q
    let r0 = 1.0 / q[0];
    let r1 = -q[1] * r0 * r0;
    let r2 = -(2.0 * q[1] * r1 + q[2] * r0) * r0;
    let r3 = -(3.0 * q[1] * r2 + 3.0 * q[2] * r1 + q[3] * r0) * r0;
    let u = [-r0, -r1, -r2, -r3];
    let w = b - a;
    let e = (4.0 / (w * w) + u[0]).exp();
    [
        e,
        e * u[1],
        e * (u[2] + u[1] * u[1]),
        e * (u[3] + 3.0 * u[1] * u[2] + u[1].powi(3)),
    ]
}

fn unit_d() -> TestFunctionD {
    TestFunctionD::new(HolomorphicPolynomial::one(1), BumpProfile::new(1.0, 2.0).unwrap())
}

#[test]
fn eval_d_at_origin_is_profile_integral() {
    let h = unit_d();
    let v = eval_d(&h, &[c(0.0, 0.0)], 0.0).unwrap();
    let oracle = bump_integral(1.0, 2.0, 0);
    assert!((v.re - oracle).abs() < 1e-10 * oracle);
    assert!(v.im.abs() < 1e-13);
}

#[test]
fn eval_d_matches_direct_quadrature() {
    let h = TestFunctionD::new(
        HolomorphicPolynomial::new(1, vec![(vec![0], c(1.0, 0.0)), (vec![2], c(0.5, -0.25))]).unwrap(),
        BumpProfile::new(0.5, 3.0).unwrap(),
    );
    let rule = composite_gauss_legendre(&uniform_breaks(0.5, 3.0, 800), 16);
    for &(x, y, t) in &[(0.3, -0.2, 1.5), (1.1, 0.4, -7.0), (0.0, 0.9, 30.0)] {
        let z = c(x, y);
        let s = z.norm_sqr();
        let oracle: C64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&xi, &w)| w * h.profile.value(xi) * C64::new(-xi * s, xi * t).exp())
            .sum::<C64>()
            * (c(1.0, 0.0) + c(0.5, -0.25) * z * z);
        let v = eval_d(&h, &[z], t).unwrap();
        let bound: f64 = rule
            .nodes
            .iter()
            .zip(&rule.weights)
            .map(|(&xi, &w)| w * h.profile.value(xi) * (-xi * s).exp())
            .sum::<f64>();
        assert!((v - oracle).norm() < 1e-10 * bound * (1.0 + 0.5 * s), "{v} vs {oracle}");
    }
}

#[test]
fn eval_d_reports_budget_exhaustion() {
    let mut h = unit_d();
    h.max_intervals = 2;
    assert!(matches!(eval_d(&h, &[c(0.0, 0.0)], 500.0), Err(Error::QuadratureFailure(_))));
}

#[test]
fn decay_bounds_at_far_points() {
    let h = unit_d();
    let bounds: Vec<f64> = (0..4).map(|k| bump_integral(1.0, 2.0, k)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let r = rng.gen_range(2.0..4.0);
        let th = rng.gen_range(0.0..2.0 * PI);
        let z = C64::from_polar(r, th);
        let t = rng.gen_range(5.0..200.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let v = eval_d(&h, &[z], t).unwrap();
        let s = r * r;
        let damp = (-s).exp();
        assert!(v.norm() <= damp * bounds[0] * (1.0 + 1e-9));
        let w = c(s, -t);
        for n in 1..=3 {
            let lhs = (w.powi(n as i32) * v).norm();
            assert!(lhs <= damp * bounds[n] * (1.0 + 1e-8) + 1e-300, "N={n}: {lhs} > {}", damp * bounds[n]);
        }
    }
}

#[test]
fn dense_class_is_cr() {
    let g = GridSpec::new(1, 32, 5.0, 128, 24.0).unwrap();
    let h = TestFunctionD::new(
        HolomorphicPolynomial::new(1, vec![(vec![1], c(1.0, 0.0)), (vec![3], c(0.2, 0.1))]).unwrap(),
        BumpProfile::new(1.0, 2.0).unwrap(),
    );
    let f = SampledField::from_evaluator(&g, Arc::new(h)).unwrap();
    let d = cr_defect(&f);
    assert_eq!(d.scheme, DerivativeScheme::Exact);
    assert!(d.value <= 1e-6 * f.l2_norm(), "{} vs {}", d.value, f.l2_norm());
}

#[test]
fn cr_defect_of_conjugate_factor_matches_symbolic_value() {
    // L̄(z̄ e^{-|z|²-t²}) = e^{-|z|²-t²}(1 − |z|² + 2it|z|²), whose squared L² norm is
    // sqrt(π/2)·π/2 (radial moments ∫e^{-2u}(1−u)² du = 1/4, ∫e^{-2u}u² du = 1/4).
    let exact = ((PI / 2.0).sqrt() * PI / 2.0).sqrt();
    let g = GridSpec::new(1, 48, 4.5, 128, 5.0).unwrap();
    let ev = GaussianTerms::new(
        1,
        vec![GaussianTerm::centered(1, c(1.0, 0.0), 1.0, 1.0).with_powers(vec![0], vec![1], 0)],
        "zbar gaussian",
    );
    let f = SampledField::from_evaluator(&g, Arc::new(ev)).unwrap();
    let d = cr_defect(&f);
    assert!(d.value > 0.0);
    assert!((d.value - exact).abs() < 1e-9 * exact, "{} vs {exact}", d.value);
    let grid_only = SampledField::from_values(&g, f.values.clone(), "samples").unwrap();
    let dg = cr_defect(&grid_only);
    assert_eq!(dg.scheme, DerivativeScheme::SpectralFd4);
    assert!((dg.value - exact).abs() < 1e-3 * exact, "{} vs {exact}", dg.value);
    assert!((dg.value - exact).abs() <= dg.error_estimate.max(1e-12) * 10.0);
}

#[test]
fn cr_defect_of_zero_is_zero() {
    let g = GridSpec::new(1, 16, 2.0, 32, 2.0).unwrap();
    assert_eq!(cr_defect(&SampledField::zeros(&g)).value, 0.0);
}

#[test]
fn truncation_warning_for_slow_decay() {
    let g = GridSpec::new(1, 16, 2.0, 32, 2.0).unwrap();
    let f = SampledField::from_evaluator(&g, Arc::new(GaussianTerms::gaussian(1, 0.1, 0.1))).unwrap();
    assert_eq!(f.warnings.len(), 1);
    let f = SampledField::from_evaluator(&g, Arc::new(GaussianTerms::gaussian(1, 8.0, 8.0))).unwrap();
    assert!(f.warnings.is_empty());
}

#[test]
fn field_file_roundtrip() {
    let dir = std::env::temp_dir().join(format!("szego-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let g = GridSpec::new(1, 8, 1.0, 8, 1.0).unwrap();
    let f = SampledField::from_evaluator(&g, gaussian()).unwrap();
    let stem = dir.join("field");
    write_field(&stem, &f).unwrap();
    let back = read_field(&stem).unwrap();
    assert_eq!(back.values, f.values);
    assert_eq!(back.grid, g);
    assert_eq!(back.provenance, f.provenance);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn koranyi_gauge_is_homogeneous() {
    let z = [c(0.3, 0.4)];
    let g1 = koranyi_gauge(&z, 0.7);
    let (z2, t2) = parabolic_scale(&ScaleParam::new(3.0).unwrap(), &z, 0.7);
    assert!((koranyi_gauge(&z2, t2) - 3.0 * g1).abs() < 1e-14);
}

#[test]
fn dense_grid_samples_match_pointwise_quadrature() {
    let g = GridSpec::new(1, 8, 2.0, 512, 128.0).unwrap();
    let poly = HolomorphicPolynomial::new(1, vec![(vec![0], C64::new(0.5, 0.0)), (vec![2], C64::new(-0.2, 1.0))]).unwrap();
    let h = TestFunctionD::new(poly, BumpProfile::new(1.0, 2.0).unwrap());
    let vals = h.sample(&g);
    let jets = h.sample_jets(&g).unwrap();
    let peak = vals.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let zt = g.z_table();
    let ta = g.t_axis();
    for (k, v) in vals.iter().enumerate() {
        let (iz, it) = (k / g.nt, k % g.nt);
        let j = h.jet(&zt[iz..iz + 1], ta[it]).unwrap();
        assert!((v - j.value).norm() <= 1e-12 * peak, "{k}: {v} vs {}", j.value);
        assert!((jets[k].dt - j.dt).norm() <= 1e-12 * 2.0 * peak);
        assert!((jets[k].dzbar[0] - j.dzbar[0]).norm() <= 1e-12 * 4.0 * peak);
    }
}
