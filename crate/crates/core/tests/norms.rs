use std::f64::consts::PI;
use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use szego_core::heis::*;
use szego_core::norms::*;
use szego_core::quadrature::{composite_gauss_legendre, uniform_breaks};
use szego_core::samples;
use szego_core::szego::SzegoConfig;
use szego_core::{Error, C64};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn field(grid: &GridSpec, ev: impl FieldEvaluator + 'static) -> SampledField {
    SampledField::from_evaluator(grid, Arc::new(ev)).unwrap()
}

/// `Γ(x) = Γ(x+20) / (x(x+1)…(x+19))`, with `Γ(x+20) = ∫₀^∞ u^{x+19} e^{−u} du`
/// by composite Gauss–Legendre; the shifted integrand is smooth to high order at 0.
fn gamma_oracle(x: f64) -> f64 {
    let y = x + 20.0;
    let rule = composite_gauss_legendre(&uniform_breaks(0.0, 200.0, 400), 20);
    let shifted: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .map(|(&u, &w)| w * ((y - 1.0) * u.ln() - u).exp())
        .sum();
    shifted / (0..20).map(|k| x + k as f64).product::<f64>()
}

#[test]
fn gamma_oracle_is_sane() {
    assert!((gamma_oracle(0.5) - PI.sqrt()).abs() < 1e-10);
    assert!((gamma_oracle(1.5) - PI.sqrt() / 2.0).abs() < 1e-10);
    assert!((gamma_oracle(4.0) - 6.0).abs() < 1e-9);
}

#[test]
fn liu_values() {
    assert_eq!(liu_bound(1, 2.0).unwrap(), 1.0);
    assert!((liu_bound(1, 4.0).unwrap() - PI / 2.0).abs() < 1e-12);
    assert_eq!(liu_bound(1, 4.0).unwrap(), liu_bound(1, 4.0 / 3.0).unwrap());
    for (n, p) in [(1, 3.0), (2, 4.0), (3, 1.7), (2, 6.5)] {
        let m = (n + 1) as f64;
        let q = p / (p - 1.0);
        let oracle = gamma_oracle(m / p) * gamma_oracle(m / q) / gamma_oracle(m / 2.0).powi(2);
        let v = liu_bound(n, p).unwrap();
        assert!((v - oracle).abs() < 1e-9 * oracle, "n={n} p={p}: {v} vs {oracle}");
    }
    for p in [1.0, f64::INFINITY, 0.5] {
        assert!(matches!(liu_bound(1, p), Err(Error::InvalidExponent(_))));
    }
}

proptest! {
    #[test]
    fn liu_is_symmetric_under_conjugation(n in 1usize..6, p in 1.05f64..20.0) {
        let q = p / (p - 1.0);
        prop_assert_eq!(liu_bound(n, p).unwrap(), liu_bound(n, q).unwrap());
        prop_assert!(liu_bound(n, p).unwrap() >= 1.0 - 1e-12);
    }
}

#[test]
fn lp_norm_examples() {
    let grid = GridSpec::new(1, 64, 4.0, 128, 4.0).unwrap();
    let f = field(&grid, KoranyiBump { n: 1, radius: 1.5 });
    for p in [1.0, 2.0, 3.5, f64::INFINITY] {
        let a = lp_norm(&f, p).unwrap().value;
        let b = lp_norm(&f.scaled(c(0.0, -2.5)), p).unwrap().value;
        assert!((b - 2.5 * a).abs() < 1e-13 * b);
    }
    assert_eq!(lp_norm(&SampledField::zeros(&grid), 3.0).unwrap().value, 0.0);
    assert!((lp_norm(&f, f64::INFINITY).unwrap().value - f.max_abs()).abs() == 0.0);
    assert!(matches!(lp_norm(&f, 0.5), Err(Error::InvalidExponent(_))));
}

#[test]
fn lp_norm_scaling_under_dilation() {
    let grid = GridSpec::new(1, 96, 4.5, 256, 4.0).unwrap();
    let f = field(&grid, GaussianTerms::gaussian(1, 1.0, 1.0));
    let fl = pullback(&f, &ScaleParam::new(2.0).unwrap()).unwrap();
    let a = lp_norm(&f, 2.0).unwrap();
    let b = lp_norm(&fl, 2.0).unwrap();
    assert!((b.value - a.value * 2f64.powf(-2.0)).abs() < 1e-8 * a.value);
    assert!(a.error < 1e-6 * a.value);
}

fn dense_grid() -> GridSpec {
    GridSpec::new(1, 48, 5.0, 512, 128.0).unwrap()
}

#[test]
fn dense_class_has_unit_rayleigh() {
    let grid = dense_grid();
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let h = samples::dense_element(&mut rng, 1, 3, 1.0, 2.0).unwrap();
    let cfg = SzegoConfig::default().with_degree(h.poly.degree() + 8);
    let f = field(&grid, h);
    for (p, tol) in [(2.0, 1e-4), (3.0, 1e-3), (4.0, 1e-3)] {
        let r = rayleigh(&f, p, &cfg).unwrap();
        assert!((r.value - 1.0).abs() < tol, "p={p}: {}", r.value);
    }
}

#[test]
fn perturbation_off_cr_subspace_contracts() {
    let grid = dense_grid();
    let h = Arc::new(TestFunctionD::new(HolomorphicPolynomial::one(1), BumpProfile::new(1.0, 2.0).unwrap()));
    let pert = Arc::new(GaussianTerms::new(
        1,
        vec![GaussianTerm::centered(1, c(0.3, 0.0), 1.0, 1.0).with_powers(vec![0], vec![1], 0)],
        "zbar gaussian",
    ));
    let f = field(&grid, Sum::new(vec![h, pert]));
    let r = rayleigh(&f, 2.0, &SzegoConfig::default()).unwrap();
    assert!(r.value < 1.0 - 1e-3, "{}", r.value);
}

#[test]
fn rayleigh_scale_invariance_and_contractivity() {
    let grid = GridSpec::new(1, 48, 5.0, 128, 8.0).unwrap();
    let cfg = SzegoConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    for _ in 0..3 {
        let f = field(&grid, samples::gaussian_field(&mut rng, 1));
        let r = rayleigh(&f, 2.0, &cfg).unwrap();
        assert!(r.value <= 1.0 + 1e-6);
        for p in [2.0, 4.0] {
            let a = rayleigh(&f, p, &cfg).unwrap().value;
            let b = rayleigh(&f.scaled(c(-3.0, 1.5)), p, &cfg).unwrap().value;
            assert!((a - b).abs() <= 1e-13 * a, "{a} vs {b}");
        }
    }
    assert!(matches!(rayleigh(&SampledField::zeros(&grid), 2.0, &cfg), Err(Error::ZeroFunction)));
}

fn family_plan() -> FamilyPlan {
    let grid = GridSpec::new(1, 32, 6.0, 128, 32.0).unwrap();
    FamilyPlan::new(ExtremizerFamily { n: 1 }, &grid, &SzegoConfig::default()).unwrap()
}

#[test]
fn family_members_are_cr_when_b_vanishes() {
    let fam = ExtremizerFamily { n: 1 };
    let ev = fam.evaluator(1.7, 0.0);
    let f = |z: C64, t: f64| ev.eval(&[z], t);
    let h = 1e-5;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let z = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
        let t = rng.gen_range(-3.0..3.0);
        let dx = (f(z + h, t) - f(z - h, t)) / (2.0 * h);
        let dy = (f(z + c(0.0, h), t) - f(z - c(0.0, h), t)) / (2.0 * h);
        let dt = (f(z, t + h) - f(z, t - h)) / (2.0 * h);
        let lbar = (dx + c(0.0, 1.0) * dy) * 0.5 - c(0.0, 1.0) * z * dt;
        assert!(lbar.norm() < 1e-7 * (1.0 + f(z, t).norm()), "{lbar}");
    }
    assert!(fam.feasible(1.0, 0.6, 4.0) && !fam.feasible(0.6, 0.6, 4.0));
    assert!((fam.threshold(4.0) - 1.5).abs() < 1e-15);
    assert!((fam.threshold(4.0 / 3.0) - 1.5).abs() < 1e-15);
    assert!((fam.threshold(2.0) - 1.0).abs() < 1e-15);
}

#[test]
fn optimizer_examples() {
    let plan = family_plan();
    let opts = SearchOptions { budget: 30, seed: 42 };
    assert!(matches!(
        maximize_rayleigh(&plan, &FamilyBox::square(0.6, 4.0), 4.0, &SearchOptions { budget: 10, seed: 1 }),
        Err(Error::InvalidParameter(_))
    ));
    assert!(matches!(
        maximize_rayleigh(&plan, &FamilyBox::square(0.1, 0.5), 4.0, &opts),
        Err(Error::InfeasibleBox)
    ));
    // degenerate box
    let single = maximize_rayleigh(&plan, &FamilyBox::square(1.5, 1.5), 4.0, &opts).unwrap();
    let direct = rayleigh(&plan.trial(1.5, 1.5, 4.0).unwrap(), 4.0, &plan.cfg).unwrap();
    assert_eq!(single.evaluations, 1);
    assert_eq!(single.best.value, direct.value);

    let bx = FamilyBox::new((1.2, 4.0), (0.0, 1.0)).unwrap();
    let m = maximize_rayleigh(&plan, &bx, 2.0, &opts).unwrap();
    assert!(m.best.value <= 1.0 + 1e-6 && m.best.value > 0.95, "{}", m.best.value);
    assert!(m.trace.windows(2).all(|w| w[1].best_so_far >= w[0].best_so_far));
    assert!(m.evaluations <= 30);
    let again = maximize_rayleigh(&plan, &bx, 2.0, &opts).unwrap();
    assert_eq!(m, again);
}

#[test]
fn duality_examples() {
    let plan = family_plan();
    let opts = SearchOptions { budget: 24, seed: 7 };
    let bx = FamilyBox::new((1.6, 4.0), (0.0, 1.0)).unwrap();
    let d = duality_check(&plan, &bx, 3.0, &opts).unwrap();
    assert!(d.estimate_p.best.value >= 1.0 - 1e-3 && d.estimate_q.best.value >= 1.0 - 1e-3, "{d:?}");
    let d2 = duality_check(&plan, &bx, 2.0, &opts).unwrap();
    assert_eq!(d2.gap, 0.0);
    assert!(matches!(duality_check(&plan, &bx, 1.0, &opts), Err(Error::InvalidExponent(_))));
}
