//! Fast invariant suite behind `szego verify`. Small grids, fixed seeds; each
//! check reports the measured quantity next to the tolerance it must meet.

use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use szego_core::fock::{fock_defect_check, fock_project, multi_indices, FockParam};
use szego_core::heis::{Closure, FieldEvaluator, GridSpec, SampledField};
use szego_core::norms::liu_bound;
use szego_core::samples;
use szego_core::sphere::{
    build_fs_chart, kernel_constant_by_quadrature, sphere_kernel_constant, sphere_szego_apply, SphereField, SphereGrid,
    SpherePoint,
};
use szego_core::szego::{
    commutator_energy_check, high_freq_check, kernel_constant, szego_apply, szego_apply_kernel, szego_eval_spectral,
    SpectralPointConfig, SzegoConfig,
};
use szego_core::C64;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    /// Worst measured violation measure (an error, or `lhs − rhs`).
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check {
            name,
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub all_pass: bool,
}

fn field(grid: &GridSpec, ev: impl FieldEvaluator + 'static) -> Result<SampledField, CliError> {
    SampledField::from_evaluator(grid, Arc::new(ev)).map_err(|e| CliError::op("sample field", e))
}

fn szego(f: &SampledField, cfg: &SzegoConfig) -> Result<SampledField, CliError> {
    szego_apply(f, cfg).map_err(|e| CliError::op("szego_apply", e))
}

fn idempotence(seed: u64, cfg: &SzegoConfig) -> Result<Vec<Check>, CliError> {
    let grid = GridSpec::new(1, 32, 4.0, 64, 6.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut idem, mut adj, mut contr) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..2 {
        let f = field(&grid, samples::gaussian_field(&mut rng, 1))?;
        let g = field(&grid, samples::gaussian_field(&mut rng, 1))?;
        let sf = szego(&f, cfg)?;
        let ssf = szego(&sf, cfg)?;
        let sg = szego(&g, cfg)?;
        idem = idem.max(ssf.sub(&sf).l2_norm() / f.l2_norm());
        let (l, r) = (sf.inner(&g), f.inner(&sg));
        adj = adj.max((l - r).norm() / l.norm().max(r.norm()));
        contr = contr.max(sf.l2_norm() / f.l2_norm() - 1.0);
    }
    let neg = samples::negative_band_field(&mut rng, &grid, 20).map_err(|e| CliError::op("negative_band_field", e))?;
    let ann = szego(&neg, cfg)?.l2_norm() / neg.l2_norm();
    Ok(vec![
        Check::at_most("heisenberg projection idempotent", idem, 1e-6),
        Check::at_most("heisenberg projection self-adjoint", adj, 1e-8),
        Check::at_most("heisenberg projection contractive", contr, 1e-12),
        Check::at_most("negative frequencies annihilated", ann, 1e-8),
    ])
}

fn dense_fixed_point(seed: u64) -> Result<Check, CliError> {
    let grid = GridSpec::new(1, 48, 5.0, 512, 128.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x11);
    let h = samples::dense_element(&mut rng, 1, 4, 1.0, 2.0).map_err(|e| CliError::op("dense_element", e))?;
    let cfg = SzegoConfig::default().with_degree(h.poly.degree() + 8);
    let f = field(&grid, h)?;
    let err = szego(&f, &cfg)?.rel_l2_error(&f);
    Ok(Check::at_most("dense class is fixed", err, 1e-4))
}

fn route_agreement(seed: u64) -> Result<Vec<Check>, CliError> {
    let grid = GridSpec::new(1, 48, 3.0, 64, 4.0).unwrap();
    let f = field(
        &grid,
        Closure::new(1, "route bump", |z, t| {
            let z = z[0];
            (1.0 + 0.3 * z + 0.2 * z.conj() * z.conj()) * (-4.0 * z.norm_sqr() - 4.0 * t * t).exp()
        }),
    )?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x13);
    let points: Vec<(Vec<C64>, f64)> = (0..8)
        .map(|_| {
            let r = rng.gen_range(0.0..0.5);
            let th = rng.gen_range(0.0..2.0 * PI);
            let t = rng.gen_range(3.2..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (vec![C64::from_polar(r, th)], t)
        })
        .collect();
    let kern = szego_apply_kernel(&f, &points, 0.5).map_err(|e| CliError::op("szego_apply_kernel", e))?;
    let spectral = szego_eval_spectral(&f, &points, &SpectralPointConfig::default())
        .map_err(|e| CliError::op("szego_eval_spectral", e))?;
    let worst = kern
        .iter()
        .zip(&spectral)
        .map(|(a, b)| (a - b).norm() / b.norm())
        .fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("kernel and spectral routes agree", worst, 1e-3),
        Check::at_most("kernel constant", (kernel_constant(1) - 1.0 / (PI * PI)).abs(), 1e-15),
    ])
}

fn fock(seed: u64) -> Result<Vec<Check>, CliError> {
    let (mut repro, mut defect) = (0.0f64, f64::NEG_INFINITY);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x17);
    for xi in [0.5, 1.0, 2.0] {
        let p = FockParam::new(xi, 1);
        for alpha in multi_indices(1, 6) {
            let a = alpha[0];
            let b = fock_project(&|z| z[0].powu(a), &p).map_err(|e| CliError::op("fock_project", e))?;
            for (k, v) in &b.coeffs {
                let expect = if *k == alpha { 1.0 } else { 0.0 };
                repro = repro.max((v - expect).norm());
            }
        }
        let b = fock_project(&|z| z[0].conj(), &p).map_err(|e| CliError::op("fock_project", e))?;
        repro = b.coeffs.values().map(|v| v.norm()).fold(repro, f64::max);
        for _ in 0..10 {
            let coef: Vec<C64> = (0..6).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
            let gamma = rng.gen_range(0.0..1.0);
            // c0 + c1 z + c2 z̄ + c3 z z̄ + c4 z̄² + c5 z², times e^{-γ|z|²}
            let poly = |z: C64| {
                coef[0] + coef[1] * z + coef[2] * z.conj() + coef[3] * z * z.conj() + coef[4] * z.conj() * z.conj()
                    + coef[5] * z * z
            };
            let dbar = |z: C64| coef[2] + coef[3] * z + 2.0 * coef[4] * z.conj();
            let w = |z: C64| (-gamma * z.norm_sqr()).exp();
            let d = fock_defect_check(
                &|z| poly(z[0]) * w(z[0]),
                &|z| vec![(dbar(z[0]) - gamma * z[0] * poly(z[0])) * w(z[0])],
                &p,
            )
            .map_err(|e| CliError::op("fock_defect_check", e))?;
            defect = defect.max(d.lhs - d.rhs - szego_core::fock::slack(d.rhs));
        }
    }
    Ok(vec![
        Check::at_most("fock projection reproduces monomials", repro, 1e-10),
        Check::at_most("fock defect bound (excess over slack)", defect, 0.0),
    ])
}

fn energy_checks(seed: u64, cfg: &SzegoConfig) -> Result<Vec<Check>, CliError> {
    let grid = GridSpec::new(1, 48, 4.0, 128, 4.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1d);
    let f = field(&grid, samples::smooth_packets(&mut rng, 1))?;
    let mut excess = f64::NEG_INFINITY;
    let mut growth = f64::NEG_INFINITY;
    let mut prev = f64::INFINITY;
    for t in [1.0, 4.0, 16.0] {
        let chk = high_freq_check(&f, t, cfg).map_err(|e| CliError::op("high_freq_check", e))?;
        excess = excess.max(chk.lhs - chk.rhs - szego_core::fock::slack(chk.rhs));
        growth = growth.max(chk.lhs - prev);
        prev = chk.lhs;
    }
    let cgrid = GridSpec::new(1, 128, 2.6, 128, 7.0).unwrap();
    let c = field(&cgrid, samples::compact_field(&mut rng, 1))?;
    let chk = commutator_energy_check(&c);
    let disc = chk.terms.iter().map(|t| t.rel_discrepancy).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("high-frequency estimate (excess over slack)", excess, 0.0),
        // strictly decreasing in T
        Check {
            name: "high-frequency lhs decreasing in T",
            value: growth,
            tolerance: 0.0,
            pass: growth < 0.0,
        },
        Check::at_most("commutator energy balance", disc, 1e-6),
    ])
}

fn liu(seed: u64) -> Result<Vec<Check>, CliError> {
    let l = |n, p| liu_bound(n, p).map_err(|e| CliError::op("liu_bound", e));
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x1f);
    let mut asym = 0.0f64;
    for _ in 0..10 {
        let n = rng.gen_range(1..6);
        let p = rng.gen_range(1.05..20.0);
        asym = asym.max((l(n, p)? - l(n, p / (p - 1.0))?).abs());
    }
    Ok(vec![
        Check::at_most("liu bound at p = 2", (l(1, 2.0)? - 1.0).abs(), 0.0),
        Check::at_most("liu bound at p = 4", (l(1, 4.0)? - PI / 2.0).abs(), 1e-12),
        Check::at_most("liu bound symmetric under p ↔ p'", asym, 0.0),
    ])
}

fn sphere() -> Result<Vec<Check>, CliError> {
    let g = SphereGrid::new(4, 12, 32, 32).map_err(|e| CliError::op("sphere grid", e))?;
    let apply = |f: &SphereField| sphere_szego_apply(f).map_err(|e| CliError::op("sphere_szego_apply", e));
    let one = SphereField::sample(&g, |_| C64::new(1.0, 0.0));
    let constant = apply(&one)?.sub(&one).max_abs();
    let (mut fixed, mut killed) = (0.0f64, 0.0f64);
    for deg in 0..=6u32 {
        for a1 in 0..=deg {
            let m = move |x: &SpherePoint| x.z1.powu(a1) * x.z2.powu(deg - a1);
            let f = SphereField::sample(&g, m);
            fixed = fixed.max(apply(&f)?.sub(&f).l2_norm() / f.l2_norm());
            if deg > 0 {
                let f = SphereField::sample(&g, |x| m(x).conj());
                killed = killed.max(apply(&f)?.l2_norm() / f.l2_norm());
            }
        }
    }
    let kc = (kernel_constant_by_quadrature(&g) - sphere_kernel_constant()).abs() / sphere_kernel_constant();
    let chart = build_fs_chart(&SpherePoint::pole()).map_err(|e| CliError::op("build_fs_chart", e))?;
    let sl = &chart.slopes;
    // shortfall of the measured decay rates below the required ones
    let shortfall = sl
        .dz
        .iter()
        .map(|d| sl.required_dz - d)
        .chain(sl.dt.iter().map(|d| sl.required_dt - d))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(vec![
        Check::at_most("sphere constants reproduced", constant, 1e-8),
        Check::at_most("sphere holomorphic monomials fixed", fixed, 1e-6),
        Check::at_most("sphere conjugate monomials annihilated", killed, 1e-6),
        Check::at_most("sphere kernel constant by quadrature", kc, 1e-10),
        Check::at_most("chart error-field decay shortfall", shortfall, 0.0),
    ])
}

/// Runs every check; an operation error aborts the suite.
pub fn run_verify(seed: u64, cfg: &SzegoConfig) -> Result<VerifyReport, CliError> {
    let mut checks = Vec::new();
    checks.extend(idempotence(seed, cfg)?);
    checks.push(dense_fixed_point(seed)?);
    checks.extend(route_agreement(seed)?);
    checks.extend(fock(seed)?);
    checks.extend(energy_checks(seed, cfg)?);
    checks.extend(liu(seed)?);
    checks.extend(sphere()?);
    let all_pass = checks.iter().all(|c| c.pass);
    Ok(VerifyReport { seed, checks, all_pass })
}
