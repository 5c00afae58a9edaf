//! One function per command. Each returns a summary for stdout and writes
//! its result files plus `manifest.json` into the output directory.

use std::path::Path;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use szego_core::heis::{cr_defect, write_field, Closure, FieldEvaluator, GaussianTerms, GridSpec, SampledField};
use szego_core::norms::{
    conjugate, duality_check, liu_bound, lp_norm, rayleigh, ExtremizerFamily, FamilyPlan, SearchOptions,
};
use szego_core::samples;
use szego_core::sphere::{build_fs_chart, transplant_experiment, CutoffSpec, SpherePoint, TransplantConfig};
use szego_core::szego::{szego_apply_with_report, SzegoConfig, COMMUTATOR_TOL};
use szego_core::C64;

use crate::config::{CommandKind, ExperimentConfig, FieldKind};
use crate::error::CliError;
use crate::output::{gnuplot_script, prepare_dir, write_csv, write_json, Estimate};
use crate::verify::run_verify;

/// What a command prints and whether it succeeded.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub success: bool,
    pub files: Vec<String>,
}

/// Relative accuracy assumed for the Gamma-function evaluations.
const GAMMA_REL_ERROR: f64 = 1e-14;

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    core_version: &'static str,
    command: &'static str,
    seed: u64,
    config: &'a ExperimentConfig,
    tolerances: Value,
    files: &'a [String],
}

fn write_manifest(dir: &Path, cfg: &ExperimentConfig, cmd: CommandKind, tol: Value, files: &[String]) -> Result<(), CliError> {
    let m = Manifest {
        tool: "szego",
        version: env!("CARGO_PKG_VERSION"),
        core_version: szego_core::VERSION,
        command: cmd.name(),
        seed: cfg.seed,
        config: cfg,
        tolerances: tol,
        files,
    };
    write_json(&dir.join("manifest.json"), &m)
}

fn sample(grid: &GridSpec, ev: Arc<dyn FieldEvaluator>) -> Result<SampledField, CliError> {
    SampledField::from_evaluator(grid, ev).map_err(|e| CliError::op("sample field", e))
}

/// Runs a validated config.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let cmd = cfg.command()?;
    let dir = prepare_dir(&cfg.output_dir()?)?;
    match cmd {
        CommandKind::Project => project(cfg, &dir),
        CommandKind::NormBound => norm_bound(cfg, &dir),
        CommandKind::Liu => liu(cfg, &dir),
        CommandKind::Transplant => transplant(cfg, &dir),
        CommandKind::Verify => verify(cfg, &dir),
    }
}

fn project(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (ev, szego, default_grid): (Arc<dyn FieldEvaluator>, SzegoConfig, GridSpec) = match cfg.field {
        FieldKind::Random => (
            Arc::new(samples::gaussian_field(&mut rng, 1)),
            cfg.szego,
            GridSpec::new(1, 64, 5.0, 128, 8.0).unwrap(),
        ),
        FieldKind::Bump => (
            Arc::new(GaussianTerms::gaussian(1, 1.0, 1.0)),
            cfg.szego,
            GridSpec::new(1, 64, 5.0, 128, 8.0).unwrap(),
        ),
        FieldKind::Dense => {
            let h = samples::dense_element(&mut rng, 1, 4, 1.0, 2.0).map_err(|e| CliError::op("dense_element", e))?;
            let s = if cfg.szego.degree < h.poly.degree() + 8 {
                cfg.szego.with_degree(h.poly.degree() + 8)
            } else {
                cfg.szego
            };
            (Arc::new(h), s, GridSpec::new(1, 48, 5.0, 512, 128.0).unwrap())
        }
    };
    let grid = cfg.grid.clone().unwrap_or(default_grid);
    let f = sample(&grid, ev)?;
    let (sf, report) = szego_apply_with_report(&f, &szego).map_err(|e| CliError::op("szego_apply", e))?;
    let (ssf, _) = szego_apply_with_report(&sf, &szego).map_err(|e| CliError::op("szego_apply", e))?;
    let norm = |g: &SampledField, p| lp_norm(g, p).map_err(|e| CliError::op("lp_norm", e));
    let fin = norm(&f, 2.0)?;
    let fout = norm(&sf, 2.0)?;
    let idem = norm(&ssf.sub(&sf), 2.0)?;
    let mut quotients = Vec::new();
    for &p in &cfg.exponents {
        let r = rayleigh(&f, p, &szego).map_err(|e| CliError::op("rayleigh", e))?;
        quotients.push(json!({"p": p, "rayleigh": Estimate::new(r.value, r.quadrature_error)}));
    }
    let cr = cr_defect(&sf);
    let rel_change = sf.rel_l2_error(&f);
    write_field(&dir.join("projected"), &sf).map_err(|e| CliError::op("write_field", e))?;
    let record = json!({
        "command": "project",
        "field": f.provenance,
        "grid": grid,
        "szego": szego,
        "input_l2": Estimate::new(fin.value, fin.error),
        "output_l2": Estimate::new(fout.value, fout.error),
        "idempotence_defect": Estimate::new(idem.value / fin.value, idem.error / fin.value),
        "relative_change": Estimate::new(rel_change, fin.error / fin.value),
        "cr_defect_of_output": Estimate::new(cr.value, cr.error_estimate),
        "rayleigh": quotients,
        "projection": report,
        "input_warnings": f.warnings.len(),
    });
    write_json(&dir.join("project.json"), &record)?;
    let files = vec!["project.json".into(), "projected.json".into(), "projected.bin".into()];
    write_manifest(dir, cfg, CommandKind::Project, json!({"rank_tol": szego.rank_tol}), &files)?;
    Ok(Outcome {
        lines: vec![
            format!("input  ‖f‖₂   = {:.6e}", fin.value),
            format!("output ‖Sf‖₂  = {:.6e}", fout.value),
            format!("‖SSf − Sf‖/‖f‖ = {:.3e}", idem.value / fin.value),
        ],
        success: true,
        files,
    })
}

fn norm_bound(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let grid = cfg
        .grid
        .clone()
        .unwrap_or_else(|| GridSpec::new(1, 48, 6.0, 256, 32.0).unwrap());
    if grid.n != 1 {
        return Err(CliError::ConfigParse("norm-bound needs n = 1".into()));
    }
    let plan = FamilyPlan::new(ExtremizerFamily { n: grid.n }, &grid, &cfg.szego)
        .map_err(|e| CliError::op("family plan", e))?;
    let bx = cfg.family.to_box()?;
    let opts = SearchOptions {
        budget: cfg.budget,
        seed: cfg.seed,
    };
    let mut records = Vec::new();
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for &p in &cfg.exponents {
        let d = duality_check(&plan, &bx, p, &opts).map_err(|e| CliError::op("duality_check", e))?;
        let liu = liu_bound(grid.n, p).map_err(|e| CliError::op("liu_bound", e))?;
        let (ep, eq) = (&d.estimate_p, &d.estimate_q);
        lines.push(format!(
            "p = {p}: N_p ≥ {:.6} at (a, b) = ({:.4}, {:.4}); conjugate estimate {:.6}; gap {:.2e}; liu bound {:.6}",
            ep.best.value, ep.params.0, ep.params.1, eq.best.value, d.gap, liu
        ));
        rows.push(vec![p, ep.best.value, ep.best.quadrature_error, eq.best.value, d.gap, liu]);
        records.push(json!({
            "p": p,
            "q": conjugate(p),
            "lower_bound": Estimate::new(ep.best.value, ep.best.quadrature_error),
            "argmax": [ep.params.0, ep.params.1],
            "conjugate_lower_bound": Estimate::new(eq.best.value, eq.best.quadrature_error),
            "conjugate_argmax": [eq.params.0, eq.params.1],
            "duality_gap": Estimate::new(d.gap, (ep.best.quadrature_error + eq.best.quadrature_error) / ep.best.value.max(eq.best.value)),
            "liu_bound": Estimate::new(liu, GAMMA_REL_ERROR * liu),
            "evaluations": [ep.evaluations, eq.evaluations],
            "trace": ep.trace,
            "conjugate_trace": eq.trace,
        }));
    }
    write_json(
        &dir.join("norm_bound.json"),
        &json!({"command": "norm-bound", "grid": grid, "szego": cfg.szego, "box": cfg.family, "budget": cfg.budget, "seed": cfg.seed, "results": records}),
    )?;
    write_csv(
        &dir.join("norm_bound.csv"),
        &["p", "n_p_lower", "n_p_quadrature_error", "n_q_lower", "duality_gap", "liu_bound"],
        &rows,
    )?;
    let gp = gnuplot_script("norm_bound.csv", "p", "norm", false, &[(1, 2, "lower bound"), (1, 6, "Gamma-ratio bound")]);
    crate::output::write_atomic(&dir.join("norm_bound.gp"), gp.as_bytes())?;
    let files = vec!["norm_bound.json".into(), "norm_bound.csv".into(), "norm_bound.gp".into()];
    write_manifest(
        dir,
        cfg,
        CommandKind::NormBound,
        json!({"rank_tol": cfg.szego.rank_tol, "gamma_rel_error": GAMMA_REL_ERROR}),
        &files,
    )?;
    Ok(Outcome {
        lines,
        success: true,
        files,
    })
}

fn liu(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for &p in &cfg.exponents {
        let v = liu_bound(cfg.n, p).map_err(|e| CliError::op("liu_bound", e))?;
        lines.push(format!("{v}"));
        rows.push(vec![cfg.n as f64, p, v]);
        records.push(json!({"n": cfg.n, "p": p, "q": conjugate(p), "liu_bound": Estimate::new(v, GAMMA_REL_ERROR * v)}));
    }
    write_json(&dir.join("liu.json"), &json!({"command": "liu", "results": records}))?;
    write_csv(&dir.join("liu.csv"), &["n", "p", "liu_bound"], &rows)?;
    let files = vec!["liu.json".into(), "liu.csv".into()];
    write_manifest(dir, cfg, CommandKind::Liu, json!({"gamma_rel_error": GAMMA_REL_ERROR}), &files)?;
    Ok(Outcome {
        lines,
        success: true,
        files,
    })
}

/// `exp(-|z|² - t²)`, the reference field of the transplant experiment.
pub fn reference_bump() -> Closure {
    Closure::new(1, "gaussian bump", |z, t| C64::new((-z[0].norm_sqr() - t * t).exp(), 0.0))
}

fn transplant(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let mut tcfg = TransplantConfig::default();
    if let Some(g) = &cfg.grid {
        tcfg.observation = g.clone();
    }
    tcfg.exponents = cfg.exponents.clone();
    if !tcfg.exponents.contains(&2.0) {
        tcfg.exponents.insert(0, 2.0);
    }
    tcfg.spectral.degree = cfg.szego.degree;
    let f = sample(&tcfg.observation, Arc::new(reference_bump()))?;
    let chart = build_fs_chart(&SpherePoint::pole()).map_err(|e| CliError::op("build_fs_chart", e))?;
    let cut = CutoffSpec::with_theta(cfg.theta).map_err(|e| CliError::op("cutoff", e))?;
    let rep = transplant_experiment(&f, &chart, &cut, &cfg.lambdas, &tcfg)
        .map_err(|e| CliError::op("transplant_experiment", e))?;

    let mut header = vec!["lambda".to_string(), "e2".into(), "e2_rel".into(), "cr_defect".into()];
    for &p in &tcfg.exponents {
        header.push(format!("ratio_p{p}"));
        header.push(format!("sphere_rayleigh_p{p}"));
    }
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut lines = Vec::new();
    for r in &rep.rows {
        // sphere-side truncation: band-edge energy ratio times the field scale
        let alias = r.resolution.alias.max();
        let mut row = vec![r.lambda, r.e2, r.e2_rel, r.cr_defect.value];
        for n in &r.norm_transfer {
            row.push(n.ratio);
            row.push(n.sphere_rayleigh);
        }
        rows.push(row);
        lines.push(format!("λ = {:>5}: e₂ = {:.6e}, cr defect = {:.4e}", r.lambda, r.e2, r.cr_defect.value));
        records.push(json!({
            "lambda": r.lambda,
            "theta": r.theta,
            "chart_id": rep.chart_id,
            "grid": rep.observation,
            "e2": Estimate::new(r.e2, alias * rep.reference_l2),
            "e2_rel": Estimate::new(r.e2_rel, alias),
            "ep": r.ep.iter().map(|e| json!({"p": e.p, "abs": Estimate::new(e.abs, alias * e.abs.max(rep.reference_l2)), "rel": Estimate::new(e.rel, alias)})).collect::<Vec<_>>(),
            "cr_defect": Estimate::new(r.cr_defect.value, r.cr_defect.error_estimate),
            "norm_transfer": r.norm_transfer.iter().map(|n| json!({
                "p": n.p,
                "lhs": Estimate::new(n.lhs, alias * n.lhs),
                "rhs": Estimate::new(n.rhs, alias * n.rhs),
                "ratio": Estimate::new(n.ratio, 2.0 * alias * n.ratio),
                "sphere_rayleigh": Estimate::new(n.sphere_rayleigh, alias * n.sphere_rayleigh),
                "heis_rayleigh": n.heis_rayleigh,
                "density_factor": n.density_factor,
            })).collect::<Vec<_>>(),
            "resolution": r.resolution,
            "warnings": r.warnings,
        }));
    }
    write_json(
        &dir.join("transplant.json"),
        &json!({
            "command": "transplant",
            "chart_id": rep.chart_id,
            "cutoff": rep.cutoff,
            "support": rep.support,
            "xi_band": rep.xi_band,
            "reference_l2": rep.reference_l2,
            "rows": records,
        }),
    )?;
    let header: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
    write_csv(&dir.join("transplant.csv"), &header, &rows)?;
    let gp = gnuplot_script("transplant.csv", "lambda", "error", true, &[(1, 2, "e2"), (1, 4, "cr defect")]);
    crate::output::write_atomic(&dir.join("transplant.gp"), gp.as_bytes())?;
    let files = vec!["transplant.json".into(), "transplant.csv".into(), "transplant.gp".into()];
    write_manifest(
        dir,
        cfg,
        CommandKind::Transplant,
        json!({"alias_tol": tcfg.alias_tol, "support_threshold": tcfg.support_threshold, "transplant": tcfg}),
        &files,
    )?;
    Ok(Outcome {
        lines,
        success: true,
        files,
    })
}

fn verify(cfg: &ExperimentConfig, dir: &Path) -> Result<Outcome, CliError> {
    let rep = run_verify(cfg.seed, &cfg.szego)?;
    write_json(&dir.join("verify.json"), &rep)?;
    let files = vec!["verify.json".into()];
    write_manifest(
        dir,
        cfg,
        CommandKind::Verify,
        json!({"commutator": COMMUTATOR_TOL, "per_check": "see verify.json"}),
        &files,
    )?;
    let lines = rep
        .checks
        .iter()
        .map(|c| {
            format!(
                "{} {:<48} {:>11.3e} (tolerance {:.1e})",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.value,
                c.tolerance
            )
        })
        .collect();
    Ok(Outcome {
        lines,
        success: rep.all_pass,
        files,
    })
}
