use std::collections::HashMap;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::chart::{chart_density, FsChart};
use super::grid::{SphereField, SphereGrid};
use super::project::{combine, sphere_expand, Alias, SphereExpansion, SphereProjectionConfig};
use crate::error::{Error, Result};
use crate::heis::{cr_defect, koranyi_gauge, Closure, CrDefect, FieldEvaluator, GridSpec, Jet, SampledField};
use crate::norms::lp_norm;
use crate::szego::{partial_fourier, szego_eval_spectral_grid, SpectralPointConfig};
use crate::{C64, I, ZERO};

/// Radial cutoff `ρ = χ(N)` in the Korányi gauge `N = (|z|⁴ + t²)^{1/4}`,
/// with `χ = 1` for `N ≤ inner`, `χ = 0` for `N ≥ outer`, smooth in between.
/// The experiment at scale λ uses `ρ ∘ Φ_μ`, `μ = λ^{θ−1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub inner: f64,
    pub outer: f64,
    pub theta: f64,
}

impl Default for CutoffSpec {
    fn default() -> Self {
        CutoffSpec {
            inner: 1.0,
            outer: 2.0,
            theta: 0.5,
        }
    }
}

fn psi(x: f64) -> (f64, f64) {
    if x <= 0.0 {
        (0.0, 0.0)
    } else {
        let v = (-1.0 / x).exp();
        (v, v / (x * x))
    }
}

impl CutoffSpec {
    pub fn new(inner: f64, outer: f64, theta: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner) {
            return Err(Error::InvalidParameter(format!("cutoff radii {inner}, {outer}")));
        }
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidParameter(format!("localisation exponent θ = {theta} outside (0, 1)")));
        }
        Ok(CutoffSpec { inner, outer, theta })
    }

    pub fn with_theta(theta: f64) -> Result<Self> {
        Self::new(1.0, 2.0, theta)
    }

    /// `μ = λ^{θ−1}`.
    pub fn scale(&self, lambda: f64) -> f64 {
        lambda.powf(self.theta - 1.0)
    }

    /// `χ(N)` and `χ′(N)`.
    fn profile(&self, n: f64) -> (f64, f64) {
        let (a, da) = psi(self.outer - n);
        let (b, db) = psi(n - self.inner);
        let s = a + b;
        (a / s, (-da * b - a * db) / (s * s))
    }

    pub fn value(&self, z: C64, t: f64) -> f64 {
        self.profile(koranyi_gauge(&[z], t)).0
    }

    /// `(ρ, ∂_z ρ, ∂_t ρ)`; `∂_{z̄} ρ` is the conjugate of `∂_z ρ`.
    pub fn jet(&self, z: C64, t: f64) -> (f64, C64, f64) {
        let r2 = z.norm_sqr();
        let n = (r2 * r2 + t * t).sqrt().sqrt();
        let (v, d) = self.profile(n);
        if d == 0.0 {
            return (v, ZERO, 0.0);
        }
        let n3 = 2.0 * n * n * n;
        (v, z.conj() * (d * r2 / n3), d * t / n3)
    }

    /// `ρ ∘ Φ_μ` with its jet.
    fn scaled_jet(&self, mu: f64, z: C64, t: f64) -> (f64, C64, f64) {
        let (v, dz, dt) = self.jet(z * mu, t * mu * mu);
        (v, dz * mu, dt * mu * mu)
    }

    /// `ρ` as an evaluator on ℍ¹.
    pub fn evaluator(&self) -> Closure {
        let c = *self;
        Closure::new(1, "cutoff", move |z, t| C64::new(c.value(z[0], t), 0.0)).with_jet(move |z, t| {
            let (v, dz, dt) = c.jet(z[0], t);
            Jet {
                value: C64::new(v, 0.0),
                dz: vec![dz],
                dzbar: vec![dz.conj()],
                dt: C64::new(dt, 0.0),
            }
        })
    }
}

/// `y ↦ G(chart(Φ_{1/λ} y)) · ρ(Φ_μ y)`, where `G` is a sphere expansion in
/// the chart's pole coordinates. Without a cutoff the second factor is 1.
#[derive(Debug, Clone)]
pub struct TransplantedField {
    pub expansion: Arc<SphereExpansion>,
    pub lambda: f64,
    pub cutoff: Option<CutoffSpec>,
}

/// `[G, ∂_z G, ∂_{z̄} G, ∂_t G]` in the rescaled coordinates, given the
/// radial polynomials at `η₂`.
fn chart_jet(p: &[C64], dp: &[C64], z: C64, w: C64, lambda: f64) -> [C64; 4] {
    let d = I + w;
    let eta1 = 2.0 * I * z / d;
    let (g, g1, g2) = combine(p, dp, eta1);
    let gt = (g1 * (-2.0 * I * z) + g2 * (-2.0 * I)) / (d * d);
    let gz = g1 * 2.0 * I / d + I * z.conj() * gt;
    let gzb = I * z * gt;
    [g, gz / lambda, gzb / lambda, gt / (lambda * lambda)]
}

impl TransplantedField {
    fn mu(&self) -> f64 {
        self.cutoff.map_or(1.0, |c| c.scale(self.lambda))
    }

    fn finish(&self, jet: [C64; 4], z: C64, t: f64) -> [C64; 4] {
        match self.cutoff {
            None => jet,
            Some(c) => {
                let (r, rz, rt) = c.scaled_jet(self.mu(), z, t);
                if r == 0.0 && rz == ZERO && rt == 0.0 {
                    return [ZERO; 4];
                }
                [
                    jet[0] * r,
                    jet[1] * r + jet[0] * rz,
                    jet[2] * r + jet[0] * rz.conj(),
                    jet[3] * r + jet[0] * rt,
                ]
            }
        }
    }

    fn point_jet(&self, z: C64, t: f64) -> [C64; 4] {
        let zs = z / self.lambda;
        let w = C64::new(t / (self.lambda * self.lambda), zs.norm_sqr());
        let (p, dp) = self.expansion.radial_polys((I - w) / (I + w));
        self.finish(chart_jet(&p, &dp, zs, w, self.lambda), z, t)
    }

    /// Jets at every lattice point; the radial polynomials are shared by all
    /// points with the same `(|z|², t)`.
    fn grid_jets(&self, grid: &GridSpec) -> Vec<[C64; 4]> {
        let zt = grid.z_table();
        let ta = grid.t_axis();
        let nt = grid.nt;
        let mut groups: HashMap<u64, Vec<usize>> = HashMap::new();
        for iz in 0..grid.nzpoints() {
            groups.entry(zt[iz].norm_sqr().to_bits()).or_default().push(iz);
        }
        let groups: Vec<Vec<usize>> = groups.into_values().collect();
        let lam = self.lambda;
        let rows: Vec<(usize, Vec<[C64; 4]>)> = groups
            .par_iter()
            .flat_map_iter(|members| {
                let s = zt[members[0]].norm_sqr() / (lam * lam);
                let ws: Vec<C64> = ta.iter().map(|&t| C64::new(t / (lam * lam), s)).collect();
                let mut polys: Vec<(Vec<C64>, Vec<C64>)> = Vec::with_capacity(ws.len());
                for chunk in ws.chunks(4) {
                    let mut x = [C64::new(0.0, 0.0); 4];
                    for (xi, w) in x.iter_mut().zip(chunk) {
                        *xi = (I - w) / (I + w);
                    }
                    polys.extend(self.expansion.radial_polys4(x).into_iter().take(chunk.len()));
                }
                members
                    .iter()
                    .map(|&iz| {
                        let z = zt[iz];
                        let row = ta
                            .iter()
                            .zip(ws.iter().zip(&polys))
                            .map(|(&t, (w, (p, dp)))| self.finish(chart_jet(p, dp, z / lam, *w, lam), z, t))
                            .collect();
                        (iz, row)
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        let mut out = vec![[ZERO; 4]; grid.len()];
        for (iz, row) in rows {
            out[iz * nt..(iz + 1) * nt].copy_from_slice(&row);
        }
        out
    }
}

/// [`TransplantedField`] with precomputed jets on one grid.
#[derive(Debug, Clone)]
struct Tabulated {
    field: TransplantedField,
    grid: GridSpec,
    jets: Arc<Vec<[C64; 4]>>,
}

impl FieldEvaluator for Tabulated {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        self.field.eval(z, t)
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        self.field.jet(z, t)
    }
    fn label(&self) -> String {
        self.field.label()
    }
    fn sample(&self, grid: &GridSpec) -> Vec<C64> {
        if *grid == self.grid {
            self.jets.iter().map(|j| j[0]).collect()
        } else {
            self.field.sample(grid)
        }
    }
    fn sample_jets(&self, grid: &GridSpec) -> Option<Vec<Jet>> {
        if *grid == self.grid {
            Some(self.jets.iter().map(|j| to_jet(*j)).collect())
        } else {
            self.field.sample_jets(grid)
        }
    }
}

fn to_jet(j: [C64; 4]) -> Jet {
    Jet {
        value: j[0],
        dz: vec![j[1]],
        dzbar: vec![j[2]],
        dt: j[3],
    }
}

impl FieldEvaluator for TransplantedField {
    fn dim(&self) -> usize {
        1
    }
    fn eval(&self, z: &[C64], t: f64) -> C64 {
        self.point_jet(z[0], t)[0]
    }
    fn jet(&self, z: &[C64], t: f64) -> Option<Jet> {
        Some(to_jet(self.point_jet(z[0], t)))
    }
    fn label(&self) -> String {
        format!("transplanted sphere projection (λ = {})", self.lambda)
    }
    fn sample(&self, grid: &GridSpec) -> Vec<C64> {
        self.grid_jets(grid).into_iter().map(|j| j[0]).collect()
    }
    fn sample_jets(&self, grid: &GridSpec) -> Option<Vec<Jet>> {
        Some(self.grid_jets(grid).into_iter().map(to_jet).collect())
    }
}

/// Settings for [`transplant_experiment`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransplantConfig {
    /// Grid on which `g_λ` is compared with the Heisenberg projection.
    pub observation: GridSpec,
    /// Exponents for `e_p` and the norm-transfer chain.
    pub exponents: Vec<f64>,
    pub u_panels: usize,
    pub u_order: usize,
    /// Angular modes per unit of `λ² ξ_band / 2`.
    pub oversample: f64,
    /// `|f| ≤ threshold · max|f|` counts as outside the support.
    pub support_threshold: f64,
    /// Largest admissible support gauge of `f ∘ Φ_λ` in chart coordinates.
    pub chart_radius: f64,
    pub alias_tol: f64,
    /// Cap on the `φ₂` angle count.
    pub max_angles: usize,
    pub spectral: SpectralPointConfig,
}

impl Default for TransplantConfig {
    fn default() -> Self {
        TransplantConfig {
            observation: GridSpec::new(1, 48, 8.5, 512, 66.0).expect("valid default grid"),
            exponents: vec![2.0, 4.0],
            u_panels: 40,
            u_order: 16,
            oversample: 2.5,
            support_threshold: 1e-14,
            chart_radius: 4.0,
            alias_tol: 1e-8,
            max_angles: 16384,
            spectral: SpectralPointConfig {
                phase_per_panel: 24.0,
                ..SpectralPointConfig::default()
            },
        }
    }
}

/// `‖g_λ − 𝒮f‖_p`, absolute and relative to `‖𝒮f‖_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorm {
    pub p: f64,
    pub abs: f64,
    pub rel: f64,
}

/// Terms of the norm-transfer chain at one `(λ, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormTransfer {
    pub lambda: f64,
    pub p: f64,
    /// `∫|g_λ|^p dσ`.
    pub lhs: f64,
    /// `sphere_rayleigh^p · ∫|f|^p dσ`.
    pub rhs: f64,
    pub ratio: f64,
    /// `‖𝒮F‖_{L^p(ν)} / ‖F‖_{L^p(ν)}` for the pushforward `F`, measured in chart coordinates.
    pub sphere_rayleigh: f64,
    /// `‖𝒮f‖_p / ‖f‖_p` on ℍ¹.
    pub heis_rayleigh: f64,
    /// `∫|f|^p d_λ / ∫|f|^p` with `d_λ` the chart density seen at scale λ.
    pub density_factor: f64,
}

/// Sphere discretisation chosen for one λ.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereResolution {
    pub n1: usize,
    pub n2: usize,
    pub u_nodes: usize,
    pub u_max: f64,
    pub alias: Alias,
    /// Support gauge of `f ∘ Φ_λ` in chart coordinates.
    pub support: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransplantRow {
    pub lambda: f64,
    pub theta: f64,
    pub e2: f64,
    pub e2_rel: f64,
    pub ep: Vec<ErrorNorm>,
    pub cr_defect: CrDefect,
    pub norm_transfer: Vec<NormTransfer>,
    pub resolution: SphereResolution,
    /// Boundary-decay warnings raised for `g_λ` on the observation grid.
    pub warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransplantReport {
    pub chart_id: String,
    pub observation: GridSpec,
    pub cutoff: CutoffSpec,
    /// Support gauge of `f`.
    pub support: f64,
    /// Largest frequency carried by `f`.
    pub xi_band: f64,
    pub reference_l2: f64,
    pub rows: Vec<TransplantRow>,
}

struct Prepared {
    f_obs: SampledField,
    reference: SampledField,
    support: f64,
    xi_band: f64,
}

fn prepare(f: &SampledField, cfg: &TransplantConfig) -> Result<Prepared> {
    let g = &f.grid;
    if g.n != 1 || cfg.observation.n != 1 {
        return Err(Error::InvalidParameter("the sphere experiment needs n = 1".into()));
    }
    let ev = f.evaluator.clone().ok_or(Error::MissingEvaluator("transplant_experiment"))?;
    let peak = f.max_abs();
    if peak == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let cut = cfg.support_threshold * peak;
    let zt = g.z_table();
    let ta = g.t_axis();
    let mut support = 0.0f64;
    for iz in 0..g.nzpoints() {
        for (it, &t) in ta.iter().enumerate() {
            if f.values[iz * g.nt + it].norm() > cut {
                if g.on_z_boundary(iz) || it == 0 || it + 1 == g.nt {
                    return Err(Error::SupportEscape("the support reaches the grid boundary".into()));
                }
                support = support.max(koranyi_gauge(&zt[iz..iz + 1], t));
            }
        }
    }
    let ff = partial_fourier(f);
    let amp: Vec<f64> = (0..g.nt)
        .map(|m| (0..g.nzpoints()).map(|iz| ff.slices[iz * g.nt + m].norm()).fold(0.0, f64::max))
        .collect();
    let top = amp.iter().cloned().fold(0.0, f64::max);
    let xi_band = (0..g.nt)
        .filter(|&m| amp[m] > 1e-13 * top)
        .map(|m| ff.xi(m).abs())
        .fold(0.0, f64::max)
        .max(g.dxi());
    let f_obs = if cfg.observation == *g {
        f.clone()
    } else {
        SampledField::from_evaluator(&cfg.observation, ev)?
    };
    let reference = szego_eval_spectral_grid(f, &cfg.observation, &cfg.spectral)?;
    Ok(Prepared {
        f_obs,
        reference,
        support,
        xi_band,
    })
}

/// Pushes `f ∘ Φ_λ` to the sphere and expands its projection in pole coordinates,
/// refining the angular grid until the spectrum is resolved.
fn push_and_project(
    f: &SampledField,
    chart: &FsChart,
    lambda: f64,
    prep: &Prepared,
    cfg: &TransplantConfig,
) -> Result<(SphereExpansion, SphereResolution)> {
    let ev = f.evaluator.clone().ok_or(Error::MissingEvaluator("transplant_experiment"))?;
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("scale λ = {lambda}")));
    }
    let support = prep.support / lambda;
    if support > cfg.chart_radius {
        return Err(Error::SupportEscape(format!(
            "support gauge {support:.3} of f∘Φ_λ exceeds the chart radius {}",
            cfg.chart_radius
        )));
    }
    // |η₁|² = 4|z|²/|i+w|² ≤ 4|z|²
    let rmax = (2.2 * support).min(1.0);
    let u_max = rmax * rmax;
    let need = cfg.oversample * lambda * lambda * prep.xi_band / 2.0;
    let mut n2 = (need.ceil() as usize).max(16).next_power_of_two();
    let mut n1 = 4usize;
    let pcfg = SphereProjectionConfig::default();
    loop {
        let grid = SphereGrid::partial(u_max, cfg.u_panels, cfg.u_order, n1, n2)?.with_frame(chart.frame);
        let field = SphereField::sample(&grid, |x| match chart.from_sphere(x) {
            Ok((z, t)) => ev.eval(&[z * lambda], t * lambda * lambda),
            Err(_) => ZERO,
        });
        let (expansion, alias) = sphere_expand(&field, &pcfg)?;
        let ok1 = alias.phi1 <= cfg.alias_tol;
        let ok2 = alias.phi2 <= cfg.alias_tol;
        if ok1 && ok2 {
            let res = SphereResolution {
                n1,
                n2,
                u_nodes: grid.nu(),
                u_max,
                alias,
                support,
            };
            return Ok((trimmed(expansion), res));
        }
        if !ok1 {
            n1 *= 2;
        }
        if !ok2 {
            n2 *= 2;
        }
        if n1 > 256 || n2 > cfg.max_angles {
            return Err(Error::QuadratureFailure(format!(
                "angular spectrum of f∘Φ_λ unresolved at λ = {lambda} (alias {:.3e}, {:.3e})",
                alias.phi1, alias.phi2
            )));
        }
    }
}

/// Drops trailing coefficients whose total contribution is below roundoff.
fn trimmed(mut e: SphereExpansion) -> SphereExpansion {
    let total: f64 = e.coeffs.iter().map(|c| c.norm()).sum();
    let cut = 1e-17 * total;
    let mut k2 = 1;
    let mut k1 = 1;
    for a1 in 0..e.k1 {
        for a2 in 0..e.k2 {
            if e.coeffs[a1 * e.k2 + a2].norm() > cut {
                k1 = k1.max(a1 + 1);
                k2 = k2.max(a2 + 1);
            }
        }
    }
    let mut coeffs = Vec::with_capacity(k1 * k2);
    for a1 in 0..k1 {
        coeffs.extend_from_slice(&e.coeffs[a1 * e.k2..a1 * e.k2 + k2]);
    }
    e.k1 = k1;
    e.k2 = k2;
    e.coeffs = coeffs;
    e
}

fn pth_power_integral(f: &SampledField, p: f64) -> Result<f64> {
    Ok(lp_norm(f, p)?.value.powf(p))
}

fn weighted_integral(values: &[C64], weights: &[f64], p: f64, cell: f64) -> f64 {
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| v.norm().powf(p) * w)
        .sum::<f64>()
        * cell
}

fn run_lambda(
    f: &SampledField,
    chart: &FsChart,
    cut: &CutoffSpec,
    lambda: f64,
    prep: &Prepared,
    cfg: &TransplantConfig,
) -> Result<TransplantRow> {
    let (expansion, resolution) = push_and_project(f, chart, lambda, prep, cfg)?;
    let obs = &cfg.observation;
    let bare_field = TransplantedField {
        expansion: Arc::new(expansion),
        lambda,
        cutoff: None,
    };
    let bare_jets = bare_field.grid_jets(obs);
    let cut_field = TransplantedField {
        cutoff: Some(*cut),
        ..bare_field.clone()
    };
    let zt = obs.z_table();
    let ta = obs.t_axis();
    let nt = obs.nt;
    let cut_jets: Vec<[C64; 4]> = bare_jets
        .par_iter()
        .enumerate()
        .map(|(k, j)| cut_field.finish(*j, zt[k / nt], ta[k % nt]))
        .collect();
    let g = SampledField::from_evaluator(
        obs,
        Arc::new(Tabulated {
            field: cut_field,
            grid: obs.clone(),
            jets: Arc::new(cut_jets),
        }),
    )?;
    let bare = SampledField::from_evaluator(
        obs,
        Arc::new(Tabulated {
            field: bare_field,
            grid: obs.clone(),
            jets: Arc::new(bare_jets),
        }),
    )?;
    let diff = g.sub(&prep.reference);
    let e2 = diff.l2_norm();
    let e2_rel = e2 / prep.reference.l2_norm();
    let mut ep = Vec::new();
    let mut transfer = Vec::new();
    let dens: Vec<f64> = (0..obs.len())
        .map(|k| chart_density(zt[k / obs.nt] / lambda, ta[k % obs.nt] / (lambda * lambda)))
        .collect();
    let cell = obs.cell();
    for &p in &cfg.exponents {
        let abs = lp_norm(&diff, p)?.value;
        let refp = lp_norm(&prep.reference, p)?.value;
        ep.push(ErrorNorm { p, abs, rel: abs / refp });
        let lhs = pth_power_integral(&g, p)?;
        let fp = pth_power_integral(&prep.f_obs, p)?;
        let num = weighted_integral(&bare.values, &dens, p, cell);
        let den = weighted_integral(&prep.f_obs.values, &dens, p, cell);
        let sphere_rayleigh = (num / den).powf(1.0 / p);
        let rhs = sphere_rayleigh.powf(p) * fp;
        transfer.push(NormTransfer {
            lambda,
            p,
            lhs,
            rhs,
            ratio: lhs / rhs,
            sphere_rayleigh,
            heis_rayleigh: refp / fp.powf(1.0 / p),
            density_factor: den / fp,
        });
    }
    let cr = cr_defect(&g);
    Ok(TransplantRow {
        lambda,
        theta: cut.theta,
        e2,
        e2_rel,
        ep,
        cr_defect: cr,
        norm_transfer: transfer,
        resolution,
        warnings: g.warnings.len(),
    })
}

/// Rescaling experiment: for each λ, `g_λ(y) = 𝒮_S(f∘Φ_λ∘chart⁻¹)(chart(Φ_{1/λ}y)) · ρ(Φ_{λ^{θ−1}}y)`,
/// compared with the Heisenberg projection of `f` on the observation grid.
///
/// `f` must carry an evaluator and be supported well inside its grid.
pub fn transplant_experiment(
    f: &SampledField,
    chart: &FsChart,
    cut: &CutoffSpec,
    lambdas: &[f64],
    cfg: &TransplantConfig,
) -> Result<TransplantReport> {
    let prep = prepare(f, cfg)?;
    let rows = lambdas
        .iter()
        .map(|&l| run_lambda(f, chart, cut, l, &prep, cfg))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransplantReport {
        chart_id: chart.id(),
        observation: cfg.observation.clone(),
        cutoff: *cut,
        support: prep.support,
        xi_band: prep.xi_band,
        reference_l2: prep.reference.l2_norm(),
        rows,
    })
}

/// Norm-transfer chain at a single `(λ, p)`.
pub fn norm_transfer_check(
    f: &SampledField,
    chart: &FsChart,
    cut: &CutoffSpec,
    lambda: f64,
    p: f64,
    cfg: &TransplantConfig,
) -> Result<NormTransfer> {
    if p.is_nan() || p < 1.0 || p.is_infinite() {
        return Err(Error::InvalidExponent(p));
    }
    let cfg = TransplantConfig {
        exponents: vec![p],
        ..cfg.clone()
    };
    let prep = prepare(f, &cfg)?;
    let row = run_lambda(f, chart, cut, lambda, &prep, &cfg)?;
    Ok(row.norm_transfer[0])
}
