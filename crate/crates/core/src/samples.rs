//! Seeded generators of reference inputs shared by the checks and the CLI.

use std::sync::Arc;

use rand::Rng;

use crate::error::Result;
use crate::heis::{
    BumpProfile, GaussianTerm, GaussianTerms, GridSpec, HolomorphicPolynomial, KoranyiBump, Product, SampledField,
    TestFunctionD,
};
use crate::szego::{inverse_partial_fourier, FrequencyField};
use crate::C64;

fn cnormal<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn small_point<R: Rng>(rng: &mut R, n: usize, r: f64) -> Vec<C64> {
    (0..n).map(|_| cnormal(rng) * r).collect()
}

/// Three shifted, modulated Gaussian packets with low-order `z`, `z̄`
/// polynomial factors. Every term is dominated by `exp(-|z|²/2 - t²/2)` up to
/// the shifts.
pub fn gaussian_field<R: Rng>(rng: &mut R, n: usize) -> GaussianTerms {
    let terms = (0..3)
        .map(|_| {
            let zp = (0..n).map(|_| rng.gen_range(0..=2)).collect();
            let zbp = (0..n).map(|_| rng.gen_range(0..=2)).collect();
            GaussianTerm::centered(n, cnormal(rng), rng.gen_range(0.6..2.0), rng.gen_range(0.5..2.0))
                .with_powers(zp, zbp, 0)
                .shifted(small_point(rng, n, 0.6), rng.gen_range(-1.0..1.0))
                .modulated(rng.gen_range(-2.0..2.0))
        })
        .collect();
    GaussianTerms::new(n, terms, "random gaussian packets")
}

/// Gaussian packets of width `a ∈ [2.5, 4]` in `z`, narrow enough to leave
/// lattice-level headroom on a `[-4, 4]²` box.
pub fn smooth_packets<R: Rng>(rng: &mut R, n: usize) -> GaussianTerms {
    let terms = (0..2)
        .map(|_| {
            let zp = (0..n).map(|_| rng.gen_range(0..=1)).collect();
            let zbp = (0..n).map(|_| rng.gen_range(0..=1)).collect();
            GaussianTerm::centered(n, cnormal(rng), rng.gen_range(2.5..4.0), rng.gen_range(2.0..4.0))
                .with_powers(zp, zbp, 0)
                .shifted(small_point(rng, n, 0.3), rng.gen_range(-0.3..0.3))
                .modulated(rng.gen_range(-4.0..8.0))
        })
        .collect();
    GaussianTerms::new(n, terms, "random smooth packets")
}

/// Element of the dense class with a random polynomial of degree
/// `≤ max_degree` and the profile supported on `[a, b]`.
pub fn dense_element<R: Rng>(rng: &mut R, n: usize, max_degree: u32, a: f64, b: f64) -> Result<TestFunctionD> {
    let deg = rng.gen_range(0..=max_degree);
    let terms = crate::fock::multi_indices(n, deg)
        .into_iter()
        .map(|alpha| (alpha, cnormal(rng)))
        .collect();
    let poly = HolomorphicPolynomial::new(n, terms)?;
    Ok(TestFunctionD::new(poly, BumpProfile::new(a, b)?))
}

/// Compactly supported bump of Koranyi radius in `[1.5, 2.5]` times a random
/// Gaussian packet.
pub fn compact_field<R: Rng>(rng: &mut R, n: usize) -> Product {
    let bump = KoranyiBump {
        n,
        radius: rng.gen_range(1.5..2.5),
    };
    let zp = (0..n).map(|_| rng.gen_range(0..=2)).collect();
    let zbp = (0..n).map(|_| rng.gen_range(0..=2)).collect();
    let g = GaussianTerm::centered(n, cnormal(rng), rng.gen_range(0.0..1.0), rng.gen_range(0.0..0.5))
        .with_powers(zp, zbp, 0)
        .shifted(small_point(rng, n, 0.4), rng.gen_range(-0.5..0.5))
        .modulated(rng.gen_range(-1.0..1.0));
    Product::new(Arc::new(bump), Arc::new(GaussianTerms::new(n, vec![g], "packet")))
}

/// Field on `grid` whose partial Fourier transform lives on the lattice
/// frequencies `-kmax ≤ k < 0` with Gaussian `z`-profiles.
pub fn negative_band_field<R: Rng>(rng: &mut R, grid: &GridSpec, kmax: usize) -> Result<SampledField> {
    let nt = grid.nt;
    let r2 = grid.z_norm_sqr();
    let mut slices = vec![C64::new(0.0, 0.0); grid.len()];
    for k in 1..=kmax.min(nt / 2) {
        let c = cnormal(rng);
        let a = rng.gen_range(0.5..2.0);
        let m = nt - k;
        for (iz, &s) in r2.iter().enumerate() {
            slices[iz * nt + m] = c * (-a * s).exp();
        }
    }
    let ff = FrequencyField {
        grid: grid.clone(),
        slices,
    };
    let mut f = inverse_partial_fourier(&ff);
    f.provenance = "negative frequency band".into();
    Ok(f)
}
