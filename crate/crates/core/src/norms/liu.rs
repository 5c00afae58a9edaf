use crate::error::{Error, Result};

/// Dyadic grid on which `1/p` is canonicalised.
const CANON: f64 = (1u64 << 40) as f64;

/// `Γ((n+1)/p) Γ((n+1)/q) / Γ((n+1)/2)²` with `q = p/(p−1)`.
///
/// The pair `(1/p, 1/q)` is canonicalised (smaller member rounded to a
/// 2⁻⁴⁰ grid) so that `liu_bound(n, p) == liu_bound(n, q)` bit for bit.
pub fn liu_bound(n: usize, p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidExponent(p));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let r = 1.0 / p;
    let s = ((r.min(1.0 - r)) * CANON).round() / CANON;
    let m = (n + 1) as f64;
    let g = libm::tgamma;
    Ok(g(m * s) * g(m * (1.0 - s)) / (g(m / 2.0) * g(m / 2.0)))
}
