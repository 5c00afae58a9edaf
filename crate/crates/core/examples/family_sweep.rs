//! Brute-force sweep of the Rayleigh quotient of the `f_{a,b}` family over a
//! lattice of the box, at `p` and at its conjugate. Writes the maxima as a
//! JSON fixture.
//!
//! cargo run --release -p szego-core --example family_sweep -- <out.json>

use serde_json::json;
use szego_core::heis::GridSpec;
use szego_core::norms::{conjugate, rayleigh, ExtremizerFamily, FamilyPlan};
use szego_core::szego::SzegoConfig;

fn main() {
    let out = std::env::args().nth(1).unwrap_or_else(|| "family_sweep.json".into());
    let grid = GridSpec::new(1, 48, 6.0, 256, 32.0).unwrap();
    let cfg = SzegoConfig::default();
    let family = ExtremizerFamily { n: 1 };
    let plan = FamilyPlan::new(family, &grid, &cfg).unwrap();
    let (lo, hi, step): (f64, f64, f64) = (0.6, 4.0, 0.1);
    let count = ((hi - lo) / step).round() as usize + 1;
    let axis: Vec<f64> = (0..count).map(|i| lo + step * i as f64).collect();
    let mut records = Vec::new();
    for p in [4.0, conjugate(4.0)] {
        let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
        let mut table = Vec::new();
        for &a in &axis {
            let mut row = Vec::new();
            for &b in &axis {
                if !family.feasible(a, b, p) {
                    row.push(None);
                    continue;
                }
                let f = plan.trial(a, b, p).unwrap();
                let v = rayleigh(&f, p, &cfg).unwrap().value;
                if v > best.0 {
                    best = (v, a, b);
                }
                row.push(Some(v));
            }
            eprintln!("p={p:.4} a={a:.2} best so far {:.6} at ({:.2}, {:.2})", best.0, best.1, best.2);
            table.push(row);
        }
        records.push(json!({
            "p": p,
            "max": best.0,
            "argmax": [best.1, best.2],
            "axis": axis,
            "values": table,
        }));
    }
    let doc = json!({
        "description": "lattice sweep of the f_(a,b) Rayleigh quotient, used as the reference maximum",
        "grid": grid,
        "degree": cfg.degree,
        "box": [lo, hi],
        "step": step,
        "sweeps": records,
    });
    std::fs::write(&out, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    println!("wrote {out}");
}
