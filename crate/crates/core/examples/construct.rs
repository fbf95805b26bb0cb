//! Plans the reference two-dimensional construction and runs its soundness checks.
//!
//! cargo run --release --example construct

use betaprod::cantor::{construct, ConstructionSpec};

fn main() -> betaprod::Result<()> {
    let mut spec = ConstructionSpec::reference(8, 1000, 7);
    spec.s0 = Some("36/25".into());
    let run = construct(&spec)?;
    let m = &run.manifest;
    println!("M = {}  s0 = {} (formula {:.4})  q0 = {:?}", m.m.m, m.s0, m.s0_formula, m.q0);
    println!(" q  h  n                      n'       k  p        depth");
    for l in &m.levels {
        println!(
            "{:>2} {:>2}  {:<22} {:>8} {:>6}  {:<8} {:?}",
            l.q,
            l.h,
            format!("{:?}", l.n),
            l.n_prime,
            l.k,
            format!("{:?}", l.p),
            l.depth
        );
    }
    let s = &m.soundness;
    println!("hits ok: {}", s.hits.iter().all(|h| h.passed()));
    for g in &s.gaps {
        println!("coordinate {}: {} gap comparisons, {} failures", g.coordinate, g.comparisons, g.failures.len());
    }
    for h in &s.holder_levels {
        println!("level {}: -log mu / -log |J| = {:.4}, threshold {:.4}", h.q, h.ratio, h.threshold);
    }
    println!("intermediate squares: {} checked, {} failed", s.intermediate_checked, s.intermediate_failed);
    println!("all checks passed: {}", s.passed());
    println!("first sample: {:?}", run.points[0]);
    Ok(())
}
