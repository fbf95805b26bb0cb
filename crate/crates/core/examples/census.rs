//! Admissible words and full cylinders of small order for a few bases.
//!
//! cargo run --example census

use betaprod::cylinders::{cylinder, full_census, is_full_by_suffix};
use betaprod::numerics::BetaSystem;
use betaprod::words::{count_admissible, enumerate_admissible, DEFAULT_WORD_CAP};

fn main() -> betaprod::Result<()> {
    for spec in ["golden", "1.8", "2.5", "3"] {
        let b = BetaSystem::make(spec)?;
        println!("beta = {spec}, eps(1) = {:?}", b.one_digits(6));
        for n in [4, 8, 12] {
            let c = full_census(n, &b, DEFAULT_WORD_CAP)?;
            let lo = b.to_f64().powi(n as i32);
            let hi = b.to_f64().powi(n as i32 + 1) / (b.to_f64() - 1.0);
            println!(
                "  n={n:>2}  words={:>7}  in [{lo:.0}, {hi:.0}]  full={:>7}  longest non-full run={}",
                c.count_admissible, c.count_full, c.max_gap
            );
            assert_eq!(count_admissible(n, &b)?.count, c.count_admissible.into());
        }
    }

    let g = BetaSystem::golden();
    println!("order-4 cylinders for the golden ratio:");
    for w in enumerate_admissible(4, &g, DEFAULT_WORD_CAP)? {
        let c = cylinder(&w, &g)?;
        println!(
            "  {w}  left={:.5}  length={:.5}  full={} (suffix test {})",
            c.left.to_f64(),
            c.length.to_f64(),
            c.is_full,
            is_full_by_suffix(w.digits(), &g)
        );
    }
    Ok(())
}
