//! Greedy digits of a rational in base golden ratio, with convergent errors.
//!
//! cargo run --example expand

use betaprod::approximation::approx_error;
use betaprod::numerics::{expand, BetaSystem, QuadNum};

fn main() -> betaprod::Result<()> {
    let b = BetaSystem::make("golden")?;
    let x = QuadNum::from_ratio(1, 2);
    let w = expand(&x, &b, 16)?;
    println!("x = 1/2, beta = {}", b.label());
    println!("digits {}", w.format_for(b.alphabet_max()));
    println!("eps* of 1 starts {:?}", b.star_digits(8));
    for n in [1, 2, 4, 8, 16] {
        let e = approx_error(&x, &b, n)?;
        // beta^n times the error is the orbit point, so it stays in [0, 1)
        println!("n={n:>2}  error={:.3e}  scaled={:.6}", e.error.to_f64(), e.scaled.to_f64());
    }
    Ok(())
}
