//! Where a point is approximated at rate psi, and a full cylinder placed inside
//! a target interval.
//!
//! cargo run --example hits

use betaprod::approximation::{default_c_grid, detect_hits, exactness_grid, PsiFunction};
use betaprod::cantor::{claim_arithmetic, claim_delta};
use betaprod::cylinders::cylinder;
use betaprod::numerics::{eval_word, BetaSystem, QuadNum};
use betaprod::words::DigitWord;
use num_rational::BigRational;

fn main() -> betaprod::Result<()> {
    let b = BetaSystem::make("2")?;
    let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
    let psi = PsiFunction::exponential(&b, r(1, 1), r(1, 1))?;

    // x = 0.1 0^9 1 0^19 1 in base 2: the long zero runs are the hits
    let mut digits = vec![1];
    digits.extend(std::iter::repeat(0).take(9));
    digits.push(1);
    digits.extend(std::iter::repeat(0).take(19));
    digits.push(1);
    let x: QuadNum = eval_word(&DigitWord::new(digits), &b);
    let rec = detect_hits(&x, &b, &psi, 40)?;
    println!("x = {x}: T^n x < 2^-n at n = {:?}", rec.hit_indices());
    // each of these hits also beats 0.9 psi, so the horizon shows no exact order
    for rep in exactness_grid(&x, &b, &psi, &default_c_grid(&[]), 40)? {
        println!("  c={}  {} hits, {} beat c*psi", rep.c, rep.hits.len(), rep.violations.len());
    }

    // the designated-hit arithmetic for psi-value 2^-10 and delta = 1/10
    let target = PsiFunction::table(&b, vec![r(1, 1024)])?;
    let a = claim_arithmetic(&target, 1, &r(1, 10))?;
    println!("k={} t={} u={}", a.k, a.t, a.u);
    let sigma = cylinder(&a.sigma(), &b)?;
    println!(
        "sigma = [{:.6e}, {:.6e}] inside ({:.6e}, {:.6e}), full: {}",
        sigma.left.to_f64(),
        sigma.right().to_f64(),
        0.9 / 1024.0,
        1.0 / 1024.0,
        sigma.is_full
    );
    println!("default delta for the first claim: {}", claim_delta(&target, 1, 1)?);
    Ok(())
}
