//! Certified arithmetic for a base β > 1 and the digit map `T_β`.

mod beta;
mod certified;
mod quad;

pub use beta::{BetaSpec, BetaSystem, StarExpansion, DEFAULT_PRECISION_CAP, DEFAULT_PROBE_DEPTH};
pub use certified::{precision_ladder, CertifiedReal, Refinable};
pub use quad::QuadNum;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::words::DigitWord;

const LADDER_START: u32 = 128;

fn unit_check(x: &QuadNum) -> Result<()> {
    if x.is_negative() || *x >= QuadNum::one() {
        return Err(Error::InvalidInput(format!("x = {x} is not in [0,1)")));
    }
    Ok(())
}

/// One exact step of `T_β` for `x` in the field of β.
pub fn t_beta_step_exact(x: &QuadNum, b: &BetaSystem) -> Result<(u32, QuadNum)> {
    unit_check(x)?;
    let bx = b.value() * x;
    let d = bx.floor();
    let next = &bx - &QuadNum::from_int(d.clone());
    Ok((d.to_u32().expect("digit bounded by alphabet"), next))
}

/// One step of `T_β` on an enclosure, deciding the digit only when the floor is certain.
pub fn t_beta_step(x: &CertifiedReal, b: &BetaSystem) -> Result<(u32, CertifiedReal)> {
    if x.lo() < &BigRational::zero() || x.hi() >= &BigRational::one() {
        return Err(Error::InvalidInput("enclosure not inside [0,1)".into()));
    }
    let bits = x.bits().min(b.precision_cap().max(LADDER_START));
    let be = b.value().enclose(bits);
    let prod = be.mul(x);
    let d = prod.floor_decided().ok_or_else(|| {
        Error::PrecisionExhausted(format!("floor of beta*x undecided at {bits} bits"))
    })?;
    let next = prod.sub_int(&d);
    Ok((d.to_u32().expect("digit bounded by alphabet"), round_out(next, bits)))
}

/// Widens an enclosure to dyadic endpoints so denominators stay bounded.
fn round_out(x: CertifiedReal, bits: u32) -> CertifiedReal {
    if x.bits() == u32::MAX {
        return x;
    }
    let scale = BigRational::from_integer(BigInt::one() << bits);
    let lo = (x.lo() * &scale).floor() / &scale;
    let hi = (x.hi() * &scale).ceil() / &scale;
    let zero = BigRational::zero();
    let lo = if lo < zero { zero } else { lo };
    CertifiedReal::new(lo, hi, x.bits())
}

/// The first `n` digits of `x` together with `T_β^n(x)`.
///
/// Values in the field of β are iterated exactly; anything else goes through the
/// precision ladder.
pub fn expand_with_tail(x: &QuadNum, b: &BetaSystem, n: usize) -> Result<(DigitWord, QuadNum)> {
    unit_check(x)?;
    if x.compatible(b.value()) {
        let mut digits = Vec::with_capacity(n);
        let mut cur = x.clone();
        for _ in 0..n {
            let (d, next) = t_beta_step_exact(&cur, b)?;
            digits.push(d);
            cur = next;
        }
        return Ok((DigitWord::new(digits), cur));
    }
    Err(Error::InvalidInput(format!("x = {x} is not in the field of beta; use expand_certified")))
}

/// `ε_1(x), …, ε_n(x)`.
pub fn expand(x: &QuadNum, b: &BetaSystem, n: usize) -> Result<DigitWord> {
    if x.compatible(b.value()) {
        return expand_with_tail(x, b, n).map(|(w, _)| w);
    }
    unit_check(x)?;
    expand_certified(x, b, n)
}

/// Expansion of anything that can be enclosed, refining along the precision ladder.
pub fn expand_certified<R: Refinable>(x: &R, b: &BetaSystem, n: usize) -> Result<DigitWord> {
    let mut last = None;
    for bits in precision_ladder(LADDER_START, b.precision_cap()) {
        let mut cur = x.enclose(bits);
        let mut digits = Vec::with_capacity(n);
        let mut failed = None;
        for _ in 0..n {
            match t_beta_step(&cur, b) {
                Ok((d, next)) => {
                    digits.push(d);
                    cur = next;
                }
                Err(e @ Error::PrecisionExhausted(_)) => {
                    failed = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match failed {
            None => return Ok(DigitWord::new(digits)),
            Some(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| Error::PrecisionExhausted("empty ladder".into())))
}

/// Parses `p/q` or a plain decimal as an exact rational.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidInput(format!("not a rational number: `{s}`"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| bad())?;
        let q: BigInt = q.trim().parse().map_err(|_| bad())?;
        if q.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(p, q));
    }
    QuadNum::parse_decimal(s).and_then(|v| v.to_rational()).ok_or_else(bad)
}

/// `Σ w_i β^{-i}`, exactly.
pub fn eval_word(w: &DigitWord, b: &BetaSystem) -> QuadNum {
    eval_digits(w.digits(), b)
}

pub fn eval_digits(digits: &[u32], b: &BetaSystem) -> QuadNum {
    let inv = b.inverse();
    digits.iter().rev().fold(QuadNum::zero(), |acc, &d| {
        (&acc + &QuadNum::from_int(d)) * inv.clone()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(p: i64, r: i64) -> QuadNum {
        QuadNum::from_ratio(p, r)
    }

    #[test]
    fn exact_steps() {
        let two = BetaSystem::make("2").unwrap();
        assert_eq!(t_beta_step_exact(&q(3, 4), &two).unwrap(), (1, q(1, 2)));
        let phi = BetaSystem::golden();
        let x = phi.inv_pow(2);
        let (d, next) = t_beta_step_exact(&x, &phi).unwrap();
        assert_eq!(d, 0);
        assert_eq!(next, phi.inv_pow(1));
    }

    #[test]
    fn interval_steps() {
        let two = BetaSystem::make("2").unwrap();
        let x = CertifiedReal::exact(BigRational::new(3.into(), 4.into()));
        let (d, next) = t_beta_step(&x, &two).unwrap();
        assert_eq!(d, 1);
        assert!(next.contains(&BigRational::new(1.into(), 2.into())));

        let lo = BigRational::new(499.into(), 1000.into());
        let hi = BigRational::new(501.into(), 1000.into());
        let straddle = CertifiedReal::new(lo, hi, 8);
        assert!(matches!(t_beta_step(&straddle, &two), Err(Error::PrecisionExhausted(_))));
    }

    #[test]
    fn expansions() {
        let two = BetaSystem::make("2").unwrap();
        assert_eq!(expand(&q(5, 8), &two, 3).unwrap().digits(), &[1, 0, 1]);
        let phi = BetaSystem::golden();
        assert_eq!(expand(phi.inverse(), &phi, 3).unwrap().digits(), &[1, 0, 0]);
        for spec in ["2", "golden", "9/5", "quad:(3+sqrt(13))/2"] {
            let b = BetaSystem::make(spec).unwrap();
            assert_eq!(expand(&QuadNum::zero(), &b, 5).unwrap().digits(), &[0; 5]);
        }
        assert!(expand(&QuadNum::one(), &two, 2).is_err());
    }

    #[test]
    fn foreign_field_uses_ladder() {
        // 1/√2 lies outside both Q and Q(√5)
        let x = QuadNum::new(0.into(), 1.into(), 2.into(), 2);
        let two = BetaSystem::make("2").unwrap();
        assert_eq!(expand(&x, &two, 8).unwrap().digits(), &[1, 0, 1, 1, 0, 1, 0, 1]);
        let phi = BetaSystem::golden();
        let w = expand(&x, &phi, 40).unwrap();
        let v = eval_word(&w, &phi).to_f64();
        assert!(0.0 <= x.to_f64() - v && x.to_f64() - v < phi.to_f64().powi(-40) + 1e-15);
    }

    #[test]
    fn rationals() {
        assert_eq!(parse_rational("3/6").unwrap(), BigRational::new(1.into(), 2.into()));
        assert_eq!(parse_rational("0.25").unwrap(), BigRational::new(1.into(), 4.into()));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn evaluations() {
        let two = BetaSystem::make("2").unwrap();
        assert_eq!(eval_word(&DigitWord::new(vec![1, 1, 0]), &two), q(3, 4));
        let phi = BetaSystem::golden();
        assert_eq!(eval_word(&DigitWord::new(vec![1, 0]), &phi), phi.inverse().clone());
        assert_eq!(eval_word(&DigitWord::new(vec![]), &phi), QuadNum::zero());
    }

    /// Independent floating-point partial sums of the quasi-greedy expansion.
    fn star_series(b: &BetaSystem, n: usize) -> Vec<f64> {
        let beta = b.to_f64();
        let mut acc = 0.0;
        b.star_digits(n)
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                acc += d as f64 * beta.powi(-(i as i32 + 1));
                acc
            })
            .collect()
    }

    #[test]
    fn star_series_sums_to_one() {
        for spec in ["2", "3", "golden", "1.8", "5/2", "quad:(1+sqrt(13))/2"] {
            let b = BetaSystem::make(spec).unwrap();
            let sums = star_series(&b, 80);
            assert!(sums.windows(2).all(|w| w[0] <= w[1]), "{spec}");
            assert!(sums.iter().all(|s| *s <= 1.0 + 1e-12), "{spec}");
            assert!((1.0 - sums[79]).abs() < 1e-12, "{spec}: {}", sums[79]);
        }
    }

    #[test]
    fn one_point_eight() {
        let b = BetaSystem::make("1.8").unwrap();
        // frozen from exact iteration of T_β on 1 with β = 9/5
        assert_eq!(b.star_digits(12), vec![1, 1, 0, 1, 0, 1, 0, 1, 0, 0, 1, 0]);
    }

    proptest! {
        #[test]
        fn convergent_bound(p in 0i64..10_000, n in 1usize..30, spec in prop::sample::select(vec!["2", "golden", "9/5", "5/2", "3"])) {
            let b = BetaSystem::make(spec).unwrap();
            let x = q(p, 10_000);
            let (w, tail) = expand_with_tail(&x, &b, n).unwrap();
            let err = &x - &eval_word(&w, &b);
            prop_assert!(!err.is_negative());
            prop_assert!(err < b.inv_pow(n));
            prop_assert_eq!(err, tail * b.inv_pow(n));
        }

        #[test]
        fn interior_round_trip(p in 0i64..10_000, n in 1usize..20) {
            let b = BetaSystem::golden();
            let x = q(p, 10_000);
            let w = expand(&x, &b, n).unwrap();
            let left = eval_word(&w, &b);
            let nudged = &left + &(b.inv_pow(n) * q(1, 1_000_000));
            if nudged <= x {
                prop_assert_eq!(expand(&nudged, &b, n).unwrap(), w);
            }
        }
    }
}
