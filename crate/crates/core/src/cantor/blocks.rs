//! The block alphabet `R_{M,j}` and the choice of `M`.

use num_bigint::{BigUint, RandBigInt};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{BetaSystem, QuadNum};
use crate::words::{zero_run, Automaton, DigitWord};

/// Full words of length `M` starting with a nonzero digit, with exact counting and
/// lexicographic unranking.
#[derive(Clone, Debug)]
pub struct RBlocks {
    m: usize,
    aut: Automaton,
    /// `to_full[len][s]`: words of length `len` read from state `s` that end in state 0.
    to_full: Vec<Vec<BigUint>>,
    count: BigUint,
    log2_count: f64,
}

fn to_full_table(aut: &Automaton, len: usize, states: usize) -> Vec<Vec<BigUint>> {
    let mut table: Vec<Vec<BigUint>> = vec![(0..states).map(|s| BigUint::from((s == 0) as u8)).collect()];
    for l in 1..=len {
        let prev = &table[l - 1];
        let row = (0..states)
            .map(|s| {
                (0..=aut.max_digit(s))
                    .filter_map(|d| aut.step(s, d))
                    .filter(|&t| t < states)
                    .map(|t| prev[t].clone())
                    .sum()
            })
            .collect();
        table.push(row);
    }
    table
}

impl RBlocks {
    pub fn new(b: &BetaSystem, m: usize) -> Result<Self> {
        let ell = zero_run(1, b)?;
        if m <= ell + 2 {
            return Err(Error::PreconditionViolated(format!(
                "block length {m} must exceed l(1)+2 = {}",
                ell + 2
            )));
        }
        let aut = Automaton::new(b, m);
        let states = aut.state_count().unwrap_or(m + 1);
        let to_full = to_full_table(&aut, m, states);
        let count: BigUint = (1..=aut.max_digit(0))
            .filter_map(|d| aut.step(0, d))
            .map(|s| to_full[m - 1][s].clone())
            .sum();
        let log2_count = crate::numerics::QuadNum::from_int(num_bigint::BigInt::from(count.clone())).log2();
        Ok(RBlocks { m, aut, to_full, count, log2_count })
    }

    pub fn block_len(&self) -> usize {
        self.m
    }

    pub fn count(&self) -> &BigUint {
        &self.count
    }

    pub fn log2_count(&self) -> f64 {
        self.log2_count
    }

    pub fn automaton(&self) -> &Automaton {
        &self.aut
    }

    /// The `rank`-th word of `R_M` in lexicographic order.
    pub fn unrank(&self, rank: &BigUint) -> Vec<u32> {
        assert!(rank < &self.count, "rank out of range");
        let mut r = rank.clone();
        let mut out = Vec::with_capacity(self.m);
        let mut state = 0;
        for pos in 0..self.m {
            let rem = self.m - pos - 1;
            let lo = if pos == 0 { 1 } else { 0 };
            let mut chosen = None;
            for d in lo..=self.aut.max_digit(state) {
                let next = self.aut.step(state, d).expect("digit allowed");
                let c = self.to_full[rem].get(next).cloned().unwrap_or_default();
                if r < c {
                    chosen = Some((d, next));
                    break;
                }
                r -= c;
            }
            let (d, next) = chosen.expect("rank inside the counted range");
            out.push(d);
            state = next;
        }
        out
    }

    /// A uniformly random word of `R_M`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u32> {
        let rank = rng.gen_biguint_below(&self.count);
        self.unrank(&rank)
    }

    /// How many words of `R_M` start with `prefix` (which must begin the block).
    pub fn count_with_prefix(&self, prefix: &[u32]) -> BigUint {
        if prefix.is_empty() {
            return self.count.clone();
        }
        if prefix[0] == 0 || prefix.len() > self.m {
            return BigUint::zero();
        }
        match self.aut.run(prefix) {
            Some(s) => self.to_full[self.m - prefix.len()].get(s).cloned().unwrap_or_default(),
            None => BigUint::zero(),
        }
    }

    /// Every word of `R_M`, refusing above `cap`.
    pub fn enumerate(&self, cap: u64) -> Result<Vec<DigitWord>> {
        if self.count > BigUint::from(cap) {
            return Err(Error::CapExceeded(format!("#R_M = {} exceeds {cap}", self.count)));
        }
        let n = self.count.to_u64().unwrap();
        Ok((0..n).map(|i| DigitWord::new(self.unrank(&BigUint::from(i)))).collect())
    }
}

/// `R_{M,β}` as an explicit list.
pub fn r_words(m: usize, b: &BetaSystem, cap: u64) -> Result<Vec<DigitWord>> {
    RBlocks::new(b, m)?.enumerate(cap)
}

/// Per-coordinate evidence for the chosen `M`.
#[derive(Clone, Debug, Serialize)]
pub struct MEvidence {
    pub beta: String,
    pub ell: usize,
    pub count_r: String,
    pub log2_count_r: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MChoice {
    pub m: usize,
    pub per_coordinate: Vec<MEvidence>,
}

/// `β^{aM − b(ℓ+2)} ≥ (M−ℓ−1)^b`, the exponent form of the block-length condition
/// with `η = a/b`.
fn block_inequality(b: &BetaSystem, m: usize, ell: usize, eta: &BigRational) -> bool {
    let a = eta.numer().to_i64().unwrap();
    let d = eta.denom().to_i64().unwrap();
    let lhs = b.pow(a * m as i64 - d * (ell as i64 + 2));
    let rhs = QuadNum::from_int(num_bigint::BigInt::from(m - ell - 1)).pow(d);
    lhs >= rhs
}

/// `#R_M ≥ β^{M(1−η)}`, checked as `#R_M^b ≥ β^{M(b−a)}`.
fn count_inequality(b: &BetaSystem, blocks: &RBlocks, eta: &BigRational) -> bool {
    let a = eta.numer().to_i64().unwrap();
    let d = eta.denom().to_i64().unwrap();
    let lhs = QuadNum::from_int(num_bigint::BigInt::from(blocks.count().clone())).pow(d);
    lhs >= b.pow(blocks.block_len() as i64 * (d - a))
}

/// The smallest common `M ≥ floor` satisfying both block conditions for every base.
pub fn choose_m(betas: &[BetaSystem], eta: &BigRational, floor: usize, cap: usize) -> Result<MChoice> {
    if eta <= &BigRational::zero() || eta >= &BigRational::from_integer(1.into()) {
        return Err(Error::InvalidInput(format!("eta must lie in (0,1), got {eta}")));
    }
    if eta.numer().to_i64().is_none() || eta.denom().to_i64().is_none() {
        return Err(Error::InvalidInput("eta numerator/denominator too large".into()));
    }
    let ells: Vec<usize> = betas.iter().map(|b| zero_run(1, b)).collect::<Result<_>>()?;
    let start = floor.max(ells.iter().max().copied().unwrap_or(0) + 3);
    for m in start..=cap {
        if !betas.iter().zip(&ells).all(|(b, &l)| block_inequality(b, m, l, eta)) {
            continue;
        }
        let blocks: Vec<RBlocks> = betas.iter().map(|b| RBlocks::new(b, m)).collect::<Result<_>>()?;
        if betas.iter().zip(&blocks).all(|(b, r)| count_inequality(b, r, eta)) {
            let per_coordinate = betas
                .iter()
                .zip(&ells)
                .zip(&blocks)
                .map(|((b, &ell), r)| MEvidence {
                    beta: b.label().to_string(),
                    ell,
                    count_r: r.count().to_string(),
                    log2_count_r: r.log2_count(),
                })
                .collect();
            return Ok(MChoice { m, per_coordinate });
        }
    }
    Err(Error::SearchExhausted(format!("no block length up to {cap} satisfies the conditions")))
}
