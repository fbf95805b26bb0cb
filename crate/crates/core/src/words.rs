//! Digit words, Parry admissibility, and enumeration of `Σ_β^n`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{BetaSystem, QuadNum};

pub const DEFAULT_WORD_CAP: u64 = 100_000_000;

/// A finite string of digits.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct DigitWord(Vec<u32>);

impl DigitWord {
    pub fn new(digits: Vec<u32>) -> Self {
        DigitWord(digits)
    }

    pub fn empty() -> Self {
        DigitWord(Vec::new())
    }

    pub fn zeros(n: usize) -> Self {
        DigitWord(vec![0; n])
    }

    pub fn digits(&self) -> &[u32] {
        &self.0
    }

    pub fn into_digits(self) -> Vec<u32> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &DigitWord) -> DigitWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        DigitWord(v)
    }

    pub fn prefix(&self, n: usize) -> DigitWord {
        DigitWord(self.0[..n.min(self.0.len())].to_vec())
    }

    /// Text form for a given alphabet: bare digits up to base 10, commas above.
    pub fn format_for(&self, alphabet_max: u32) -> String {
        if alphabet_max < 10 {
            self.0.iter().map(|d| char::from_digit(*d, 10).unwrap_or('?')).collect()
        } else {
            self.0.iter().map(u32::to_string).collect::<Vec<_>>().join(",")
        }
    }
}

impl From<Vec<u32>> for DigitWord {
    fn from(v: Vec<u32>) -> Self {
        DigitWord(v)
    }
}

impl fmt::Display for DigitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let max = self.0.iter().copied().max().unwrap_or(0);
        f.write_str(&self.format_for(max))
    }
}

impl From<DigitWord> for String {
    fn from(w: DigitWord) -> String {
        w.to_string()
    }
}

impl FromStr for DigitWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidInput(format!("bad digit word `{s}`"));
        if s.is_empty() {
            return Ok(DigitWord::empty());
        }
        if s.contains(',') {
            s.split(',').map(|t| t.trim().parse::<u32>().map_err(|_| bad())).collect::<Result<_>>().map(DigitWord)
        } else {
            s.chars().map(|c| c.to_digit(10).ok_or_else(bad)).collect::<Result<_>>().map(DigitWord)
        }
    }
}

impl TryFrom<String> for DigitWord {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Lexicographic order on finite words, the shorter one padded with zeros.
pub fn lex_compare(a: &[u32], b: &[u32]) -> Ordering {
    let n = a.len().max(b.len());
    (0..n)
        .map(|i| a.get(i).copied().unwrap_or(0).cmp(&b.get(i).copied().unwrap_or(0)))
        .find(|o| o.is_ne())
        .unwrap_or(Ordering::Equal)
}

/// Compares a zero-padded finite word with the infinite sequence `stream(1), stream(2), …`.
///
/// `stream` must not be eventually zero, so equality is never the answer.
pub fn lex_compare_stream(a: &[u32], stream: impl Fn(usize) -> u32) -> Ordering {
    for (i, &d) in a.iter().enumerate() {
        match d.cmp(&stream(i + 1)) {
            Ordering::Equal => continue,
            o => return o,
        }
    }
    Ordering::Less
}

/// Parry's criterion, checked suffix by suffix against `ε*(1,β)`.
pub fn is_admissible(w: &[u32], b: &BetaSystem) -> bool {
    if w.iter().any(|&d| d > b.alphabet_max()) {
        return false;
    }
    let star = b.star_digits(w.len());
    (0..w.len()).all(|k| lex_compare_stream(&w[k..], |i| star[i - 1]) == Ordering::Less)
}

/// The β-shift automaton.
///
/// State `k` means the longest suffix read so far equals `ε*_1 … ε*_k`. States are
/// folded back once `ε*` becomes periodic, so for Parry numbers the state set is finite.
#[derive(Clone, Debug)]
pub struct Automaton {
    star: Vec<u32>,
    cycle: Option<(usize, usize)>,
    alphabet_max: u32,
}

impl Automaton {
    /// Automaton able to read words of length up to `horizon`.
    pub fn new(b: &BetaSystem, horizon: usize) -> Self {
        let cycle = match b.simple_parry_length() {
            Some(m) => Some((0, m)),
            None => b.one_cycle(),
        };
        let len = match cycle {
            Some((start, period)) => start + period,
            None => horizon + 1,
        };
        Automaton { star: b.star_digits(len), cycle, alphabet_max: b.alphabet_max() }
    }

    pub fn alphabet_max(&self) -> u32 {
        self.alphabet_max
    }

    /// Number of distinct states when `ε*` is eventually periodic.
    pub fn state_count(&self) -> Option<usize> {
        self.cycle.map(|(s, p)| s + p)
    }

    fn fold(&self, k: usize) -> usize {
        match self.cycle {
            Some((start, period)) if k >= start + period => k - period,
            _ => k,
        }
    }

    /// Largest digit allowed from state `k`.
    pub fn max_digit(&self, k: usize) -> u32 {
        self.star[k]
    }

    pub fn step(&self, k: usize, d: u32) -> Option<usize> {
        let e = self.star[k];
        match d.cmp(&e) {
            Ordering::Less => Some(0),
            Ordering::Equal => Some(self.fold(k + 1)),
            Ordering::Greater => None,
        }
    }

    /// Final state after reading `w`, or `None` if `w` is not admissible.
    pub fn run(&self, w: &[u32]) -> Option<usize> {
        w.iter().try_fold(0, |k, &d| self.step(k, d))
    }

    pub fn accepts(&self, w: &[u32]) -> bool {
        self.run(w).is_some()
    }

    /// Number of admissible continuations of length `len` from each state.
    pub fn continuation_counts(&self, len: usize) -> Vec<Vec<BigUint>> {
        let states = self.state_count().unwrap_or(self.star.len());
        let mut table = vec![vec![BigUint::one(); states]];
        for r in 1..=len {
            let prev = &table[r - 1];
            let row = (0..states)
                .map(|k| {
                    let e = self.star[k];
                    let mut c = prev[0].clone() * BigUint::from(e);
                    let next = self.fold(k + 1);
                    if next < states {
                        c += &prev[next];
                    }
                    c
                })
                .collect();
            table.push(row);
        }
        table
    }
}

/// Lexicographic stream of `Σ_β^n`.
pub struct Admissible {
    aut: Automaton,
    digits: Vec<u32>,
    states: Vec<usize>,
    started: bool,
    done: bool,
}

impl Admissible {
    fn new(aut: Automaton, n: usize) -> Self {
        Admissible { aut, digits: vec![0; n], states: vec![0; n + 1], started: false, done: false }
    }

    fn refill(&mut self, from: usize) {
        for i in from..self.digits.len() {
            self.digits[i] = 0;
            self.states[i + 1] = self.aut.step(self.states[i], 0).expect("zero always allowed");
        }
    }
}

impl Iterator for Admissible {
    type Item = DigitWord;

    fn next(&mut self) -> Option<DigitWord> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            self.refill(0);
            return Some(DigitWord(self.digits.clone()));
        }
        for i in (0..self.digits.len()).rev() {
            let d = self.digits[i] + 1;
            if let Some(s) = self.aut.step(self.states[i], d) {
                self.digits[i] = d;
                self.states[i + 1] = s;
                self.refill(i + 1);
                return Some(DigitWord(self.digits.clone()));
            }
        }
        self.done = true;
        None
    }
}

/// Upper Rényi bound `β^{n+1}/(β−1)` in floating point.
pub fn renyi_upper_f64(b: &BetaSystem, n: usize) -> f64 {
    let beta = b.to_f64();
    beta.powi(n as i32 + 1) / (beta - 1.0)
}

/// Lexicographically ordered `Σ_β^n`, refusing when the Rényi estimate exceeds `cap`.
pub fn enumerate_admissible(n: usize, b: &BetaSystem, cap: u64) -> Result<Admissible> {
    if n == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    let estimate = renyi_upper_f64(b, n);
    if estimate > cap as f64 {
        return Err(Error::CapExceeded(format!(
            "about {estimate:.3e} words of order {n} exceed the cap {cap}"
        )));
    }
    Ok(Admissible::new(Automaton::new(b, n), n))
}

/// `#Σ_β^n` together with the Rényi bounds it was checked against.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleCount {
    pub n: usize,
    pub count: BigUint,
}

/// Counts `Σ_β^n` by dynamic programming over automaton states and checks
/// `βⁿ ≤ count ≤ β^{n+1}/(β−1)` exactly.
pub fn count_admissible(n: usize, b: &BetaSystem) -> Result<AdmissibleCount> {
    if n == 0 {
        return Err(Error::InvalidInput("order must be at least 1".into()));
    }
    let aut = Automaton::new(b, n);
    let count = aut.continuation_counts(n)[n][0].clone();
    let c = QuadNum::from_int(num_bigint::BigInt::from(count.clone()));
    let lower = b.pow(n as i64);
    let upper = b.pow(n as i64 + 1) * (b.value() - &QuadNum::one()).recip();
    if c < lower || c > upper {
        return Err(Error::Invariant(format!("count {count} of order {n} breaks the Renyi bounds")));
    }
    Ok(AdmissibleCount { n, count })
}

/// Zero-run length `ℓ_n(1,β)`: how many zeros follow position `n` in `ε*(1,β)`.
pub fn zero_run(n: usize, b: &BetaSystem) -> Result<usize> {
    if n == 0 {
        return Err(Error::InvalidInput("position must be at least 1".into()));
    }
    let probe = b.probe_depth();
    let bound = match (b.simple_parry_length(), b.one_cycle()) {
        (Some(m), _) => m,
        (None, Some((s, p))) => s + p,
        (None, None) => probe,
    };
    for i in 0..=bound {
        if b.star_digit(n + i + 1) != 0 {
            return Ok(i);
        }
    }
    Err(Error::ProbeExhausted(format!("zeros continue past {bound} digits after position {n}")))
}

/// `max_{1≤i≤n} ℓ_i(1,β)`.
pub fn max_zero_run(n: usize, b: &BetaSystem) -> Result<usize> {
    (1..=n.max(1)).map(|i| zero_run(i, b)).try_fold(0, |m, r| r.map(|r| m.max(r)))
}
