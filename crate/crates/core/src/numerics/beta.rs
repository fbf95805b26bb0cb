use std::collections::BTreeMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};
use serde::{Deserialize, Serialize};

use super::quad::QuadNum;
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION_CAP: u32 = 8192;
pub const DEFAULT_PROBE_DEPTH: usize = 512;

/// The parsed form of a β specification string.
///
/// Grammar: `int`, `p/q`, `dec:<digits>@<bits>`, `quad:(a+b*sqrt(D))/c`, `golden`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BetaSpec {
    Integer(i64),
    Ratio(i64, i64),
    Decimal { digits: String, bits: u32 },
    Quadratic { a: i64, b: i64, d: u64, c: i64 },
    Golden,
}

impl fmt::Display for BetaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BetaSpec::Integer(n) => write!(f, "{n}"),
            BetaSpec::Ratio(p, q) => write!(f, "{p}/{q}"),
            BetaSpec::Decimal { digits, bits } => write!(f, "dec:{digits}@{bits}"),
            BetaSpec::Quadratic { a, b, d, c } => write!(f, "quad:({a}{b:+}*sqrt({d}))/{c}"),
            BetaSpec::Golden => write!(f, "golden"),
        }
    }
}

fn bad(s: &str) -> Error {
    Error::InvalidBeta(format!("cannot parse beta spec `{s}`"))
}

impl std::str::FromStr for BetaSpec {
    type Err = Error;

    fn from_str(raw: &str) -> Result<Self> {
        let s = raw.trim();
        if s.eq_ignore_ascii_case("golden") || s.eq_ignore_ascii_case("phi") {
            return Ok(BetaSpec::Golden);
        }
        if let Some(rest) = s.strip_prefix("dec:") {
            let (digits, bits) = rest.split_once('@').ok_or_else(|| bad(raw))?;
            QuadNum::parse_decimal(digits).ok_or_else(|| bad(raw))?;
            let bits: u32 = bits.parse().map_err(|_| bad(raw))?;
            return Ok(BetaSpec::Decimal { digits: digits.to_string(), bits });
        }
        if let Some(rest) = s.strip_prefix("quad:") {
            return parse_quad(rest).ok_or_else(|| bad(raw));
        }
        if let Some((p, q)) = s.split_once('/') {
            let p: i64 = p.trim().parse().map_err(|_| bad(raw))?;
            let q: i64 = q.trim().parse().map_err(|_| bad(raw))?;
            if q == 0 {
                return Err(bad(raw));
            }
            return Ok(BetaSpec::Ratio(p, q));
        }
        if let Ok(n) = s.parse::<i64>() {
            return Ok(BetaSpec::Integer(n));
        }
        // bare decimals are accepted as exact rationals with the default budget
        if QuadNum::parse_decimal(s).is_some() {
            return Ok(BetaSpec::Decimal { digits: s.to_string(), bits: DEFAULT_PRECISION_CAP });
        }
        Err(bad(raw))
    }
}

/// `(a+b*sqrt(D))/c`, `(a-b*sqrt(D))/c` or without the `/c`.
fn parse_quad(s: &str) -> Option<BetaSpec> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let (body, c) = match s.rfind(")/") {
        Some(i) => (&s[..=i], s[i + 2..].parse::<i64>().ok()?),
        None => (s.as_str(), 1),
    };
    let inner = body.strip_prefix('(')?.strip_suffix(')')?;
    let sq = inner.find("sqrt(")?;
    let radicand = inner[sq + 5..].strip_suffix(')')?.parse::<u64>().ok()?;
    let head = inner[..sq].strip_suffix('*').unwrap_or(&inner[..sq]);
    // split `a+b` / `a-b` at the last sign that is not leading
    let split = head.char_indices().skip(1).filter(|(_, ch)| *ch == '+' || *ch == '-').last()?.0;
    let a = head[..split].parse::<i64>().ok()?;
    let b_str = &head[split..];
    let b = match b_str {
        "+" => 1,
        "-" => -1,
        _ => b_str.parse::<i64>().ok()?,
    };
    (c != 0).then_some(BetaSpec::Quadratic { a, b, d: radicand, c })
}

/// Splits `d = s²·f` with `f` square-free.
fn square_free(mut d: u64) -> (u64, u64) {
    let mut s = 1;
    let mut p = 2;
    while p * p <= d {
        while d % (p * p) == 0 {
            d /= p * p;
            s *= p;
        }
        p += 1;
    }
    (s, d)
}

impl BetaSpec {
    pub fn value(&self) -> Result<QuadNum> {
        let v = match self {
            BetaSpec::Integer(n) => QuadNum::from_int(*n),
            BetaSpec::Ratio(p, q) => QuadNum::from_ratio(*p, *q),
            BetaSpec::Decimal { digits, .. } => {
                QuadNum::parse_decimal(digits).ok_or_else(|| bad(digits))?
            }
            BetaSpec::Golden => QuadNum::golden(),
            BetaSpec::Quadratic { a, b, d, c } => {
                let (s, f) = square_free(*d);
                if f == 1 || *b == 0 {
                    QuadNum::from_ratio(*a + *b * s as i64 * (f == 1) as i64, *c)
                } else {
                    QuadNum::new(BigInt::from(*a), BigInt::from(*b) * s, BigInt::from(*c), f)
                }
            }
        };
        Ok(v)
    }

    pub fn precision_cap(&self) -> u32 {
        match self {
            BetaSpec::Decimal { bits, .. } => *bits,
            _ => DEFAULT_PRECISION_CAP,
        }
    }
}

/// Digits and orbit of `T_β` started at 1, computed lazily.
#[derive(Clone, Debug)]
struct OneOrbit {
    /// `points[k] = T_β^k(1)`
    points: Vec<QuadNum>,
    /// `digits[k] = ε_{k+1}(1, β)`
    digits: Vec<u32>,
    seen: BTreeMap<QuadNum, usize>,
    cycle: Option<(usize, usize)>,
}

impl OneOrbit {
    fn new() -> Self {
        let mut seen = BTreeMap::new();
        seen.insert(QuadNum::one(), 0);
        OneOrbit { points: vec![QuadNum::one()], digits: Vec::new(), seen, cycle: None }
    }

    fn step(&mut self, beta: &QuadNum, probe: usize) {
        let x = self.points.last().unwrap();
        let bx = beta * x;
        let d = bx.floor();
        let next = &bx - &QuadNum::from_int(d.clone());
        self.digits.push(d.to_u32().expect("digit fits in u32"));
        let k = self.points.len();
        if self.cycle.is_none() && k <= probe {
            if let Some(&j) = self.seen.get(&next) {
                self.cycle = Some((j, k - j));
            } else {
                self.seen.insert(next.clone(), k);
            }
        }
        self.points.push(next);
    }

    fn index(&self, k: usize) -> usize {
        match self.cycle {
            Some((start, period)) if k >= start => start + (k - start) % period,
            _ => k,
        }
    }

    fn ensure(&mut self, beta: &QuadNum, k: usize, probe: usize) {
        while self.cycle.is_none() && self.digits.len() <= k {
            self.step(beta, probe);
        }
    }
}

/// `ε*(1,β)` as a finite prefix followed by an optional repeating block.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct StarExpansion {
    pub prefix: Vec<u32>,
    pub period: Option<Vec<u32>>,
}

/// A base β > 1 together with the expansion of 1 it induces.
///
/// Immutable after construction; the orbit cache is append-only behind a mutex.
#[derive(Debug)]
pub struct BetaSystem {
    label: String,
    value: QuadNum,
    alphabet_max: u32,
    integer: bool,
    precision_cap: u32,
    probe_depth: usize,
    log2: f64,
    inv: QuadNum,
    orbit: Mutex<OneOrbit>,
}

impl Clone for BetaSystem {
    fn clone(&self) -> Self {
        BetaSystem {
            label: self.label.clone(),
            value: self.value.clone(),
            alphabet_max: self.alphabet_max,
            integer: self.integer,
            precision_cap: self.precision_cap,
            probe_depth: self.probe_depth,
            log2: self.log2,
            inv: self.inv.clone(),
            orbit: Mutex::new(self.orbit.lock().unwrap().clone()),
        }
    }
}

impl PartialEq for BetaSystem {
    fn eq(&self, other: &Self) -> bool {
        self.value == other.value
    }
}

impl BetaSystem {
    /// Parses a specification and builds the system.
    pub fn make(spec: &str) -> Result<Self> {
        let parsed: BetaSpec = spec.parse()?;
        let mut sys = Self::from_value(parsed.value()?, &parsed.to_string())?;
        sys.precision_cap = parsed.precision_cap();
        Ok(sys)
    }

    pub fn golden() -> Self {
        Self::from_value(QuadNum::golden(), "golden").unwrap()
    }

    pub fn integer(n: i64) -> Result<Self> {
        Self::from_value(QuadNum::from_int(n), &n.to_string())
    }

    pub fn from_value(value: QuadNum, label: &str) -> Result<Self> {
        if value <= QuadNum::one() {
            return Err(Error::InvalidBeta(format!("beta must exceed 1, got {value}")));
        }
        let fl = value.floor();
        let integer = QuadNum::from_int(fl.clone()) == value;
        let ceil = if integer { fl.clone() } else { &fl + BigInt::one() };
        let alphabet_max = (ceil - BigInt::one())
            .to_u32()
            .filter(|m| *m < 1 << 16)
            .ok_or_else(|| Error::InvalidBeta(format!("beta {value} too large")))?;
        if fl.is_negative() {
            return Err(Error::InvalidBeta(format!("beta must exceed 1, got {value}")));
        }
        let mut orbit = OneOrbit::new();
        orbit.ensure(&value, DEFAULT_PROBE_DEPTH.min(64), DEFAULT_PROBE_DEPTH);
        Ok(BetaSystem {
            label: label.to_string(),
            log2: value.log2(),
            inv: value.recip(),
            value,
            alphabet_max,
            integer,
            precision_cap: DEFAULT_PRECISION_CAP,
            probe_depth: DEFAULT_PROBE_DEPTH,
            orbit: Mutex::new(orbit),
        })
    }

    /// Changes the depth up to which a cycle in the orbit of 1 is searched for.
    pub fn with_probe_depth(mut self, probe: usize) -> Self {
        self.probe_depth = probe;
        let mut orbit = self.orbit.lock().unwrap();
        orbit.ensure(&self.value, probe.min(4096), probe);
        drop(orbit);
        self
    }

    pub fn with_precision_cap(mut self, bits: u32) -> Self {
        self.precision_cap = bits;
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self) -> &QuadNum {
        &self.value
    }

    pub fn inverse(&self) -> &QuadNum {
        &self.inv
    }

    pub fn to_f64(&self) -> f64 {
        self.log2.exp2()
    }

    pub fn log2(&self) -> f64 {
        self.log2
    }

    /// Natural logarithm of β.
    pub fn ln(&self) -> f64 {
        self.log2 * std::f64::consts::LN_2
    }

    pub fn alphabet_max(&self) -> u32 {
        self.alphabet_max
    }

    pub fn is_integer(&self) -> bool {
        self.integer
    }

    pub fn precision_cap(&self) -> u32 {
        self.precision_cap
    }

    pub fn probe_depth(&self) -> usize {
        self.probe_depth
    }

    fn with_orbit<T>(&self, k: usize, f: impl FnOnce(&OneOrbit) -> T) -> T {
        let mut orbit = self.orbit.lock().unwrap();
        orbit.ensure(&self.value, k, self.probe_depth);
        f(&orbit)
    }

    /// `ε_n(1, β)` for `n ≥ 1` (greedy expansion; zeros after a finite end).
    pub fn one_digit(&self, n: usize) -> u32 {
        assert!(n >= 1);
        self.with_orbit(n, |o| o.digits[o.index(n - 1)])
    }

    pub fn one_digits(&self, n: usize) -> Vec<u32> {
        self.with_orbit(n, |o| (0..n).map(|k| o.digits[o.index(k)]).collect())
    }

    /// `T_β^k(1)`, with `T^0(1) = 1`.
    pub fn one_orbit(&self, k: usize) -> QuadNum {
        self.with_orbit(k, |o| o.points[o.index(k)].clone())
    }

    /// Length `m` of `ε(1,β)` when it is finite (β a simple Parry number).
    pub fn simple_parry_length(&self) -> Option<usize> {
        let orbit = self.orbit.lock().unwrap();
        match orbit.cycle {
            Some((start, 1)) if orbit.points[start].is_zero() => Some(start),
            _ => None,
        }
    }

    pub fn is_simple_parry(&self) -> bool {
        self.simple_parry_length().is_some()
    }

    /// Preperiod and period of `ε(1,β)` when a cycle was found within the probe depth.
    pub fn one_cycle(&self) -> Option<(usize, usize)> {
        self.orbit.lock().unwrap().cycle
    }

    /// `ε*_n(β)` for `n ≥ 1`.
    pub fn star_digit(&self, n: usize) -> u32 {
        assert!(n >= 1);
        match self.simple_parry_length() {
            Some(m) => {
                let i = (n - 1) % m;
                let d = self.one_digit(i + 1);
                if i == m - 1 { d - 1 } else { d }
            }
            None => self.one_digit(n),
        }
    }

    pub fn star_digits(&self, n: usize) -> Vec<u32> {
        (1..=n).map(|i| self.star_digit(i)).collect()
    }

    /// `ε*(1,β)` as prefix plus repeating block (block is `None` if no cycle was detected).
    pub fn star_expansion(&self) -> StarExpansion {
        if let Some(m) = self.simple_parry_length() {
            return StarExpansion { prefix: vec![], period: Some(self.star_digits(m)) };
        }
        match self.one_cycle() {
            Some((start, period)) => StarExpansion {
                prefix: self.one_digits(start),
                period: Some((start + 1..=start + period).map(|i| self.one_digit(i)).collect()),
            },
            None => StarExpansion { prefix: self.one_digits(self.probe_depth), period: None },
        }
    }

    /// `β^{-i}` for `i ≥ 0`.
    pub fn inv_pow(&self, i: usize) -> QuadNum {
        self.inv.pow(i as i64)
    }

    /// `β^e` for any integer exponent.
    pub fn pow(&self, e: i64) -> QuadNum {
        self.value.pow(e)
    }
}

impl fmt::Display for BetaSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}
