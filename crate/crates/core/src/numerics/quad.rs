//! Exact arithmetic in a real quadratic field `Q(√D)`.
//!
//! A [`QuadNum`] is `(a + b·√D) / c` with integer `a`, `b`, `c > 0` and a
//! square-free radicand `D ≥ 2`. Rationals carry `b = 0` and `D = 0`, so they
//! combine with any field. Mixing two irrational values from different fields
//! is a programming error and panics.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug)]
pub struct QuadNum {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: u64,
}

impl PartialEq for QuadNum {
    fn eq(&self, other: &Self) -> bool {
        self.a == other.a
            && self.b == other.b
            && self.c == other.c
            && (self.b.is_zero() || self.d == other.d)
    }
}

impl Eq for QuadNum {}

impl PartialOrd for QuadNum {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadNum {
    fn cmp(&self, other: &Self) -> Ordering {
        (self - other).signum_ord()
    }
}

/// log2 of a positive big integer, accurate for any size.
pub(crate) fn big_log2(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 1000 {
        x.to_f64().unwrap_or(f64::INFINITY).log2()
    } else {
        let shift = bits - 64;
        (x >> shift).to_f64().unwrap().log2() + shift as f64
    }
}

fn log2_add(la: f64, lb: f64) -> f64 {
    if la == f64::NEG_INFINITY {
        return lb;
    }
    if lb == f64::NEG_INFINITY {
        return la;
    }
    let (hi, lo) = if la > lb { (la, lb) } else { (lb, la) };
    hi + (1.0 + (lo - hi).exp2()).log2()
}

impl QuadNum {
    /// Builds `(a + b√d)/c`, normalising signs and common factors.
    pub fn new(a: BigInt, b: BigInt, c: BigInt, d: u64) -> Self {
        assert!(!c.is_zero(), "zero denominator");
        if !b.is_zero() {
            assert!(d >= 2, "irrational part needs a radicand");
        }
        let mut q = QuadNum { a, b, c, d };
        q.normalize();
        q
    }

    pub fn from_int<T: Into<BigInt>>(n: T) -> Self {
        QuadNum::new(n.into(), BigInt::zero(), BigInt::one(), 0)
    }

    pub fn from_ratio<T: Into<BigInt>>(p: T, q: T) -> Self {
        QuadNum::new(p.into(), BigInt::zero(), q.into(), 0)
    }

    pub fn from_rational(r: &BigRational) -> Self {
        QuadNum::new(r.numer().clone(), BigInt::zero(), r.denom().clone(), 0)
    }

    pub fn zero() -> Self {
        QuadNum::from_int(0)
    }

    pub fn one() -> Self {
        QuadNum::from_int(1)
    }

    /// The golden ratio `(1 + √5)/2`.
    pub fn golden() -> Self {
        QuadNum::new(BigInt::one(), BigInt::one(), BigInt::from(2), 5)
    }

    /// Parses a plain decimal such as `0.625` or `-3.5e-2` as an exact rational.
    pub fn parse_decimal(s: &str) -> Option<Self> {
        let s = s.trim();
        let (mantissa, exp) = match s.find(['e', 'E']) {
            Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
            None => (s, 0),
        };
        let (neg, mantissa) = match mantissa.strip_prefix('-') {
            Some(m) => (true, m),
            None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
        };
        let (int_part, frac_part) = match mantissa.split_once('.') {
            Some((i, f)) => (i, f),
            None => (mantissa, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return None;
        }
        if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{int_part}{frac_part}");
        let mut num: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        if neg {
            num = -num;
        }
        let scale = exp - frac_part.len() as i64;
        let ten = BigInt::from(10);
        if scale >= 0 {
            Some(QuadNum::from_int(num * num_traits::pow(ten, scale as usize)))
        } else {
            Some(QuadNum::new(num, BigInt::zero(), num_traits::pow(ten, (-scale) as usize), 0))
        }
    }

    fn normalize(&mut self) {
        if self.c.is_negative() {
            self.a = -&self.a;
            self.b = -&self.b;
            self.c = -&self.c;
        }
        if self.b.is_zero() {
            self.d = 0;
        }
        let g = self.a.gcd(&self.b).gcd(&self.c);
        if !g.is_one() && !g.is_zero() {
            self.a /= &g;
            self.b /= &g;
            self.c /= &g;
        }
    }

    pub fn parts(&self) -> (&BigInt, &BigInt, &BigInt, u64) {
        (&self.a, &self.b, &self.c, self.d)
    }

    pub fn radicand(&self) -> u64 {
        self.d
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rational(&self) -> Option<BigRational> {
        self.is_rational().then(|| BigRational::new(self.a.clone(), self.c.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn join_d(&self, other: &Self) -> u64 {
        match (self.d, other.d) {
            (0, d) | (d, 0) => d,
            (x, y) if x == y => x,
            (x, y) => panic!("mixing Q(√{x}) and Q(√{y})"),
        }
    }

    /// Whether `self` and `other` live in a common quadratic field.
    pub fn compatible(&self, other: &Self) -> bool {
        self.d == 0 || other.d == 0 || self.d == other.d
    }

    /// Sign of `a + b√d` (and so of the value, as `c > 0`).
    pub fn signum_ord(&self) -> Ordering {
        let sa = self.a.sign();
        let sb = self.b.sign();
        let ord = |s: Sign| match s {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        };
        if sb == Sign::NoSign {
            return ord(sa);
        }
        if sa == Sign::NoSign || sa == sb {
            return ord(sb);
        }
        let a2 = &self.a * &self.a;
        let b2d = &self.b * &self.b * BigInt::from(self.d);
        if a2 > b2d {
            ord(sa)
        } else {
            ord(sb)
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum_ord() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum_ord() == Ordering::Less
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        // c / (a + b√d) = c (a - b√d) / (a² - b² d)
        let norm = &self.a * &self.a - &self.b * &self.b * BigInt::from(self.d);
        QuadNum::new(&self.c * &self.a, -(&self.c * &self.b), norm, self.d)
    }

    pub fn pow(&self, e: i64) -> Self {
        if e < 0 {
            return self.recip().pow(-e);
        }
        let mut base = self.clone();
        let mut acc = QuadNum::one();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn mul_int(&self, k: i64) -> Self {
        QuadNum::new(&self.a * k, &self.b * k, self.c.clone(), self.d)
    }

    /// Exact floor.
    pub fn floor(&self) -> BigInt {
        let b2d = (&self.b * &self.b * BigInt::from(self.d)).magnitude().clone();
        let s = BigInt::from(b2d.sqrt());
        let approx = if self.b.is_negative() { &self.a - &s } else { &self.a + &s };
        let mut f = approx.div_floor(&self.c);
        loop {
            let fq = QuadNum::from_int(f.clone());
            if *self < fq {
                f -= 1;
            } else if *self >= &fq + &QuadNum::one() {
                f += 1;
            } else {
                return f;
            }
        }
    }

    /// log2 of a positive value, without cancellation loss.
    pub fn log2(&self) -> f64 {
        assert!(self.is_positive(), "log of non-positive value");
        let la = if self.a.is_zero() { f64::NEG_INFINITY } else { big_log2(self.a.magnitude()) };
        let lb = if self.b.is_zero() {
            f64::NEG_INFINITY
        } else {
            big_log2(self.b.magnitude()) + 0.5 * (self.d as f64).log2()
        };
        let same = self.a.sign() == self.b.sign() || self.a.is_zero() || self.b.is_zero();
        let lnum = if same {
            log2_add(la, lb)
        } else {
            let norm = (&self.a * &self.a - &self.b * &self.b * BigInt::from(self.d)).magnitude().clone();
            big_log2(&norm) - log2_add(la, lb)
        };
        lnum - big_log2(self.c.magnitude())
    }

    pub fn to_f64(&self) -> f64 {
        if let Some(r) = self.to_rational() {
            return r.to_f64().unwrap_or(f64::NAN);
        }
        let sign = match self.signum_ord() {
            Ordering::Equal => return 0.0,
            Ordering::Greater => 1.0,
            Ordering::Less => -1.0,
        };
        let mag = if sign > 0.0 { self.clone() } else { -self };
        // scale so the quotient has about 80 bits beyond the rounding error of the root
        let cancel = (mag.b.bits() as i64 - mag.c.bits() as i64 + 1).max(0);
        let shift = 80 - mag.log2().floor() as i64 + cancel;
        if !(0..=1 << 20).contains(&shift) {
            return sign * mag.log2().exp2();
        }
        let scaled = BigInt::from(1u8) << (shift as u64);
        let root = (BigInt::from(mag.d) * &scaled * &scaled).sqrt();
        let num = &mag.a * &scaled + &mag.b * root;
        let v = (num / &mag.c).to_f64().unwrap_or(f64::NAN);
        let half = (shift / 2) as f64;
        sign * v * (-half).exp2() * (half - shift as f64).exp2()
    }
}

impl fmt::Display for QuadNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            if self.c.is_one() {
                write!(f, "{}", self.a)
            } else {
                write!(f, "{}/{}", self.a, self.c)
            }
        } else {
            write!(f, "({}{:+}*sqrt({}))/{}", self.a, self.b, self.d, self.c)
        }
    }
}

impl<'a> Add<&'a QuadNum> for &'a QuadNum {
    type Output = QuadNum;
    fn add(self, o: &QuadNum) -> QuadNum {
        let d = self.join_d(o);
        QuadNum::new(
            &self.a * &o.c + &o.a * &self.c,
            &self.b * &o.c + &o.b * &self.c,
            &self.c * &o.c,
            d,
        )
    }
}

impl<'a> Sub<&'a QuadNum> for &'a QuadNum {
    type Output = QuadNum;
    fn sub(self, o: &QuadNum) -> QuadNum {
        let d = self.join_d(o);
        QuadNum::new(
            &self.a * &o.c - &o.a * &self.c,
            &self.b * &o.c - &o.b * &self.c,
            &self.c * &o.c,
            d,
        )
    }
}

impl<'a> Mul<&'a QuadNum> for &'a QuadNum {
    type Output = QuadNum;
    fn mul(self, o: &QuadNum) -> QuadNum {
        let d = self.join_d(o);
        QuadNum::new(
            &self.a * &o.a + &self.b * &o.b * BigInt::from(d),
            &self.a * &o.b + &self.b * &o.a,
            &self.c * &o.c,
            d,
        )
    }
}

impl Neg for &QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        QuadNum::new(-&self.a, -&self.b, self.c.clone(), self.d)
    }
}

impl Neg for QuadNum {
    type Output = QuadNum;
    fn neg(self) -> QuadNum {
        -&self
    }
}

macro_rules! owned_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, o: QuadNum) -> QuadNum { (&self).$m(&o) }
        }
        impl<'a> $tr<&'a QuadNum> for QuadNum {
            type Output = QuadNum;
            fn $m(self, o: &QuadNum) -> QuadNum { (&self).$m(o) }
        }
    )*};
}
owned_ops!(Add add, Sub sub, Mul mul);
