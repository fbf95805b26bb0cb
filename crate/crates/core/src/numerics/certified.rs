//! Rational interval enclosures with a precision budget.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::quad::QuadNum;

/// A real known only to lie in `[lo, hi]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertifiedReal {
    lo: BigRational,
    hi: BigRational,
    bits: u32,
}

/// Anything that can produce ever-tighter rational enclosures of itself.
pub trait Refinable {
    fn enclose(&self, bits: u32) -> CertifiedReal;
}

fn dyadic(n: BigInt, bits: u32) -> BigRational {
    BigRational::new(n, BigInt::one() << bits)
}

impl CertifiedReal {
    pub fn new(lo: BigRational, hi: BigRational, bits: u32) -> Self {
        assert!(lo <= hi, "empty interval");
        CertifiedReal { lo, hi, bits }
    }

    pub fn exact(x: BigRational) -> Self {
        CertifiedReal { lo: x.clone(), hi: x, bits: u32::MAX }
    }

    pub fn lo(&self) -> &BigRational {
        &self.lo
    }

    pub fn hi(&self) -> &BigRational {
        &self.hi
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        &self.lo <= x && x <= &self.hi
    }

    /// `⌊x⌋` when the whole interval shares one integer part.
    pub fn floor_decided(&self) -> Option<BigInt> {
        let fl = self.lo.floor().to_integer();
        let fh = self.hi.floor().to_integer();
        (fl == fh).then_some(fl)
    }

    pub fn mul(&self, other: &CertifiedReal) -> CertifiedReal {
        let cands = [
            &self.lo * &other.lo,
            &self.lo * &other.hi,
            &self.hi * &other.lo,
            &self.hi * &other.hi,
        ];
        let lo = cands.iter().min().unwrap().clone();
        let hi = cands.iter().max().unwrap().clone();
        CertifiedReal { lo, hi, bits: self.bits.min(other.bits) }
    }

    pub fn sub_int(&self, k: &BigInt) -> CertifiedReal {
        let k = BigRational::from_integer(k.clone());
        CertifiedReal { lo: &self.lo - &k, hi: &self.hi - &k, bits: self.bits }
    }

    pub fn midpoint_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        ((&self.lo + &self.hi) / BigRational::from_integer(BigInt::from(2)))
            .to_f64()
            .unwrap_or(f64::NAN)
    }
}

impl Refinable for QuadNum {
    fn enclose(&self, bits: u32) -> CertifiedReal {
        let (a, b, c, d) = self.parts();
        if b.is_zero() {
            let r = BigRational::new(a.clone(), c.clone());
            return CertifiedReal { lo: r.clone(), hi: r, bits };
        }
        // s/2^bits <= √d < (s+1)/2^bits
        let scaled: BigUint = BigUint::from(d) << (2 * bits as u64);
        let s = BigInt::from(scaled.sqrt());
        let root = (dyadic(s.clone(), bits), dyadic(s + 1, bits));
        let b_r = BigRational::from_integer(b.clone());
        let (blo, bhi) = if b.is_negative() {
            (&b_r * &root.1, &b_r * &root.0)
        } else {
            (&b_r * &root.0, &b_r * &root.1)
        };
        let a_r = BigRational::from_integer(a.clone());
        let c_r = BigRational::from_integer(c.clone());
        CertifiedReal { lo: (&a_r + blo) / &c_r, hi: (&a_r + bhi) / &c_r, bits }
    }
}

impl Refinable for CertifiedReal {
    fn enclose(&self, _bits: u32) -> CertifiedReal {
        self.clone()
    }
}

/// The deterministic precision schedule: `start, 2·start, …` up to `cap`.
pub fn precision_ladder(start: u32, cap: u32) -> impl Iterator<Item = u32> {
    std::iter::successors(Some(start.min(cap)), move |&b| (b < cap).then(|| (b * 2).min(cap)))
}
