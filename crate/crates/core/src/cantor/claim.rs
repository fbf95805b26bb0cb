//! Choosing a designated hit: the depth `n'`, the tolerance `δ`, and the word `σ`.

use std::cell::RefCell;
use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::approximation::PsiFunction;
use crate::cylinders::{find_full_between, Bound, Containment};
use crate::error::{Error, Result};
use crate::numerics::QuadNum;
use crate::words::DigitWord;

/// `factor·ψ(n)·β^{shift}` as a bound for the cylinder search.
pub struct PsiBound<'a> {
    psi: &'a PsiFunction,
    n: u64,
    shift: i64,
    factor: BigRational,
    failure: RefCell<Option<Error>>,
}

impl<'a> PsiBound<'a> {
    pub fn new(psi: &'a PsiFunction, n: u64, shift: i64, factor: BigRational) -> Self {
        PsiBound { psi, n, shift, factor, failure: RefCell::new(None) }
    }

    fn take_failure(&self) -> Result<()> {
        match self.failure.borrow_mut().take() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

impl Bound for PsiBound<'_> {
    fn locate(&self, v: &QuadNum) -> Ordering {
        match self.psi.cmp_with(v, self.n, self.shift, &self.factor) {
            Ok(o) => o,
            Err(e) => {
                self.failure.borrow_mut().get_or_insert(e);
                Ordering::Equal
            }
        }
    }
}

fn int(k: u64) -> QuadNum {
    QuadNum::from_int(BigInt::from(k))
}

/// `(k+1)β^{-k} ≤ δψ(n)`.
fn eq5_lower(psi: &PsiFunction, n: u64, k: u64, delta: &BigRational) -> Result<bool> {
    Ok(psi.cmp_with(&int(k + 1), n, k as i64, delta)?.is_le())
}

/// The `k` with `(k+1)β^{-k} ≤ δψ(n) ≤ kβ^{-k+1}`.
pub fn claim_k(psi: &PsiFunction, n: u64, delta: &BigRational) -> Result<u64> {
    let b = psi.beta();
    let lb = b.ln();
    let target = -delta.to_f64().unwrap_or(0.0).ln() / lb - psi.log_beta(n)?;
    let mut est = target.max(1.0);
    for _ in 0..8 {
        est = target + (est + 1.0).ln() / lb;
    }
    let mut k = (est.floor() as u64).saturating_sub(3).max(1);
    while k > 1 && eq5_lower(psi, n, k, delta)? {
        k -= 1;
    }
    while !eq5_lower(psi, n, k, delta)? {
        k += 1;
    }
    if k > 1 && !psi.cmp_with(&int(k), n, k as i64 - 1, delta)?.is_ge() {
        return Err(Error::Invariant(format!("k = {k} fails the upper half of the bracket")));
    }
    Ok(k)
}

/// The `t` with `β^{-(t+1)} ≤ ψ(n) < β^{-t}`.
pub fn claim_t(psi: &PsiFunction, n: u64) -> Result<u64> {
    let one = BigRational::one();
    let below = |t: u64| -> Result<bool> { Ok(psi.cmp_with(&QuadNum::one(), n, t as i64, &one)?.is_gt()) };
    let mut t = ((-psi.log_beta(n)?).floor() as u64).saturating_sub(2);
    while t > 0 && !below(t)? {
        t -= 1;
    }
    while below(t + 1)? {
        t += 1;
    }
    if !below(t)? {
        return Err(Error::PreconditionViolated(format!("psi({n}) is not below 1")));
    }
    Ok(t)
}

/// `σ = 0^t·u` together with the quantities that fix it.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimArithmetic {
    pub n_prime: u64,
    pub delta: String,
    pub k: u64,
    pub t: u64,
    /// Tail of `σ` after its `t` leading zeros.
    pub u: DigitWord,
    #[serde(skip)]
    pub delta_exact: BigRational,
}

impl ClaimArithmetic {
    /// Left endpoint of the cylinder of `σ`.
    pub fn sigma_left(&self, psi: &PsiFunction) -> QuadNum {
        crate::numerics::eval_word(&self.u, psi.beta()) * psi.beta().inv_pow(self.t as usize)
    }

    /// The full word `σ`; only sensible for small `t`.
    pub fn sigma(&self) -> DigitWord {
        DigitWord::zeros(self.t as usize).concat(&self.u)
    }
}

/// `k`, `t` and `σ` for the given depth and tolerance, with no conditions on `n'` itself.
pub fn claim_arithmetic(psi: &PsiFunction, n_prime: u64, delta: &BigRational) -> Result<ClaimArithmetic> {
    if delta <= &BigRational::from_integer(0.into()) || delta >= &BigRational::one() {
        return Err(Error::InvalidInput(format!("delta must lie in (0,1), got {delta}")));
    }
    let k = claim_k(psi, n_prime, delta)?;
    let t = claim_t(psi, n_prime)?;
    if t >= k {
        return Err(Error::Invariant(format!("t = {t} is not below k = {k}")));
    }
    let order = usize::try_from(k - t).map_err(|_| Error::CapExceeded("word order".into()))?;
    let lo = PsiBound::new(psi, n_prime, t as i64, BigRational::one() - delta);
    let hi = PsiBound::new(psi, n_prime, t as i64, BigRational::one());
    let found = find_full_between(&lo, &hi, order, psi.beta(), Containment::ClosureInOpen);
    lo.take_failure()?;
    hi.take_failure()?;
    let c = found.ok_or_else(|| {
        Error::NoValidNPrime(format!("no full cylinder of order {order} inside the target at n' = {n_prime}"))
    })?;
    Ok(ClaimArithmetic { n_prime, delta: delta.to_string(), k, t, u: c.word, delta_exact: delta.clone() })
}

/// `δ = max(ψ(n')^{1/i}, 1/(i+1))`, replaced by a dyadic upper bound when the root dominates.
pub fn claim_delta(psi: &PsiFunction, n_prime: u64, i: u64) -> Result<BigRational> {
    let floor = BigRational::new(BigInt::one(), BigInt::from(i + 1));
    let root = (psi.log_beta(n_prime)? * psi.beta().ln() / i as f64).exp();
    if root < floor.to_f64().unwrap() * (1.0 - 1e-6) {
        return Ok(floor);
    }
    let scale = 1u64 << 40;
    let num = ((root * (1.0 + 1e-9)) * scale as f64).ceil() as u64;
    let delta = BigRational::new(BigInt::from(num), BigInt::from(scale));
    if delta >= BigRational::one() {
        return Err(Error::PreconditionViolated(format!("psi({n_prime})^(1/{i}) is not below 1")));
    }
    let ok = psi.cmp_with(&QuadNum::from_rational(&num_traits::pow(delta.clone(), i as usize)), n_prime, 0, &BigRational::one())?;
    if ok.is_lt() {
        return Err(Error::Invariant("dyadic delta fell below the root".into()));
    }
    Ok(if delta > floor { delta } else { floor })
}

/// Everything fixed at one level for the coordinate carrying the hit.
#[derive(Clone, Debug, Serialize)]
pub struct ClaimSelection {
    /// Claim index `i`.
    pub index: u64,
    /// Extension length `n_{q,h}` up to and including the explicit 1.
    pub n: u64,
    pub arithmetic: ClaimArithmetic,
}

/// Sparsity and size conditions a candidate `n'` must meet.
fn admissible_depth(psi: &PsiFunction, n_prime: u64, prev: u64, ell: usize, m: usize, i: u64) -> Result<bool> {
    let one = BigRational::one();
    if n_prime < 2 * prev {
        return Ok(false);
    }
    for shift in [ell as i64 + 3, 2 * m as i64] {
        // ψ(n') < β^{-shift}
        if !psi.cmp_with(&QuadNum::one(), n_prime, shift, &one)?.is_gt() {
            return Ok(false);
        }
    }
    let alpha = psi.exact_alpha().and_then(|a| a.to_f64()).ok_or_else(|| {
        Error::InvalidInput("the construction needs a parametric psi".into())
    })?;
    let ratio = -psi.log_beta(n_prime)? / n_prime as f64;
    Ok((ratio - alpha).abs() <= 1.0 / i as f64)
}

/// Least extension length `n` (not a multiple of `M`, at least `max(M+1, ⌈N/η⌉)`) for
/// which the hit bounds hold at `n' = N + n`.
pub fn select_claim(
    psi: &PsiFunction,
    prev_depth: u64,
    ell: usize,
    m: usize,
    eta: &BigRational,
    index: u64,
    search_cap: u64,
) -> Result<ClaimSelection> {
    let by_eta = (BigRational::from_integer(BigInt::from(prev_depth)) / eta).ceil().to_integer();
    let start = (m as u64 + 1).max(by_eta.to_u64().ok_or_else(|| Error::CapExceeded("depth".into()))?);
    let mut n = start;
    while n < start + search_cap {
        if n % m as u64 != 0 {
            let n_prime = prev_depth + n;
            if admissible_depth(psi, n_prime, prev_depth, ell, m, index)? {
                let delta = claim_delta(psi, n_prime, index)?;
                let arithmetic = claim_arithmetic(psi, n_prime, &delta)?;
                return Ok(ClaimSelection { index, n, arithmetic });
            }
        }
        n += 1;
    }
    Err(Error::NoValidNPrime(format!(
        "no depth in [{start}, {}) meets the designated-hit conditions",
        start + search_cap
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::BetaSystem;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn exp_psi(beta: &str, alpha: BigRational) -> PsiFunction {
        PsiFunction::exponential(&BetaSystem::make(beta).unwrap(), BigRational::one(), alpha).unwrap()
    }

    /// Integer scan: least k with 10(k+1)·2^{10} ≤ 2^k, and the t bracketing 2^{-10}.
    #[test]
    fn worked_example_against_integer_scan() {
        let k_oracle = (1u32..64).find(|&k| 10u128 * (k as u128 + 1) * 1024 <= 1u128 << k).unwrap();
        let psi = exp_psi("2", r(1, 1));
        let c = claim_arithmetic(&psi, 10, &r(1, 10)).unwrap();
        assert_eq!(c.k, k_oracle as u64);
        assert_eq!((c.k, c.t), (18, 9));
        // the upper half of the bracket at the oracle's k
        assert!(k_oracle as u128 * 10 * 1024 >= 1u128 << (k_oracle - 1));
        assert_eq!(c.u.to_string(), "011100111");
        let left = c.sigma_left(&psi);
        let right = &left + &psi.beta().inv_pow(c.k as usize);
        assert!(left > QuadNum::from_ratio(9, 10 * 1024));
        assert!(right < QuadNum::from_ratio(1, 1024));
    }

    #[test]
    fn k_and_t_scan_oracle_golden() {
        let phi = BetaSystem::golden();
        let psi = PsiFunction::exponential(&phi, BigRational::one(), r(1, 2)).unwrap();
        for n in [20u64, 57, 301, 4000] {
            for delta in [r(1, 2), r(1, 3), r(1, 10)] {
                let k = claim_k(&psi, n, &delta).unwrap();
                let t = claim_t(&psi, n).unwrap();
                // floating scan, far from the boundary in these cases
                let lpsi = -(n as f64) / 2.0;
                let ld = delta.to_f64().unwrap().ln() / phi.ln();
                let kf = (1..100_000u64).find(|&k| ((k + 1) as f64).ln() / phi.ln() - k as f64 <= ld + lpsi).unwrap();
                let tf = (0..100_000u64).find(|&t| -(t as f64 + 1.0) <= lpsi && lpsi < -(t as f64)).unwrap();
                assert_eq!((k, t), (kf, tf), "n={n} delta={delta}");
            }
        }
    }

    #[test]
    fn sigma_sits_strictly_inside() {
        let psi = exp_psi("golden", r(1, 2));
        for n in [40u64, 333, 100_001] {
            let c = claim_arithmetic(&psi, n, &r(1, 4)).unwrap();
            let left = crate::numerics::eval_word(&c.u, psi.beta());
            let right = &left + &psi.beta().inv_pow(c.u.len());
            let t = c.t as i64;
            assert!(psi.cmp_with(&left, n, t, &r(3, 4)).unwrap().is_gt());
            assert!(psi.cmp_with(&right, n, t, &BigRational::one()).unwrap().is_lt());
            assert!(crate::cylinders::is_full(&c.u, psi.beta()).unwrap());
        }
    }

    #[test]
    fn delta_schedule() {
        let psi = exp_psi("2", r(1, 1));
        assert_eq!(claim_delta(&psi, 300, 1).unwrap(), r(1, 2));
        let slow = exp_psi("2", r(1, 100));
        // 2^{-0.01·300/3} ≈ 0.5 beats 1/4
        let d = claim_delta(&slow, 300, 3).unwrap();
        assert!(d > r(1, 4) && d < r(51, 100));
        let d3 = num_traits::pow(d, 3);
        assert!(slow.cmp_with(&QuadNum::from_rational(&d3), 300, 0, &BigRational::one()).unwrap().is_ge());
    }

    #[test]
    fn first_level_selection() {
        let psi = exp_psi("2", r(1, 1));
        let s = select_claim(&psi, 0, 0, 131, &r(1, 10), 1, 1_000_000).unwrap();
        assert_eq!(s.n, 263);
        assert_eq!(s.arithmetic.delta_exact, r(1, 2));
        assert!(matches!(
            select_claim(&psi, 0, 0, 131, &r(1, 10), 1, 10),
            Err(Error::NoValidNPrime(_))
        ));
    }
}
