//! Approximation speeds ψ, convergent errors and hit detection.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{eval_word, expand, expand_with_tail, parse_rational, BetaSystem, QuadNum};

/// Largest `|exponent|` of β raised exactly when a comparison is too close for floats.
pub const EXACT_EXPONENT_CAP: i64 = 1 << 16;

/// Serializable description of ψ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
#[serde(deny_unknown_fields)]
pub enum PsiSpec {
    /// `c·β^{-αn}`
    Exponential {
        #[serde(default = "one_str")]
        c: String,
        alpha: String,
    },
    /// `c·n^{-p}·β^{-αn}`
    Tempered {
        #[serde(default = "one_str")]
        c: String,
        p: u32,
        alpha: String,
    },
    /// `ψ(1), ψ(2), …`
    Table { values: Vec<String> },
}

fn one_str() -> String {
    "1".into()
}

#[derive(Clone, Debug, PartialEq)]
enum Family {
    Parametric { c: BigRational, p: u32, alpha: BigRational },
    Table(Vec<BigRational>),
}

/// A positive non-increasing function ψ tied to a base β.
#[derive(Clone, Debug)]
pub struct PsiFunction {
    beta: BetaSystem,
    family: Family,
}

fn ln_rational(r: &BigRational) -> f64 {
    QuadNum::from_rational(r).log2() * std::f64::consts::LN_2
}

impl PsiFunction {
    pub fn exponential(beta: &BetaSystem, c: BigRational, alpha: BigRational) -> Result<Self> {
        Self::tempered(beta, c, 0, alpha)
    }

    pub fn tempered(beta: &BetaSystem, c: BigRational, p: u32, alpha: BigRational) -> Result<Self> {
        if !c.is_positive() || alpha.is_negative() || (p == 0 && alpha.is_zero()) {
            return Err(Error::InvalidInput(format!(
                "psi needs c > 0, alpha >= 0 and a decaying factor (c={c}, p={p}, alpha={alpha})"
            )));
        }
        Ok(PsiFunction { beta: beta.clone(), family: Family::Parametric { c, p, alpha } })
    }

    pub fn table(beta: &BetaSystem, values: Vec<BigRational>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|v| !v.is_positive()) {
            return Err(Error::InvalidInput("psi table must be non-empty and positive".into()));
        }
        if values.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidInput("psi table must be non-increasing".into()));
        }
        if values.len() > 1 && values.last() >= values.first() {
            return Err(Error::InvalidInput("psi table must decrease overall".into()));
        }
        Ok(PsiFunction { beta: beta.clone(), family: Family::Table(values) })
    }

    pub fn from_spec(beta: &BetaSystem, spec: &PsiSpec) -> Result<Self> {
        match spec {
            PsiSpec::Exponential { c, alpha } => {
                Self::exponential(beta, parse_rational(c)?, parse_rational(alpha)?)
            }
            PsiSpec::Tempered { c, p, alpha } => {
                Self::tempered(beta, parse_rational(c)?, *p, parse_rational(alpha)?)
            }
            PsiSpec::Table { values } => {
                Self::table(beta, values.iter().map(|v| parse_rational(v)).collect::<Result<_>>()?)
            }
        }
    }

    pub fn beta(&self) -> &BetaSystem {
        &self.beta
    }

    /// `α` as an exact rational for parametric families.
    pub fn exact_alpha(&self) -> Option<&BigRational> {
        match &self.family {
            Family::Parametric { alpha, .. } => Some(alpha),
            Family::Table(_) => None,
        }
    }

    /// Last index where a table is defined.
    pub fn horizon(&self) -> Option<usize> {
        match &self.family {
            Family::Table(v) => Some(v.len()),
            Family::Parametric { .. } => None,
        }
    }

    fn table_value(&self, n: usize) -> Result<&BigRational> {
        match &self.family {
            Family::Table(v) if n >= 1 && n <= v.len() => Ok(&v[n - 1]),
            Family::Table(v) => Err(Error::InvalidInput(format!(
                "psi table has {} entries, asked for n={n}",
                v.len()
            ))),
            Family::Parametric { .. } => unreachable!(),
        }
    }

    /// `log_β ψ(n)` in floating point.
    pub fn log_beta(&self, n: u64) -> Result<f64> {
        let lb = self.beta.ln();
        match &self.family {
            Family::Parametric { c, p, alpha } => {
                let a = alpha.to_f64().unwrap_or(f64::NAN);
                Ok((ln_rational(c) - *p as f64 * (n as f64).ln()) / lb - a * n as f64)
            }
            Family::Table(_) => Ok(ln_rational(self.table_value(n as usize)?) / lb),
        }
    }

    pub fn value_f64(&self, n: u64) -> Result<f64> {
        Ok(self.beta.to_f64().powf(self.log_beta(n)?))
    }

    /// Decides `v ⋚ factor·ψ(n)·β^{shift}`.
    ///
    /// A floating-point log comparison settles clear cases; close ones are decided
    /// exactly by raising both sides to the denominator of α.
    pub fn cmp_with(&self, v: &QuadNum, n: u64, shift: i64, factor: &BigRational) -> Result<Ordering> {
        if !v.is_positive() {
            return Ok(Ordering::Less);
        }
        if !factor.is_positive() {
            return Ok(Ordering::Greater);
        }
        let lb = self.beta.ln();
        let lhs = v.log2() * std::f64::consts::LN_2 / lb;
        let rhs = match &self.family {
            // the exponent is combined in integers first so large n and shift cancel exactly
            Family::Parametric { c, p, alpha } => {
                let a = alpha.numer().to_i128().ok_or_else(too_big)?;
                let b = alpha.denom().to_i128().ok_or_else(too_big)?;
                let e = b.checked_mul(shift as i128).and_then(|x| x.checked_sub(a.checked_mul(n as i128)?));
                let e = e.ok_or_else(too_big)?;
                (ln_rational(factor) + ln_rational(c) - *p as f64 * (n as f64).ln()) / lb
                    + e as f64 / b as f64
            }
            Family::Table(_) => ln_rational(factor) / lb + self.log_beta(n)? + shift as f64,
        };
        let slack = 1e-9 * (1.0 + lhs.abs().max(rhs.abs()));
        if lhs < rhs - slack {
            return Ok(Ordering::Less);
        }
        if lhs > rhs + slack {
            return Ok(Ordering::Greater);
        }
        match &self.family {
            Family::Table(_) => {
                let r = factor * self.table_value(n as usize)?;
                check_exponent(shift)?;
                Ok(v.cmp(&(QuadNum::from_rational(&r) * self.beta.pow(shift))))
            }
            Family::Parametric { c, p, alpha } => {
                // v^b vs (factor·c·n^{-p})^b · β^{b·shift − a·n}
                let a = alpha.numer().to_i64().ok_or_else(too_big)?;
                let b = alpha.denom().to_i64().ok_or_else(too_big)?;
                let e = (b as i128) * (shift as i128) - (a as i128) * (n as i128);
                let e = i64::try_from(e).map_err(|_| too_big())?;
                check_exponent(e)?;
                check_exponent(b)?;
                let np = BigRational::from_integer(BigInt::from(n).pow(*p));
                let base = factor * c / np;
                let lhs = v.pow(b);
                let rhs = QuadNum::from_rational(&num_traits::pow(base, b as usize)) * self.beta.pow(e);
                Ok(lhs.cmp(&rhs))
            }
        }
    }
}

fn too_big() -> Error {
    Error::PrecisionExhausted("exponent of an exact psi comparison overflows".into())
}

fn check_exponent(e: i64) -> Result<()> {
    if e.abs() > EXACT_EXPONENT_CAP {
        return Err(Error::PrecisionExhausted(format!(
            "exact psi comparison would raise beta to {e}; the cap is {EXACT_EXPONENT_CAP}"
        )));
    }
    Ok(())
}

/// `α = liminf −log_β ψ(n)/n`, exact for parametric families.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AlphaEstimate {
    pub alpha: f64,
    pub exact: bool,
    /// Horizon used when the value is a finite-range minimum.
    pub horizon: Option<usize>,
}

pub fn alpha_of(psi: &PsiFunction, horizon: usize) -> Result<AlphaEstimate> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    if let Some(alpha) = psi.exact_alpha() {
        return Ok(AlphaEstimate { alpha: alpha.to_f64().unwrap_or(f64::NAN), exact: true, horizon: None });
    }
    let top = horizon.min(psi.horizon().unwrap_or(horizon));
    let alpha = (1..=top)
        .map(|n| psi.log_beta(n as u64).map(|l| -l / n as f64))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    Ok(AlphaEstimate { alpha, exact: false, horizon: Some(top) })
}

/// `x − ω_n(x)` and its rescaling `βⁿ(x − ω_n(x)) = T_β^n(x)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ApproxError {
    pub error: QuadNum,
    pub scaled: QuadNum,
}

/// Error of the n-th convergent, through the orbit and cross-checked through the convergent.
pub fn approx_error(x: &QuadNum, b: &BetaSystem, n: usize) -> Result<ApproxError> {
    let (w, tail) = expand_with_tail(x, b, n)?;
    let error = &tail * &b.inv_pow(n);
    let direct = x - &eval_word(&w, b);
    if direct != error {
        return Err(Error::Invariant(format!("error paths disagree for x={x}, n={n}")));
    }
    Ok(ApproxError { error, scaled: tail })
}

/// Error of the n-th convergent as `x − ω_n(x)` only.
pub fn approx_error_direct(x: &QuadNum, b: &BetaSystem, n: usize) -> Result<QuadNum> {
    Ok(x - &eval_word(&expand(x, b, n)?, b))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitEntry {
    pub n: usize,
    pub scaled_error: f64,
    pub psi: f64,
    pub ratio: f64,
}

/// Hits and (for a constant `c`) violations found up to a horizon.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HitRecord {
    pub x: String,
    pub beta: String,
    pub horizon: usize,
    pub hits: Vec<HitEntry>,
    pub violations: Vec<HitEntry>,
}

impl HitRecord {
    pub fn hit_indices(&self) -> Vec<usize> {
        self.hits.iter().map(|h| h.n).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

fn entry(n: usize, scaled: &QuadNum, psi: &PsiFunction) -> Result<HitEntry> {
    let s = scaled.to_f64();
    let p = psi.value_f64(n as u64)?;
    Ok(HitEntry { n, scaled_error: s, psi: p, ratio: s / p })
}

/// Scans `n ≤ horizon` for `βⁿ·|x − ω_n(x)| < ψ(n)`, and for `< c·ψ(n)` when `c` is given.
fn scan(x: &QuadNum, b: &BetaSystem, psi: &PsiFunction, horizon: usize, c: Option<&BigRational>) -> Result<HitRecord> {
    let mut rec = HitRecord {
        x: x.to_string(),
        beta: b.label().to_string(),
        horizon,
        hits: Vec::new(),
        violations: Vec::new(),
    };
    let (_, mut cur) = expand_with_tail(x, b, 0)?;
    let one = BigRational::one();
    for n in 1..=horizon {
        let bx = b.value() * &cur;
        let d = bx.floor();
        cur = &bx - &QuadNum::from_int(d);
        if psi.cmp_with(&cur, n as u64, 0, &one)?.is_lt() {
            rec.hits.push(entry(n, &cur, psi)?);
            if let Some(c) = c {
                if psi.cmp_with(&cur, n as u64, 0, c)?.is_lt() {
                    rec.violations.push(entry(n, &cur, psi)?);
                }
            }
        }
    }
    Ok(rec)
}

/// All `n ≤ horizon` with `βⁿ·|x − ω_n(x)| < ψ(n)`.
pub fn detect_hits(x: &QuadNum, b: &BetaSystem, psi: &PsiFunction, horizon: usize) -> Result<HitRecord> {
    scan(x, b, psi, horizon, None)
}

/// Finite-horizon evidence that `x` lies in `E_β(ψ)` with respect to one constant `c`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub c: f64,
    pub horizon: usize,
    pub hits: Vec<usize>,
    pub violations: Vec<usize>,
    pub neutral: usize,
    /// Hits exist and no violation was found; evidence up to `horizon` only.
    pub consistent: bool,
}

pub fn exactness_evidence(
    x: &QuadNum,
    b: &BetaSystem,
    psi: &PsiFunction,
    c: &BigRational,
    horizon: usize,
) -> Result<ExactnessReport> {
    if !c.is_positive() || *c >= BigRational::one() {
        return Err(Error::InvalidInput(format!("c must lie in (0,1), got {c}")));
    }
    let rec = scan(x, b, psi, horizon, Some(c))?;
    let hits = rec.hit_indices();
    let violations: Vec<usize> = rec.violations.iter().map(|h| h.n).collect();
    Ok(ExactnessReport {
        c: c.to_f64().unwrap_or(f64::NAN),
        horizon,
        neutral: horizon - hits.len(),
        consistent: !hits.is_empty() && violations.is_empty(),
        hits,
        violations,
    })
}

/// The default grid `{0.9, 0.99}` plus any level-specific constants.
pub fn default_c_grid(extra: &[BigRational]) -> Vec<BigRational> {
    let mut grid = vec![BigRational::new(9.into(), 10.into()), BigRational::new(99.into(), 100.into())];
    for c in extra {
        if !grid.contains(c) {
            grid.push(c.clone());
        }
    }
    grid
}

pub fn exactness_grid(
    x: &QuadNum,
    b: &BetaSystem,
    psi: &PsiFunction,
    grid: &[BigRational],
    horizon: usize,
) -> Result<Vec<ExactnessReport>> {
    grid.iter().map(|c| exactness_evidence(x, b, psi, c, horizon)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(p.into(), q.into())
    }

    fn q(p: i64, d: i64) -> QuadNum {
        QuadNum::from_ratio(p, d)
    }

    #[test]
    fn alpha_examples() {
        let two = BetaSystem::make("2").unwrap();
        let psi = PsiFunction::exponential(&two, r(1, 1), r(1, 1)).unwrap();
        assert_eq!(alpha_of(&psi, 10).unwrap().alpha, 1.0);
        let phi = BetaSystem::golden();
        let psi = PsiFunction::exponential(&phi, r(1, 1), r(1, 2)).unwrap();
        assert_eq!(alpha_of(&psi, 10).unwrap().alpha, 0.5);
        let table = PsiFunction::table(&two, vec![r(1, 2), r(1, 10), r(1, 100), r(1, 1000)]).unwrap();
        let a = alpha_of(&table, 4).unwrap();
        assert!((a.alpha - 1.0).abs() < 1e-12);
        assert_eq!(a.horizon, Some(4));
        let direct: Vec<f64> = [0.5f64, 0.1, 0.01, 0.001].iter().enumerate().map(|(i, v)| -v.log2() / (i + 1) as f64).collect();
        assert!((direct[1] - 1.66).abs() < 0.01 && (direct[3] - 2.49).abs() < 0.01);
    }

    #[test]
    fn psi_validation() {
        let two = BetaSystem::make("2").unwrap();
        assert!(PsiFunction::exponential(&two, r(0, 1), r(1, 1)).is_err());
        assert!(PsiFunction::exponential(&two, r(1, 1), r(0, 1)).is_err());
        assert!(PsiFunction::table(&two, vec![r(1, 2), r(1, 1)]).is_err());
        assert!(PsiFunction::table(&two, vec![r(1, 2), r(1, 2)]).is_err());
        let spec: PsiSpec = toml::from_str("family = \"tempered\"\np = 2\nalpha = \"1/2\"").unwrap();
        let psi = PsiFunction::from_spec(&two, &spec).unwrap();
        assert!((psi.value_f64(4).unwrap() - 0.25f64 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn exact_comparison_at_equality() {
        let two = BetaSystem::make("2").unwrap();
        let psi = PsiFunction::exponential(&two, r(1, 1), r(1, 2)).unwrap();
        // ψ(4) = 2^{-2} exactly
        assert_eq!(psi.cmp_with(&q(1, 4), 4, 0, &r(1, 1)).unwrap(), Ordering::Equal);
        assert_eq!(psi.cmp_with(&q(1, 2), 4, 1, &r(1, 1)).unwrap(), Ordering::Equal);
        assert_eq!(psi.cmp_with(&q(1, 4), 4, 0, &r(9, 10)).unwrap(), Ordering::Greater);
        // ψ(3) = 2^{-3/2} is irrational
        assert_eq!(psi.cmp_with(&q(35355, 100_000), 3, 0, &r(1, 1)).unwrap(), Ordering::Less);
        assert_eq!(psi.cmp_with(&q(35356, 100_000), 3, 0, &r(1, 1)).unwrap(), Ordering::Greater);
        let phi = BetaSystem::golden();
        let psi = PsiFunction::exponential(&phi, r(1, 1), r(1, 2)).unwrap();
        assert_eq!(psi.cmp_with(&phi.inv_pow(3), 6, 0, &r(1, 1)).unwrap(), Ordering::Equal);
    }

    #[test]
    fn error_examples() {
        let two = BetaSystem::make("2").unwrap();
        assert_eq!(approx_error(&q(5, 8), &two, 3).unwrap().error, QuadNum::zero());
        let e = approx_error(&q(1, 3), &two, 4).unwrap();
        assert_eq!((e.error, e.scaled), (q(1, 48), q(1, 3)));
        let phi = BetaSystem::golden();
        assert_eq!(approx_error(phi.inverse(), &phi, 2).unwrap().error, QuadNum::zero());
    }

    /// Hits of the truncated lacunary series `Σ_{k<5} 2^{-2^k}`, by plain rational arithmetic.
    fn lacunary_oracle() -> (BigRational, Vec<usize>) {
        let x: BigRational = (0..5).map(|k| BigRational::new(1.into(), BigInt::one() << (1u32 << k))).sum();
        let hits = (1..=40)
            .filter(|&n| {
                let scaled = &x * BigRational::from_integer(BigInt::one() << n);
                let frac = &scaled - scaled.floor();
                // frac < 2^{-n/2}  ⟺  frac² < 2^{-n}
                &frac * &frac < BigRational::new(1.into(), BigInt::one() << n)
            })
            .collect();
        (x, hits)
    }

    #[test]
    fn lacunary_hits() {
        let (x, want) = lacunary_oracle();
        let two = BetaSystem::make("2").unwrap();
        let psi = PsiFunction::exponential(&two, r(1, 1), r(1, 2)).unwrap();
        let rec = detect_hits(&QuadNum::from_rational(&x), &two, &psi, 40).unwrap();
        assert_eq!(rec.hit_indices(), want);
        assert!(want.contains(&2) && want.contains(&4) && want.contains(&8) && want.contains(&16));
        let json: serde_json::Value = serde_json::from_str(&rec.to_json()).unwrap();
        assert!(json["hits"][0]["scaled_error"].is_number());
    }

    #[test]
    fn terminating_orbit() {
        let two = BetaSystem::make("2").unwrap();
        let psi = PsiFunction::exponential(&two, r(1, 1), r(1, 1)).unwrap();
        let rec = detect_hits(&q(5, 8), &two, &psi, 20).unwrap();
        // T(5/8) = 1/4 < ψ(1) as well
        assert_eq!(rec.hit_indices(), [1].into_iter().chain(3..=20).collect::<Vec<_>>());
        for c in default_c_grid(&[]) {
            let rep = exactness_evidence(&q(5, 8), &two, &psi, &c, 20).unwrap();
            assert!(!rep.consistent);
            assert!((3..=20).all(|n| rep.violations.contains(&n)));
        }
    }

    #[test]
    fn random_points_rarely_hit_fast_psi() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let two = BetaSystem::make("2").unwrap();
        let psi = PsiFunction::exponential(&two, r(1, 1), r(2, 1)).unwrap();
        let records: Vec<HitRecord> = (0..400)
            .map(|_| {
                let x = q(rng.gen_range(0..1i64 << 50), (1 << 50) + 1);
                detect_hits(&x, &two, &psi, 40).unwrap()
            })
            .collect();
        // P(some hit) = 1 − Π(1 − 4^{-n}) ≈ 0.31, and late hits are essentially impossible
        let with_hits = records.iter().filter(|r| !r.hits.is_empty()).count() as f64 / 400.0;
        assert!((0.22..0.40).contains(&with_hits), "{with_hits}");
        let late = records.iter().flat_map(|r| r.hit_indices()).filter(|&n| n > 10).count();
        assert_eq!(late, 0);
    }

    #[test]
    fn exactness_on_designed_point() {
        // hits of ψ(n) = 2^{-n/2} with ratios well above 1/2 give consistency for c = 1/2
        let (x, hits) = lacunary_oracle();
        let two = BetaSystem::make("2").unwrap();
        let psi = PsiFunction::exponential(&two, r(1, 1), r(1, 2)).unwrap();
        let x = QuadNum::from_rational(&x);
        let rec = detect_hits(&x, &two, &psi, 40).unwrap();
        let rep = exactness_evidence(&x, &two, &psi, &r(1, 2), 40).unwrap();
        let want: Vec<usize> = rec.hits.iter().filter(|h| h.ratio < 0.5).map(|h| h.n).collect();
        assert_eq!(rep.violations, want);
        assert_eq!(rep.hits, hits);
        assert!(exactness_evidence(&x, &two, &psi, &r(1, 1), 40).is_err());
    }

    proptest! {
        #[test]
        fn trivial_bound_and_paths(p in 0i64..100_000, n in 1usize..50, spec in prop::sample::select(vec!["2", "golden", "9/5", "5/2", "3"])) {
            let b = BetaSystem::make(spec).unwrap();
            let x = q(p, 100_003);
            let e = approx_error(&x, &b, n).unwrap();
            prop_assert!(!e.scaled.is_negative() && e.scaled < QuadNum::one());
            prop_assert_eq!(approx_error_direct(&x, &b, n).unwrap(), e.error);
        }

        #[test]
        fn hits_monotone_in_psi(p in 0i64..100_000, a in 1i64..8) {
            let two = BetaSystem::make("2").unwrap();
            let x = q(p, 100_003);
            let small = PsiFunction::exponential(&two, r(1, 1), r(a + 1, 4)).unwrap();
            let large = PsiFunction::exponential(&two, r(1, 1), r(a, 4)).unwrap();
            let hs = detect_hits(&x, &two, &small, 30).unwrap().hit_indices();
            let hl = detect_hits(&x, &two, &large, 30).unwrap().hit_indices();
            prop_assert!(hs.iter().all(|n| hl.contains(n)));
        }
    }
}
