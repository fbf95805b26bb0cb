//! Construction configuration and the per-level parameter tables.

use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::blocks::{choose_m, MChoice, RBlocks};
use super::claim::{select_claim, ClaimSelection};
use crate::approximation::{PsiFunction, PsiSpec};
use crate::error::{Error, Result};
use crate::numerics::{parse_rational, BetaSystem};
use crate::words::zero_run;

fn default_m_cap() -> usize {
    10_000
}

fn default_search_cap() -> u64 {
    1_000_000
}

fn default_materialize_cap() -> u64 {
    1_000_000
}

fn default_check_paths() -> usize {
    32
}

/// User-facing construction parameters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstructionSpec {
    pub betas: Vec<String>,
    pub psi: Vec<PsiSpec>,
    /// `η` as `p/q` or a decimal.
    pub eta: String,
    /// Fixed block length; chosen automatically when absent.
    #[serde(default)]
    pub m: Option<usize>,
    pub levels: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub samples: usize,
    /// Hölder threshold; defaults to the formula value.
    #[serde(default)]
    pub s0: Option<String>,
    #[serde(default = "default_m_cap")]
    pub m_cap: usize,
    #[serde(default = "default_search_cap")]
    pub search_cap: u64,
    #[serde(default = "default_materialize_cap")]
    pub materialize_cap: u64,
    /// Sampled descents run through the per-path checks.
    #[serde(default = "default_check_paths")]
    pub check_paths: usize,
}

impl ConstructionSpec {
    /// The reference configuration: `β = (2, φ)`, `ψ_j = β_j^{−α_j n}`, `α = (1, 1/2)`, `η = 1/10`.
    pub fn reference(levels: usize, samples: usize, seed: u64) -> Self {
        let exp = |alpha: &str| PsiSpec::Exponential { c: "1".into(), alpha: alpha.into() };
        ConstructionSpec {
            betas: vec!["2".into(), "golden".into()],
            psi: vec![exp("1"), exp("1/2")],
            eta: "1/10".into(),
            m: None,
            levels,
            seed,
            samples,
            s0: None,
            m_cap: default_m_cap(),
            search_cap: default_search_cap(),
            materialize_cap: default_materialize_cap(),
            check_paths: default_check_paths(),
        }
    }
}

/// Parameters shared by every square of one level.
#[derive(Clone, Debug, Serialize)]
pub struct LevelPlan {
    pub q: usize,
    /// Coordinate carrying the designated hit (0-based).
    pub h: usize,
    pub claim: ClaimSelection,
    /// Depth before this level, `N_{q−1,j}`.
    pub start: Vec<u64>,
    /// Digits added, `n_{q,j}` (for `h`: `n_{q,h} + k_{q,h}`).
    pub added: Vec<u64>,
    /// Number of R-blocks `p_{q,j}`.
    pub blocks: Vec<u64>,
    /// Padding `r_{q,j}`.
    pub pad: Vec<u64>,
    /// Depth after this level, `N_{q,j}`.
    pub depth: Vec<u64>,
    /// Blocks used so far, `Σ_{q'≤q} p_{q',j}`.
    pub total_blocks: Vec<u64>,
}

impl LevelPlan {
    pub fn n_prime(&self) -> u64 {
        self.claim.arithmetic.n_prime
    }

    pub fn k(&self) -> u64 {
        self.claim.arithmetic.k
    }

    pub fn t(&self) -> u64 {
        self.claim.arithmetic.t
    }
}

/// A planned construction: bases, ψ's, block alphabets and level tables.
#[derive(Clone, Debug)]
pub struct Construction {
    pub spec: ConstructionSpec,
    pub betas: Vec<BetaSystem>,
    pub psis: Vec<PsiFunction>,
    pub eta: BigRational,
    pub m_choice: MChoice,
    pub ells: Vec<usize>,
    pub blocks: Vec<RBlocks>,
    pub levels: Vec<LevelPlan>,
}

impl Construction {
    pub fn plan(spec: &ConstructionSpec) -> Result<Self> {
        let d = spec.betas.len();
        if d == 0 || spec.psi.len() != d {
            return Err(Error::InvalidInput(format!(
                "need one psi per base, got {} bases and {} psi",
                d,
                spec.psi.len()
            )));
        }
        let betas: Vec<BetaSystem> = spec.betas.iter().map(|s| BetaSystem::make(s)).collect::<Result<_>>()?;
        let psis: Vec<PsiFunction> =
            betas.iter().zip(&spec.psi).map(|(b, p)| PsiFunction::from_spec(b, p)).collect::<Result<_>>()?;
        if psis.iter().any(|p| p.exact_alpha().is_none()) {
            return Err(Error::InvalidInput("the construction needs parametric psi families".into()));
        }
        let eta = parse_rational(&spec.eta)?;
        let m_choice = match spec.m {
            None => choose_m(&betas, &eta, 1, spec.m_cap)?,
            Some(m) => {
                choose_m(&betas, &eta, m, m).map_err(|e| match e {
                    Error::SearchExhausted(_) => {
                        Error::InvalidInput(format!("block length {m} fails the block conditions"))
                    }
                    other => other,
                })?
            }
        };
        let m = m_choice.m;
        let ells: Vec<usize> = betas.iter().map(|b| zero_run(1, b)).collect::<Result<_>>()?;
        let blocks: Vec<RBlocks> = betas.iter().map(|b| RBlocks::new(b, m)).collect::<Result<_>>()?;
        let mut depth = vec![0u64; d];
        let mut total_blocks = vec![0u64; d];
        let mut levels = Vec::with_capacity(spec.levels);
        for q in 1..=spec.levels {
            let h = (q - 1) % d;
            let index = q.div_ceil(d) as u64;
            let claim = select_claim(&psis[h], depth[h], ells[h], m, &eta, index, spec.search_cap)?;
            let n = claim.n;
            let k = claim.arithmetic.k;
            let hit_len = n.checked_add(k).ok_or_else(|| Error::CapExceeded("depth overflow".into()))?;
            let mut added = vec![0u64; d];
            let mut nblocks = vec![0u64; d];
            let mut pad = vec![0u64; d];
            for j in 0..d {
                let len = if j == h { n } else { comparable_len(hit_len, &betas[h], &betas[j]) };
                added[j] = if j == h { hit_len } else { len };
                nblocks[j] = len / m as u64;
                pad[j] = len % m as u64;
            }
            let start = depth.clone();
            for j in 0..d {
                depth[j] = depth[j].checked_add(added[j]).ok_or_else(|| Error::CapExceeded("depth overflow".into()))?;
                total_blocks[j] += nblocks[j];
            }
            levels.push(LevelPlan {
                q,
                h,
                claim,
                start,
                added,
                blocks: nblocks,
                pad,
                depth: depth.clone(),
                total_blocks: total_blocks.clone(),
            });
        }
        Ok(Construction { spec: spec.clone(), betas, psis, eta, m_choice, ells, blocks, levels })
    }

    pub fn dim(&self) -> usize {
        self.betas.len()
    }

    pub fn m(&self) -> usize {
        self.m_choice.m
    }

    /// `(1−η)(d−1+(1−η)·min_j 1/(1+α_j))`.
    pub fn s0_formula(&self) -> f64 {
        let eta = self.eta.to_f64().unwrap();
        let min = self
            .psis
            .iter()
            .map(|p| 1.0 / (1.0 + p.exact_alpha().unwrap().to_f64().unwrap()))
            .fold(f64::INFINITY, f64::min);
        (1.0 - eta) * (self.dim() as f64 - 1.0 + (1.0 - eta) * min)
    }

    /// The Hölder threshold in force: the configured value, else the formula.
    pub fn s0(&self) -> Result<f64> {
        match &self.spec.s0 {
            Some(s) => Ok(parse_rational(s)?.to_f64().unwrap()),
            None => Ok(self.s0_formula()),
        }
    }

    /// First level whose hit ratio `n/(n+k)` reaches `(1−η)/(1+α_h)`.
    pub fn q0(&self) -> Option<usize> {
        let eta = self.eta.to_f64().unwrap();
        self.levels
            .iter()
            .find(|l| {
                let alpha = self.psis[l.h].exact_alpha().unwrap().to_f64().unwrap();
                let ratio = l.claim.n as f64 / (l.claim.n + l.k()) as f64;
                ratio >= (1.0 - eta) / (1.0 + alpha)
            })
            .map(|l| l.q)
    }

    /// `log_2 μ(J_q)` for every square of level `q` (0 for the root).
    pub fn log2_weight(&self, q: usize) -> f64 {
        if q == 0 {
            return 0.0;
        }
        let l = &self.levels[q - 1];
        -(0..self.dim()).map(|j| l.total_blocks[j] as f64 * self.blocks[j].log2_count()).sum::<f64>()
    }

    /// `log_2 |J_q|`: the longest side of a level-`q` square.
    pub fn log2_side(&self, q: usize) -> f64 {
        if q == 0 {
            return 0.0;
        }
        let l = &self.levels[q - 1];
        (0..self.dim()).map(|j| -(l.depth[j] as f64) * self.betas[j].log2()).fold(f64::NEG_INFINITY, f64::max)
    }
}

/// `⌊len·log_{β_j} β_h⌋`.
fn comparable_len(len: u64, bh: &BetaSystem, bj: &BetaSystem) -> u64 {
    (len as f64 * bh.ln() / bj.ln()).floor() as u64
}
