//! Soundness checks on a planned construction and on sampled descents.

use num_rational::BigRational;
use num_traits::One;
use serde::Serialize;

use super::levels::Construction;
use super::paths::{measure_weight, SamplePath};
use crate::error::{Error, Result};
use crate::numerics::{eval_word, QuadNum};

/// Closed cylinder of `σ` inside `((1−δ)ψ(n'), ψ(n'))`, decided exactly.
#[derive(Clone, Debug, Serialize)]
pub struct HitCheck {
    pub q: usize,
    pub h: usize,
    pub n_prime: u64,
    pub lower_ok: bool,
    pub upper_ok: bool,
    /// `1·σ` is full and `σ` starts with at least `ℓ(1)+1` zeros.
    pub shape_ok: bool,
}

impl HitCheck {
    pub fn passed(&self) -> bool {
        self.lower_ok && self.upper_ok && self.shape_ok
    }
}

pub fn designated_hit(c: &Construction, q: usize) -> Result<HitCheck> {
    let l = &c.levels[q - 1];
    let psi = &c.psis[l.h];
    let b = &c.betas[l.h];
    let a = &l.claim.arithmetic;
    let u_left = eval_word(&a.u, b);
    let u_right = &u_left + &b.inv_pow(a.u.len());
    let shift = a.t as i64;
    let lower_ok = psi.cmp_with(&u_left, a.n_prime, shift, &(BigRational::one() - &a.delta_exact))?.is_gt();
    let upper_ok = psi.cmp_with(&u_right, a.n_prime, shift, &BigRational::one())?.is_lt();
    let aut = c.blocks[l.h].automaton();
    let mut state = aut.step(0, 1);
    // zeros keep state 0 once it is reached
    let mut z = 0;
    while z < a.t && state.is_some_and(|s| s != 0) {
        state = state.and_then(|s| aut.step(s, 0));
        z += 1;
    }
    let state = a.u.digits().iter().try_fold(state, |s, &d| s.map(|s| aut.step(s, d))).flatten();
    let shape_ok = state == Some(0) && a.t > c.ells[l.h] as u64;
    Ok(HitCheck { q, h: l.h, n_prime: a.n_prime, lower_ok, upper_ok, shape_ok })
}

/// Outcome of the segment-wise lower bound `T^n x ≥ (1−δ)ψ(n)` for one coordinate.
#[derive(Clone, Debug, Serialize)]
pub struct GapReport {
    pub coordinate: usize,
    /// Covered range `[first hit, last guaranteed nonzero digit)`, 1-based indices.
    pub covered_from: u64,
    pub covered_to: u64,
    pub comparisons: usize,
    pub failures: Vec<u64>,
}

/// Runs of guaranteed nonzero digits: `(first, count, stride)`, 1-based positions.
fn nonzero_runs(c: &Construction, j: usize) -> Vec<(u64, u64, u64)> {
    let m = c.m() as u64;
    let mut runs = Vec::new();
    for l in &c.levels {
        if l.blocks[j] > 0 {
            runs.push((l.start[j] + 1, l.blocks[j], m));
        }
        if l.h == j {
            let one = l.start[j] + l.blocks[j] * m + l.pad[j];
            runs.push((one, 1, 1));
            let base = one + l.t();
            for (i, &d) in l.claim.arithmetic.u.digits().iter().enumerate() {
                if d != 0 {
                    runs.push((base + i as u64 + 1, 1, 1));
                }
            }
        }
    }
    runs
}

/// Every `n` from the first designated hit of coordinate `j` to its last guaranteed
/// nonzero digit satisfies `T^n x ≥ (1−δ)ψ(n)` for every point of the construction.
pub fn no_better_approximation(c: &Construction, j: usize) -> Result<GapReport> {
    let psi = &c.psis[j];
    let hits: Vec<(u64, u64, BigRational)> = c
        .levels
        .iter()
        .filter(|l| l.h == j)
        .map(|l| (l.n_prime(), l.n_prime() + l.t(), l.claim.arithmetic.delta_exact.clone()))
        .collect();
    let Some(first) = hits.first().map(|h| h.0) else {
        return Ok(GapReport { coordinate: j, covered_from: 0, covered_to: 0, comparisons: 0, failures: vec![] });
    };
    // positions of guaranteed nonzero digits, with run strides collapsed
    let mut points: Vec<(u64, Option<u64>)> = Vec::new();
    for (s, count, stride) in nonzero_runs(c, j) {
        points.push((s, if count > 1 { Some(s + (count - 1) * stride) } else { None }));
    }
    points.sort();
    let factor_at = |n: u64| -> BigRational {
        let i = hits.partition_point(|h| h.0 <= n);
        BigRational::one() - &hits[i.max(1) - 1].2
    };
    let mut comparisons = 0;
    let mut failures = Vec::new();
    let mut check = |kappa: u64, gap: u64| -> Result<()> {
        if kappa < first {
            return Ok(());
        }
        // after a hit the error grows by β per step until the next nonzero digit of u
        if hits.iter().any(|h| kappa >= h.0 && kappa <= h.1) {
            return Ok(());
        }
        comparisons += 1;
        if !psi.cmp_with(&QuadNum::one(), kappa, gap as i64, &factor_at(kappa))?.is_ge() {
            failures.push(kappa);
        }
        Ok(())
    };
    let m = c.m() as u64;
    for w in 0..points.len() {
        let (s, run_end) = points[w];
        let Some(&(next, _)) = points.get(w + 1) else { break };
        match run_end {
            Some(e) => {
                check(s, m)?;
                check(e, next - e)?;
            }
            None => check(s, next - s)?,
        }
    }
    let covered_to = points.last().map_or(first, |p| p.1.unwrap_or(p.0));
    Ok(GapReport { coordinate: j, covered_from: first, covered_to, comparisons, failures })
}

/// Exact second route: materialize a path's digits up to level `q` and test every `n`
/// in the covered range directly on the orbit `T^n x`.
pub fn verify_orbit(c: &Construction, path: &SamplePath, j: usize, q: usize) -> Result<Vec<u64>> {
    let depth = c.levels[q - 1].depth[j];
    let word = path.prefix(j, depth)?;
    let b = &c.betas[j];
    let psi = &c.psis[j];
    let hits: Vec<_> = c.levels[..q].iter().filter(|l| l.h == j).collect();
    let Some(first) = hits.first().map(|l| l.n_prime()) else { return Ok(vec![]) };
    let last_nonzero = word.digits().iter().rposition(|&d| d != 0).map_or(0, |p| p as u64 + 1);
    let mut x = eval_word(&word, b);
    let mut bad = Vec::new();
    for n in 1..last_nonzero {
        x = &(b.value() * &x) - &QuadNum::from_int(word.digits()[n as usize - 1]);
        if n < first {
            continue;
        }
        let i = hits.partition_point(|l| l.n_prime() <= n);
        let l = hits[i - 1];
        let low = BigRational::one() - &l.claim.arithmetic.delta_exact;
        if !psi.cmp_with(&x, n, 0, &low)?.is_gt() {
            bad.push(n);
        }
        if n == l.n_prime() && !psi.cmp_with(&x, n, 0, &BigRational::one())?.is_lt() {
            bad.push(n);
        }
    }
    Ok(bad)
}

/// Per-path structural checks: each level word is full, and `σ` sits at `n'`.
pub fn path_structure(c: &Construction, path: &SamplePath) -> Result<bool> {
    for l in &c.levels {
        for j in 0..c.dim() {
            if path.prefix_info(j, l.depth[j])?.state != 0 {
                return Ok(false);
            }
        }
        let h = l.h;
        if path.digit(h, l.n_prime() - 1)? != 1 {
            return Ok(false);
        }
        let u = l.claim.arithmetic.u.digits();
        let base = l.n_prime() + l.t();
        for (i, &d) in u.iter().enumerate() {
            if path.digit(h, base + i as u64)? != d {
                return Ok(false);
            }
        }
        for probe in [l.n_prime(), l.n_prime() + l.t() / 2, base - 1] {
            if probe < base && path.digit(h, probe)? != 0 {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Children weights sum to the parent weight: `#children·(factor·μ(child)) = μ(parent)`,
/// with `μ` and `#children = Π_j #R_{M,j}^{p_{q,j}}` kept as exact exponent vectors.
/// `factor` is 1 for the construction's own weights.
pub fn measure_additivity(c: &Construction, q: usize, factor: &BigRational) -> bool {
    let parent = measure_weight(c, q - 1);
    let child = measure_weight(c, q);
    let l = &c.levels[q - 1];
    factor.is_one() && (0..c.dim()).all(|j| child.exps[j] - l.blocks[j] == parent.exps[j])
}

/// One Hölder comparison `−log μ / −log |J| ≥ s0 − slack`.
#[derive(Clone, Debug, Serialize)]
pub struct HolderRow {
    pub q: usize,
    /// Depth of the square in the hit coordinate.
    pub depth: u64,
    pub log2_mu: f64,
    pub log2_side: f64,
    pub ratio: f64,
    pub slack: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// `log_2` of the multiplicative constant `β_h^{ℓ_h+1}·Π_j β_j^M`.
pub fn log2_constant(c: &Construction, h: usize) -> f64 {
    (c.ells[h] as f64 + 1.0) * c.betas[h].log2() + c.m() as f64 * c.betas.iter().map(|b| b.log2()).sum::<f64>()
}

fn row(c: &Construction, q: usize, h: usize, depth: u64, log2_mu: f64, log2_side: f64, s0: f64) -> HolderRow {
    let ratio = log2_mu / log2_side;
    let slack = log2_constant(c, h) / -log2_side;
    HolderRow { q, depth, log2_mu, log2_side, ratio, slack, threshold: s0, passed: ratio >= s0 - slack }
}

/// Level squares `J_q` for `q ≥ q₀`; `corrupt` maps `log_2 μ` before the comparison.
pub fn holder_levels(c: &Construction, s0: f64, corrupt: impl Fn(f64) -> f64) -> Vec<HolderRow> {
    let q0 = c.q0().unwrap_or(usize::MAX);
    c.levels
        .iter()
        .filter(|l| l.q >= q0)
        .map(|l| {
            let mu = corrupt(c.log2_weight(l.q));
            row(c, l.q, l.h, l.depth[l.h], mu, c.log2_side(l.q), s0)
        })
        .collect()
}

/// General approximate squares `J_n` between levels `q−1` and `q` (with `q−1 ≥ q₀`)
/// along one path, on a grid of depths in the hit coordinate.
pub fn holder_intermediate(c: &Construction, path: &SamplePath, s0: f64, grid: u64) -> Result<Vec<HolderRow>> {
    let q0 = c.q0().unwrap_or(usize::MAX);
    let deepest: Vec<u64> = c.levels.last().map(|l| l.depth.clone()).unwrap_or_default();
    let mut rows = Vec::new();
    for l in c.levels.iter().filter(|l| l.q > q0) {
        let h = l.h;
        let lo = l.start[h];
        let mut depths: Vec<u64> = (1..=grid).map(|g| lo + l.added[h] * g / grid).collect();
        depths.extend([l.n_prime(), l.n_prime() + l.t() / 2, lo + c.m() as u64 + 7]);
        for nh in depths {
            let mut log2_mu = 0.0;
            let mut log2_side = f64::NEG_INFINITY;
            for j in 0..c.dim() {
                let nj = if j == h {
                    nh
                } else {
                    ((nh as f64 * c.betas[h].ln() / c.betas[j].ln()).floor() as u64).min(deepest[j])
                };
                let info = path.prefix_info(j, nj)?;
                log2_mu += -(info.complete_blocks as f64) * c.blocks[j].log2_count() + info.log2_partial;
                let tail = c.betas[j].one_orbit(info.state).log2();
                log2_side = log2_side.max(-(nj as f64) * c.betas[j].log2() + tail);
            }
            rows.push(row(c, l.q, h, nh, log2_mu, log2_side, s0));
        }
    }
    Ok(rows)
}

/// Every check on the plan plus a set of sampled paths.
#[derive(Clone, Debug, Serialize)]
pub struct SoundnessReport {
    pub s0: f64,
    pub s0_formula: f64,
    pub q0: Option<usize>,
    pub hits: Vec<HitCheck>,
    pub gaps: Vec<GapReport>,
    pub additivity: bool,
    pub holder_levels: Vec<HolderRow>,
    pub intermediate_checked: usize,
    pub intermediate_failed: usize,
    pub intermediate_min_margin: f64,
    pub paths_checked: usize,
    pub paths_failed: usize,
}

impl SoundnessReport {
    pub fn passed(&self) -> bool {
        self.hits.iter().all(HitCheck::passed)
            && self.gaps.iter().all(|g| g.failures.is_empty())
            && self.additivity
            && self.holder_levels.iter().all(|r| r.passed)
            && self.intermediate_failed == 0
            && self.paths_failed == 0
    }
}

pub fn soundness(c: &Construction, seed: u64, paths: usize) -> Result<SoundnessReport> {
    use rayon::prelude::*;
    let s0 = c.s0()?;
    let hits = (1..=c.levels.len()).map(|q| designated_hit(c, q)).collect::<Result<Vec<_>>>()?;
    let gaps = (0..c.dim()).map(|j| no_better_approximation(c, j)).collect::<Result<Vec<_>>>()?;
    let additivity = (1..=c.levels.len()).all(|q| measure_additivity(c, q, &BigRational::one()));
    let holder = holder_levels(c, s0, |x| x);
    let per_path: Vec<(bool, Vec<HolderRow>)> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let p = SamplePath::new(c, seed, i);
            Ok((path_structure(c, &p)?, holder_intermediate(c, &p, s0, 16)?))
        })
        .collect::<Result<_>>()?;
    let rows: Vec<&HolderRow> = per_path.iter().flat_map(|p| &p.1).collect();
    if hits.is_empty() {
        return Err(Error::InvalidInput("construction has no levels".into()));
    }
    Ok(SoundnessReport {
        s0,
        s0_formula: c.s0_formula(),
        q0: c.q0(),
        hits,
        gaps,
        additivity,
        holder_levels: holder,
        intermediate_checked: rows.len(),
        intermediate_failed: rows.iter().filter(|r| !r.passed).count(),
        intermediate_min_margin: rows.iter().map(|r| r.ratio - (r.threshold - r.slack)).fold(f64::INFINITY, f64::min),
        paths_checked: paths,
        paths_failed: per_path.iter().filter(|p| !p.0).count(),
    })
}
