//! Seeded random descents through the construction, with random access to digits.

use num_bigint::BigUint;
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use super::levels::Construction;
use crate::error::{Error, Result};
use crate::numerics::QuadNum;
use crate::words::DigitWord;

/// `μ(J) = Π_j #R_{M,j}^{−exps_j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Weight {
    pub exps: Vec<u64>,
}

impl Weight {
    pub fn root(d: usize) -> Self {
        Weight { exps: vec![0; d] }
    }

    pub fn log2(&self, c: &Construction) -> f64 {
        -self.exps.iter().zip(&c.blocks).map(|(&e, r)| e as f64 * r.log2_count()).sum::<f64>()
    }

    /// Exact value; only for small exponents.
    pub fn exact(&self, c: &Construction) -> BigRational {
        let mut den = BigUint::from(1u8);
        for (&e, r) in self.exps.iter().zip(&c.blocks) {
            den *= r.count().pow(e as u32);
        }
        BigRational::new(1.into(), den.into())
    }
}

/// `μ(J_q) = Π_{q'≤q} Π_j #R_{M,j}^{−p_{q',j}}`.
pub fn measure_weight(c: &Construction, q: usize) -> Weight {
    match q {
        0 => Weight::root(c.dim()),
        _ => Weight { exps: c.levels[q - 1].total_blocks.clone() },
    }
}

/// One seeded descent to the deepest planned level.
#[derive(Clone, Debug)]
pub struct SamplePath<'a> {
    c: &'a Construction,
    seed: u64,
    index: u64,
}

/// What is known about the first `n` digits of one coordinate of a path.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixInfo {
    /// Complete R-blocks inside the prefix.
    pub complete_blocks: u64,
    /// `log_2` of the fraction of R-words extending the partially read block (0 if none).
    pub log2_partial: f64,
    /// Automaton state after the prefix.
    pub state: usize,
}

impl<'a> SamplePath<'a> {
    pub fn new(c: &'a Construction, seed: u64, index: u64) -> Self {
        SamplePath { c, seed, index }
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    fn block_rng(&self, q: usize, j: usize, b: u64) -> ChaCha8Rng {
        let mut h = Sha256::new();
        for v in [self.seed, self.index, q as u64, j as u64, b] {
            h.update(v.to_le_bytes());
        }
        ChaCha8Rng::from_seed(h.finalize().into())
    }

    /// The `b`-th R-block of coordinate `j` at level `q`.
    pub fn block(&self, q: usize, j: usize, b: u64) -> Vec<u32> {
        debug_assert!(b < self.c.levels[q - 1].blocks[j]);
        self.c.blocks[j].sample(&mut self.block_rng(q, j, b))
    }

    /// Level containing digit position `pos` (0-based) of coordinate `j`.
    fn level_of(&self, j: usize, pos: u64) -> Result<usize> {
        let l = self.c.levels.partition_point(|l| l.depth[j] <= pos);
        if l == self.c.levels.len() {
            return Err(Error::ResolutionExceeded(format!("digit {pos} lies below the deepest level")));
        }
        Ok(l + 1)
    }

    /// Digit at position `pos` (0-based) of coordinate `j`.
    pub fn digit(&self, j: usize, pos: u64) -> Result<u32> {
        let q = self.level_of(j, pos)?;
        let l = &self.c.levels[q - 1];
        let m = self.c.m() as u64;
        let off = pos - l.start[j];
        if off < l.blocks[j] * m {
            return Ok(self.block(q, j, off / m)[(off % m) as usize]);
        }
        if j != l.h {
            return Ok(0);
        }
        let rem = off - l.blocks[j] * m;
        let r = l.pad[j];
        Ok(if rem + 1 < r {
            0
        } else if rem + 1 == r {
            1
        } else {
            let s = rem - r;
            let t = l.t();
            if s < t { 0 } else { l.claim.arithmetic.u.digits()[(s - t) as usize] }
        })
    }

    /// The first `len` digits of coordinate `j`.
    pub fn prefix(&self, j: usize, len: u64) -> Result<DigitWord> {
        let mut out = Vec::with_capacity(len as usize);
        let m = self.c.m() as u64;
        let mut pos = 0;
        while pos < len {
            let q = self.level_of(j, pos)?;
            let l = &self.c.levels[q - 1];
            let off = pos - l.start[j];
            if off < l.blocks[j] * m && off % m == 0 && pos + m <= len {
                out.extend(self.block(q, j, off / m));
                pos += m;
            } else {
                out.push(self.digit(j, pos)?);
                pos += 1;
            }
        }
        Ok(DigitWord::new(out))
    }

    /// Left corner of the deepest square, from enough leading digits for `f64`.
    pub fn point(&self) -> Result<Vec<f64>> {
        (0..self.c.dim())
            .map(|j| {
                let b = &self.c.betas[j];
                let want = (64.0 / b.log2()).ceil() as u64;
                let depth = self.c.levels.last().map_or(0, |l| l.depth[j]);
                let digits = self.prefix(j, want.min(depth))?;
                let bf = b.to_f64();
                Ok(digits.digits().iter().rev().fold(0.0, |acc, &d| (acc + d as f64) / bf))
            })
            .collect()
    }

    /// Exact left corner of coordinate `j` truncated after level `q`.
    pub fn exact_corner(&self, j: usize, q: usize) -> Result<QuadNum> {
        let len = self.c.levels[q - 1].depth[j];
        Ok(crate::numerics::eval_word(&self.prefix(j, len)?, &self.c.betas[j]))
    }

    /// Block count, partial-block fraction and automaton state after `n` digits.
    pub fn prefix_info(&self, j: usize, n: u64) -> Result<PrefixInfo> {
        if n == 0 {
            return Ok(PrefixInfo { complete_blocks: 0, log2_partial: 0.0, state: 0 });
        }
        let q = self.level_of(j, n - 1)?;
        let l = &self.c.levels[q - 1];
        let r_blocks = &self.c.blocks[j];
        let aut = r_blocks.automaton();
        let m = self.c.m() as u64;
        let before = l.total_blocks[j] - l.blocks[j];
        let off = n - l.start[j];
        if off <= l.blocks[j] * m {
            let v = off % m;
            let complete = before + off / m;
            if v == 0 {
                return Ok(PrefixInfo { complete_blocks: complete, log2_partial: 0.0, state: 0 });
            }
            let block = self.block(q, j, off / m);
            let part = &block[..v as usize];
            let state = aut.run(part).ok_or_else(|| Error::Invariant("sampled block not admissible".into()))?;
            let frac = QuadNum::from_ratio(
                num_bigint::BigInt::from(r_blocks.count_with_prefix(part)),
                num_bigint::BigInt::from(r_blocks.count().clone()),
            );
            return Ok(PrefixInfo { complete_blocks: complete, log2_partial: frac.log2(), state });
        }
        let complete = l.total_blocks[j];
        let rem = off - l.blocks[j] * m;
        let r = l.pad[j];
        if j != l.h || rem < r {
            return Ok(PrefixInfo { complete_blocks: complete, log2_partial: 0.0, state: 0 });
        }
        let mut state = aut.step(0, 1).ok_or_else(|| Error::Invariant("digit 1 not allowed".into()))?;
        let read = rem - r;
        let t = l.t();
        let zeros = read.min(t);
        let mut z = 0;
        while z < zeros && state != 0 {
            state = aut.step(state, 0).ok_or_else(|| Error::Invariant("zero not allowed".into()))?;
            z += 1;
        }
        if read > t {
            let u = &l.claim.arithmetic.u.digits()[..(read - t) as usize];
            for &d in u {
                state = aut.step(state, d).ok_or_else(|| Error::Invariant("sigma not admissible".into()))?;
            }
        }
        Ok(PrefixInfo { complete_blocks: complete, log2_partial: 0.0, state })
    }
}

/// `count` seeded descents; the result depends only on `(seed, count)`.
pub fn sample_points(c: &Construction, seed: u64, count: usize) -> Result<Vec<Vec<f64>>> {
    use rayon::prelude::*;
    (0..count as u64).into_par_iter().map(|i| SamplePath::new(c, seed, i).point()).collect()
}

/// All children of one parent at level `q` as per-coordinate extension words.
pub fn enumerate_children(c: &Construction, q: usize, cap: u64) -> Result<Vec<Vec<DigitWord>>> {
    let l = &c.levels[q - 1];
    let log2_children: f64 = (0..c.dim()).map(|j| l.blocks[j] as f64 * c.blocks[j].log2_count()).sum();
    if log2_children > (cap as f64).log2() {
        return Err(Error::ChildExplosion(format!(
            "level {q} has 2^{log2_children:.1} children per parent, cap {cap}; use sampling"
        )));
    }
    let mut per_coord: Vec<Vec<DigitWord>> = Vec::with_capacity(c.dim());
    for j in 0..c.dim() {
        let words = c.blocks[j].enumerate(cap)?;
        let mut exts = vec![DigitWord::empty()];
        for _ in 0..l.blocks[j] {
            exts = exts.iter().flat_map(|e| words.iter().map(move |w| e.concat(w))).collect();
        }
        let tail = if j == l.h {
            let mut v = vec![0; l.pad[j] as usize - 1];
            v.push(1);
            DigitWord::new(v).concat(&l.claim.arithmetic.sigma())
        } else {
            DigitWord::zeros(l.pad[j] as usize)
        };
        per_coord.push(exts.into_iter().map(|e| e.concat(&tail)).collect());
        debug_assert!(per_coord[j].iter().all(|w| w.len() as u64 == l.added[j]));
    }
    let mut children: Vec<Vec<DigitWord>> = vec![vec![]];
    for coord in per_coord {
        children = children
            .into_iter()
            .flat_map(|ch| {
                coord.iter().map(move |w| {
                    let mut next = ch.clone();
                    next.push(w.clone());
                    next
                })
            })
            .collect();
    }
    Ok(children)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximation::approx_error;
    use crate::cantor::levels::ConstructionSpec;
    use num_traits::One;

    fn reference(levels: usize) -> Construction {
        Construction::plan(&ConstructionSpec::reference(levels, 0, 7)).unwrap()
    }

    /// One golden coordinate with a large η keeps the alphabet small enough to enumerate.
    pub(crate) fn toy() -> Construction {
        let mut s = ConstructionSpec::reference(2, 0, 7);
        s.betas = vec!["golden".into()];
        s.psi.truncate(1);
        s.eta = "9/10".into();
        Construction::plan(&s).unwrap()
    }

    #[test]
    fn digits_follow_the_level_layout() {
        let c = reference(2);
        let path = SamplePath::new(&c, 7, 3);
        let l = &c.levels[0];
        let w = path.prefix(0, l.depth[0]).unwrap();
        let mut want = path.block(1, 0, 0);
        want.extend(path.block(1, 0, 1));
        want.push(1);
        want.extend(l.claim.arithmetic.sigma().digits());
        assert_eq!(w.digits(), &want[..]);
        for pos in [0u64, 130, 131, 262, 263, 400, 535, 536, 8000] {
            let full = path.prefix(0, pos + 1).unwrap();
            assert_eq!(path.digit(0, pos).unwrap(), full.digits()[pos as usize], "pos {pos}");
        }
        assert!(matches!(path.digit(0, c.levels[1].depth[0]), Err(Error::ResolutionExceeded(_))));
    }

    #[test]
    fn first_level_point_hits_at_n_prime() {
        let c = reference(1);
        let l = &c.levels[0];
        let x = SamplePath::new(&c, 7, 0).exact_corner(0, 1).unwrap();
        let n = l.n_prime();
        let e = approx_error(&x, &c.betas[0], n as usize).unwrap();
        let delta = &l.claim.arithmetic.delta_exact;
        let psi = &c.psis[0];
        assert!(psi.cmp_with(&e.scaled, n, 0, &(BigRational::one() - delta)).unwrap().is_gt());
        assert!(psi.cmp_with(&e.scaled, n, 0, &BigRational::one()).unwrap().is_lt());
    }

    #[test]
    fn prefix_info_matches_materialized_prefix() {
        let c = reference(2);
        let path = SamplePath::new(&c, 7, 11);
        for j in 0..2 {
            let depth = c.levels[1].depth[j];
            let word = path.prefix(j, depth).unwrap();
            let aut = c.blocks[j].automaton();
            for n in (0..depth).step_by(97).chain([1, 131, 262, 263, 264, 300, 536, 537, depth]) {
                let info = path.prefix_info(j, n).unwrap();
                assert_eq!(Some(info.state), aut.run(&word.digits()[..n as usize]), "j={j} n={n}");
            }
            let end = path.prefix_info(j, depth).unwrap();
            assert_eq!((end.complete_blocks, end.state), (c.levels[1].total_blocks[j], 0));
        }
        let mid = path.prefix_info(0, 140).unwrap();
        assert_eq!(mid.complete_blocks, 1);
        assert!(mid.log2_partial < 0.0);
    }

    #[test]
    fn sampling_is_deterministic_across_thread_counts() {
        let c = reference(3);
        let a = sample_points(&c, 5, 64).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| sample_points(&c, 5, 64).unwrap());
        assert_eq!(a, b);
        assert!(sample_points(&c, 5, 0).unwrap().is_empty());
        assert_ne!(a, sample_points(&c, 6, 64).unwrap());
        for p in &a {
            assert!((0.5..1.0).contains(&p[0]));
        }
    }

    #[test]
    fn weights() {
        let c = reference(1);
        assert_eq!(measure_weight(&c, 0), Weight::root(2));
        assert_eq!(measure_weight(&c, 0).exact(&c), BigRational::one());
        let w = measure_weight(&c, 1);
        assert_eq!(w.exps, vec![2, 5]);
        let want = BigRational::new(1.into(), (c.blocks[0].count().pow(2) * c.blocks[1].count().pow(5)).into());
        assert_eq!(w.exact(&c), want);
    }

    #[test]
    fn toy_children_sum_to_parent() {
        let c = toy();
        assert!(matches!(enumerate_children(&c, 2, 1_000_000), Err(Error::ChildExplosion(_))));
        {
            let q = 1;
            let kids = enumerate_children(&c, q, 1_000_000).unwrap();
            assert_eq!(kids.len(), 169);
            let parent = measure_weight(&c, q - 1).exact(&c);
            // each child's weight counts the R-blocks actually present in its words
            let total: BigRational = kids
                .iter()
                .map(|ch| {
                    let mut w = parent.clone();
                    for (j, word) in ch.iter().enumerate() {
                        let m = c.m();
                        let nb = c.levels[q - 1].blocks[j] as usize;
                        for b in 0..nb {
                            let blk = &word.digits()[b * m..(b + 1) * m];
                            assert_ne!(blk[0], 0);
                            w /= BigRational::from_integer(c.blocks[j].count().clone().into());
                        }
                    }
                    w
                })
                .sum();
            assert_eq!(total, parent, "level {q}");
            let mut uniq = kids.clone();
            uniq.sort_by_key(|ch| ch.iter().map(|w| w.to_string()).collect::<Vec<_>>());
            uniq.dedup();
            assert_eq!(uniq.len(), kids.len());
        }
        assert!(matches!(enumerate_children(&reference(1), 1, 1_000_000), Err(Error::ChildExplosion(_))));
    }
}
