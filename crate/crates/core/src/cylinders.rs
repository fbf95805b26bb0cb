//! Order-n cylinders: endpoints, lengths, fullness and where to find full ones.

use std::cmp::Ordering;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numerics::{eval_digits, BetaSystem, QuadNum};
use crate::words::{enumerate_admissible, is_admissible, Automaton, DigitWord};

/// `I_n(w) = [left, left + length)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderInterval {
    pub word: DigitWord,
    pub left: QuadNum,
    pub length: QuadNum,
    pub is_full: bool,
}

impl CylinderInterval {
    pub fn right(&self) -> QuadNum {
        &self.left + &self.length
    }

    pub fn order(&self) -> usize {
        self.word.len()
    }
}

/// Longest suffix of `w` that is also a prefix of the greedy `ε(1,β)`.
pub fn greedy_suffix_match(w: &[u32], b: &BetaSystem) -> usize {
    let e = b.one_digits(w.len());
    (1..=w.len()).rev().find(|&k| w[w.len() - k..] == e[..k]).unwrap_or(0)
}

/// `|I_n(w)| = β^{-n}·T_β^k(1)` where `k` is the automaton state after reading `w`.
pub fn cylinder(w: &DigitWord, b: &BetaSystem) -> Result<CylinderInterval> {
    let aut = Automaton::new(b, w.len());
    let state = aut
        .run(w.digits())
        .ok_or_else(|| Error::NotAdmissible(format!("{w} is not admissible")))?;
    Ok(cylinder_from_state(w, state, b))
}

pub(crate) fn cylinder_from_state(w: &DigitWord, state: usize, b: &BetaSystem) -> CylinderInterval {
    let length = b.inv_pow(w.len()) * b.one_orbit(state);
    CylinderInterval {
        word: w.clone(),
        left: eval_digits(w.digits(), b),
        length,
        is_full: state == 0,
    }
}

/// Fullness by the exact-length definition.
pub fn is_full(w: &DigitWord, b: &BetaSystem) -> Result<bool> {
    let c = cylinder(w, b)?;
    Ok(c.length == b.inv_pow(w.len()))
}

/// Fullness by the suffix test: no suffix of `w` is a prefix of `ε(1,β)`.
pub fn is_full_by_suffix(w: &[u32], b: &BetaSystem) -> bool {
    greedy_suffix_match(w, b) == 0
}

/// Every order-n cylinder, lengths taken as gaps between consecutive left endpoints.
pub fn partition_cylinders(n: usize, b: &BetaSystem, cap: u64) -> Result<Vec<CylinderInterval>> {
    let words: Vec<DigitWord> = enumerate_admissible(n, b, cap)?.collect();
    let lefts: Vec<QuadNum> = words.iter().map(|w| eval_digits(w.digits(), b)).collect();
    let full_len = b.inv_pow(n);
    Ok(words
        .into_iter()
        .enumerate()
        .map(|(i, word)| {
            let right = lefts.get(i + 1).cloned().unwrap_or_else(QuadNum::one);
            let length = &right - &lefts[i];
            let is_full = length == full_len;
            CylinderInterval { word, left: lefts[i].clone(), length, is_full }
        })
        .collect())
}

/// Census of fullness among order-n cylinders.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Census {
    pub beta: String,
    pub n: usize,
    pub count_admissible: u64,
    pub count_full: u64,
    pub max_gap: u64,
}

impl Census {
    pub const CSV_HEADER: &'static str = "beta,n,count_admissible,count_full,max_gap";

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{},{}", self.beta, self.n, self.count_admissible, self.count_full, self.max_gap)
    }
}

/// Counts full cylinders and the longest run of consecutive non-full ones.
pub fn full_census(n: usize, b: &BetaSystem, cap: u64) -> Result<Census> {
    let aut = Automaton::new(b, n);
    let mut census = Census { beta: b.label().to_string(), n, count_admissible: 0, count_full: 0, max_gap: 0 };
    let mut run = 0;
    for w in enumerate_admissible(n, b, cap)? {
        census.count_admissible += 1;
        if aut.run(w.digits()) == Some(0) {
            census.count_full += 1;
            run = 0;
        } else {
            run += 1;
            census.max_gap = census.max_gap.max(run);
        }
    }
    if census.max_gap > n as u64 {
        return Err(Error::Invariant(format!(
            "{} consecutive non-full cylinders of order {n}",
            census.max_gap
        )));
    }
    Ok(census)
}

/// One side of an interval, possibly known only through comparisons.
pub trait Bound {
    /// Where `v` sits relative to the bound.
    fn locate(&self, v: &QuadNum) -> Ordering;
}

impl Bound for QuadNum {
    fn locate(&self, v: &QuadNum) -> Ordering {
        v.cmp(self)
    }
}

/// How a cylinder has to sit inside `J = (lo, hi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Containment {
    /// `[left, right) ⊆ [lo, hi)`.
    HalfOpen,
    /// `[left, right] ⊆ (lo, hi)`.
    ClosureInOpen,
}

fn inside(c_left: &QuadNum, c_right: &QuadNum, lo: &dyn Bound, hi: &dyn Bound, mode: Containment) -> bool {
    match mode {
        Containment::HalfOpen => lo.locate(c_left).is_ge() && hi.locate(c_right).is_le(),
        Containment::ClosureInOpen => lo.locate(c_left).is_gt() && hi.locate(c_right).is_lt(),
    }
}

/// Leftmost full order-n cylinder inside `J`, searched depth first over cylinders meeting `J`.
pub fn find_full_between(
    lo: &dyn Bound,
    hi: &dyn Bound,
    n: usize,
    b: &BetaSystem,
    mode: Containment,
) -> Option<CylinderInterval> {
    let aut = Automaton::new(b, n);
    let inv = b.inverse().clone();
    let mut digits = Vec::with_capacity(n);
    // (left endpoint, scale β^{-depth}) along the current path
    let mut found = None;
    search(&aut, b, &inv, lo, hi, mode, n, &mut digits, 0, QuadNum::zero(), QuadNum::one(), &mut found);
    found
}

#[allow(clippy::too_many_arguments)]
fn search(
    aut: &Automaton,
    b: &BetaSystem,
    inv: &QuadNum,
    lo: &dyn Bound,
    hi: &dyn Bound,
    mode: Containment,
    n: usize,
    digits: &mut Vec<u32>,
    state: usize,
    left: QuadNum,
    scale: QuadNum,
    found: &mut Option<CylinderInterval>,
) -> bool {
    let right = &left + &(&scale * &b.one_orbit(state));
    // the subtree is disjoint from J, or lies entirely to the right of it
    if lo.locate(&right).is_le() {
        return false;
    }
    if hi.locate(&left).is_ge() {
        return true;
    }
    if digits.len() == n {
        if state == 0 && inside(&left, &right, lo, hi, mode) {
            *found = Some(CylinderInterval {
                word: DigitWord::new(digits.clone()),
                left,
                length: scale,
                is_full: true,
            });
            return true;
        }
        return false;
    }
    let child_scale = &scale * inv;
    for d in 0..=aut.max_digit(state) {
        let next = aut.step(state, d).expect("digit within the allowed range");
        let child_left = &left + &(&child_scale * &QuadNum::from_int(d));
        digits.push(d);
        let stop = search(aut, b, inv, lo, hi, mode, n, digits, next, child_left, child_scale.clone(), found);
        digits.pop();
        if stop {
            return true;
        }
    }
    false
}

/// Leftmost full order-n cylinder `[left, right) ⊆ [lo, hi)`, given `(n+1)β^{-n} < hi − lo`.
pub fn find_full_in_interval(lo: &QuadNum, hi: &QuadNum, n: usize, b: &BetaSystem) -> Result<DigitWord> {
    let width = hi - lo;
    let need = b.inv_pow(n).mul_int(n as i64 + 1);
    if lo.is_negative() || *hi > QuadNum::one() || need >= width {
        return Err(Error::PreconditionViolated(format!(
            "interval [{lo}, {hi}) too short for order {n}: need width above {:.6}",
            need.to_f64()
        )));
    }
    find_full_between(lo, hi, n, b, Containment::HalfOpen)
        .map(|c| c.word)
        .ok_or_else(|| Error::Invariant(format!("no full cylinder of order {n} in [{lo}, {hi})")))
}

/// Whether a word is admissible and its cylinder full, through both routes.
pub fn fullness_routes_agree(w: &DigitWord, b: &BetaSystem) -> Result<bool> {
    if !is_admissible(w.digits(), b) {
        return Err(Error::NotAdmissible(w.to_string()));
    }
    Ok(is_full(w, b)? == is_full_by_suffix(w.digits(), b))
}
