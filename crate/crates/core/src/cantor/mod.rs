//! Cantor-set construction inside a product of exact approximation sets.

pub mod blocks;
pub mod checks;
pub mod claim;
pub mod levels;
pub mod paths;

use serde::Serialize;

use crate::error::Result;

pub use blocks::{choose_m, r_words, MChoice, MEvidence, RBlocks};
pub use checks::{
    designated_hit, holder_intermediate, holder_levels, log2_constant, measure_additivity, no_better_approximation,
    path_structure, soundness, verify_orbit, GapReport, HitCheck, HolderRow, SoundnessReport,
};
pub use claim::{
    claim_arithmetic, claim_delta, claim_k, claim_t, select_claim, ClaimArithmetic, ClaimSelection, PsiBound,
};
pub use levels::{Construction, ConstructionSpec, LevelPlan};
pub use paths::{enumerate_children, measure_weight, sample_points, PrefixInfo, SamplePath, Weight};

/// One row of the per-level table.
#[derive(Clone, Debug, Serialize)]
pub struct LevelRow {
    pub q: usize,
    /// Hit coordinate, 1-based.
    pub h: usize,
    pub i: u64,
    /// `n_{q,j}`: digits before `σ` for the hit coordinate, the cut length otherwise.
    pub n: Vec<u64>,
    pub n_prime: u64,
    pub k: u64,
    pub t: u64,
    pub delta: String,
    pub u: String,
    pub p: Vec<u64>,
    pub r: Vec<u64>,
    pub depth: Vec<u64>,
    pub log2_children: f64,
    pub log2_mu_child: f64,
}

impl LevelRow {
    fn new(c: &Construction, l: &LevelPlan) -> Self {
        let n = (0..c.dim()).map(|j| if j == l.h { l.claim.n } else { l.added[j] }).collect();
        LevelRow {
            q: l.q,
            h: l.h + 1,
            i: l.claim.index,
            n,
            n_prime: l.n_prime(),
            k: l.k(),
            t: l.t(),
            delta: l.claim.arithmetic.delta.clone(),
            u: l.claim.arithmetic.u.to_string(),
            p: l.blocks.clone(),
            r: l.pad.clone(),
            depth: l.depth.clone(),
            log2_children: (0..c.dim()).map(|j| l.blocks[j] as f64 * c.blocks[j].log2_count()).sum(),
            log2_mu_child: c.log2_weight(l.q),
        }
    }
}

/// Everything a construction run reports, apart from the sampled points.
#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub config: ConstructionSpec,
    pub m: MChoice,
    pub s0: f64,
    pub s0_formula: f64,
    pub q0: Option<usize>,
    pub levels: Vec<LevelRow>,
    pub soundness: SoundnessReport,
    pub samples: usize,
}

/// A finished run: the plan, its manifest and the sampled left corners.
pub struct ConstructionRun {
    pub construction: Construction,
    pub manifest: Manifest,
    pub points: Vec<Vec<f64>>,
}

/// Plans the levels, runs every check and samples `spec.samples` points.
pub fn construct(spec: &ConstructionSpec) -> Result<ConstructionRun> {
    let c = Construction::plan(spec)?;
    let report = soundness(&c, spec.seed, spec.check_paths)?;
    let points = sample_points(&c, spec.seed, spec.samples)?;
    let manifest = Manifest {
        config: spec.clone(),
        m: c.m_choice.clone(),
        s0: report.s0,
        s0_formula: report.s0_formula,
        q0: report.q0,
        levels: c.levels.iter().map(|l| LevelRow::new(&c, l)).collect(),
        soundness: report,
        samples: points.len(),
    };
    Ok(ConstructionRun { construction: c, manifest, points })
}

/// Sampled points as CSV with a header `index,x1,…,xd`.
pub fn samples_csv(points: &[Vec<f64>]) -> String {
    let d = points.first().map_or(0, |p| p.len());
    let mut out = String::from("index");
    for j in 1..=d {
        out.push_str(&format!(",x{j}"));
    }
    out.push('\n');
    for (i, p) in points.iter().enumerate() {
        out.push_str(&i.to_string());
        for v in p {
            out.push_str(&format!(",{v:.17e}"));
        }
        out.push('\n');
    }
    out
}
