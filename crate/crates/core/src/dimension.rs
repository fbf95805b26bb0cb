//! Numerical dimension estimates for sampled point sets, and the theoretical value.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cantor::{Construction, SamplePath};
use crate::error::{Error, Result};

/// `min_j (d − 1 + 1/(1+α_j))`.
pub fn theoretical_dim(alphas: &[f64]) -> f64 {
    let d = alphas.len() as f64;
    alphas.iter().map(|a| d - 1.0 + 1.0 / (1.0 + a)).fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    BoxCount,
    LocalMass,
}

#[derive(Clone, Debug, Serialize)]
pub struct DimensionEstimate {
    pub method: Method,
    /// Box sides (box-count) or radii (local-mass), strictly decreasing for box-count.
    pub scales: Vec<f64>,
    /// Occupied boxes per scale, or per-sample exponents.
    pub values: Vec<f64>,
    pub estimate: f64,
    /// `estimate ± 2·stderr` for a fit; `[min, max]` of the exponents for local mass.
    pub band: (f64, f64),
    pub residuals: Vec<f64>,
    /// Indices into `scales` used by the fit.
    pub fit_range: (usize, usize),
    pub sample_size: usize,
}

impl DimensionEstimate {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("estimate serializes")
    }

    /// `r,N(r)` rows for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value\n");
        for (r, v) in self.scales.iter().zip(&self.values) {
            out.push_str(&format!("{r:e},{v}\n"));
        }
        out
    }
}

/// Least-squares line through `(x, y)`: slope, intercept, slope standard error, residuals.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64, Vec<f64>) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let res: Vec<f64> = x.iter().zip(y).map(|(a, b)| b - (icpt + slope * a)).collect();
    let sse: f64 = res.iter().map(|r| r * r).sum();
    let se = if x.len() > 2 { (sse / (n - 2.0) / sxx).sqrt() } else { f64::INFINITY };
    (slope, icpt, se, res)
}

/// Which scales enter the fit: drop `coarse` from the start and `fine` from the end.
#[derive(Clone, Copy, Debug)]
pub struct FitWindow {
    pub coarse: usize,
    pub fine: usize,
}

impl Default for FitWindow {
    fn default() -> Self {
        FitWindow { coarse: 2, fine: 1 }
    }
}

/// Slope of `log N(r)` against `log(1/r)`; `resolution` is the finest scale the
/// points resolve.
pub fn box_count(points: &[Vec<f64>], scales: &[f64], resolution: f64, window: FitWindow) -> Result<DimensionEstimate> {
    if points.len() < 1000 {
        return Err(Error::InvalidInput(format!("box counting needs at least 1000 points, got {}", points.len())));
    }
    if scales.windows(2).any(|w| w[1] >= w[0]) || scales.iter().any(|&s| s <= 0.0) {
        return Err(Error::InvalidInput("scales must be positive and strictly decreasing".into()));
    }
    if let Some(&finest) = scales.last() {
        if finest < resolution {
            return Err(Error::ResolutionExceeded(format!("scale {finest:e} is finer than the resolution {resolution:e}")));
        }
    }
    let lo = window.coarse;
    let hi = scales.len().saturating_sub(window.fine);
    if hi < lo + 4 {
        return Err(Error::InvalidInput(format!("the fit needs at least 4 scales, window leaves {}", hi.saturating_sub(lo))));
    }
    let d = points[0].len();
    let counts: Vec<f64> = scales
        .par_iter()
        .map(|&s| {
            let cells: HashSet<Vec<i64>> =
                points.iter().map(|p| p.iter().map(|v| (v / s).floor() as i64).collect()).collect();
            cells.len() as f64
        })
        .collect();
    let x: Vec<f64> = scales[lo..hi].iter().map(|s| -s.ln()).collect();
    let y: Vec<f64> = counts[lo..hi].iter().map(|c| c.ln()).collect();
    let (slope, _, se, residuals) = fit_line(&x, &y);
    let estimate = slope.clamp(0.0, d as f64);
    Ok(DimensionEstimate {
        method: Method::BoxCount,
        scales: scales.to_vec(),
        values: counts,
        estimate,
        band: (estimate - 2.0 * se, estimate + 2.0 * se),
        residuals,
        fit_range: (lo, hi),
        sample_size: points.len(),
    })
}

/// `log_2 μ(B(x,r))` against `log_2 r` for one sampled ball.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct MassSample {
    pub log2_mass: f64,
    pub log2_radius: f64,
}

/// Distribution of `log μ(B(x,r))/log r`; the estimate is its minimum.
pub fn local_mass(samples: &[MassSample]) -> Result<DimensionEstimate> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no mass samples".into()));
    }
    let values: Vec<f64> = samples.iter().map(|s| s.log2_mass / s.log2_radius).collect();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(DimensionEstimate {
        method: Method::LocalMass,
        scales: samples.iter().map(|s| s.log2_radius.exp2()).collect(),
        values,
        estimate: min,
        band: (min, max),
        residuals: vec![],
        fit_range: (0, samples.len()),
        sample_size: samples.len(),
    })
}

/// Balls `B(x, |J_n(x)|)` along sampled descents past level `q₀`. A ball meets at most
/// `⌈max_j β_j⌉^d` squares of its order, each of mass at most that of `J_n(x)`;
/// the ball mass is bounded by that count times `μ(J_n(x))`.
pub fn construction_mass_samples(c: &Construction, seed: u64, paths: usize, grid: u64) -> Result<Vec<MassSample>> {
    let s0 = c.s0()?;
    let cover = c.betas.iter().map(|b| b.to_f64().ceil()).fold(1.0, f64::max).powi(c.dim() as i32).log2();
    let rows: Vec<Vec<MassSample>> = (0..paths as u64)
        .into_par_iter()
        .map(|i| {
            let p = SamplePath::new(c, seed, i);
            let rows = crate::cantor::holder_intermediate(c, &p, s0, grid)?;
            Ok(rows.into_iter().map(|r| MassSample { log2_mass: r.log2_mu + cover, log2_radius: r.log2_side }).collect())
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// Slack folded into the local-mass comparison at radius `2^{log2_radius}`: the square
/// constant of the level's hit coordinate and the ball covering count.
pub fn mass_slack(c: &Construction, q: usize, log2_radius: f64) -> f64 {
    let cover = c.betas.iter().map(|b| b.to_f64().ceil()).fold(1.0, f64::max).powi(c.dim() as i32).log2();
    (crate::cantor::log2_constant(c, c.levels[q - 1].h) + cover) / -log2_radius
}

/// `n` uniform points in `[0,1)^d`.
pub fn uniform_points(n: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect()
}

/// Middle-thirds Cantor set (to `depth` ternary digits) times `[0,1)`.
pub fn cantor_dust(n: usize, depth: u32, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut x = 0.0;
            let mut scale = 1.0 / 3.0;
            for _ in 0..depth {
                if rng.gen::<bool>() {
                    x += 2.0 * scale;
                }
                scale /= 3.0;
            }
            vec![x, rng.gen::<f64>()]
        })
        .collect()
}

/// `base^{-from}, …, base^{-to}`.
pub fn geometric_scales(base: f64, from: i32, to: i32) -> Vec<f64> {
    (from..=to).map(|e| base.powi(-e)).collect()
}
