//! Batch front-end: the `expand`, `census`, `construct` and `dim` commands.
//!
//! Every artifact starts with the toolkit version and a SHA-256 hash of the
//! canonicalized configuration that produced it.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::approximation::approx_error;
use crate::cantor::{construct, samples_csv, ConstructionSpec, Manifest};
use crate::cylinders::{full_census, Census};
use crate::dimension::{box_count, geometric_scales, FitWindow};
use crate::error::{Error, Result};
use crate::numerics::{eval_word, expand, parse_rational, BetaSystem, QuadNum};
use crate::words::{count_admissible, DEFAULT_WORD_CAP};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Where `construct` writes its artifacts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_manifest")]
    pub manifest: String,
    #[serde(default = "default_samples")]
    pub samples: String,
}

fn default_manifest() -> String {
    "manifest.json".into()
}

fn default_samples() -> String {
    "samples.csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { manifest: default_manifest(), samples: default_samples() }
    }
}

/// Contents of a `construct` config file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub construction: ConstructionSpec,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?)
    }
}

/// SHA-256 of the canonical JSON form of any configuration value.
pub fn config_hash<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_string(config).expect("config serializes");
    hex::encode(Sha256::digest(json.as_bytes()))
}

fn stamp(hash: &str) -> String {
    format!("# betaprod {VERSION} config {hash}\n")
}

#[derive(Serialize)]
struct ExpandArgs<'a> {
    command: &'a str,
    x: &'a str,
    beta: &'a str,
    n: usize,
}

/// Digits of `x`, with the convergent and the error after each digit, as CSV.
pub fn cmd_expand(x: &str, beta: &str, n: usize) -> Result<String> {
    let b = BetaSystem::make(beta)?;
    let xv = QuadNum::from_rational(&parse_rational(x)?);
    let digits = expand(&xv, &b, n)?;
    let hash = config_hash(&ExpandArgs { command: "expand", x, beta, n });
    let mut out = stamp(&hash);
    out.push_str(&format!("# digits {}\n", digits.format_for(b.alphabet_max())));
    out.push_str("n,digit,convergent,error,scaled_error\n");
    for k in 1..=n {
        let conv = eval_word(&digits.prefix(k), &b);
        let e = approx_error(&xv, &b, k)?;
        out.push_str(&format!(
            "{k},{},{:.17e},{:.17e},{:.17e}\n",
            digits.digits()[k - 1],
            conv.to_f64(),
            e.error.to_f64(),
            e.scaled.to_f64()
        ));
    }
    Ok(out)
}

#[derive(Serialize)]
struct CensusArgs<'a> {
    command: &'a str,
    beta: &'a str,
    from: usize,
    to: usize,
    cap: u64,
}

/// One census row per order in `from..=to`, as CSV.
pub fn cmd_census(beta: &str, from: usize, to: usize, cap: u64) -> Result<String> {
    if from == 0 || from > to {
        return Err(Error::InvalidInput(format!("bad order range {from}..{to}")));
    }
    let b = BetaSystem::make(beta)?;
    let hash = config_hash(&CensusArgs { command: "census", beta, from, to, cap });
    let mut out = stamp(&hash);
    out.push_str(Census::CSV_HEADER);
    out.push_str(",renyi_ok\n");
    for n in from..=to {
        let c = full_census(n, &b, cap)?;
        // the exact count re-checks the Rényi bounds
        let renyi_ok = count_admissible(n, &b)?.count == c.count_admissible.into();
        out.push_str(&format!("{},{renyi_ok}\n", c.csv_row()));
    }
    Ok(out)
}

/// The manifest file: version, config hash, and the construction report.
#[derive(Serialize)]
pub struct ManifestFile<'a> {
    pub version: &'a str,
    pub config_hash: String,
    pub run_config: &'a RunConfig,
    pub manifest: &'a Manifest,
}

/// Paths written by `cmd_construct`.
#[derive(Clone, Debug)]
pub struct ConstructOutput {
    pub manifest: PathBuf,
    pub samples: PathBuf,
    pub passed: bool,
}

/// Runs the construction described by `config`, writing the manifest and samples.
/// With `out_dir`, the configured file names are placed there.
pub fn cmd_construct(config: &RunConfig, out_dir: Option<&Path>) -> Result<ConstructOutput> {
    let run = construct(&config.construction)?;
    let hash = config_hash(config);
    let file = ManifestFile { version: VERSION, config_hash: hash.clone(), run_config: config, manifest: &run.manifest };
    let mut json = serde_json::to_string_pretty(&file).map_err(|e| Error::Invariant(e.to_string()))?;
    json.push('\n');
    let place = |name: &str| match out_dir {
        Some(d) => d.join(Path::new(name).file_name().unwrap_or(name.as_ref())),
        None => PathBuf::from(name),
    };
    let manifest = place(&config.output.manifest);
    let samples = place(&config.output.samples);
    write(&manifest, &json)?;
    write(&samples, &(stamp(&hash) + &samples_csv(&run.points)))?;
    Ok(ConstructOutput { manifest, samples, passed: run.manifest.soundness.passed() })
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Reads a samples CSV (comment lines start with `#`, then a header).
pub fn read_samples(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut rows = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = rows.next().ok_or_else(|| Error::InvalidInput("empty samples file".into()))?;
    let skip = usize::from(header.starts_with("index"));
    rows.map(|l| {
        l.split(',')
            .skip(skip)
            .map(|v| v.trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("bad value {v:?}: {e}"))))
            .collect()
    })
    .collect()
}

#[derive(Serialize)]
struct DimArgs<'a> {
    command: &'a str,
    samples_hash: String,
    base: f64,
    from: i32,
    to: i32,
    resolution: f64,
}

/// Box-counting estimate of a samples file over scales `base^{-from..-to}`, as JSON.
pub fn cmd_dim(samples: &Path, base: f64, from: i32, to: i32, resolution: f64) -> Result<String> {
    let points = read_samples(samples)?;
    let est = box_count(&points, &geometric_scales(base, from, to), resolution, FitWindow::default())?;
    let raw = fs::read(samples)?;
    let args = DimArgs { command: "dim", samples_hash: hex::encode(Sha256::digest(&raw)), base, from, to, resolution };
    #[derive(Serialize)]
    struct Out<'a> {
        version: &'a str,
        config_hash: String,
        estimate: crate::dimension::DimensionEstimate,
    }
    let out = Out { version: VERSION, config_hash: config_hash(&args), estimate: est };
    Ok(serde_json::to_string_pretty(&out).map_err(|e| Error::Invariant(e.to_string()))? + "\n")
}

/// Default word cap for `census`.
pub const CENSUS_CAP: u64 = DEFAULT_WORD_CAP;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expand_examples() {
        let out = cmd_expand("0.625", "2", 3).unwrap();
        assert!(out.contains("# digits 101\n"));
        let last = out.lines().last().unwrap();
        let cols: Vec<f64> = last.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(cols, vec![3.0, 1.0, 0.625, 0.0, 0.0]);
        let g = cmd_expand("0.5", "golden", 10).unwrap();
        assert_eq!(g.lines().filter(|l| l.chars().next().is_some_and(|c| c.is_ascii_digit())).count(), 10);
        let e = cmd_expand("0.5", "0.9", 3).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().starts_with("invalid-beta"));
    }

    #[test]
    fn census_examples() {
        let out = cmd_census("2", 1, 4, CENSUS_CAP).unwrap();
        let rows: Vec<&str> = out.lines().skip(2).collect();
        assert_eq!(rows.len(), 4);
        for (i, r) in rows.iter().enumerate() {
            let n = i + 1;
            assert_eq!(*r, format!("2,{n},{},{},0,true", 1 << n, 1 << n));
        }
        let g = cmd_census("golden", 1, 8, CENSUS_CAP).unwrap();
        assert_eq!(g.lines().skip(2).count(), 8);
        assert!(g.lines().skip(2).all(|l| l.ends_with(",true")));
        assert_eq!(cmd_census("2", 30, 30, 1000).unwrap_err().exit_code(), 3);
    }

    #[test]
    fn config_round_trip_and_hash() {
        let text = r#"
[construction]
betas = ["2", "golden"]
eta = "1/10"
levels = 2
seed = 9
samples = 5

[[construction.psi]]
family = "exponential"
alpha = "1"

[[construction.psi]]
family = "exponential"
alpha = "1/2"
"#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.construction.psi.len(), 2);
        assert_eq!(c.output, OutputConfig::default());
        assert_eq!(config_hash(&c), config_hash(&RunConfig::from_toml(text).unwrap()));
        let mut d = c.clone();
        d.construction.seed = 10;
        assert_ne!(config_hash(&c), config_hash(&d));
        assert!(RunConfig::from_toml("nonsense = [").is_err());
        assert!(RunConfig::from_toml(&text.replace("levels = 2", "levels = 2\nlevel = 3")).is_err());
    }

    #[test]
    fn missing_samples_file() {
        let e = cmd_dim(Path::new("/nonexistent/samples.csv"), 2.0, 4, 12, 0.0).unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }
}
