use std::path::PathBuf;
use std::process::ExitCode;

use betaprod::cli::{cmd_census, cmd_construct, cmd_dim, cmd_expand, RunConfig, CENSUS_CAP};
use betaprod::{Error, Result};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "betaprod", version, about = "Beta-expansions, full cylinders and Cantor constructions")]
struct Cli {
    /// Worker threads (outputs do not depend on this).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Digits, convergents and errors of x.
    Expand {
        #[arg(long)]
        beta: String,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long)]
        n: usize,
    },
    /// Admissible and full cylinder counts for each order in a range like `1..8`.
    Census {
        #[arg(long)]
        beta: String,
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = CENSUS_CAP)]
        cap: u64,
    },
    /// Build a construction from a TOML config; writes the manifest and samples.
    Construct {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Box-counting estimate for a samples CSV.
    Dim {
        samples: PathBuf,
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        #[arg(long, default_value_t = 4)]
        from: i32,
        #[arg(long, default_value_t = 12)]
        to: i32,
        /// Finest scale the samples resolve.
        #[arg(long, default_value_t = 0.0)]
        resolution: f64,
    },
}

fn parse_range(s: &str) -> Result<(usize, usize)> {
    let bad = || Error::InvalidInput(format!("bad range {s:?}, expected a..b or n"));
    match s.split_once("..") {
        Some((a, b)) => {
            let b = b.strip_prefix('=').unwrap_or(b);
            Ok((a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?))
        }
        None => {
            let n = s.parse().map_err(|_| bad())?;
            Ok((n, n))
        }
    }
}

fn run(cli: Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidInput(format!("threads: {e}")))?;
    }
    match cli.command {
        Command::Expand { beta, x, n } => print!("{}", cmd_expand(&x, &beta, n)?),
        Command::Census { beta, n, cap } => {
            let (from, to) = parse_range(&n)?;
            print!("{}", cmd_census(&beta, from, to, cap)?);
        }
        Command::Construct { config, out_dir } => {
            let cfg = RunConfig::load(&config)?;
            let out = cmd_construct(&cfg, out_dir.as_deref())?;
            println!("manifest {}", out.manifest.display());
            println!("samples {}", out.samples.display());
            if !out.passed {
                eprintln!("invariant: soundness checks failed, see the manifest");
                return Ok(5);
            }
        }
        Command::Dim { samples, base, from, to, resolution } => {
            print!("{}", cmd_dim(&samples, base, from, to, resolution)?)
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
