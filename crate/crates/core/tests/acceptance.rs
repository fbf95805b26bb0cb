//! One PASS/FAIL line per acceptance criterion.
//!
//! cargo test --release --test acceptance -- --nocapture

use std::time::{Duration, Instant};

use betaprod::approximation::{approx_error, approx_error_direct, PsiFunction};
use betaprod::cantor::{claim_arithmetic, construct, ConstructionSpec};
use betaprod::cli::{cmd_construct, OutputConfig, RunConfig};
use betaprod::cylinders::{cylinder, full_census, is_full_by_suffix, partition_cylinders};
use betaprod::dimension::{box_count, cantor_dust, geometric_scales, theoretical_dim, uniform_points, FitWindow};
use betaprod::numerics::{eval_word, expand, t_beta_step_exact, BetaSystem, QuadNum};
use betaprod::words::{count_admissible, enumerate_admissible, DEFAULT_WORD_CAP};
use num_bigint::BigUint;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GRID: [&str; 4] = ["golden", "1.8", "2.5", "3"];

struct Line {
    id: u32,
    pass: bool,
    detail: String,
}

fn report(id: u32, pass: bool, detail: String) -> Line {
    println!("criterion {id}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    Line { id, pass, detail }
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn renyi_bounds() -> Line {
    let t = Instant::now();
    let mut checked = 0;
    let mut violations = Vec::new();
    for spec in GRID {
        let b = BetaSystem::make(spec).unwrap();
        let beta_less_one = b.value() - &QuadNum::one();
        for n in 1..=12 {
            let count = enumerate_admissible(n, &b, DEFAULT_WORD_CAP).unwrap().count() as i64;
            let c = QuadNum::from_int(count);
            // β^n ≤ #Σ and #Σ·(β−1) ≤ β^{n+1}
            let lower_ok = b.pow(n as i64) <= c;
            let upper_ok = &c * &beta_less_one <= b.pow(n as i64 + 1);
            if !lower_ok || !upper_ok {
                violations.push(format!("{spec}/{n}"));
            }
            checked += 1;
        }
    }
    let el = t.elapsed();
    report(
        1,
        violations.is_empty() && el < Duration::from_secs(10),
        format!("{checked} (beta, n) pairs, violations {violations:?}, {}", secs(el)),
    )
}

/// Binary words of length n with no two adjacent ones, by brute force over bit masks.
fn no_11_words(n: u32) -> u64 {
    (0u64..1 << n).filter(|w| w & (w >> 1) == 0).count() as u64
}

fn golden_fibonacci() -> Line {
    let g = BetaSystem::golden();
    let mut fib = vec![1u64, 1];
    while fib.len() < 23 {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    let mut mismatches = Vec::new();
    for n in 1..=20usize {
        let oracle = no_11_words(n as u32);
        let dp = count_admissible(n, &g).unwrap().count;
        let listed = enumerate_admissible(n, &g, DEFAULT_WORD_CAP).unwrap().count() as u64;
        if oracle != fib[n + 1] || dp != BigUint::from(oracle) || listed != oracle {
            mismatches.push(n);
        }
    }
    report(2, mismatches.is_empty(), format!("n = 1..20 against F(n+2) and the no-11 counter, mismatches {mismatches:?}"))
}

fn full_cylinder_runs() -> Line {
    let mut worst = Vec::new();
    let mut words = 0usize;
    let mut disagree = 0usize;
    let mut runs_ok = true;
    for spec in GRID {
        let b = BetaSystem::make(spec).unwrap();
        let mut max_ratio = 0usize;
        for n in 1..=10 {
            let c = full_census(n, &b, DEFAULT_WORD_CAP).unwrap();
            runs_ok &= c.max_gap as usize <= n;
            max_ratio = max_ratio.max(c.max_gap as usize);
            // exact length from the gap to the next left endpoint, against the suffix test
            let full_len = b.inv_pow(n);
            for cyl in partition_cylinders(n, &b, DEFAULT_WORD_CAP).unwrap() {
                words += 1;
                let by_length = cyl.length == full_len;
                if by_length != is_full_by_suffix(cyl.word.digits(), &b) || by_length != cyl.is_full {
                    disagree += 1;
                }
            }
        }
        worst.push(format!("{spec}:{max_ratio}"));
    }
    report(
        3,
        runs_ok && disagree == 0,
        format!("longest non-full runs {worst:?} (n ≤ 10), fullness routes disagree on {disagree}/{words} words"),
    )
}

fn trivial_bound_round_trip() -> Line {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checks = 0usize;
    let mut bad = 0usize;
    for spec in GRID {
        let b = BetaSystem::make(spec).unwrap();
        for _ in 0..1000 {
            let q: i64 = rng.gen_range(1..=1_000_000);
            let x = QuadNum::from_ratio(rng.gen_range(0..q), q);
            let w = expand(&x, &b, 50).unwrap();
            // route 1: the orbit T^n x; route 2: β^n (x − ω_n(x)) from the convergent
            let mut orbit = x.clone();
            for n in 1..=50 {
                let (d, next) = t_beta_step_exact(&orbit, &b).unwrap();
                orbit = next;
                let conv = eval_word(&w.prefix(n), &b);
                let scaled = (&x - &conv) * b.pow(n as i64);
                checks += 1;
                if d != w.digits()[n - 1]
                    || scaled != orbit
                    || scaled.is_negative()
                    || scaled >= QuadNum::one()
                {
                    bad += 1;
                }
            }
            let n = rng.gen_range(1..=50);
            let e = approx_error(&x, &b, n).unwrap();
            if e.error != approx_error_direct(&x, &b, n).unwrap() || &e.error * &b.pow(n as i64) != e.scaled {
                bad += 1;
            }
        }
    }
    let el = t.elapsed();
    report(
        4,
        bad == 0 && el < Duration::from_secs(30),
        format!("{checks} (x, n) pairs over 4 bases, {bad} failures, {}", secs(el)),
    )
}

fn claim_arithmetic_example() -> Line {
    let b = BetaSystem::make("2").unwrap();
    let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
    let psi = PsiFunction::table(&b, vec![r(1, 1024)]).unwrap();
    let a = claim_arithmetic(&psi, 1, &r(1, 10)).unwrap();
    // integer scans: least k with (k+1)·2^{-k} ≤ 2^{-10}/10, and 2^{t−10} < 1 ≤ 2^{t−9}
    let k_oracle = (1u64..).find(|&k| (k + 1) * 10 * 1024 <= 1 << k).unwrap();
    let t_oracle = (0u64..).find(|&t| t < 10 && t + 1 >= 10).unwrap();
    let cyl = cylinder(&a.sigma(), &b).unwrap();
    let lo = QuadNum::from_ratio(9, 10240);
    let hi = QuadNum::from_ratio(1, 1024);
    let inside = cyl.left > lo && cyl.right() < hi;
    report(
        5,
        a.k == 18 && a.t == 9 && a.k == k_oracle && a.t == t_oracle && inside,
        format!(
            "k={} t={} (oracle k={k_oracle} t={t_oracle}), sigma=0^{}{} spans [{:.7e}, {:.7e}] in ({:.7e}, {:.7e})",
            a.k,
            a.t,
            a.t,
            a.u,
            cyl.left.to_f64(),
            cyl.right().to_f64(),
            lo.to_f64(),
            hi.to_f64()
        ),
    )
}

fn reference_spec(samples: usize) -> ConstructionSpec {
    let mut spec = ConstructionSpec::reference(8, samples, 1);
    spec.s0 = Some("36/25".into());
    spec
}

fn construction_soundness() -> Line {
    let t = Instant::now();
    let run = construct(&reference_spec(0)).unwrap();
    let s = &run.manifest.soundness;
    let hits = s.hits.iter().filter(|h| h.passed()).count();
    let comparisons: usize = s.gaps.iter().map(|g| g.comparisons).sum();
    let gap_failures: usize = s.gaps.iter().map(|g| g.failures.len()).sum();
    let worst = s
        .holder_levels
        .iter()
        .map(|h| h.ratio + h.slack - h.threshold)
        .fold(f64::INFINITY, f64::min);
    report(
        6,
        s.passed() && run.manifest.levels.len() >= 8,
        format!(
            "Q={} q0={:?} s0={}: hits {hits}/{}, gap comparisons {comparisons} with {gap_failures} failures, \
             additivity {}, Hölder levels min margin {worst:.4}, intermediate squares {}/{} \
             (min margin {:.4}), paths failed {}/{}, {}",
            run.manifest.levels.len(),
            s.q0,
            s.s0,
            s.hits.len(),
            s.additivity,
            s.intermediate_checked - s.intermediate_failed,
            s.intermediate_checked,
            s.intermediate_min_margin,
            s.paths_failed,
            s.paths_checked,
            secs(t.elapsed())
        ),
    )
}

fn dimension_reproduction() -> Line {
    let t = Instant::now();
    let uniform =
        box_count(&uniform_points(10_000, 2, 1), &geometric_scales(2.0, 2, 7), 0.0, FitWindow { coarse: 0, fine: 1 })
            .unwrap();
    let dust = box_count(&cantor_dust(200_000, 20, 2), &geometric_scales(3.0, 1, 7), 0.0, FitWindow::default()).unwrap();
    let dust_want = 1.0 + 2f64.ln() / 3f64.ln();
    let run = construct(&reference_spec(10_000)).unwrap();
    // left corners carry at least 52 bits per coordinate
    let est = box_count(&run.points, &geometric_scales(2.0, 4, 12), 2f64.powi(-24), FitWindow { coarse: 0, fine: 0 })
        .unwrap();
    let s = theoretical_dim(&[1.0, 0.5]);
    let calib = (uniform.estimate - 2.0).abs() <= 0.1 && (dust.estimate - 1.631).abs() <= 0.08;
    let el = t.elapsed();
    report(
        7,
        calib && (1.35..=1.65).contains(&est.estimate) && el < Duration::from_secs(300),
        format!(
            "slope {:.3} over 2^-4..2^-12 (target [1.35, 1.65], theory {s}), counts {:?}; \
             uniform {:.3}, Cantor dust {:.3} (want {dust_want:.3}), {}",
            est.estimate,
            est.values,
            uniform.estimate,
            dust.estimate,
            secs(el)
        ),
    )
}

fn determinism() -> Line {
    let config = RunConfig { construction: reference_spec(500), output: OutputConfig::default() };
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    let threads = [1, 1, 4];
    let mut manifests = Vec::new();
    let mut samples = Vec::new();
    for (dir, n) in dirs.iter().zip(threads) {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap();
        let out = pool.install(|| cmd_construct(&config, Some(dir.path()))).unwrap();
        manifests.push(std::fs::read(out.manifest).unwrap());
        samples.push(std::fs::read(out.samples).unwrap());
    }
    let same = manifests.windows(2).all(|w| w[0] == w[1]) && samples.windows(2).all(|w| w[0] == w[1]);
    report(8, same, format!("3 runs with threads {threads:?}: manifests of {} bytes, identical {same}", manifests[0].len()))
}

#[test]
fn acceptance() {
    let lines = vec![
        renyi_bounds(),
        golden_fibonacci(),
        full_cylinder_runs(),
        trivial_bound_round_trip(),
        claim_arithmetic_example(),
        construction_soundness(),
        dimension_reproduction(),
        determinism(),
    ];
    let failed: Vec<String> = lines.iter().filter(|l| !l.pass).map(|l| format!("{}: {}", l.id, l.detail)).collect();
    assert!(failed.is_empty(), "failing criteria:\n{}", failed.join("\n"));
}
