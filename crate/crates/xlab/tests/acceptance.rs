//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use rand::Rng;
use xlab::config::{ExperimentConfig, ExperimentId};
use xlab::experiments::{self, e1, e2, e3, e4};
use xlab::report::{all_passed, Check};
use xlab_core::entropy::{
    entropy_curve, greedy_packing, lattice_cloud, lipschitz_image_bound, log_grid, Boundary, MetricCloud,
};
use xlab_core::{rng, HolderIndex};

type Verdict = Result<(bool, String), Box<dyn std::error::Error>>;

const SEED: u64 = xlab::config::DEFAULT_SEED;

fn worst(checks: &[Check]) -> String {
    checks.iter().map(|c| format!("{}={:.3e}", c.name, c.value)).collect::<Vec<_>>().join("; ")
}

fn c1_exactness() -> Verdict {
    let start = Instant::now();
    let checks = e4::exactness_checks(64, 0.02)?;
    let secs = start.elapsed().as_secs_f64();
    Ok((all_passed(&checks) && secs < 30.0, format!("{} in {secs:.1}s (limit 30s)", worst(&checks))))
}

fn c2_conservation() -> Verdict {
    let s = HolderIndex::new(2.5)?;
    let checks: Vec<Check> = e4::conservation_checks(128, s, 1.0, SEED, 0.02)?
        .into_iter()
        .filter(|c| c.name.contains("drift"))
        .collect();
    Ok((all_passed(&checks), worst(&checks)))
}

fn c3_identity() -> Verdict {
    let c = e4::identity_check(128, 20, SEED, 0.02)?;
    Ok((c.passed, format!("{}={:.3e} (<= 1e-4)", c.name, c.value)))
}

fn c4_lipschitz(out: &Path) -> Verdict {
    let cfg = ExperimentConfig { output: out.join("e1"), ..ExperimentConfig::for_experiment(ExperimentId::E1) };
    cfg.validate()?;
    let o = e1::run(&cfg)?;
    let pairs: usize = o.report.scales.iter().map(|s| s.pairs).sum();
    let maxes: Vec<String> = o.report.scales.iter().map(|s| format!("{}:{:.4}", s.scale, s.max_ratio)).collect();
    Ok((o.passed, format!("{pairs} pairs, max ratio by scale {}", maxes.join(", "))))
}

fn c5_quantizer(out: &Path) -> Verdict {
    let cfg = ExperimentConfig { output: out.join("e3"), ..ExperimentConfig::for_experiment(ExperimentId::E3) };
    let o = e3::run(&cfg)?;
    let cases: Vec<String> =
        o.report.cases.iter().map(|c| format!("R={} ε={}: max {:.4}", c.radius, c.eps, c.max_error)).collect();
    let growth: Vec<String> =
        o.report.growth.iter().map(|g| format!("R={}: {:.2} <= {}", g.radius, g.max_ratio, g.bound)).collect();
    Ok((
        o.passed,
        format!(
            "{} samples each; {}; (L, M) = {:?}; growth ratio {}",
            o.report.samples,
            cases.join(", "),
            o.report.anchor,
            growth.join(", ")
        ),
    ))
}

/// Minimal number of subsets of diameter `≤ 2ε` covering the cloud.
fn brute_force_covering(cloud: &MetricCloud, eps: f64) -> usize {
    let n = cloud.len();
    let full = (1usize << n) - 1;
    let small: Vec<bool> = (0..=full)
        .map(|mask| {
            (0..n).all(|i| {
                mask & (1 << i) == 0 || (0..n).all(|j| mask & (1 << j) == 0 || cloud.distance(i, j) <= 2.0 * eps)
            })
        })
        .collect();
    let mut best = vec![usize::MAX; full + 1];
    best[0] = 0;
    for mask in 1..=full {
        let low = mask.trailing_zeros();
        let mut sub = mask;
        while sub > 0 {
            if sub & (1 << low) != 0 && small[sub] && best[mask ^ sub] != usize::MAX {
                best[mask] = best[mask].min(best[mask ^ sub] + 1);
            }
            sub = (sub - 1) & mask;
        }
    }
    best[full]
}

fn random_points(r: &mut impl Rng, n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..n).map(|_| (0..dim).map(|_| r.random::<f64>()).collect()).collect()
}

fn c6_sandwich() -> Verdict {
    let mut cases = 0;
    let mut sandwich_failures = 0;
    for c in 0..60u64 {
        let mut r = rng::stream(SEED, 0xACC6, c);
        let n = r.random_range(2..=12);
        let dim = r.random_range(1..=3);
        let cloud = MetricCloud::from_points_sup(&random_points(&mut r, n, dim));
        let mut eps: Vec<f64> = cloud.matrix().iter().filter(|d| **d > 0.0).map(|d| d / 2.0).collect();
        eps.extend([0.01, 0.05, 0.1, 0.2, 0.4, 1.0]);
        for e in eps {
            let cover = brute_force_covering(&cloud, e);
            let (lo, hi) = (greedy_packing(&cloud, 2.0 * e).count, greedy_packing(&cloud, e).count);
            cases += 1;
            if !(lo <= cover && cover <= hi) {
                sandwich_failures += 1;
            }
        }
    }
    let mut violations = 0;
    for c in 0..50u64 {
        let mut r = rng::stream(SEED, 0xACC7, c);
        let dim = r.random_range(1..=3);
        let n = r.random_range(30..=80);
        let pts = random_points(&mut r, n, dim);
        let a: Vec<Vec<f64>> = (0..dim).map(|_| (0..dim).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
        let row_sum = a.iter().map(|row| row.iter().map(|v: &f64| v.abs()).sum::<f64>()).fold(0.0, f64::max);
        let lip: f64 = r.random_range(0.1..1.0);
        // x ↦ sin(Ax) with ‖A‖_∞ = lip is lip-Lipschitz in the sup metric
        let image: Vec<Vec<f64>> = pts
            .iter()
            .map(|x| a.iter().map(|row| (lip / row_sum * row.iter().zip(x).map(|(p, q)| p * q).sum::<f64>()).sin()).collect())
            .collect();
        let dom = MetricCloud::from_points_sup(&pts);
        let img = MetricCloud::from_points_sup(&image);
        let rep = lipschitz_image_bound(&dom, &img, lip, &log_grid(0.5, 0.005, 20))?;
        violations += rep.violations;
    }
    Ok((
        sandwich_failures == 0 && violations == 0,
        format!("{sandwich_failures} sandwich failures over {cases} (cloud, ε) cases; {violations} Lipschitz-image violations over 50 pairs"),
    ))
}

fn c7_slopes(e2: &experiments::Outcome<e2::E2Report>, holder_secs: f64) -> Verdict {
    let eps = log_grid(0.2, 0.02, 12);
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, d) in [(1000, 1u32), (64, 2)] {
        let slope = entropy_curve(&lattice_cloud(k, d, Boundary::Periodic), &eps)?.fit.slope;
        ok &= (slope - d as f64).abs() <= 0.15;
        parts.push(format!("{d}-D lattice slope {slope:.3} (target {d} ± 0.15)"));
    }
    let r = &e2.report;
    let slope = r.holder_decade_fit.as_ref().map_or(f64::NAN, |f| f.slope);
    ok &= slope >= r.expected_holder_slope && holder_secs < 600.0;
    parts.push(format!(
        "Hölder C^{} ball in C^{} metric, N={}: slope {slope:.3} (>= {:.3}), cloud built in {holder_secs:.0}s (limit 600s)",
        r.ball_index, r.metric_index, r.holder.samples, r.expected_holder_slope
    ));
    Ok((ok, parts.join("; ")))
}

fn c8_gap(e2: &experiments::Outcome<e2::E2Report>) -> Verdict {
    let r = &e2.report;
    let slope = |f: &Option<xlab_core::entropy::SlopeFit>| f.as_ref().map_or(f64::NAN, |f| f.slope);
    Ok((
        r.gap >= 0.3,
        format!(
            "matched window of {} points: Hölder slope {:.3}, attainable slope {:.3}, gap {:.3} (>= 0.3); {}",
            r.window.points,
            slope(&r.holder.window_fit),
            slope(&r.attainable.window_fit),
            r.gap,
            e2::STATEMENT
        ),
    ))
}

fn small_config(id: ExperimentId, out: &Path, workers: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_experiment(id);
    cfg.output = out.to_path_buf();
    cfg.workers = workers;
    cfg.grid = 16;
    match id {
        ExperimentId::E1 => {
            cfg.samples = Some(6);
            cfg.e1.min_pairs = 0;
        }
        ExperimentId::E2 => cfg.samples = Some(80),
        ExperimentId::E3 => cfg.samples = Some(200),
        ExperimentId::E4 => {
            let p = &mut cfg.e4;
            p.exact_grid = 16;
            p.conservation_grid = 16;
            p.cross_grid = 16;
            p.identity_grid = 16;
            p.identity_controls = 4;
            p.convergence_grids = vec![16, 32, 64];
            p.bounded_samples = 4;
        }
    }
    cfg
}

fn csv_files(dir: &Path) -> std::io::Result<Vec<(String, Vec<u8>)>> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            out.push((path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path)?));
        }
    }
    out.sort();
    Ok(out)
}

fn c9_reproducibility(out: &Path) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for id in [ExperimentId::E1, ExperimentId::E2, ExperimentId::E3, ExperimentId::E4] {
        let mut files = Vec::new();
        for workers in [1, 8] {
            let dir = out.join(format!("repro-{id:?}-{workers}"));
            experiments::run(id, &small_config(id, &dir, workers))?;
            files.push(csv_files(&dir)?);
        }
        let same = !files[0].is_empty() && files[0] == files[1];
        ok &= same;
        parts.push(format!("{id:?}: {} CSVs {}", files[0].len(), if same { "identical" } else { "DIFFER" }));
    }
    Ok((ok, format!("workers 1 vs 8: {}", parts.join(", "))))
}

fn main() -> ExitCode {
    let tmp = tempfile::tempdir().expect("temporary directory");
    let out = tmp.path();
    let mut results: Vec<(u32, &str, Verdict)> = Vec::new();
    let mut record = |id: u32, name: &'static str, v: Verdict| {
        let (tag, detail) = match &v {
            Ok((true, d)) => ("PASS", d.clone()),
            Ok((false, d)) => ("FAIL", d.clone()),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        println!("[{tag}] criterion {id} ({name}): {detail}");
        results.push((id, name, v));
    };

    record(1, "solver exactness", c1_exactness());
    record(2, "conservation", c2_conservation());
    record(3, "endpoint identity", c3_identity());
    record(4, "Lipschitz boundedness", c4_lipschitz(out));
    record(5, "quantizer and net cardinality", c5_quantizer(out));
    record(6, "packing sandwich", c6_sandwich());

    let cfg = ExperimentConfig { output: out.join("e2"), ..ExperimentConfig::for_experiment(ExperimentId::E2) };
    match e2::run(&cfg) {
        Ok(o) => {
            let holder_secs = o
                .manifest
                .timings
                .iter()
                .filter(|t| t.stage == "Hölder cloud" || t.stage == "packing counts")
                .map(|t| t.seconds)
                .sum();
            record(7, "entropy slope recovery", c7_slopes(&o, holder_secs));
            record(8, "entropy gap", c8_gap(&o));
        }
        Err(e) => {
            record(7, "entropy slope recovery", Err(format!("E2 run failed: {e}").into()));
            record(8, "entropy gap", Err(format!("E2 run failed: {e}").into()));
        }
    }
    record(9, "reproducibility", c9_reproducibility(out));

    let failed: Vec<u32> = results.iter().filter(|(_, _, v)| !matches!(v, Ok((true, _)))).map(|r| r.0).collect();
    if failed.is_empty() {
        println!("acceptance: all 9 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
