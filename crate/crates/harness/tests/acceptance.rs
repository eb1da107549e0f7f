//! Acceptance criteria, run in order with one PASS/FAIL line each.
//!
//! Runs as a plain binary (`harness = false`) so that the timings are not
//! distorted by concurrently running tests.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use setval::operators::Translation;
use setval_harness::config::ExperimentConfig;
use setval_harness::report::ExperimentReport;
use setval_harness::suites::reverse_factorization::{
    comparability_study, ladders, ordering_ratio, ORDERING_TOLERANCE, ORDERING_VECTORS,
};
use setval_harness::suites::selftest::{
    aumann_gaps, dual_gap, grid_violations, layer_cake_gap, oracle_gap, ADDITIVITY_TOLERANCE, DUAL_GRID,
    DUAL_TOLERANCE, FIELDS, LAYER_CAKE_TOLERANCE, MAGNITUDE_TOLERANCE, ORACLE_TOLERANCE,
};
use setval_harness::suites::Suite;
use setval_harness::trials::trial_rng;

type Outcome = Result<String, String>;

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

fn within(what: &str, measured: f64, bound: f64) -> Outcome {
    let line = format!("{what} {measured:e} (bound {bound:e})");
    if measured <= bound {
        Ok(line)
    } else {
        Err(line)
    }
}

fn report_outcome(r: &ExperimentReport) -> Outcome {
    let failed = r.failures();
    let line = format!("{} checks, {} records, {} failed", r.aggregate.checks.len(), r.trials.len(), failed.len());
    match failed.first() {
        None => Ok(line),
        Some(c) => Err(format!("{line}; first: {} (measured {}, bound {})", c.name, c.measured, c.bound)),
    }
}

fn layer_cake(cfg: &ExperimentConfig) -> Outcome {
    let gaps = (0..FIELDS).map(|i| layer_cake_gap(cfg, i)).collect::<setval::Result<Vec<_>>>().map_err(|e| e.to_string())?;
    within(&format!("{FIELDS} fields, max relative gap"), max_of(gaps), LAYER_CAKE_TOLERANCE)
}

fn aumann(cfg: &ExperimentConfig) -> Outcome {
    let gaps = (0..FIELDS).map(|i| aumann_gaps(cfg, i)).collect::<setval::Result<Vec<_>>>().map_err(|e| e.to_string())?;
    let add = within("additivity gap", max_of(gaps.iter().map(|g| g.0)), ADDITIVITY_TOLERANCE);
    let mag = within("|int F| - int |F|", max_of(gaps.iter().map(|g| g.1)), MAGNITUDE_TOLERANCE);
    match (add, mag) {
        (Ok(a), Ok(m)) => Ok(format!("{a}; {m}")),
        (a, m) => Err(format!("{}; {}", a.unwrap_or_else(|e| e), m.unwrap_or_else(|e| e))),
    }
}

fn suite(cfg: &ExperimentConfig, s: Suite) -> Outcome {
    let out = s.run(cfg).map_err(|e| e.to_string())?;
    report_outcome(&out.report)
}

fn scalar_oracle(cfg: &ExperimentConfig) -> Outcome {
    let gaps = (0..100).map(|i| oracle_gap(cfg, i)).collect::<setval::Result<Vec<_>>>().map_err(|e| e.to_string())?;
    within("100 trials, max cellwise relative gap", max_of(gaps), ORACLE_TOLERANCE)
}

fn duality(cfg: &ExperimentConfig) -> Outcome {
    let gaps = (0..20).map(|i| dual_gap(cfg, i)).collect::<setval::Result<Vec<_>>>().map_err(|e| e.to_string())?;
    let dual = within(&format!("closed form vs M={DUAL_GRID} grid dual"), max_of(gaps), DUAL_TOLERANCE);
    let first = *cfg.ap_levels.iter().min().unwrap();
    let mut worst = 0.0f64;
    for (i, pair) in cfg.fixtures.iter().enumerate() {
        let mut rng = trial_rng(cfg.seed, 99, i);
        worst = worst.max(ordering_ratio(pair, first, DUAL_GRID, &mut rng, ORDERING_VECTORS).map_err(|e| e.to_string())?);
    }
    let ord = within(&format!("max p_t**/p_t over {ORDERING_VECTORS} vectors per fixture"), worst, 1.0 + ORDERING_TOLERANCE);
    match (dual, ord) {
        (Ok(a), Ok(b)) => Ok(format!("{a}; {b}")),
        (a, b) => Err(format!("{}; {}", a.unwrap_or_else(|e| e), b.unwrap_or_else(|e| e))),
    }
}

fn section_outcome(checks: &[setval_harness::report::Check]) -> Outcome {
    let failed: Vec<_> = checks.iter().filter(|c| !c.passed).collect();
    let line = format!("{} checks, {} failed", checks.len(), failed.len());
    match failed.first() {
        None => Ok(line),
        Some(c) => Err(format!("{line}; first: {} (measured {}, bound {})", c.name, c.measured, c.bound)),
    }
}

fn comparability(cfg: &ExperimentConfig) -> Outcome {
    let s = comparability_study(cfg).map_err(|e| e.to_string())?;
    let names: Vec<String> = s.checks.iter().map(|c| c.name.clone()).collect();
    section_outcome(&s.checks).map(|l| format!("{l}; {}", names.join("; ")))
}

fn reverse_factorization(cfg: &ExperimentConfig) -> Outcome {
    section_outcome(&ladders(cfg).map_err(|e| e.to_string())?.checks)
}

fn grids(_: &ExperimentConfig) -> Outcome {
    let mut bad = 0;
    let mut count = 0;
    for n in [1usize, 2] {
        for tau in Translation::all(n) {
            bad += grid_violations(n, tau).map_err(|e| e.to_string())?;
            count += 1;
        }
    }
    let line = format!("{count} translations, {bad} violations");
    if bad == 0 {
        Ok(line)
    } else {
        Err(line)
    }
}

fn run_all(dir: &Path, threads: usize) -> Result<(), String> {
    let status = Command::new(env!("CARGO_BIN_EXE_setval"))
        .args(["all", "--seed", "7", "--out"])
        .arg(dir)
        .env("SETVALUED_THREADS", threads.to_string())
        .env_remove("SETVALUED_OUT")
        .stdout(std::process::Stdio::null())
        .status()
        .map_err(|e| e.to_string())?;
    if status.success() {
        Ok(())
    } else {
        Err(format!("`all` with {threads} threads exited with {status}"))
    }
}

fn files(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    let mut out = Vec::new();
    for e in std::fs::read_dir(dir).map_err(|e| e.to_string())? {
        let p = e.map_err(|e| e.to_string())?.path();
        if p.is_file() {
            let name = p.file_name().unwrap().to_string_lossy().into_owned();
            out.push((name, std::fs::read(&p).map_err(|e| e.to_string())?));
        }
    }
    out.sort();
    Ok(out)
}

fn determinism(_: &ExperimentConfig) -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (tmp.path().join("t1"), tmp.path().join("t8"));
    run_all(&a, 1)?;
    run_all(&b, 8)?;
    let (fa, fb) = (files(&a)?, files(&b)?);
    let names: Vec<&str> = fa.iter().map(|f| f.0.as_str()).collect();
    if fa.len() == Suite::EXPERIMENTS.len() && fa == fb {
        Ok(format!("{} reports byte-identical: {}", fa.len(), names.join(", ")))
    } else {
        let differ: Vec<&str> = fa.iter().zip(&fb).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
        Err(format!("reports {names:?} vs {} files; differing: {differ:?}", fb.len()))
    }
}

type Criterion = (&'static str, u64, fn(&ExperimentConfig) -> Outcome);

const CRITERIA: [Criterion; 10] = [
    ("layer-cake exactness", 5, layer_cake),
    ("Aumann algebra", 10, aumann),
    ("endpoint bounds", 60, |c| suite(c, Suite::Endpoints)),
    ("Marcinkiewicz with C_t", 120, |c| suite(c, Suite::Marcinkiewicz)),
    ("d=1 scalar oracle", 10, scalar_oracle),
    ("norm duality", 30, duality),
    ("comparability", 60, comparability),
    ("reverse factorization", 120, reverse_factorization),
    ("grid tiling and nesting", 5, grids),
    ("determinism of `all --seed 7`, 1 vs 8 threads", 300, determinism),
];

fn main() {
    let cfg = ExperimentConfig::default();
    let mut failed = 0;
    for (i, (name, limit, check)) in CRITERIA.iter().enumerate() {
        let start = Instant::now();
        let outcome = check(&cfg);
        let secs = start.elapsed();
        let slow = secs > Duration::from_secs(*limit);
        let (ok, detail) = match outcome {
            Ok(d) => (!slow, d),
            Err(d) => (false, d),
        };
        let timing = format!("{:.2}s, limit {limit}s{}", secs.as_secs_f64(), if slow { " exceeded" } else { "" });
        println!("{} {}. {name}: {detail} ({timing})", if ok { "PASS" } else { "FAIL" }, i + 1);
        failed += usize::from(!ok);
    }
    if failed > 0 {
        println!("{failed} of {} criteria failed", CRITERIA.len());
        std::process::exit(1);
    }
}
