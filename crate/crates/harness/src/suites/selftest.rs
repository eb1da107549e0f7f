//! Self-checks of the building blocks: layer-cake integrals, Aumann
//! integrals, the scalar maximal oracle, closed-form duals and the exact
//! dyadic grids.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use setval::convex_body::{circle_directions, DirectionGrid};
use setval::operators::{cubes_at_level, dyadic_frac_maximal, scalar_frac_maximal, DyadicCube, Translation};
use setval::set_field::{
    aumann_integral_all, distribution, lp_norm, magnitude_bound_check, random_simple_field, DyadicDomain, NormField,
};
use setval::Result;

use super::marcinkiewicz::relative_gap;
use super::reverse_factorization::{ordering_ratio, random_spd, unit_vector, ORDERING_TOLERANCE, ORDERING_VECTORS};
use super::Suite;
use crate::config::ExperimentConfig;
use crate::report::{Check, ExperimentReport, SuiteOutput, TrialRecord};
use crate::trials::{trial_field, trial_rng, TrialKind};

pub const FIELDS: usize = 100;
pub const LAYER_CAKE_TOLERANCE: f64 = 1e-12;
pub const ADDITIVITY_TOLERANCE: f64 = 1e-10;
pub const MAGNITUDE_TOLERANCE: f64 = 1e-9;
pub const ORACLE_TOLERANCE: f64 = 1e-12;
pub const DUAL_TOLERANCE: f64 = 1e-6;
pub const DUAL_GRID: usize = 720;
/// Finest level of the exact grid check.
pub const GRID_LEVEL: i32 = 6;

const STREAM: u64 = 5;

fn directions(d: usize) -> Vec<Vec<f64>> {
    match d {
        1 => vec![vec![1.0]],
        _ => circle_directions(360).iter().map(|u| u.to_vec()).collect(),
    }
}

fn record(index: usize, label: String, values: BTreeMap<String, f64>, passed: bool) -> TrialRecord {
    TrialRecord { index, kind: None, label, values, passed }
}

/// Max relative gap between the layer-cake integral and `||F||_p^p`.
pub fn layer_cake_gap(config: &ExperimentConfig, i: usize) -> Result<f64> {
    let (n, d) = (1 + i % 2, 1 + (i / 2) % 2);
    let seed = trial_rng(config.seed, STREAM, i).random::<u64>();
    let f = random_simple_field(DyadicDomain::new(n, config.level.min(5))?, d, seed, 2.0, 3)?;
    let table = distribution(&f, &NormField::Euclidean)?;
    let mut gap = 0.0f64;
    for p in [1.0, 2.0, 4.0] {
        let direct = lp_norm(&f, &NormField::Euclidean, p)?.powf(p);
        gap = gap.max((table.layer_cake(p)? - direct).abs() / direct);
    }
    Ok(gap)
}

/// Support additivity of the integral of `F + G` on a direction grid, and
/// `|int F| - int |F|`.
pub fn aumann_gaps(config: &ExperimentConfig, i: usize) -> Result<(f64, f64)> {
    let (n, d) = (1 + i % 2, 1 + (i / 2) % 2);
    let mut rng = trial_rng(config.seed, STREAM, 1000 + i);
    let domain = DyadicDomain::new(n, config.level.min(5))?;
    let f = random_simple_field(domain, d, rng.random(), 3.0, 3)?;
    let g = random_simple_field(domain, d, rng.random(), 1.0, 2)?;
    let (sf, sg, sfg) = (aumann_integral_all(&f)?, aumann_integral_all(&g)?, aumann_integral_all(&f.add(&g)?)?);
    let mut add = 0.0f64;
    for u in directions(d) {
        let want = sf.support(&u)? + sg.support(&u)?;
        add = add.max((sfg.support(&u)? - want).abs() / (1.0 + want));
    }
    let all: Vec<usize> = (0..domain.num_cells()).collect();
    let (lhs, rhs) = magnitude_bound_check(&f, &all)?;
    Ok((add, lhs - rhs))
}

/// Cellwise gap between `|M^tau F|` and the scalar oracle at `d = 1`.
pub fn oracle_gap(config: &ExperimentConfig, i: usize) -> Result<f64> {
    let n = 1 + i % 2;
    let taus = Translation::all(n);
    let tau = taus[(i / 2) % taus.len()];
    let alpha = config.alphas[i % config.alphas.len()];
    let domain = DyadicDomain::new(n, config.level.min(5))?;
    let f = trial_field(TrialKind::for_trial(i), domain, 1, &mut trial_rng(config.seed, STREAM, 2000 + i))?;
    let set = dyadic_frac_maximal(&f, alpha, tau)?.magnitudes();
    let scalar = scalar_frac_maximal(&domain, &f.magnitudes(), alpha, Some(&tau.as_f64()))?;
    Ok(relative_gap(&set, &scalar))
}

/// Closed-form matrix dual against the grid dual, relative.
pub fn dual_gap(config: &ExperimentConfig, i: usize) -> Result<f64> {
    let mut rng = trial_rng(config.seed, STREAM, 3000 + i);
    let norm = random_spd(&mut rng, 2)?.norm();
    let grid = DirectionGrid::new(2, DUAL_GRID)?;
    let mut gap = 0.0f64;
    for _ in 0..50 {
        let v = unit_vector(&mut rng, 2);
        let closed = norm.dual_eval(&v)?;
        gap = gap.max((closed - norm.dual_eval_on(&v, &grid)?).abs() / closed);
    }
    Ok(gap)
}

/// Exact tiling and nesting of `D^tau` at levels `0..=GRID_LEVEL`; returns
/// the number of violations.
pub fn grid_violations(n: usize, tau: Translation) -> Result<usize> {
    let k = GRID_LEVEL;
    let unit = 3i64 << k;
    let mut bad = 0usize;
    for j in 0..=k {
        let cubes = cubes_at_level(tau, j);
        let mut count = 1usize;
        for a in 0..n {
            let mut iv: Vec<(i64, i64)> = cubes.iter().map(|q| q.bounds_units(a, k)).collect::<Result<_>>()?;
            iv.sort_unstable();
            iv.dedup();
            count *= iv.len();
            if iv.first().is_none_or(|x| x.0 > 0) || iv.last().is_none_or(|x| x.1 < unit) {
                bad += 1;
            }
            bad += iv.windows(2).filter(|w| w[0].1 != w[1].0).count();
            bad += iv.iter().filter(|x| x.1 - x.0 != 3i64 << (k - j)).count();
        }
        if count != cubes.len() {
            bad += 1;
        }
        for q in &cubes {
            if j > 0 {
                let p = q.parent();
                if !p.contains(q) || !cubes_at_level(tau, j - 1).contains(&p) {
                    bad += 1;
                }
            }
            if j < k {
                bad += children_violations(q, k)?;
            }
        }
    }
    Ok(bad)
}

fn children_violations(q: &DyadicCube, k: i32) -> Result<usize> {
    let kids = q.children();
    let mut bad = kids.iter().filter(|c| !q.contains(c) || c.parent() != *q).count();
    for a in 0..q.n() {
        let (lo, hi) = q.bounds_units(a, k)?;
        let mut iv: Vec<(i64, i64)> = kids.iter().map(|c| c.bounds_units(a, k)).collect::<Result<_>>()?;
        iv.sort_unstable();
        iv.dedup();
        if iv.len() != 2 || iv[0].0 != lo || iv[0].1 != iv[1].0 || iv[1].1 != hi {
            bad += 1;
        }
    }
    Ok(bad)
}

pub fn run(config: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut trials = Vec::new();
    let mut checks = Vec::new();

    let lc: Vec<f64> = (0..FIELDS).into_par_iter().map(|i| layer_cake_gap(config, i)).collect::<Result<_>>()?;
    let au: Vec<(f64, f64)> = (0..FIELDS).into_par_iter().map(|i| aumann_gaps(config, i)).collect::<Result<_>>()?;
    let or: Vec<f64> = (0..FIELDS).into_par_iter().map(|i| oracle_gap(config, i)).collect::<Result<_>>()?;
    let du: Vec<f64> = (0..20).into_par_iter().map(|i| dual_gap(config, i)).collect::<Result<_>>()?;
    let first_level = *config.ap_levels.iter().min().expect("validated nonempty");
    let ord: Vec<f64> = config
        .fixtures
        .par_iter()
        .enumerate()
        .map(|(i, pair)| {
            let mut rng = trial_rng(config.seed, STREAM, 4000 + i);
            ordering_ratio(pair, first_level, DUAL_GRID, &mut rng, ORDERING_VECTORS)
        })
        .collect::<Result<_>>()?;
    let grids: Vec<(usize, Translation)> =
        [1usize, 2].into_iter().flat_map(|n| Translation::all(n).into_iter().map(move |t| (n, t))).collect();
    let gv: Vec<usize> = grids.par_iter().map(|&(n, t)| grid_violations(n, t)).collect::<Result<_>>()?;

    let mut push = |label: String, key: &str, x: f64, ok: bool| {
        let i = trials.len();
        trials.push(record(i, label, [(key.to_string(), x)].into(), ok));
    };
    for (i, &g) in lc.iter().enumerate() {
        push(format!("layer cake field {i}"), "layer_cake_gap", g, g <= LAYER_CAKE_TOLERANCE);
    }
    for (i, &(a, m)) in au.iter().enumerate() {
        push(format!("aumann additivity field {i}"), "additivity_gap", a, a <= ADDITIVITY_TOLERANCE);
        push(format!("aumann magnitude field {i}"), "magnitude_excess", m, m <= MAGNITUDE_TOLERANCE);
    }
    for (i, &g) in or.iter().enumerate() {
        push(format!("scalar oracle field {i}"), "oracle_gap", g, g <= ORACLE_TOLERANCE);
    }
    for (i, &g) in du.iter().enumerate() {
        push(format!("matrix dual {i}"), "dual_gap", g, g <= DUAL_TOLERANCE);
    }
    for (pair, &r) in config.fixtures.iter().zip(&ord) {
        push(format!("ordering {}", pair.id()), "ordering", r, r <= 1.0 + ORDERING_TOLERANCE);
    }
    for (&(n, t), &v) in grids.iter().zip(&gv) {
        push(format!("grid n={n} tau={:?}", t.thirds()), "grid_violations", v as f64, v == 0);
    }

    checks.push(Check::over("layer cake vs ||F||_p^p, p in {1, 2, 4}", "layer_cake_gap", &trials, LAYER_CAKE_TOLERANCE, 0.0));
    checks.push(Check::over("support additivity of Aumann integrals", "additivity_gap", &trials, ADDITIVITY_TOLERANCE, 0.0));
    checks.push(Check::over("|int F| - int |F|", "magnitude_excess", &trials, MAGNITUDE_TOLERANCE, 0.0));
    checks.push(Check::over("d=1 set-valued vs scalar maximal, all tau", "oracle_gap", &trials, ORACLE_TOLERANCE, 0.0));
    checks.push(Check::over(
        format!("matrix dual: closed form vs M={DUAL_GRID} grid"),
        "dual_gap",
        &trials,
        DUAL_TOLERANCE,
        0.0,
    ));
    checks.push(Check::over(
        format!("p_t** <= p_t on {ORDERING_VECTORS} vectors per fixture"),
        "ordering",
        &trials,
        1.0 + ORDERING_TOLERANCE,
        0.0,
    ));
    checks.push(Check::over(
        format!("exact tiling and nesting, levels 0..={GRID_LEVEL}, all tau"),
        "grid_violations",
        &trials,
        0.0,
        0.0,
    ));

    let report = ExperimentReport::new(Suite::BodiesSelftest.name(), config, trials, checks);
    Ok(SuiteOutput { report, plot: Vec::new(), failures: Vec::new() })
}
