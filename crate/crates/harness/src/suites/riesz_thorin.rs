//! Boundedness of the averaging operators `A_Q` on `L^p(rho_t**)`, where
//! `rho_t**` is the cellwise double dual of the geometric mean of two
//! matrix-induced norms. The sup over fields and cubes is measured at a
//! ladder of grid levels and must stay finite without blowing up.

use std::collections::HashMap;

use rayon::prelude::*;
use setval::convex_body::{ConvexBody, Seminorm};
use setval::matrix_calculus::{gm_double_dual_norm, MatrixField};
use setval::numeric::compensated_sum;
use setval::operators::{frac_average, DyadicCube};
use setval::set_field::{DyadicDomain, NormField, SetField};
use setval::weights::{factorization_exponent, fixture_weights, CubeFamily, FixtureKind};
use setval::Result;

use super::{failure, ratio, short, Suite};
use crate::config::{ExperimentConfig, FixturePair};
use crate::report::{Check, ExperimentReport, PlotPoint, SuiteOutput, TrialRecord};
use crate::trials::{trial_field, trial_rng, TrialKind};

/// Largest allowed level-over-level growth of the measured constant.
pub const MAX_GROWTH: f64 = 2.0;

/// Cellwise `rho_t**` of `|W0 v|` and `|W1 v|`. Cells with equal matrix
/// pairs share one norm.
pub fn double_dual_field(w0: &MatrixField, w1: &MatrixField, t: f64, grid_size: usize) -> Result<NormField> {
    let mut cache: HashMap<Vec<u64>, Seminorm> = HashMap::new();
    let mut norms = Vec::with_capacity(w0.cells().len());
    let probe = vec![1.0; w0.dim()];
    for (a, b) in w0.cells().iter().zip(w1.cells()) {
        let key: Vec<u64> = a.matrix().iter().chain(b.matrix().iter()).map(|x| x.to_bits()).collect();
        if let Some(n) = cache.get(&key) {
            norms.push(n.clone());
            continue;
        }
        let (norm, _) = gm_double_dual_norm(a, b, t, grid_size)?;
        // Forces the polar body once so clones share the work.
        norm.eval(&probe)?;
        cache.insert(key, norm.clone());
        norms.push(norm);
    }
    Ok(NormField::PerCell { norms })
}

/// `sup_Q ||A_Q F||_{L^p(rho)} / ||F||_{L^p(rho)}` for several `(rho, p)` at
/// once, over the given cubes.
pub fn averaging_sup(f: &SetField, norms: &[(&NormField, f64)], cubes: &[DyadicCube]) -> Result<Vec<f64>> {
    let domain = f.domain();
    let vol = domain.cell_volume();
    let dens = norms
        .iter()
        .map(|(rho, p)| {
            let terms = f
                .cells()
                .iter()
                .enumerate()
                .map(|(c, b)| Ok(vol * rho.eval_body(c, b)?.powf(*p)))
                .collect::<Result<Vec<f64>>>()?;
            Ok(compensated_sum(terms))
        })
        .collect::<Result<Vec<f64>>>()?;
    let mut sups = vec![0.0f64; norms.len()];
    for q in cubes {
        let avg: ConvexBody = frac_average(f, q, 0.0)?;
        let w = q.cell_weights(&domain)?;
        for (i, (rho, p)) in norms.iter().enumerate() {
            let terms = w
                .iter()
                .map(|&(c, frac)| Ok(frac * vol * rho.eval_body(c, &avg)?.powf(*p)))
                .collect::<Result<Vec<f64>>>()?;
            let r = ratio(compensated_sum(terms), dens[i]).powf(1.0 / p);
            sups[i] = sups[i].max(r);
        }
    }
    Ok(sups)
}

struct Setting {
    fixture: usize,
    n: usize,
    level: u32,
    p: f64,
    rho0: NormField,
    rho1: NormField,
    rho: NormField,
    cubes: Vec<DyadicCube>,
}

fn group(pair: &FixturePair, n: usize) -> String {
    format!("{} n={n}", pair.id())
}

pub fn run(config: &ExperimentConfig) -> Result<SuiteOutput> {
    let tol = config.tolerance;
    let mut keys = Vec::new();
    for (fi, pair) in config.fixtures.iter().enumerate() {
        for &n in &config.ns {
            for &level in &config.riesz_thorin_levels {
                keys.push((fi, pair, n, level));
            }
        }
    }
    let settings: Vec<Setting> = keys
        .par_iter()
        .map(|&(fixture, pair, n, level)| {
            let domain = DyadicDomain::new(n, level)?;
            let w0 = fixture_weights(&pair.w0, domain)?;
            let w1 = fixture_weights(&pair.w1, domain)?;
            let p = factorization_exponent(pair.p0, pair.p1, pair.t, config.convention)?;
            let rho = double_dual_field(&w0, &w1, pair.t, config.grid_size)?;
            Ok(Setting {
                fixture,
                n,
                level,
                p,
                rho0: NormField::Matrix { matrix_field: w0 },
                rho1: NormField::Matrix { matrix_field: w1 },
                rho,
                cubes: CubeFamily::Standard.cubes(&domain),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let per = config.riesz_thorin_fields;
    let field = |index: usize| -> Result<SetField> {
        let s = &settings[index / per];
        let domain = DyadicDomain::new(s.n, s.level)?;
        let kind = TrialKind::for_trial(index % per);
        trial_field(kind, domain, config.fixtures[s.fixture].dim(), &mut trial_rng(config.seed, 3, index))
    };
    let trials: Vec<TrialRecord> = (0..settings.len() * per)
        .into_par_iter()
        .map(|index| {
            let s = &settings[index / per];
            let pair = &config.fixtures[s.fixture];
            let kind = TrialKind::for_trial(index % per);
            let f = field(index)?;
            let sups = averaging_sup(&f, &[(&s.rho, s.p), (&s.rho0, pair.p0), (&s.rho1, pair.p1)], &s.cubes)?;
            let mut rec = TrialRecord {
                index,
                kind: Some(kind),
                label: format!("{} level={}", group(pair, s.n), s.level),
                values: Default::default(),
                passed: sups.iter().all(|x| x.is_finite() && *x < f64::MAX),
            };
            for (name, x) in ["m_theta", "m0", "m1"].into_iter().zip(sups) {
                rec.values.insert(name.into(), x);
            }
            Ok(rec)
        })
        .collect::<Result<Vec<_>>>()?;
    let failures = trials
        .iter()
        .filter(|r| !r.passed)
        .map(|r| Ok(failure(Suite::RieszThorin, config, r, Some(field(r.index)?))))
        .collect::<Result<Vec<_>>>()?;

    let mut checks = Vec::new();
    let mut plot = Vec::new();
    for (fi, pair) in config.fixtures.iter().enumerate() {
        for &n in &config.ns {
            let g = group(pair, n);
            let mut prev: Option<f64> = None;
            for (si, s) in settings.iter().enumerate() {
                if s.fixture != fi || s.n != n {
                    continue;
                }
                let recs = &trials[si * per..(si + 1) * per];
                let sup = |k: &str| recs.iter().map(|r| r.values[k]).fold(0.0, f64::max);
                let m = sup("m_theta");
                for k in ["m_theta", "m0", "m1"] {
                    plot.push(PlotPoint { x: f64::from(s.level), series: format!("{g} {k}"), value: sup(k) });
                }
                checks.push(Check::flag(
                    format!("{g} level={}: M_theta finite (measured {})", s.level, short(m)),
                    recs.iter().all(|r| r.passed),
                ));
                if let Some(pm) = prev {
                    checks.push(Check::new(
                        format!("{g} level={}: growth of M_theta over the previous level", s.level),
                        ratio(m, pm),
                        MAX_GROWTH,
                        tol,
                    ));
                }
                if matches!(pair.w0, FixtureKind::Identity { .. }) && matches!(pair.w1, FixtureKind::Identity { .. }) {
                    checks.push(Check::new(format!("{g} level={}: Euclidean M_theta <= 1", s.level), m, 1.0, tol));
                }
                prev = Some(m);
            }
        }
    }

    let report = ExperimentReport::new(Suite::RieszThorin.name(), config, trials, checks);
    Ok(SuiteOutput { report, plot, failures })
}
