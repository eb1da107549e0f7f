//! `||M F||_q <= C_t ||F||_p` for the standard-grid fractional maximal
//! operator, with the interpolated exponents and constant.

use rayon::prelude::*;
use setval::operators::{maximal_norm_values, scalar_frac_maximal, Translation};
use setval::set_field::{lp_of_values, NormField};
use setval::{Error, Result};

use super::{failure, ratio, short, Suite, TrialSpec};
use crate::config::{ExperimentConfig, ResolvedExponents};
use crate::report::{Check, ExperimentReport, PlotPoint, SuiteOutput, TrialRecord};

/// Cellwise agreement required of the d = 1 scalar oracle.
pub const ORACLE_TOLERANCE: f64 = 1e-12;

pub fn ratio_key(e: &ResolvedExponents) -> String {
    format!("ratio[alpha={},t={}]", short(e.alpha), short(e.exps.t))
}

pub(crate) fn distinct_alphas(resolved: &[ResolvedExponents]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for e in resolved {
        if !out.contains(&e.alpha) {
            out.push(e.alpha);
        }
    }
    out
}

/// Largest relative cellwise gap between two value lists.
pub(crate) fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / y.abs().max(1.0)).fold(0.0, f64::max)
}

pub fn run(config: &ExperimentConfig) -> Result<SuiteOutput> {
    let resolved = config.marcinkiewicz_exponents().map_err(Error::Invalid)?;
    let alphas = distinct_alphas(&resolved);
    let tol = config.tolerance;

    let results: Vec<(TrialRecord, Option<setval::set_field::SetField>)> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let spec = TrialSpec::new(config, i);
            let alpha = alphas[spec.slot % alphas.len()];
            let f = spec.field(config, Suite::Marcinkiewicz)?;
            let domain = f.domain();
            let vol = domain.cell_volume();
            let mut rec = spec.record();
            rec.label = format!("{} alpha={}", rec.label, short(alpha));
            let mf = maximal_norm_values(&f, alpha, Translation::zero(spec.n), &NormField::Euclidean)?;
            let mags = f.magnitudes();
            let oracle = if spec.d == 1 { Some(scalar_frac_maximal(&domain, &mags, alpha, None)?) } else { None };
            let mut gap = oracle.as_ref().map(|o| relative_gap(&mf, o));
            for e in resolved.iter().filter(|e| e.alpha == alpha) {
                let r = ratio(lp_of_values(vol, &mf, e.exps.q)?, lp_of_values(vol, &mags, e.exps.p)?);
                rec.passed &= r <= e.exps.c_t + tol;
                rec.values.insert(ratio_key(e), r);
                if let Some(o) = &oracle {
                    let ro = ratio(lp_of_values(vol, o, e.exps.q)?, lp_of_values(vol, &mags, e.exps.p)?);
                    let g = (r - ro).abs() / ro.max(1.0);
                    gap = gap.map(|x| x.max(g));
                }
            }
            if let Some(g) = gap {
                rec.passed &= g <= ORACLE_TOLERANCE;
                rec.values.insert("oracle_gap".into(), g);
            }
            let field = (!rec.passed).then_some(f);
            Ok((rec, field))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trials = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (rec, field) in results {
        if !rec.passed {
            failures.push(failure(Suite::Marcinkiewicz, config, &rec, field));
        }
        trials.push(rec);
    }

    let mut checks: Vec<Check> = resolved
        .iter()
        .map(|e| {
            let key = ratio_key(e);
            Check::over(
                format!("||M f||_q <= C_t ||f||_p, alpha={}, t={}, p={}, q={}", short(e.alpha), short(e.exps.t), short(e.exps.p), short(e.exps.q)),
                &key,
                &trials,
                e.exps.c_t,
                tol,
            )
        })
        .collect();
    if trials.iter().any(|t| t.values.contains_key("oracle_gap")) {
        checks.push(Check::over("d=1 scalar oracle gap", "oracle_gap", &trials, ORACLE_TOLERANCE, 0.0));
    }

    let plot = trials
        .iter()
        .flat_map(|t| {
            t.values
                .iter()
                .filter(|(k, _)| k.starts_with("ratio"))
                .map(move |(k, v)| PlotPoint { x: t.index as f64, series: k.clone(), value: *v })
        })
        .collect();
    let report = ExperimentReport::new(Suite::Marcinkiewicz.name(), config, trials, checks);
    Ok(SuiteOutput { report, plot, failures })
}
