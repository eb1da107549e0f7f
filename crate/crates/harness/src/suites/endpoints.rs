//! Endpoint bounds of the fractional averaging and maximal operators, and
//! the interpolated strong bounds between them.
//!
//! All values are stored as ratios against their bound, so every check reads
//! `max ratio <= 1` except the intermediate ones, which compare with `C_t`.

use rayon::prelude::*;
use setval::operators::{cube_family, frac_average, maximal_norm_values, ExponentConfig, Translation};
use setval::set_field::{lp_of_values, DistributionTable, NormField, SetField};
use setval::Result;

use super::{failure, ratio, short, Suite, TrialSpec};
use crate::config::ExperimentConfig;
use crate::report::{Check, ExperimentReport, PlotPoint, SuiteOutput, TrialRecord};

/// The four endpoint series, keyed by operator and exponent pair.
pub const SERIES: [(&str, &str); 4] = [
    ("aq_strong_1", "A_Q strong (1, 1/(1-alpha))"),
    ("aq_strong_inf", "A_Q strong (1/alpha, inf)"),
    ("m_weak_1", "M weak (1, 1/(1-alpha))"),
    ("m_strong_inf", "M strong (1/alpha, inf)"),
];

pub fn key(series: &str, alpha: f64) -> String {
    format!("{series}[alpha={}]", short(alpha))
}

pub fn pq_key(alpha: f64, t: f64) -> String {
    format!("m_pq[alpha={},t={}]", short(alpha), short(t))
}

/// Endpoint ratios of one field for one alpha. The averaging bounds use
/// every cube of grid `tau`; the maximal bounds use the standard grid,
/// whose cell values are returned alongside.
pub fn endpoint_ratios(f: &SetField, alpha: f64, tau: Translation) -> Result<([f64; 4], Vec<f64>)> {
    let domain = f.domain();
    let vol = domain.cell_volume();
    let mags = f.magnitudes();
    let l1 = lp_of_values(vol, &mags, 1.0)?;
    let l_inv = lp_of_values(vol, &mags, 1.0 / alpha)?;
    let s = 1.0 / (1.0 - alpha);

    let mut aq1 = 0.0f64;
    let mut aq_inf = 0.0f64;
    for q in cube_family(&domain, tau) {
        let m = frac_average(f, &q, alpha)?.magnitude();
        let v = q.clipped_volume(&domain)?;
        aq1 = aq1.max(ratio(m * v.powf(1.0 / s), l1));
        aq_inf = aq_inf.max(ratio(m, l_inv));
    }

    let mf = maximal_norm_values(f, alpha, Translation::zero(domain.n()), &NormField::Euclidean)?;
    let weak = DistributionTable::from_values(vol, &mf).weak_norm(s)?;
    let sup = lp_of_values(vol, &mf, f64::INFINITY)?;
    Ok(([aq1, aq_inf, ratio(weak, l1), ratio(sup, l_inv)], mf))
}

pub fn run(config: &ExperimentConfig) -> Result<SuiteOutput> {
    let tol = config.tolerance;
    let results: Vec<(TrialRecord, Option<SetField>)> = (0..config.trials)
        .into_par_iter()
        .map(|i| {
            let spec = TrialSpec::new(config, i);
            let f = spec.field(config, Suite::Endpoints)?;
            let taus = Translation::all(spec.n);
            let tau = taus[i % taus.len()];
            let mut rec = spec.record();
            rec.label = format!("{} tau={:?}", rec.label, tau.thirds());
            let vol = f.domain().cell_volume();
            let mags = f.magnitudes();
            for &alpha in &config.alphas {
                let (r, mf) = endpoint_ratios(&f, alpha, tau)?;
                for ((name, _), x) in SERIES.iter().zip(r) {
                    rec.passed &= x <= 1.0 + tol;
                    rec.values.insert(key(name, alpha), x);
                }
                for &t in &config.ts {
                    let e = ExponentConfig::fractional_maximal(alpha, t)?;
                    let x = ratio(lp_of_values(vol, &mf, e.q)?, lp_of_values(vol, &mags, e.p)?);
                    rec.passed &= x <= e.c_t + tol;
                    rec.values.insert(pq_key(alpha, t), x);
                }
            }
            let field = (!rec.passed).then_some(f);
            Ok((rec, field))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut trials = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for (rec, field) in results {
        if !rec.passed {
            failures.push(failure(Suite::Endpoints, config, &rec, field));
        }
        trials.push(rec);
    }

    let mut checks = Vec::new();
    for &alpha in &config.alphas {
        for (name, what) in SERIES {
            checks.push(Check::over(format!("{what}, alpha={}", short(alpha)), &key(name, alpha), &trials, 1.0, tol));
        }
        for &t in &config.ts {
            let e = ExponentConfig::fractional_maximal(alpha, t)?;
            checks.push(Check::over(
                format!("M strong (p, q) <= C_t, alpha={}, t={}", short(alpha), short(t)),
                &pq_key(alpha, t),
                &trials,
                e.c_t,
                tol,
            ));
        }
    }

    let plot = trials
        .iter()
        .flat_map(|t| t.values.iter().map(move |(k, v)| PlotPoint { x: t.index as f64, series: k.clone(), value: *v }))
        .collect();
    let report = ExperimentReport::new(Suite::Endpoints.name(), config, trials, checks);
    Ok(SuiteOutput { report, plot, failures })
}
