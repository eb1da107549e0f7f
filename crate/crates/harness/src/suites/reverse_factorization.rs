//! The reverse-factorization weight `(W0^2 #_t W1^2)^(1/2)`: its matrix `A_p`
//! constant over a ladder of grid levels, a scalar oracle at `d = 1`, the
//! ordering `p_t** <= p_t` and the comparability of `p_t**` with the matrix
//! mean as the direction grid is refined.
//!
//! Weight ladders live on `[0,1)` (`n = 1`): the matrix characteristic costs
//! `|Q|^2` per cube, which rules out deep two-dimensional ladders.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use setval::convex_body::{DirectionGrid, Seminorm};
use setval::matrix_calculus::{gm_double_dual_norm, matrix_norm_eval, SpdMatrix};
use setval::set_field::{DyadicDomain, NormField};
use setval::weights::{
    ap_matrix_constant, ap_norm_check, default_norm_threshold, factorization_exponent, fixture_weights,
    reverse_factorization, scalar_ap_constant, CubeFamily, FixtureKind,
};
use setval::Result;

use super::{ratio, short, Suite};
use crate::config::{ExperimentConfig, FixturePair};
use crate::report::{Check, ExperimentReport, PlotPoint, SuiteOutput, TrialRecord};
use crate::trials::trial_rng;

/// Allowed relative change of the constant between the last two levels.
pub const STABILITY: f64 = 0.1;
/// Agreement required of the scalar oracle at `d = 1`.
pub const ORACLE_TOLERANCE: f64 = 1e-9;
/// Slack of the ordering `p_t** <= p_t`.
pub const ORDERING_TOLERANCE: f64 = 1e-9;
/// Sample directions of the normwise `A_p` measurement.
const NORM_CHECK_DIRECTIONS: usize = 64;
/// Vectors per fixture in the ordering check.
pub const ORDERING_VECTORS: usize = 1000;
/// Dimensions of the comparability measurement.
pub const COMPARABILITY_DIMS: [usize; 2] = [2, 3];

const STREAM: u64 = 4;

/// A uniformly random unit vector.
pub fn unit_vector(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > 1e-3 && r <= 1.0 {
            return v.into_iter().map(|x| x / r).collect();
        }
    }
}

/// `B^T B + I / 5` with `B` uniform in `[-1, 1]`.
pub fn random_spd(rng: &mut ChaCha8Rng, dim: usize) -> Result<SpdMatrix> {
    let b: Vec<f64> = (0..dim * dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let mut m = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in 0..dim {
            m[i * dim + j] = (0..dim).map(|k| b[k * dim + i] * b[k * dim + j]).sum::<f64>();
            if i == j {
                m[i * dim + j] += 0.2;
            }
        }
    }
    SpdMatrix::from_row_slice(dim, &m)
}

/// Values measured for one fixture at one level.
#[derive(Clone, Debug)]
pub struct LadderPoint {
    pub level: u32,
    pub constant: f64,
    pub w0: f64,
    pub w1: f64,
    pub norm_ratio: f64,
    pub oracle: Option<f64>,
}

pub fn ladder_point(pair: &FixturePair, level: u32, config: &ExperimentConfig) -> Result<LadderPoint> {
    let domain = DyadicDomain::new(1, level)?;
    let w0 = fixture_weights(&pair.w0, domain)?;
    let w1 = fixture_weights(&pair.w1, domain)?;
    let wbar = reverse_factorization(&w0, &w1, pair.t)?;
    let p = factorization_exponent(pair.p0, pair.p1, pair.t, config.convention)?;
    let cubes = CubeFamily::Translated.cubes(&domain);
    let id = pair.id();
    let constant = ap_matrix_constant(&wbar, p, &cubes, &id)?.supremum;
    let a0 = ap_matrix_constant(&w0, pair.p0, &cubes, &pair.w0.id())?.supremum;
    let a1 = ap_matrix_constant(&w1, pair.p1, &cubes, &pair.w1.id())?.supremum;

    let dim = pair.dim();
    let grid = DirectionGrid::new(dim, config.grid_size)?;
    let mut rng = trial_rng(config.seed, STREAM, 3_000_000 + level as usize);
    let dirs: Vec<Vec<f64>> = if dim == 1 {
        vec![vec![1.0]]
    } else {
        (0..NORM_CHECK_DIRECTIONS).map(|_| unit_vector(&mut rng, dim)).collect()
    };
    let rho = NormField::Matrix { matrix_field: wbar.clone() };
    let norm = ap_norm_check(&rho, &domain, dim, p, &cubes, &grid, &dirs, default_norm_threshold(dim))?;

    let oracle = if dim == 1 {
        let w: Vec<f64> = w0
            .cells()
            .iter()
            .zip(w1.cells())
            .map(|(a, b)| {
                let (a, b) = (a.matrix()[(0, 0)], b.matrix()[(0, 0)]);
                (a.powf(1.0 - pair.t) * b.powf(pair.t)).powf(p)
            })
            .collect();
        Some(scalar_ap_constant(&w, &domain, p, &cubes)?.powf(1.0 / p))
    } else {
        None
    };
    Ok(LadderPoint { level, constant, w0: a0, w1: a1, norm_ratio: norm.measured, oracle })
}

/// `max p_t**(v) / p_t(v)` over `count` random vectors, cycling through the
/// cells of the coarsest ladder level.
pub fn ordering_ratio(pair: &FixturePair, level: u32, grid_size: usize, rng: &mut ChaCha8Rng, count: usize) -> Result<f64> {
    let domain = DyadicDomain::new(1, level)?;
    let w0 = fixture_weights(&pair.w0, domain)?;
    let w1 = fixture_weights(&pair.w1, domain)?;
    let cells = domain.num_cells();
    let mut norms = Vec::with_capacity(cells);
    for c in 0..cells {
        let (a, b) = (w0.get(c)?, w1.get(c)?);
        let (pss, _) = gm_double_dual_norm(a, b, pair.t, grid_size)?;
        let pt = Seminorm::geometric_mean(a.norm(), b.norm(), pair.t)?;
        norms.push((pss, pt));
    }
    let mut worst = 0.0f64;
    for j in 0..count {
        let v = unit_vector(rng, pair.dim());
        let (pss, pt) = &norms[j % cells];
        worst = worst.max(ratio(pss.eval(&v)?, pt.eval(&v)?));
    }
    Ok(worst)
}

/// `[c1, c2]` bounds of `p_t**(v) / |(W0^2 #_t W1^2)^(1/2) v|` over `dirs`
/// for each grid size. `c1` uses the inner grid approximation of `p_t**` and
/// `c2` the outer one, so `[c1, c2]` contains the exact range.
pub fn comparability(w0: &SpdMatrix, w1: &SpdMatrix, t: f64, ladder: &[usize], dirs: &[Vec<f64>]) -> Result<Vec<(f64, f64)>> {
    ladder
        .iter()
        .map(|&m| {
            let (pss, comp) = gm_double_dual_norm(w0, w1, t, m)?;
            let Seminorm::GeomMeanDoubleDual(g) = &pss else {
                unreachable!("gm_double_dual_norm returns a grid double dual")
            };
            let outer = g.outer_body()?;
            let mut lo = f64::INFINITY;
            let mut hi = 0.0f64;
            for v in dirs {
                let c = matrix_norm_eval(comp.matrix(), v)?;
                lo = lo.min(g.eval(v)? / c);
                hi = hi.max(outer.gauge(v)? / c);
            }
            Ok((lo, hi))
        })
        .collect()
}

fn is_identity(k: &FixtureKind) -> bool {
    matches!(k, FixtureKind::Identity { .. })
}

/// Records, checks and plot points of one part of the suite.
#[derive(Default)]
pub struct Section {
    pub trials: Vec<TrialRecord>,
    pub checks: Vec<Check>,
    pub plot: Vec<PlotPoint>,
}

impl Section {
    fn push(&mut self, label: String, values: std::collections::BTreeMap<String, f64>, passed: bool) {
        self.trials.push(TrialRecord { index: self.trials.len(), kind: None, label, values, passed });
    }
}

/// `A_p` ladders, the scalar oracle and the ordering `p_t** <= p_t` for
/// every fixture.
pub fn ladders(config: &ExperimentConfig) -> Result<Section> {
    let tol = config.tolerance;
    let mut out = Section::default();

    let jobs: Vec<(usize, u32)> = (0..config.fixtures.len())
        .flat_map(|f| config.ap_levels.iter().map(move |&k| (f, k)))
        .collect();
    let points: Vec<LadderPoint> =
        jobs.par_iter().map(|&(f, k)| ladder_point(&config.fixtures[f], k, config)).collect::<Result<Vec<_>>>()?;
    let first_level = *config.ap_levels.iter().min().expect("validated nonempty");
    let orderings: Vec<f64> = config
        .fixtures
        .par_iter()
        .enumerate()
        .map(|(i, pair)| {
            let mut rng = trial_rng(config.seed, STREAM, 1_000_000 + i);
            ordering_ratio(pair, first_level, config.grid_size, &mut rng, ORDERING_VECTORS)
        })
        .collect::<Result<Vec<_>>>()?;

    let levels = config.ap_levels.len();
    for (fi, pair) in config.fixtures.iter().enumerate() {
        let id = pair.id();
        let ladder = &points[fi * levels..(fi + 1) * levels];
        for pt in ladder {
            let mut values = std::collections::BTreeMap::new();
            values.insert("ap_bar".to_string(), pt.constant);
            values.insert("ap_w0".to_string(), pt.w0);
            values.insert("ap_w1".to_string(), pt.w1);
            values.insert("norm_ratio".to_string(), pt.norm_ratio);
            let mut passed = pt.constant.is_finite() && pt.w0.is_finite() && pt.w1.is_finite();
            if let Some(o) = pt.oracle {
                let gap = (pt.constant - o).abs() / o;
                values.insert("oracle_gap".to_string(), gap);
                passed &= gap <= ORACLE_TOLERANCE;
                out.checks.push(Check::new(format!("{id} level={}: scalar A_p oracle gap", pt.level), gap, ORACLE_TOLERANCE, 0.0));
            }
            for (k, v) in [("ap_bar", pt.constant), ("ap_w0", pt.w0), ("ap_w1", pt.w1), ("norm_ratio", pt.norm_ratio)] {
                out.plot.push(PlotPoint { x: f64::from(pt.level), series: format!("{id} {k}"), value: v });
            }
            out.push(format!("{id} level={}", pt.level), values, passed);
        }
        out.checks.push(Check::flag(
            format!("{id}: finite A_p0 and A_p1 constants of W0, W1"),
            ladder.iter().all(|p| p.w0.is_finite() && p.w1.is_finite()),
        ));
        if let [.., a, b] = ladder {
            out.checks.push(Check::new(
                format!("{id}: relative change of [W]_Ap from level {} to {}", a.level, b.level),
                ratio((b.constant - a.constant).abs(), a.constant),
                STABILITY,
                0.0,
            ));
        }
        if is_identity(&pair.w0) && is_identity(&pair.w1) {
            let worst = ladder.iter().map(|p| (p.constant - 1.0).abs()).fold(0.0, f64::max);
            out.checks.push(Check::new(format!("{id}: identity weights give constant 1"), worst, tol, 0.0));
        }
        let ord = orderings[fi];
        out.push(
            format!("{id} ordering level={first_level}"),
            [("ordering".to_string(), ord)].into(),
            ord <= 1.0 + ORDERING_TOLERANCE,
        );
        out.checks.push(Check::new(
            format!("{id}: max p_t** / p_t over {ORDERING_VECTORS} vectors"),
            ord,
            1.0 + ORDERING_TOLERANCE,
            0.0,
        ));
    }
    Ok(out)
}

/// `[c1, c2]` of random SPD pairs as the direction grid is refined; the
/// spread `c2/c1` must not grow.
pub fn comparability_study(config: &ExperimentConfig) -> Result<Section> {
    let mut out = Section::default();
    let pairs: Vec<(usize, usize)> = COMPARABILITY_DIMS
        .iter()
        .flat_map(|&d| (0..config.comparability_pairs).map(move |j| (d, j)))
        .collect();
    let spreads: Vec<Vec<(f64, f64)>> = pairs
        .par_iter()
        .map(|&(d, j)| {
            let mut rng = trial_rng(config.seed, STREAM, 2_000_000 + 10_000 * d + j);
            let w0 = random_spd(&mut rng, d)?;
            let w1 = random_spd(&mut rng, d)?;
            let t = config.ts[j % config.ts.len()];
            let dirs: Vec<Vec<f64>> = (0..config.comparability_directions).map(|_| unit_vector(&mut rng, d)).collect();
            comparability(&w0, &w1, t, &config.grid_ladder, &dirs)
        })
        .collect::<Result<Vec<_>>>()?;
    for &d in &COMPARABILITY_DIMS {
        let mut worst_increase = 0.0f64;
        let mut final_spread = 0.0f64;
        for ((pd, j), bounds) in pairs.iter().zip(&spreads) {
            if *pd != d {
                continue;
            }
            let mut prev: Option<f64> = None;
            for (&m, &(c1, c2)) in config.grid_ladder.iter().zip(bounds) {
                let spread = c2 / c1;
                if let Some(s) = prev {
                    worst_increase = worst_increase.max(spread / s - 1.0);
                }
                prev = Some(spread);
                out.push(
                    format!("comparability d={d} pair={j} M={m}"),
                    [("c1".to_string(), c1), ("c2".to_string(), c2), ("spread".to_string(), spread)].into(),
                    c1 > 0.0 && c2.is_finite(),
                );
                out.plot.push(PlotPoint { x: m as f64, series: format!("spread d={d} pair={j}"), value: spread });
            }
            final_spread = final_spread.max(prev.unwrap_or(1.0));
        }
        out.checks.push(Check::new(
            format!(
                "d={d}: c2/c1 non-increasing over M = {:?} (final max c2/c1 = {})",
                config.grid_ladder,
                short(final_spread)
            ),
            worst_increase,
            0.0,
            1e-12,
        ));
    }
    Ok(out)
}

pub fn run(config: &ExperimentConfig) -> Result<SuiteOutput> {
    let mut all = ladders(config)?;
    let comp = comparability_study(config)?;
    let offset = all.trials.len();
    all.trials.extend(comp.trials.into_iter().map(|mut t| {
        t.index += offset;
        t
    }));
    all.checks.extend(comp.checks);
    all.plot.extend(comp.plot);
    let Section { trials, checks, plot } = all;
    let failures = trials
        .iter()
        .filter(|t| !t.passed)
        .map(|t| super::failure(Suite::ReverseFactorization, config, t, None))
        .collect();
    let report = ExperimentReport::new(Suite::ReverseFactorization.name(), config, trials, checks);
    Ok(SuiteOutput { report, plot, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_spd_is_well_conditioned() {
        let mut rng = trial_rng(1, 9, 0);
        for d in 1..=3 {
            let m = random_spd(&mut rng, d).unwrap();
            assert!(m.condition_number() < 1e4);
        }
    }

    #[test]
    fn commuting_pair_sits_above_the_matrix_mean() {
        // For commuting weights |A^(1-t) B^t v| is a norm below p_t, hence
        // below p_t**, up to the grid error.
        let a = SpdMatrix::diagonal(&[2.0, 1.0]).unwrap();
        let b = SpdMatrix::diagonal(&[1.0, 3.0]).unwrap();
        let mut rng = trial_rng(1, 9, 1);
        let dirs: Vec<Vec<f64>> = (0..200).map(|_| unit_vector(&mut rng, 2)).collect();
        let b_ = comparability(&a, &b, 0.5, &[720], &dirs).unwrap();
        assert!(b_[0].0 > 1.0 - 1e-4, "{:?}", b_[0]);
        assert!(b_[0].1 >= b_[0].0);
    }
}
