//! Matrix `A_p` characteristics, averaged norm functions and the reverse
//! factorization `(W0^2 #_t W1^2)^(1/2)`.
//!
//! Constants follow the double-average form stated directly in `W`:
//! for `d = 1` and `W = w^(1/p)` the matrix constant is `[w]_{A_p}^(1/p)`,
//! see [`scalar_ap_constant`].

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::convex_body::{DirectionGrid, GridDual, Seminorm};
use crate::matrix_calculus::{geometric_mean, operator_norm, MatrixField, SpdMatrix};
use crate::numeric::{compensated_sum, conjugate_exponent};
use crate::operators::{cube_family, DyadicCube, Translation};
use crate::set_field::{DyadicDomain, NormField, SetField};
use crate::{Error, Result};

/// Condition-number cap for weight fixtures.
pub const WEIGHT_CONDITION_LIMIT: f64 = 1e6;

/// Which translated grids contribute cubes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeFamily {
    /// Levels `0..=k` of the standard grid.
    Standard,
    /// Levels `0..=k` of all `3^n` grids `D^tau`, clipped to the domain.
    Translated,
}

impl CubeFamily {
    pub fn cubes(self, domain: &DyadicDomain) -> Vec<DyadicCube> {
        match self {
            CubeFamily::Standard => cube_family(domain, Translation::zero(domain.n())),
            CubeFamily::Translated => Translation::all(domain.n())
                .into_iter()
                .flat_map(|tau| cube_family(domain, tau))
                .collect(),
        }
    }

    pub fn describe(self, domain: &DyadicDomain) -> String {
        match self {
            CubeFamily::Standard => format!("standard dyadic, levels 0..={}", domain.level()),
            CubeFamily::Translated => {
                format!("all 3^{} translated grids, levels 0..={}, clipped", domain.n(), domain.level())
            }
        }
    }
}

/// Cells met by `q` with their share of the clipped cube, summing to 1.
fn cube_measure(q: &DyadicCube, domain: &DyadicDomain) -> Result<Vec<(usize, f64)>> {
    let w = q.cell_weights(domain)?;
    let total = compensated_sum(w.iter().map(|(_, f)| *f));
    Ok(w.into_iter().map(|(c, f)| (c, f / total)).collect())
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("A_p exponent p = {p} must lie in (1, inf)")))
    }
}

/// One cube's inner value.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeValue {
    pub translation: Vec<i8>,
    pub level: i32,
    pub coords: Vec<i64>,
    pub value: f64,
}

impl CubeValue {
    fn new(q: &DyadicCube, value: f64) -> Self {
        Self {
            translation: q.translation().thirds().to_vec(),
            level: q.level(),
            coords: q.coords().to_vec(),
            value,
        }
    }
}

/// Per-cube values of an `A_p` characteristic and their supremum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApReport {
    /// `p`, or 1 for the `A_1` constant.
    pub p: f64,
    pub family: String,
    pub level: u32,
    pub fixture: String,
    pub cubes: Vec<CubeValue>,
    pub supremum: f64,
}

impl ApReport {
    fn assemble(p: f64, family: String, level: u32, fixture: &str, cubes: Vec<CubeValue>) -> Self {
        let supremum = cubes.iter().map(|c| c.value).fold(0.0, f64::max);
        Self { p, family, level, fixture: fixture.to_string(), cubes, supremum }
    }

    pub fn csv_header() -> &'static str {
        "fixture,p,level,constant"
    }

    pub fn csv_row(&self) -> String {
        format!("{},{},{},{}", self.fixture, self.p, self.level, self.supremum)
    }
}

fn describe_cubes(cubes: &[DyadicCube], domain: &DyadicDomain) -> String {
    let taus: std::collections::BTreeSet<Vec<i8>> =
        cubes.iter().map(|q| q.translation().thirds().to_vec()).collect();
    format!("{} cubes from {} grid(s), domain level {}", cubes.len(), taus.len(), domain.level())
}

fn inverses(w: &MatrixField) -> Result<Vec<DMatrix<f64>>> {
    w.cells().iter().map(|m| Ok(m.inverse()?.into_matrix())).collect()
}

/// `[W]_{A_p,matrix}` over `cubes`: for each cube the double average
/// `(avg_x (avg_y |W(x) W^-1(y)|^p')^(p/p'))^(1/p)`.
pub fn ap_matrix_constant(w: &MatrixField, p: f64, cubes: &[DyadicCube], fixture: &str) -> Result<ApReport> {
    check_p(p)?;
    let domain = w.domain();
    let pp = conjugate_exponent(p);
    let inv = inverses(w)?;
    let mut values = Vec::with_capacity(cubes.len());
    for q in cubes {
        let mu = cube_measure(q, &domain)?;
        let outer = compensated_sum(mu.iter().map(|&(x, ax)| {
            let wx = w.cells()[x].matrix();
            let inner = compensated_sum(
                mu.iter().map(|&(y, ay)| ay * operator_norm(&(wx * &inv[y])).powf(pp)),
            );
            ax * inner.powf(p / pp)
        }));
        values.push(CubeValue::new(q, outer.powf(1.0 / p)));
    }
    Ok(ApReport::assemble(p, describe_cubes(cubes, &domain), domain.level(), fixture, values))
}

/// `[W]_{A_1,matrix}`: per cube `max_x avg_y |W^-1(x) W(y)|`.
pub fn a1_matrix_constant(w: &MatrixField, cubes: &[DyadicCube], fixture: &str) -> Result<ApReport> {
    let domain = w.domain();
    let inv = inverses(w)?;
    let mut values = Vec::with_capacity(cubes.len());
    for q in cubes {
        let mu = cube_measure(q, &domain)?;
        let mut best = 0.0f64;
        for &(x, _) in &mu {
            let avg = compensated_sum(
                mu.iter().map(|&(y, ay)| ay * operator_norm(&(&inv[x] * w.cells()[y].matrix()))),
            );
            best = best.max(avg);
        }
        values.push(CubeValue::new(q, best));
    }
    Ok(ApReport::assemble(1.0, describe_cubes(cubes, &domain), domain.level(), fixture, values))
}

/// Classical `[w]_{A_p} = sup_Q <w>_Q <w^(1-p')>_Q^(p-1)` of a positive cell
/// function.
pub fn scalar_ap_constant(w: &[f64], domain: &DyadicDomain, p: f64, cubes: &[DyadicCube]) -> Result<f64> {
    check_p(p)?;
    check_scalar(w, domain)?;
    let e = 1.0 - conjugate_exponent(p);
    let mut sup = 0.0f64;
    for q in cubes {
        let mu = cube_measure(q, domain)?;
        let a = compensated_sum(mu.iter().map(|&(c, m)| m * w[c]));
        let b = compensated_sum(mu.iter().map(|&(c, m)| m * w[c].powf(e)));
        sup = sup.max(a * b.powf(p - 1.0));
    }
    Ok(sup)
}

/// Classical `[w]_{A_1} = sup_Q <w>_Q / min_Q w`.
pub fn scalar_a1_constant(w: &[f64], domain: &DyadicDomain, cubes: &[DyadicCube]) -> Result<f64> {
    check_scalar(w, domain)?;
    let mut sup = 0.0f64;
    for q in cubes {
        let mu = cube_measure(q, domain)?;
        let a = compensated_sum(mu.iter().map(|&(c, m)| m * w[c]));
        let lo = mu.iter().map(|&(c, _)| w[c]).fold(f64::INFINITY, f64::min);
        sup = sup.max(a / lo);
    }
    Ok(sup)
}

fn check_scalar(w: &[f64], domain: &DyadicDomain) -> Result<()> {
    if w.len() != domain.num_cells() {
        return Err(Error::DomainMismatch(format!("{} values for {} cells", w.len(), domain.num_cells())));
    }
    if w.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Invalid("scalar weight must be positive and finite".into()));
    }
    Ok(())
}

/// `<rho>_{p,Q}(v) = (avg_Q rho_x(v)^p)^(1/p)`, with `Q` clipped to the domain.
pub fn rho_average(rho: &NormField, domain: &DyadicDomain, p: f64, q: &DyadicCube, v: &[f64]) -> Result<f64> {
    let mu = cube_measure(q, domain)?;
    average_on(&mu, p, |c| rho.eval(c, v))
}

fn average_on<F: Fn(usize) -> Result<f64>>(mu: &[(usize, f64)], p: f64, f: F) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::OutOfRange(format!("average exponent p = {p} must be >= 1")));
    }
    if p.is_infinite() {
        let mut m = 0.0f64;
        for &(c, _) in mu {
            m = m.max(f(c)?);
        }
        return Ok(m);
    }
    let terms = mu.iter().map(|&(c, a)| Ok(a * f(c)?.powf(p))).collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(terms).powf(1.0 / p))
}

/// Default pass threshold of [`ap_norm_check`]: `10 d`.
pub fn default_norm_threshold(dim: usize) -> f64 {
    10.0 * dim as f64
}

/// Outcome of [`ap_norm_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApNormVerdict {
    pub p: f64,
    /// `sup_{Q, v} <rho*>_{p',Q}(v) / <rho>_{p,Q}*(v)`.
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
    pub worst_cube: Option<CubeValue>,
}

/// Measures the ratio `<rho*>_{p',Q}(v) / <rho>_{p,Q}*(v)` over cubes and
/// sample directions. The dual of the averaged norm comes from the direction
/// grid; the pointwise duals use closed forms where available.
#[allow(clippy::too_many_arguments)]
pub fn ap_norm_check(
    rho: &NormField,
    domain: &DyadicDomain,
    dim: usize,
    p: f64,
    cubes: &[DyadicCube],
    grid: &DirectionGrid,
    directions: &[Vec<f64>],
    threshold: f64,
) -> Result<ApNormVerdict> {
    check_p(p)?;
    rho.check(domain, dim)?;
    if grid.dim() != dim {
        return Err(Error::DimensionMismatch { expected: dim, got: grid.dim() });
    }
    let pp = conjugate_exponent(p);
    let norms = (0..domain.num_cells()).map(|c| rho.seminorm(c)).collect::<Result<Vec<Seminorm>>>()?;
    let mut measured = 0.0f64;
    let mut worst = None;
    for q in cubes {
        let mu = cube_measure(q, domain)?;
        let avg = |w: &[f64]| average_on(&mu, p, |c| norms[c].eval(w));
        let dual = GridDual::new(avg, grid)?;
        let mut cube_sup = 0.0f64;
        for v in directions {
            let den = dual.eval(v)?;
            if den == 0.0 {
                continue;
            }
            let num = average_on(&mu, pp, |c| norms[c].dual_eval(v))?;
            cube_sup = cube_sup.max(num / den);
        }
        if cube_sup > measured || worst.is_none() {
            measured = measured.max(cube_sup);
            worst = Some(CubeValue::new(q, cube_sup));
        }
    }
    Ok(ApNormVerdict { p, measured, threshold, passed: measured <= threshold, worst_cube: worst })
}

/// `||A_Q F||_{L^p(rho)} / ||F||_{L^p(rho)}` for the plain average
/// `A_Q F = chi_Q <F>_Q`; zero when `F` vanishes.
pub fn averaging_ratio(f: &SetField, rho: &NormField, p: f64, q: &DyadicCube) -> Result<f64> {
    let domain = f.domain();
    rho.check(&domain, f.dim())?;
    let avg = crate::operators::frac_average(f, q, 0.0)?;
    let vol = domain.cell_volume();
    let w = q.cell_weights(&domain)?;
    let out = w
        .iter()
        .map(|&(c, frac)| Ok(frac * vol * rho.eval_body(c, &avg)?.powf(p)))
        .collect::<Result<Vec<f64>>>()?;
    let input = f
        .cells()
        .iter()
        .enumerate()
        .map(|(c, b)| Ok(vol * rho.eval_body(c, b)?.powf(p)))
        .collect::<Result<Vec<f64>>>()?;
    let den = compensated_sum(input);
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok((compensated_sum(out) / den).powf(1.0 / p))
}

/// How the intermediate exponent of the reverse factorization is formed.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentConvention {
    /// `1/p = (1-t)/p0 + t/p1`.
    #[default]
    Interpolated,
    /// `1/p = (1-t)/p0 + 1/p1`, as printed alongside the factorization.
    AsPrinted,
}

/// The intermediate exponent `p`.
pub fn factorization_exponent(p0: f64, p1: f64, t: f64, convention: ExponentConvention) -> Result<f64> {
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutOfRange(format!("t = {t} not in (0,1)")));
    }
    if !(p0 >= 1.0 && p1 >= 1.0) {
        return Err(Error::OutOfRange(format!("exponents p0 = {p0}, p1 = {p1} must be >= 1")));
    }
    let inv = match convention {
        ExponentConvention::Interpolated => (1.0 - t) / p0 + t / p1,
        ExponentConvention::AsPrinted => (1.0 - t) / p0 + 1.0 / p1,
    };
    if !(inv > 0.0 && inv <= 1.0) {
        return Err(Error::OutOfRange(format!("1/p = {inv} is not in (0, 1]")));
    }
    Ok(1.0 / inv)
}

/// Cellwise `(W0^2 #_t W1^2)^(1/2)`. Cells where `W0 = W1` are copied.
pub fn reverse_factorization(w0: &MatrixField, w1: &MatrixField, t: f64) -> Result<MatrixField> {
    if w0.domain() != w1.domain() {
        return Err(Error::DomainMismatch(format!("{:?} vs {:?}", w0.domain(), w1.domain())));
    }
    if w0.dim() != w1.dim() {
        return Err(Error::DimensionMismatch { expected: w0.dim(), got: w1.dim() });
    }
    if !(w0.sup_operator_norm().is_finite() && w1.sup_operator_norm().is_finite()) {
        return Err(Error::Invalid("weight fields must be bounded".into()));
    }
    let cells = w0
        .cells()
        .iter()
        .zip(w1.cells())
        .map(|(a, b)| {
            if a == b {
                return Ok(a.clone());
            }
            geometric_mean(&a.power(2.0)?, &b.power(2.0)?, t)?.sqrt()
        })
        .collect::<Result<Vec<_>>>()?;
    MatrixField::new(w0.domain(), cells)
}

/// Weight field generators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FixtureKind {
    Identity { dim: usize },
    Constant { matrix: SpdMatrix },
    /// `d = 1`: the cell average of `|x_1 - center|^exponent`.
    ScalarPower { exponent: f64, center: f64 },
    /// `d = 2`: `R(theta) diag(l_0, l_1) R(theta)^T` with `l_i` the cell
    /// average of `|x_1|^exponents[i]` and `theta = pi * turns * x_1` at the
    /// cell center.
    RotatedDiagonal { exponents: [f64; 2], turns: f64 },
    /// `exp(S)` with `S` symmetric, entries uniform in `[-amplitude, amplitude]`,
    /// drawn on the level-`resolution` cells and constant inside them.
    RandomSpd { dim: usize, seed: u64, amplitude: f64, resolution: u32 },
}

impl FixtureKind {
    pub fn dim(&self) -> usize {
        match self {
            FixtureKind::Identity { dim } | FixtureKind::RandomSpd { dim, .. } => *dim,
            FixtureKind::Constant { matrix } => matrix.dim(),
            FixtureKind::ScalarPower { .. } => 1,
            FixtureKind::RotatedDiagonal { .. } => 2,
        }
    }

    /// Short identifier used in reports.
    pub fn id(&self) -> String {
        match self {
            FixtureKind::Identity { dim } => format!("identity-d{dim}"),
            FixtureKind::Constant { matrix } => format!("constant-d{}", matrix.dim()),
            FixtureKind::ScalarPower { exponent, center } => format!("scalar-power({exponent},{center})"),
            FixtureKind::RotatedDiagonal { exponents, turns } => {
                format!("rotated-diagonal({},{},{turns})", exponents[0], exponents[1])
            }
            FixtureKind::RandomSpd { dim, seed, amplitude, resolution } => {
                format!("random-spd-d{dim}({seed},{amplitude},{resolution})")
            }
        }
    }
}

/// `avg_{[a,b]} |x - c|^g`, exact.
fn power_average(a: f64, b: f64, c: f64, g: f64) -> f64 {
    let prim = |x: f64| {
        let s = x - c;
        s.signum() * s.abs().powf(g + 1.0) / (g + 1.0)
    };
    (prim(b) - prim(a)) / (b - a)
}

fn cell_interval(domain: &DyadicDomain, cell: usize) -> (f64, f64) {
    let i = domain.coords(cell)[0] as f64;
    let h = domain.cell_side();
    (i * h, (i + 1.0) * h)
}

/// Builds a fixture field, rejecting cells with condition number above
/// [`WEIGHT_CONDITION_LIMIT`].
pub fn fixture_weights(kind: &FixtureKind, domain: DyadicDomain) -> Result<MatrixField> {
    let field = match kind {
        FixtureKind::Identity { dim } => MatrixField::constant(domain, SpdMatrix::identity(*dim)?)?,
        FixtureKind::Constant { matrix } => MatrixField::constant(domain, matrix.clone())?,
        FixtureKind::ScalarPower { exponent, center } => {
            if !(*exponent > -1.0 && exponent.is_finite()) || !(0.0..=1.0).contains(center) {
                return Err(Error::OutOfRange(format!(
                    "scalar power needs exponent > -1 and center in [0,1], got {exponent}, {center}"
                )));
            }
            MatrixField::from_fn(domain, |c| {
                let (a, b) = cell_interval(&domain, c);
                SpdMatrix::from_row_slice(1, &[power_average(a, b, *center, *exponent)])
            })?
        }
        FixtureKind::RotatedDiagonal { exponents, turns } => {
            if exponents.iter().any(|e| !(*e > -1.0 && e.is_finite())) || !turns.is_finite() {
                return Err(Error::OutOfRange(format!("rotated diagonal parameters {exponents:?}, {turns}")));
            }
            MatrixField::from_fn(domain, |c| {
                let (a, b) = cell_interval(&domain, c);
                let l0 = power_average(a, b, 0.0, exponents[0]);
                let l1 = power_average(a, b, 0.0, exponents[1]);
                let (s, co) = (std::f64::consts::PI * turns * 0.5 * (a + b)).sin_cos();
                let r = DMatrix::from_row_slice(2, 2, &[co, -s, s, co]);
                let d = DMatrix::from_row_slice(2, 2, &[l0, 0.0, 0.0, l1]);
                let m = &r * d * r.transpose();
                SpdMatrix::new(symmetrize(m))
            })?
        }
        FixtureKind::RandomSpd { dim, seed, amplitude, resolution } => {
            if !(*amplitude >= 0.0 && amplitude.is_finite()) {
                return Err(Error::OutOfRange(format!("amplitude {amplitude}")));
            }
            if *resolution > domain.level() {
                return Err(Error::OutOfRange(format!(
                    "fixture resolution {resolution} is finer than the grid level {}",
                    domain.level()
                )));
            }
            let coarse = domain.with_level(*resolution)?;
            let d = *dim;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let base = MatrixField::from_fn(coarse, |_| {
                let mut s = DMatrix::zeros(d, d);
                for i in 0..d {
                    for j in i..d {
                        let x = if *amplitude == 0.0 { 0.0 } else { rng.random_range(-*amplitude..=*amplitude) };
                        s[(i, j)] = x;
                        s[(j, i)] = x;
                    }
                }
                let eig = SymmetricEigen::new(s);
                let e = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::exp));
                let m = &eig.eigenvectors * e * eig.eigenvectors.transpose();
                SpdMatrix::new(symmetrize(m))
            })?;
            let shift = domain.level() - resolution;
            MatrixField::from_fn(domain, |c| {
                let [x, y] = domain.coords(c);
                let cc = coarse.index([x >> shift, y >> shift]);
                Ok(base.cells()[cc].clone())
            })?
        }
    };
    let cond = field.max_condition_number();
    if cond > WEIGHT_CONDITION_LIMIT {
        return Err(Error::IllConditioned { condition: cond, limit: WEIGHT_CONDITION_LIMIT });
    }
    Ok(field)
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    let t = m.transpose();
    (m + t) * 0.5
}
