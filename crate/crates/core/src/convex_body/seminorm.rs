use std::sync::OnceLock;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::body::{check_dim, ConvexBody};
use super::directions::DirectionGrid;
use super::planar;
use crate::numeric::dot;
use crate::{Error, Result};

/// A seminorm on `R^d`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Seminorm {
    Euclidean,
    /// `v -> |A v|`.
    Matrix {
        #[serde(with = "crate::numeric::matrix_rows")]
        matrix: DMatrix<f64>,
    },
    /// The norm whose unit ball is `body`.
    Gauge { body: ConvexBody },
    /// `v -> sup { |<v, w>| : base(w) <= 1 }`.
    Dual { base: Box<Seminorm> },
    /// `v -> p0(v)^(1-t) p1(v)^t`. Homogeneous but in general not subadditive.
    GeometricMean {
        p0: Box<Seminorm>,
        p1: Box<Seminorm>,
        t: f64,
    },
    GeomMeanDoubleDual(GeomMeanDoubleDual),
}

/// Double dual of the weighted geometric mean of two norms, discretized
/// over a direction grid `w_j`:
///
/// ```text
/// p**(v) = max_j |<v, w_j>| / p*(w_j),   p* = dual of p0^(1-t) p1^t
/// ```
///
/// Each `p*(w_j)` is itself a refined grid maximization. The result is the
/// support function of `conv{+-w_j / p*(w_j)}`, hence a genuine norm.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GeomMeanDoubleDual {
    p0: Box<Seminorm>,
    p1: Box<Seminorm>,
    t: f64,
    dim: usize,
    grid_size: usize,
    #[serde(skip)]
    polar: OnceLock<std::result::Result<Polar, Error>>,
}

#[derive(Clone, Debug)]
struct Polar {
    coords: Vec<f64>,
    table: Option<planar::SupportTable>,
}

impl GeomMeanDoubleDual {
    pub fn new(p0: Seminorm, p1: Seminorm, t: f64, dim: usize, grid_size: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::OutOfRange(format!("geometric-mean weight t = {t} not in (0,1)")));
        }
        DirectionGrid::new(dim, grid_size)?;
        Ok(Self {
            p0: Box::new(p0),
            p1: Box::new(p1),
            t,
            dim,
            grid_size,
            polar: OnceLock::new(),
        })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    /// The undualized mean `p_t(v)`.
    pub fn mean(&self, v: &[f64]) -> Result<f64> {
        geometric_mean_eval(&self.p0, &self.p1, self.t, v)
    }

    /// Generators `w_j / p*(w_j)` of the body whose support function is p**.
    pub fn polar_generators(&self) -> Result<&[f64]> {
        Ok(&self.polar()?.coords)
    }

    /// `conv{+-w_j / p_t(w_j)}` on the same grid. Its gauge is an upper
    /// bound for the exact double dual, just as `eval` is a lower bound.
    pub fn outer_body(&self) -> Result<ConvexBody> {
        let grid = DirectionGrid::new(self.dim, self.grid_size)?;
        let mut pts = Vec::with_capacity(grid.len());
        for w in grid.iter() {
            let p = self.mean(w)?;
            if !(p > 0.0) {
                return Err(Error::DegenerateNorm("geometric mean vanishes on the grid".into()));
            }
            pts.push(w.iter().map(|x| x / p).collect::<Vec<f64>>());
        }
        ConvexBody::new(self.dim, &pts)
    }

    fn polar(&self) -> Result<&Polar> {
        self.polar.get_or_init(|| self.build_polar()).as_ref().map_err(Clone::clone)
    }

    fn build_polar(&self) -> Result<Polar> {
        let grid = DirectionGrid::new(self.dim, self.grid_size)?;
        let f = |w: &[f64]| self.mean(w);
        let pvals = grid_values(&f, &grid)?;
        let mut coords = Vec::with_capacity(grid.len() * self.dim);
        for w in grid.iter() {
            let ps = dual_scan(&f, &pvals, w, &grid)?;
            coords.extend(w.iter().map(|x| x / ps));
        }
        let mut table = None;
        if self.dim == 2 {
            let pts: Vec<planar::P2> = coords.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
            let hull = planar::symmetric_hull(&pts);
            table = planar::SupportTable::new(&hull);
            coords = hull.into_iter().flatten().collect();
        }
        Ok(Polar { coords, table })
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        let polar = self.polar()?;
        if let Some(table) = &polar.table {
            return Ok(table.support([v[0], v[1]]));
        }
        Ok(polar
            .coords
            .chunks_exact(self.dim)
            .fold(0.0f64, |m, z| m.max(dot(z, v).abs())))
    }
}

fn geometric_mean_eval(p0: &Seminorm, p1: &Seminorm, t: f64, v: &[f64]) -> Result<f64> {
    let a = p0.eval(v)?;
    let b = p1.eval(v)?;
    if a == 0.0 || b == 0.0 {
        return Ok(0.0);
    }
    Ok(a.powf(1.0 - t) * b.powf(t))
}

impl Seminorm {
    pub fn matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::Invalid("matrix norm needs a square matrix".into()));
        }
        check_dim(matrix.nrows())?;
        if matrix.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("norm matrix"));
        }
        Ok(Seminorm::Matrix { matrix })
    }

    pub fn gauge(body: ConvexBody) -> Self {
        Seminorm::Gauge { body }
    }

    pub fn dual(base: Seminorm) -> Self {
        Seminorm::Dual { base: Box::new(base) }
    }

    pub fn geometric_mean(p0: Seminorm, p1: Seminorm, t: f64) -> Result<Self> {
        if !(t > 0.0 && t < 1.0) {
            return Err(Error::OutOfRange(format!("geometric-mean weight t = {t} not in (0,1)")));
        }
        Ok(Seminorm::GeometricMean { p0: Box::new(p0), p1: Box::new(p1), t })
    }

    pub fn geom_mean_double_dual(
        p0: Seminorm,
        p1: Seminorm,
        t: f64,
        dim: usize,
        grid_size: usize,
    ) -> Result<Self> {
        Ok(Seminorm::GeomMeanDoubleDual(GeomMeanDoubleDual::new(p0, p1, t, dim, grid_size)?))
    }

    /// Value at a vector.
    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        check_dim(v.len())?;
        match self {
            Seminorm::Euclidean => Ok(dot(v, v).sqrt()),
            Seminorm::Matrix { matrix } => matrix_apply_norm(matrix, v),
            Seminorm::Gauge { body } => body.gauge(v),
            Seminorm::Dual { base } => base.dual_eval(v),
            Seminorm::GeometricMean { p0, p1, t } => geometric_mean_eval(p0, p1, *t, v),
            Seminorm::GeomMeanDoubleDual(g) => g.eval(v),
        }
    }

    /// `sup_{v in body} p(v)`, attained at a generator.
    pub fn eval_body(&self, body: &ConvexBody) -> Result<f64> {
        let mut m = 0.0f64;
        for g in body.generators() {
            m = m.max(self.eval(g)?);
        }
        Ok(m)
    }

    /// Dual seminorm `p*(v) = sup { |<v, w>| : p(w) <= 1 }`, using a closed
    /// form where one exists and the default direction grid otherwise.
    pub fn dual_eval(&self, v: &[f64]) -> Result<f64> {
        if let Some(x) = self.dual_closed_form(v)? {
            return Ok(x);
        }
        self.dual_eval_on(v, &DirectionGrid::default_for(v.len())?)
    }

    /// Dual seminorm by grid maximization only, ignoring closed forms.
    pub fn dual_eval_on(&self, v: &[f64], grid: &DirectionGrid) -> Result<f64> {
        dual_by_grid(|w| self.eval(w), v, grid)
    }

    fn dual_closed_form(&self, v: &[f64]) -> Result<Option<f64>> {
        check_dim(v.len())?;
        Ok(match self {
            Seminorm::Euclidean => Some(dot(v, v).sqrt()),
            Seminorm::Matrix { matrix } => {
                let singular =
                    || Error::DegenerateNorm("matrix norm with singular matrix has no bounded dual".into());
                if !invertible(matrix) {
                    return Err(singular());
                }
                let vt = nalgebra::DVector::from_column_slice(v);
                let x = matrix.transpose().lu().solve(&vt).ok_or_else(singular)?;
                Some(x.norm())
            }
            Seminorm::Gauge { body } => Some(body.support(v)?),
            Seminorm::Dual { base } => match base.as_ref() {
                Seminorm::Euclidean => Some(dot(v, v).sqrt()),
                Seminorm::Matrix { matrix } => Some(matrix_apply_norm(matrix, v)?),
                Seminorm::Gauge { body } => Some(body.gauge(v)?),
                _ => None,
            },
            _ => None,
        })
    }

    /// Whether this seminorm is known to be a norm; only Euclidean and
    /// invertible matrix norms are recognised.
    pub fn is_norm(&self) -> bool {
        match self {
            Seminorm::Euclidean => true,
            Seminorm::Matrix { matrix } => invertible(matrix),
            _ => false,
        }
    }
}

pub(crate) fn invertible(m: &DMatrix<f64>) -> bool {
    let sv = m.singular_values();
    let max = sv.max();
    max > 0.0 && sv.min() > 1e-12 * max
}

fn matrix_apply_norm(m: &DMatrix<f64>, v: &[f64]) -> Result<f64> {
    if m.ncols() != v.len() {
        return Err(Error::DimensionMismatch { expected: m.ncols(), got: v.len() });
    }
    let mut s = 0.0;
    for r in 0..m.nrows() {
        let x: f64 = (0..m.ncols()).map(|c| m[(r, c)] * v[c]).sum();
        s += x * x;
    }
    Ok(s.sqrt())
}

fn grid_values<F: Fn(&[f64]) -> Result<f64>>(f: &F, grid: &DirectionGrid) -> Result<Vec<f64>> {
    let vals = grid.iter().map(f).collect::<Result<Vec<f64>>>()?;
    let max = vals.iter().copied().fold(0.0f64, f64::max);
    if !(max > 0.0) || vals.iter().any(|&p| !(p > 1e-12 * max) || !p.is_finite()) {
        return Err(Error::DegenerateNorm(
            "unit ball is unbounded in some grid direction".into(),
        ));
    }
    Ok(vals)
}

/// Dual of a positively homogeneous even function `f`:
/// `sup_{|w| = 1} |<v, w>| / f(w)`, by a grid scan refined around the best
/// local maxima (golden section on the circle, pattern search on the sphere).
pub fn dual_by_grid<F: Fn(&[f64]) -> Result<f64>>(f: F, v: &[f64], grid: &DirectionGrid) -> Result<f64> {
    GridDual::new(f, grid)?.eval(v)
}

/// [`dual_by_grid`] with the grid values of `f` computed once, for
/// evaluating the dual at many vectors.
pub struct GridDual<'g, F> {
    f: F,
    pvals: Vec<f64>,
    grid: &'g DirectionGrid,
}

impl<'g, F: Fn(&[f64]) -> Result<f64>> GridDual<'g, F> {
    pub fn new(f: F, grid: &'g DirectionGrid) -> Result<Self> {
        let pvals = grid_values(&f, grid)?;
        Ok(Self { f, pvals, grid })
    }

    pub fn eval(&self, v: &[f64]) -> Result<f64> {
        dual_scan(&self.f, &self.pvals, v, self.grid)
    }
}

fn dual_scan<F: Fn(&[f64]) -> Result<f64>>(
    f: &F,
    pvals: &[f64],
    v: &[f64],
    grid: &DirectionGrid,
) -> Result<f64> {
    let d = grid.dim();
    if v.len() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v.len() });
    }
    if v.iter().all(|&x| x == 0.0) {
        return Ok(0.0);
    }
    let ratio = |w: &[f64]| -> Result<f64> {
        let p = f(w)?;
        if !(p > 0.0) {
            return Err(Error::DegenerateNorm("unit ball is unbounded".into()));
        }
        Ok(dot(v, w).abs() / p)
    };
    if d == 1 {
        return Ok(v[0].abs() / pvals[0]);
    }
    let vals: Vec<f64> = grid.iter().zip(pvals).map(|(w, p)| dot(v, w).abs() / p).collect();
    let n = vals.len();
    let mut best = vals.iter().copied().fold(0.0f64, f64::max);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| vals[j].total_cmp(&vals[i]).then(i.cmp(&j)));
    if d == 2 {
        let local: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&j| vals[j] >= vals[(j + n - 1) % n] && vals[j] >= vals[(j + 1) % n])
            .take(3)
            .collect();
        let h = grid.spacing();
        for j in local {
            let w = grid.get(j);
            let th = w[1].atan2(w[0]);
            best = best.max(golden_max(|a| ratio(&[a.cos(), a.sin()]), th - h, th + h)?);
        }
    } else {
        for &j in order.iter().take(4) {
            best = best.max(pattern_max(&ratio, grid.get(j), vals[j], grid.spacing())?);
        }
    }
    Ok(best)
}

fn golden_max<G: Fn(f64) -> Result<f64>>(g: G, mut a: f64, mut b: f64) -> Result<f64> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c)?, g(d)?);
    let mut best = fc.max(fd);
    for _ in 0..80 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c)?;
            best = best.max(fc);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d)?;
            best = best.max(fd);
        }
        if (b - a).abs() < 1e-15 {
            break;
        }
    }
    Ok(best)
}

fn tangent_basis(w: &[f64]) -> ([f64; 3], [f64; 3]) {
    let a = if w[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let k = dot(&a, w);
    let mut e1 = [a[0] - k * w[0], a[1] - k * w[1], a[2] - k * w[2]];
    let n1 = dot(&e1, &e1).sqrt();
    e1.iter_mut().for_each(|x| *x /= n1);
    let e2 = [
        w[1] * e1[2] - w[2] * e1[1],
        w[2] * e1[0] - w[0] * e1[2],
        w[0] * e1[1] - w[1] * e1[0],
    ];
    (e1, e2)
}

fn pattern_max<G: Fn(&[f64]) -> Result<f64>>(g: &G, start: &[f64], f0: f64, step: f64) -> Result<f64> {
    let mut w = [start[0], start[1], start[2]];
    let mut fw = f0;
    let mut h = step;
    let mut budget = 4000usize;
    while h > 1e-10 && budget > 0 {
        let (e1, e2) = tangent_basis(&w);
        let mut moved = false;
        for k in 0..8 {
            if budget == 0 {
                break;
            }
            let phi = std::f64::consts::FRAC_PI_4 * k as f64;
            let (s, c) = phi.sin_cos();
            let mut cand = [0.0; 3];
            for i in 0..3 {
                cand[i] = w[i] + h * (c * e1[i] + s * e2[i]);
            }
            let nc = dot(&cand, &cand).sqrt();
            cand.iter_mut().for_each(|x| *x /= nc);
            let fc = g(&cand)?;
            budget -= 1;
            if fc > fw {
                w = cand;
                fw = fc;
                moved = true;
                break;
            }
        }
        if !moved {
            h *= 0.5;
        }
    }
    Ok(fw)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(a: f64, b: f64) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[a, 0.0, 0.0, b])
    }

    #[test]
    fn closed_form_duals() {
        assert_eq!(Seminorm::Euclidean.dual_eval(&[3.0, 4.0]).unwrap(), 5.0);
        let m = Seminorm::matrix(diag(2.0, 1.0)).unwrap();
        assert!((m.dual_eval(&[1.0, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        let cross = ConvexBody::new(2, &[[1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert_eq!(Seminorm::gauge(cross).dual_eval(&[1.0, 1.0]).unwrap(), 1.0);
    }

    #[test]
    fn grid_dual_of_ellipse_norm() {
        // Dual of |diag(2,1) w| at (1,0): maximize w1 over 4 w1^2 + w2^2 <= 1.
        let m = Seminorm::matrix(diag(2.0, 1.0)).unwrap();
        let grid = DirectionGrid::new(2, 720).unwrap();
        let x = m.dual_eval_on(&[1.0, 0.0], &grid).unwrap();
        assert!((x - 0.5).abs() < 1e-12);
    }

    #[test]
    fn singular_matrix_dual_is_an_error() {
        let m = Seminorm::matrix(diag(1.0, 0.0)).unwrap();
        assert!(m.dual_eval(&[1.0, 1.0]).is_err());
        let grid = DirectionGrid::new(2, 360).unwrap();
        assert!(m.dual_eval_on(&[1.0, 1.0], &grid).is_err());
    }

    #[test]
    fn double_dual_of_equal_norms_converges_from_below() {
        let m = Seminorm::matrix(diag(3.0, 0.5)).unwrap();
        let worst = |grid: usize| {
            let g = Seminorm::geom_mean_double_dual(m.clone(), m.clone(), 0.3, 2, grid).unwrap();
            [[1.0, 0.0], [0.3, -0.7], [0.0, 2.0], [0.2, 0.9]]
                .iter()
                .map(|v| {
                    let a = g.eval(v).unwrap();
                    let b = m.eval(v).unwrap();
                    assert!(a <= b * (1.0 + 1e-12), "{a} > {b}");
                    1.0 - a / b
                })
                .fold(0.0f64, f64::max)
        };
        let (e1, e2) = (worst(720), worst(1440));
        assert!(e1 < 5e-4, "{e1}");
        assert!(e2 < e1 / 3.0, "{e2} vs {e1}");
    }

    #[test]
    fn serde_round_trip_keeps_the_value() {
        let m = Seminorm::matrix(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).unwrap();
        let g = Seminorm::geom_mean_double_dual(Seminorm::Euclidean, m, 0.5, 2, 360).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        let back: Seminorm = serde_json::from_str(&s).unwrap();
        let v = [0.4, -1.1];
        assert_eq!(g.eval(&v).unwrap(), back.eval(&v).unwrap());
    }
}
