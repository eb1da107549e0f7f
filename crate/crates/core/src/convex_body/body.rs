use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::gauge::gauge_lp;
use super::planar::{self, P2};
use crate::numeric::{compensated_sum, dot};
use crate::{Error, Result};

/// Generator cap applied by [`ConvexBody::minkowski_sum`] and
/// [`ConvexBody::conv_union`].
pub const DEFAULT_GENERATOR_LIMIT: usize = 256;

/// Redundancy threshold for the three-dimensional pruning LP.
const PRUNE_TOL: f64 = 1e-12;

/// Origin-symmetric convex polytope `conv{+-g_i}` in `R^d`, `1 <= d <= 3`.
///
/// Generators are always pruned: none lies in the hull of the others.
/// Canonical forms per dimension:
///
/// - `d = 1`: at most one generator, the nonnegative radius;
/// - `d = 2`: one vertex per antipodal pair with polar angle in `[0, pi)`,
///   sorted by angle;
/// - `d = 3`: one vertex per antipodal pair, first nonzero coordinate
///   positive, sorted lexicographically.
///
/// The empty generator list is `{0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BodyRepr", into = "BodyRepr")]
pub struct ConvexBody {
    dim: usize,
    coords: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct BodyRepr {
    dim: usize,
    generators: Vec<Vec<f64>>,
}

impl TryFrom<BodyRepr> for ConvexBody {
    type Error = Error;

    fn try_from(r: BodyRepr) -> Result<Self> {
        ConvexBody::new(r.dim, &r.generators)
    }
}

impl From<ConvexBody> for BodyRepr {
    fn from(b: ConvexBody) -> Self {
        BodyRepr {
            dim: b.dim,
            generators: b.generators().map(<[f64]>::to_vec).collect(),
        }
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

fn pad3(g: &[f64]) -> [f64; 3] {
    let mut p = [0.0; 3];
    p[..g.len()].copy_from_slice(g);
    p
}

fn canonical3(p: [f64; 3]) -> [f64; 3] {
    let p = [p[0] + 0.0, p[1] + 0.0, p[2] + 0.0];
    let first = p.iter().copied().find(|&x| x != 0.0).unwrap_or(0.0);
    if first < 0.0 {
        [-p[0] + 0.0, -p[1] + 0.0, -p[2] + 0.0]
    } else {
        p
    }
}

fn prune(dim: usize, coords: &[f64]) -> Vec<f64> {
    match dim {
        1 => {
            let r = coords.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            if r == 0.0 {
                Vec::new()
            } else {
                vec![r]
            }
        }
        2 => {
            let pts: Vec<P2> = coords.chunks_exact(2).map(|c| [c[0], c[1]]).collect();
            planar::symmetric_hull(&pts).into_iter().flatten().collect()
        }
        _ => prune3(coords),
    }
}

fn prune3(coords: &[f64]) -> Vec<f64> {
    let mut pts: Vec<[f64; 3]> = coords
        .chunks_exact(3)
        .map(|c| canonical3([c[0], c[1], c[2]]))
        .filter(|p| *p != [0.0; 3])
        .collect();
    pts.sort_by(|a, b| {
        a[0].total_cmp(&b[0])
            .then(a[1].total_cmp(&b[1]))
            .then(a[2].total_cmp(&b[2]))
    });
    pts.dedup();
    // Shortest first: they are the likeliest to be redundant.
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| dot(&pts[i], &pts[i]).total_cmp(&dot(&pts[j], &pts[j])));
    let mut alive = pts.clone();
    let mut keep = vec![true; pts.len()];
    for &j in &order {
        if alive.len() <= 1 {
            break;
        }
        let idx = alive.iter().position(|p| *p == pts[j]).expect("live generator");
        if let Some(g) = gauge_lp(3, &alive, &pts[j], Some(idx)) {
            if g <= 1.0 + PRUNE_TOL {
                keep[j] = false;
                alive.remove(idx);
            }
        }
    }
    pts.iter()
        .zip(&keep)
        .filter(|(_, k)| **k)
        .flat_map(|(p, _)| p.iter().copied())
        .collect()
}

impl ConvexBody {
    /// The body `{0}` in `R^dim`.
    pub fn zero(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, coords: Vec::new() })
    }

    /// `conv{+-g}` over the given generators, pruned.
    pub fn new<G: AsRef<[f64]>>(dim: usize, generators: &[G]) -> Result<Self> {
        check_dim(dim)?;
        let mut coords = Vec::with_capacity(dim * generators.len());
        for g in generators {
            let g = g.as_ref();
            if g.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: g.len() });
            }
            coords.extend_from_slice(g);
        }
        Self::from_flat(dim, coords)
    }

    /// Generators given as one flat coordinate list of stride `dim`.
    pub fn from_flat(dim: usize, coords: Vec<f64>) -> Result<Self> {
        check_dim(dim)?;
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Invalid(format!(
                "{} coordinates is not a multiple of dimension {dim}",
                coords.len()
            )));
        }
        if coords.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("body generators"));
        }
        Ok(Self { dim, coords: prune(dim, &coords) })
    }

    /// The interval `[-r, r]`.
    pub fn interval(r: f64) -> Result<Self> {
        Self::from_flat(1, vec![r])
    }

    /// The segment `conv{+-v}`.
    pub fn segment(v: &[f64]) -> Result<Self> {
        Self::from_flat(v.len(), v.to_vec())
    }

    /// Generators already in canonical pruned form.
    pub(crate) fn from_canonical(dim: usize, coords: Vec<f64>) -> Self {
        debug_assert!(coords.len().is_multiple_of(dim));
        Self { dim, coords }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_generators(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn generators(&self) -> std::slice::ChunksExact<'_, f64> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    fn same_dim(&self, other: &Self) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected: self.dim, got: other.dim })
        }
    }

    /// Support function `h(u) = max_g |<g, u>|`.
    pub fn support(&self, u: &[f64]) -> Result<f64> {
        if u.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: u.len() });
        }
        Ok(self.generators().fold(0.0f64, |m, g| m.max(dot(g, u).abs())))
    }

    /// Largest Euclidean norm of a point of the body.
    pub fn magnitude(&self) -> f64 {
        self.generators().fold(0.0f64, |m, g| m.max(dot(g, g).sqrt()))
    }

    pub fn scale(&self, lambda: f64) -> Self {
        let a = lambda.abs();
        if a == 0.0 || self.is_zero() {
            return Self { dim: self.dim, coords: Vec::new() };
        }
        let coords: Vec<f64> = self.coords.iter().map(|x| a * x).collect();
        if self.dim == 2 {
            // Re-sort: rounding can reorder nearly parallel generators.
            Self::from_flat(2, coords).expect("scaled generators stay finite")
        } else {
            // A positive factor keeps pruning and the d = 3 sign convention.
            Self { dim: self.dim, coords }
        }
    }

    /// Minkowski sum, capped at [`DEFAULT_GENERATOR_LIMIT`] generators.
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Self::weighted_sum(self.dim, &[(1.0, self), (1.0, other)], Some(DEFAULT_GENERATOR_LIMIT))
    }

    /// `sum_b |w_b| B_b`, optionally reduced to `limit` generators.
    pub fn weighted_sum(dim: usize, terms: &[(f64, &Self)], limit: Option<usize>) -> Result<Self> {
        check_dim(dim)?;
        for (w, b) in terms {
            if b.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.dim });
            }
            if !w.is_finite() {
                return Err(Error::NonFinite("Minkowski weight"));
            }
        }
        let body = match dim {
            1 => {
                let r = compensated_sum(
                    terms.iter().filter(|(_, b)| !b.is_zero()).map(|(w, b)| w.abs() * b.coords[0]),
                );
                Self::from_flat(1, vec![r])?
            }
            2 => {
                let polys: Vec<(f64, Vec<P2>)> = terms
                    .iter()
                    .map(|(w, b)| (w.abs(), b.coords.chunks_exact(2).map(|c| [c[0], c[1]]).collect()))
                    .collect();
                let refs: Vec<(f64, &[P2])> = polys.iter().map(|(w, p)| (*w, p.as_slice())).collect();
                let gens = planar::weighted_sum(&refs);
                Self::from_canonical(2, gens.into_iter().flatten().collect())
            }
            _ => {
                let mut acc = Self { dim, coords: Vec::new() };
                for (w, b) in terms {
                    if *w == 0.0 || b.is_zero() {
                        continue;
                    }
                    let w = w.abs();
                    if acc.is_zero() {
                        acc = b.scale(w);
                        continue;
                    }
                    let mut cand = Vec::with_capacity(6 * acc.num_generators() * b.num_generators());
                    for a in acc.generators() {
                        for g in b.generators() {
                            for s in [1.0, -1.0] {
                                cand.extend((0..3).map(|i| a[i] + s * w * g[i]));
                            }
                        }
                    }
                    acc = Self::from_flat(3, cand)?;
                }
                acc
            }
        };
        Ok(match limit {
            Some(l) => body.reduce(l).0,
            None => body,
        })
    }

    /// Smallest symmetric convex body containing both, capped at
    /// [`DEFAULT_GENERATOR_LIMIT`] generators.
    pub fn conv_union(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        Self::hull_of(self.dim, &[self, other], Some(DEFAULT_GENERATOR_LIMIT))
    }

    /// Symmetric convex hull of a family of bodies.
    pub fn hull_of(dim: usize, bodies: &[&Self], limit: Option<usize>) -> Result<Self> {
        check_dim(dim)?;
        let mut coords = Vec::new();
        for b in bodies {
            if b.dim != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: b.dim });
            }
            coords.extend_from_slice(&b.coords);
        }
        let body = Self { dim, coords: prune(dim, &coords) };
        Ok(match limit {
            Some(l) => body.reduce(l).0,
            None => body,
        })
    }

    /// Minkowski functional `min{t >= 0 : v in tK}`.
    pub fn gauge(&self, v: &[f64]) -> Result<f64> {
        if v.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: v.len() });
        }
        if v.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        let pts: Vec<[f64; 3]> = self.generators().map(pad3).collect();
        gauge_lp(self.dim, &pts, v, None).ok_or(Error::UnboundedGauge)
    }

    /// Image under a linear map `v -> m v`.
    pub fn map_linear(&self, m: &DMatrix<f64>) -> Result<Self> {
        if m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: m.ncols() });
        }
        let out = m.nrows();
        check_dim(out)?;
        let mut coords = Vec::with_capacity(out * self.num_generators());
        for g in self.generators() {
            for r in 0..out {
                coords.push((0..self.dim).map(|c| m[(r, c)] * g[c]).sum());
            }
        }
        Self::from_flat(out, coords)
    }

    /// Reduces to at most `limit` generators by keeping, for a uniform set
    /// of directions, the generator that attains the support. Returns the
    /// reduced body and the incurred Hausdorff (Euclidean) error, estimated
    /// as the largest support-function deficit over a denser direction set.
    pub fn reduce(&self, limit: usize) -> (Self, f64) {
        let n = self.num_generators();
        if n <= limit.max(1) || self.dim == 1 {
            return (self.clone(), 0.0);
        }
        let limit = limit.max(1);
        let dirs = reduction_directions(self.dim, limit);
        let mut pick = vec![false; n];
        for u in &dirs {
            let best = (0..n)
                .max_by(|&i, &j| {
                    let gi = &self.coords[i * self.dim..(i + 1) * self.dim];
                    let gj = &self.coords[j * self.dim..(j + 1) * self.dim];
                    dot(gi, u).abs().total_cmp(&dot(gj, u).abs())
                })
                .unwrap_or(0);
            pick[best] = true;
            if pick.iter().filter(|&&p| p).count() >= limit {
                break;
            }
        }
        let coords: Vec<f64> = (0..n)
            .filter(|&i| pick[i])
            .flat_map(|i| self.coords[i * self.dim..(i + 1) * self.dim].iter().copied())
            .collect();
        let reduced = Self::from_flat(self.dim, coords).expect("subset of valid generators");
        let check = reduction_directions(self.dim, 4 * limit);
        let err = check
            .iter()
            .map(|u| {
                self.support(u).unwrap_or(0.0) - reduced.support(u).unwrap_or(0.0)
            })
            .fold(0.0f64, f64::max);
        log::debug!(
            "generator cap: reduced {n} -> {} generators, support deficit {err:e}",
            reduced.num_generators()
        );
        (reduced, err)
    }
}

fn reduction_directions(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        2 => (0..count)
            .map(|j| {
                let a = std::f64::consts::PI * j as f64 / count as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        _ => {
            // Fibonacci half-sphere: deterministic and roughly uniform.
            let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|j| {
                    let z = 1.0 - (j as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).sqrt();
                    let a = golden * j as f64;
                    vec![r * a.cos(), r * a.sin(), z]
                })
                .collect()
        }
    }
}
