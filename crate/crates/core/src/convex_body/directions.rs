//! Deterministic direction sets on the unit sphere.

use std::collections::HashMap;
use std::f64::consts::PI;

use crate::{Error, Result};

/// Default nominal grid size for `d = 2` (directions over the full circle).
pub const DEFAULT_GRID_2D: usize = 720;
/// Default nominal grid size for `d = 3` (points of the geodesic sphere).
pub const DEFAULT_GRID_3D: usize = 2562;

const MAX_ICOSPHERE_LEVEL: u32 = 6;

/// Half of a symmetric direction set: one representative per antipodal pair.
///
/// Every quantity evaluated on a grid here is even in the direction, so
/// the other half never needs to be visited.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionGrid {
    dim: usize,
    nominal: usize,
    dirs: Vec<f64>,
    spacing: f64,
}

impl DirectionGrid {
    /// Grid with at least `m` directions on the full sphere.
    ///
    /// `d = 2` uses `m` equally spaced angles (rounded up to even),
    /// `d = 3` the smallest icosphere with at least `m` vertices.
    pub fn new(dim: usize, m: usize) -> Result<Self> {
        match dim {
            1 => Ok(Self { dim, nominal: 2, dirs: vec![1.0], spacing: PI }),
            2 => {
                if m < 4 {
                    return Err(Error::OutOfRange(format!("direction grid size {m} < 4")));
                }
                let half = m.div_ceil(2);
                let mut dirs = Vec::with_capacity(2 * half);
                for j in 0..half {
                    let a = PI * j as f64 / half as f64;
                    dirs.push(a.cos());
                    dirs.push(a.sin());
                }
                Ok(Self { dim, nominal: 2 * half, dirs, spacing: PI / half as f64 })
            }
            3 => {
                let level = (0..=MAX_ICOSPHERE_LEVEL)
                    .find(|&l| icosphere_size(l) >= m)
                    .ok_or_else(|| {
                        Error::OutOfRange(format!(
                            "direction grid size {m} exceeds {}",
                            icosphere_size(MAX_ICOSPHERE_LEVEL)
                        ))
                    })?;
                let pts = icosphere(level);
                let nominal = pts.len();
                let dirs = pts
                    .into_iter()
                    .filter(|p| is_upper(*p))
                    .flat_map(|p| p.into_iter())
                    .collect();
                // Neighbouring vertices of the level-0 icosahedron are
                // atan(2) apart; every subdivision halves that.
                let spacing = 2f64.atan() / f64::from(1u32 << level);
                Ok(Self { dim, nominal, dirs, spacing })
            }
            d => Err(Error::UnsupportedDimension(d)),
        }
    }

    pub fn default_for(dim: usize) -> Result<Self> {
        Self::new(dim, if dim == 3 { DEFAULT_GRID_3D } else { DEFAULT_GRID_2D })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of directions on the full sphere.
    pub fn nominal_size(&self) -> usize {
        self.nominal
    }

    /// Number of stored representatives.
    pub fn len(&self) -> usize {
        self.dirs.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Typical angular distance between neighbouring directions.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn iter(&self) -> std::slice::ChunksExact<'_, f64> {
        self.dirs.chunks_exact(self.dim)
    }

    pub fn get(&self, i: usize) -> &[f64] {
        &self.dirs[i * self.dim..(i + 1) * self.dim]
    }
}

fn is_upper(p: [f64; 3]) -> bool {
    p[0] > 0.0 || (p[0] == 0.0 && (p[1] > 0.0 || (p[1] == 0.0 && p[2] > 0.0)))
}

/// Vertex count of the level-`l` icosphere, `10 * 4^l + 2`.
pub fn icosphere_size(level: u32) -> usize {
    10 * 4usize.pow(level) + 2
}

/// Vertices of the geodesic sphere obtained by `level` midpoint
/// subdivisions of the icosahedron. The set is closed under negation.
pub fn icosphere(level: u32) -> Vec<[f64; 3]> {
    let phi = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut verts: Vec<[f64; 3]> = raw.iter().map(|p| normalized(*p)).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut cache: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, verts: &mut Vec<[f64; 3]>| -> usize {
            let key = (a.min(b), a.max(b));
            *cache.entry(key).or_insert_with(|| {
                let (p, q) = (verts[key.0], verts[key.1]);
                verts.push(normalized([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                verts.len() - 1
            })
        };
        let mut next = Vec::with_capacity(4 * faces.len());
        for [a, b, c] in faces {
            let ab = midpoint(a, b, &mut verts);
            let bc = midpoint(b, c, &mut verts);
            let ca = midpoint(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    verts
}

fn normalized(p: [f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / r, p[1] / r, p[2] / r]
}

/// `count` equally spaced unit vectors over the full circle.
pub fn circle_directions(count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|j| {
            let a = 2.0 * PI * j as f64 / count as f64;
            [a.cos(), a.sin()]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn icosphere_counts_and_antipodal_closure() {
        for level in 0..4 {
            let pts = icosphere(level);
            assert_eq!(pts.len(), icosphere_size(level));
            for p in &pts {
                assert!(((p[0] * p[0] + p[1] * p[1] + p[2] * p[2]) - 1.0).abs() < 1e-15);
                let q = [-p[0], -p[1], -p[2]];
                assert!(pts.iter().any(|r| r.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-15)));
            }
        }
    }

    #[test]
    fn grid_sizes() {
        assert_eq!(DirectionGrid::new(2, 720).unwrap().len(), 360);
        let g3 = DirectionGrid::new(3, DEFAULT_GRID_3D).unwrap();
        assert_eq!(g3.nominal_size(), 2562);
        assert_eq!(g3.len(), 1281);
        assert_eq!(DirectionGrid::new(3, 100).unwrap().nominal_size(), 162);
        assert!(DirectionGrid::new(4, 10).is_err());
    }
}
