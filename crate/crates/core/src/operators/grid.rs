//! Translated dyadic grids `D^tau = { 2^-j ([0,1)^n + m + (-1)^j tau) }`
//! with `tau in {0, +-1/3}^n`.
//!
//! Geometry is exact: at a reference level `K >= j`, every endpoint is an
//! integer multiple of `1 / (3 * 2^K)`. The cube above has left endpoint
//! `2^(K-j) (3 m + (-1)^j s)` and side `3 * 2^(K-j)` in those units, where
//! `s = 3 tau` per axis.

use serde::{Deserialize, Serialize};

use crate::set_field::DyadicDomain;
use crate::{Error, Result};

/// A grid translation, stored as `3 tau` per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Translation {
    n: usize,
    thirds: [i8; 2],
}

impl Translation {
    pub fn zero(n: usize) -> Self {
        Self { n, thirds: [0, 0] }
    }

    /// `tau_a = thirds[a] / 3`, each in `{-1, 0, 1}`.
    pub fn new(n: usize, thirds: &[i8]) -> Result<Self> {
        if !(1..=2).contains(&n) || thirds.len() != n {
            return Err(Error::InvalidCube(format!("translation needs {n} components in n = 1 or 2")));
        }
        if thirds.iter().any(|s| !(-1..=1).contains(s)) {
            return Err(Error::InvalidCube("translation components must be 0 or +-1/3".into()));
        }
        let mut t = [0i8; 2];
        t[..n].copy_from_slice(thirds);
        Ok(Self { n, thirds: t })
    }

    /// All `3^n` translations, `tau = 0` first.
    pub fn all(n: usize) -> Vec<Self> {
        let vals = [0i8, 1, -1];
        let mut out = Vec::new();
        if n == 1 {
            for &a in &vals {
                out.push(Self { n, thirds: [a, 0] });
            }
        } else {
            for &a in &vals {
                for &b in &vals {
                    out.push(Self { n, thirds: [a, b] });
                }
            }
        }
        out
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn thirds(&self) -> &[i8] {
        &self.thirds[..self.n]
    }

    pub fn is_zero(&self) -> bool {
        self.thirds == [0, 0]
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.thirds().iter().map(|&s| f64::from(s) / 3.0).collect()
    }

    /// `(-1)^level * 3 tau_a`.
    fn signed(&self, axis: usize, level: i32) -> i64 {
        let s = i64::from(self.thirds[axis]);
        if level.rem_euclid(2) == 0 {
            s
        } else {
            -s
        }
    }
}

/// A cube of a translated dyadic grid: side `2^-level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicCube {
    tau: Translation,
    level: i32,
    m: [i64; 2],
}

impl DyadicCube {
    pub fn new(tau: Translation, level: i32, m: &[i64]) -> Result<Self> {
        if m.len() != tau.n {
            return Err(Error::InvalidCube(format!("expected {} coordinates, got {}", tau.n, m.len())));
        }
        let mut c = [0i64; 2];
        c[..m.len()].copy_from_slice(m);
        Ok(Self { tau, level, m: c })
    }

    pub fn n(&self) -> usize {
        self.tau.n
    }

    pub fn level(&self) -> i32 {
        self.level
    }

    pub fn coords(&self) -> &[i64] {
        &self.m[..self.tau.n]
    }

    pub fn translation(&self) -> Translation {
        self.tau
    }

    /// `2^(-level n)`.
    pub fn volume(&self) -> f64 {
        0.5f64.powi(self.level * self.tau.n as i32)
    }

    /// `[lo, hi)` along `axis` in units of `1 / (3 * 2^k)`; needs `k >= level`.
    pub fn bounds_units(&self, axis: usize, k: i32) -> Result<(i64, i64)> {
        if k < self.level {
            return Err(Error::InvalidCube(format!(
                "reference level {k} is coarser than cube level {}",
                self.level
            )));
        }
        let scale = 1i64 << (k - self.level);
        let lo = scale * (3 * self.m[axis] + self.tau.signed(axis, self.level));
        Ok((lo, lo + 3 * scale))
    }

    /// Real endpoints along `axis` (rounded).
    pub fn bounds(&self, axis: usize) -> (f64, f64) {
        let side = 0.5f64.powi(self.level);
        let lo = side * (self.m[axis] as f64 + self.tau.signed(axis, self.level) as f64 / 3.0);
        (lo, lo + side)
    }

    /// The unique cube one level coarser containing this one.
    pub fn parent(&self) -> Self {
        let mut m = [0i64; 2];
        for (a, slot) in m.iter_mut().enumerate().take(self.tau.n) {
            *slot = (self.m[a] + self.tau.signed(a, self.level)).div_euclid(2);
        }
        Self { tau: self.tau, level: self.level - 1, m }
    }

    /// The `2^n` cubes one level finer contained in this one.
    pub fn children(&self) -> Vec<Self> {
        let lvl = self.level + 1;
        let per_axis: Vec<[i64; 2]> = (0..self.tau.n)
            .map(|a| {
                let base = 2 * self.m[a] - self.tau.signed(a, lvl);
                [base, base + 1]
            })
            .collect();
        let mut out = Vec::with_capacity(1 << self.tau.n);
        if self.tau.n == 1 {
            for &x in &per_axis[0] {
                out.push(Self { tau: self.tau, level: lvl, m: [x, 0] });
            }
        } else {
            for &x in &per_axis[0] {
                for &y in &per_axis[1] {
                    out.push(Self { tau: self.tau, level: lvl, m: [x, y] });
                }
            }
        }
        out
    }

    /// Exact containment (both cubes read at the finer level).
    pub fn contains(&self, other: &Self) -> bool {
        if self.tau.n != other.tau.n {
            return false;
        }
        let k = self.level.max(other.level);
        (0..self.tau.n).all(|a| {
            let (lo, hi) = self.bounds_units(a, k).expect("k >= level");
            let (olo, ohi) = other.bounds_units(a, k).expect("k >= level");
            lo <= olo && ohi <= hi
        })
    }

    /// Overlap length, in units of `1 / (3 * 2^k)`, with each axis of the
    /// finest cell `cell` of a level-`k` domain.
    pub(crate) fn cell_overlap_units(&self, cell: [usize; 2], k: i32) -> [i64; 2] {
        let mut o = [3i64, 3];
        for (a, slot) in o.iter_mut().enumerate().take(self.tau.n) {
            let (lo, hi) = self.bounds_units(a, k).expect("k >= level");
            let clo = 3 * cell[a] as i64;
            *slot = (hi.min(clo + 3) - lo.max(clo)).max(0);
        }
        o
    }

    /// Whether the cube meets `[0,1)^n` in positive measure.
    pub fn meets_unit_cube(&self) -> bool {
        let k = self.level.max(0);
        (0..self.tau.n).all(|a| {
            let (lo, hi) = self.bounds_units(a, k).expect("k >= level");
            lo < 3 * (1i64 << k) && hi > 0
        })
    }

    /// Finest cells of `domain` the cube meets in positive measure, with the
    /// fraction of each cell it covers.
    pub fn cell_weights(&self, domain: &DyadicDomain) -> Result<Vec<(usize, f64)>> {
        let k = domain.level() as i32;
        if self.tau.n != domain.n() {
            return Err(Error::InvalidCube(format!(
                "cube in n = {} used on a domain with n = {}",
                self.tau.n,
                domain.n()
            )));
        }
        if self.level < 0 || self.level > k {
            return Err(Error::InvalidCube(format!(
                "cube level {} outside the grid levels 0..={k}",
                self.level
            )));
        }
        let cells = domain.cells_per_axis() as i64;
        let mut axes: Vec<Vec<(usize, i64)>> = Vec::with_capacity(self.tau.n);
        for a in 0..self.tau.n {
            let (lo, hi) = self.bounds_units(a, k)?;
            let first = lo.div_euclid(3).max(0);
            let last = (hi - 1).div_euclid(3).min(cells - 1);
            let mut v = Vec::new();
            for c in first..=last {
                let o = hi.min(3 * c + 3) - lo.max(3 * c);
                if o > 0 {
                    v.push((c as usize, o));
                }
            }
            axes.push(v);
        }
        let mut out = Vec::new();
        if self.tau.n == 1 {
            for &(c, o) in &axes[0] {
                out.push((c, o as f64 / 3.0));
            }
        } else {
            for &(c0, o0) in &axes[0] {
                for &(c1, o1) in &axes[1] {
                    out.push((domain.index([c0, c1]), (o0 * o1) as f64 / 9.0));
                }
            }
        }
        if out.is_empty() {
            return Err(Error::InvalidCube("cube does not meet the domain".into()));
        }
        Ok(out)
    }

    /// Volume of the cube clipped to `[0,1)^n`.
    pub fn clipped_volume(&self, domain: &DyadicDomain) -> Result<f64> {
        let vol = domain.cell_volume();
        Ok(self.cell_weights(domain)?.iter().map(|(_, f)| f * vol).sum())
    }
}

/// Level-`level` cubes of grid `tau` meeting `[0,1)^n`, row-major.
pub fn cubes_at_level(tau: Translation, level: i32) -> Vec<DyadicCube> {
    let range = |a: usize| -> Vec<i64> {
        let hi = 1i64 << level.max(0);
        (-2..=hi + 1)
            .filter(|&m| {
                let mut c = DyadicCube { tau, level, m: [0, 0] };
                c.m[a] = m;
                let k = level.max(0);
                let (lo, h) = c.bounds_units(a, k).expect("k >= level");
                lo < 3 * (1i64 << k) && h > 0
            })
            .collect()
    };
    let r0 = range(0);
    if tau.n == 1 {
        return r0.into_iter().map(|x| DyadicCube { tau, level, m: [x, 0] }).collect();
    }
    let r1 = range(1);
    let mut out = Vec::with_capacity(r0.len() * r1.len());
    for &x in &r0 {
        for &y in &r1 {
            out.push(DyadicCube { tau, level, m: [x, y] });
        }
    }
    out
}

/// The cube family used on a level-`k` domain: levels `0..=k` of `D^tau`.
pub fn cube_family(domain: &DyadicDomain, tau: Translation) -> Vec<DyadicCube> {
    (0..=domain.level() as i32).flat_map(|j| cubes_at_level(tau, j)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_grid_geometry() {
        let tau = Translation::zero(1);
        let c = DyadicCube::new(tau, 2, &[3]).unwrap();
        assert_eq!(c.bounds(0), (0.75, 1.0));
        assert_eq!(c.parent(), DyadicCube::new(tau, 1, &[1]).unwrap());
        assert_eq!(cubes_at_level(tau, 3).len(), 8);
    }

    #[test]
    fn translated_cubes_straddle_the_boundary() {
        let tau = Translation::new(1, &[1]).unwrap();
        // Level 0: [m + 1/3, m + 4/3) meets [0,1) for m = -1, 0.
        let c0 = cubes_at_level(tau, 0);
        assert_eq!(c0.iter().map(|c| c.coords()[0]).collect::<Vec<_>>(), vec![-1, 0]);
        // Level 1: (1/2)([0,1) + m - 1/3).
        let c = DyadicCube::new(tau, 1, &[0]).unwrap();
        let (lo, hi) = c.bounds(0);
        assert!((lo + 1.0 / 6.0).abs() < 1e-15 && (hi - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn children_nest_in_parent() {
        for tau in Translation::all(2) {
            for j in 0..4 {
                for q in cubes_at_level(tau, j) {
                    for ch in q.children() {
                        assert_eq!(ch.parent(), q);
                        assert!(q.contains(&ch));
                    }
                }
            }
        }
    }

    #[test]
    fn cell_weights_partition_the_cube() {
        let dom = DyadicDomain::new(1, 3).unwrap();
        let tau = Translation::new(1, &[-1]).unwrap();
        for q in cube_family(&dom, tau) {
            let w = q.cell_weights(&dom).unwrap();
            assert!(w.iter().all(|(_, f)| *f > 0.0 && *f <= 1.0));
        }
    }
}
