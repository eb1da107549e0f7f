use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Finest level accepted for a domain; `2^(12 n)` cells is already far
/// beyond desk scale for `n = 2`.
pub const MAX_LEVEL: u32 = 12;

/// The unit cube `[0,1)^n` cut into the `2^(k n)` dyadic cells of side
/// `2^-k`, with Lebesgue measure.
///
/// Cells are indexed row-major: in `n = 2` the cell with integer
/// coordinates `(c0, c1)` has index `c0 * 2^k + c1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct DyadicDomain {
    n: usize,
    level: u32,
}

#[derive(Serialize, Deserialize)]
struct DomainRepr {
    n: usize,
    k: u32,
}

impl TryFrom<DomainRepr> for DyadicDomain {
    type Error = Error;
    fn try_from(r: DomainRepr) -> Result<Self> {
        DyadicDomain::new(r.n, r.k)
    }
}

impl From<DyadicDomain> for DomainRepr {
    fn from(d: DyadicDomain) -> Self {
        DomainRepr { n: d.n, k: d.level }
    }
}

impl DyadicDomain {
    pub fn new(n: usize, level: u32) -> Result<Self> {
        if !(1..=2).contains(&n) {
            return Err(Error::OutOfRange(format!("ambient dimension n = {n} not in {{1, 2}}")));
        }
        if level > MAX_LEVEL {
            return Err(Error::OutOfRange(format!("grid level {level} exceeds {MAX_LEVEL}")));
        }
        Ok(Self { n, level })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn cells_per_axis(&self) -> usize {
        1 << self.level
    }

    pub fn num_cells(&self) -> usize {
        1 << (self.level as usize * self.n)
    }

    /// `2^(-k n)`, exact in binary floating point.
    pub fn cell_volume(&self) -> f64 {
        0.5f64.powi((self.level as usize * self.n) as i32)
    }

    pub fn cell_side(&self) -> f64 {
        0.5f64.powi(self.level as i32)
    }

    /// Integer coordinates of a cell (unused axes are 0).
    pub fn coords(&self, index: usize) -> [usize; 2] {
        if self.n == 1 {
            [index, 0]
        } else {
            let s = self.cells_per_axis();
            [index / s, index % s]
        }
    }

    pub fn index(&self, coords: [usize; 2]) -> usize {
        if self.n == 1 {
            coords[0]
        } else {
            coords[0] * self.cells_per_axis() + coords[1]
        }
    }

    pub fn check_cell(&self, index: usize) -> Result<()> {
        if index < self.num_cells() {
            Ok(())
        } else {
            Err(Error::CellOutOfRange { index, cells: self.num_cells() })
        }
    }

    /// Centre of a cell.
    pub fn center(&self, index: usize) -> [f64; 2] {
        let c = self.coords(index);
        let h = self.cell_side();
        let mut p = [(c[0] as f64 + 0.5) * h, (c[1] as f64 + 0.5) * h];
        if self.n == 1 {
            p[1] = 0.0;
        }
        p
    }

    /// Domain at another level with the same `n`.
    pub fn with_level(&self, level: u32) -> Result<Self> {
        Self::new(self.n, level)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn volumes_sum_to_one() {
        for n in 1..=2 {
            for k in 0..=6 {
                let d = DyadicDomain::new(n, k).unwrap();
                let s: f64 = (0..d.num_cells()).map(|_| d.cell_volume()).sum();
                assert_eq!(s, 1.0);
            }
        }
    }

    #[test]
    fn index_round_trip() {
        let d = DyadicDomain::new(2, 3).unwrap();
        for i in 0..d.num_cells() {
            assert_eq!(d.index(d.coords(i)), i);
        }
        assert_eq!(d.index([1, 2]), 10);
    }
}
