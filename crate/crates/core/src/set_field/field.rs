use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::domain::DyadicDomain;
use crate::convex_body::ConvexBody;
use crate::numeric::compensated_sum;
use crate::{Error, Result};

/// A simple set-valued function: one symmetric polytope per dyadic cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct SetField {
    domain: DyadicDomain,
    dim: usize,
    cells: Vec<ConvexBody>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n: usize,
    k: u32,
    d: usize,
    cells: Vec<ConvexBody>,
}

impl TryFrom<FieldRepr> for SetField {
    type Error = Error;
    fn try_from(r: FieldRepr) -> Result<Self> {
        SetField::new(DyadicDomain::new(r.n, r.k)?, r.d, r.cells)
    }
}

impl From<SetField> for FieldRepr {
    fn from(f: SetField) -> Self {
        FieldRepr { n: f.domain.n(), k: f.domain.level(), d: f.dim, cells: f.cells }
    }
}

impl SetField {
    pub fn new(domain: DyadicDomain, dim: usize, cells: Vec<ConvexBody>) -> Result<Self> {
        if cells.len() != domain.num_cells() {
            return Err(Error::Invalid(format!(
                "field has {} cells, grid needs {}",
                cells.len(),
                domain.num_cells()
            )));
        }
        if let Some(bad) = cells.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
        }
        Ok(Self { domain, dim, cells })
    }

    pub fn zero(domain: DyadicDomain, dim: usize) -> Result<Self> {
        Self::constant(domain, ConvexBody::zero(dim)?)
    }

    pub fn constant(domain: DyadicDomain, body: ConvexBody) -> Result<Self> {
        let dim = body.dim();
        Self::new(domain, dim, vec![body; domain.num_cells()])
    }

    /// Interval-valued field `x -> [-g(x), g(x)]`.
    pub fn from_radii(domain: DyadicDomain, radii: &[f64]) -> Result<Self> {
        let cells = radii.iter().map(|&r| ConvexBody::interval(r)).collect::<Result<Vec<_>>>()?;
        Self::new(domain, 1, cells)
    }

    pub fn from_fn<F: FnMut(usize) -> Result<ConvexBody>>(
        domain: DyadicDomain,
        dim: usize,
        f: F,
    ) -> Result<Self> {
        let cells = (0..domain.num_cells()).map(f).collect::<Result<Vec<_>>>()?;
        Self::new(domain, dim, cells)
    }

    pub fn domain(&self) -> DyadicDomain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[ConvexBody] {
        &self.cells
    }

    pub fn get(&self, index: usize) -> Result<&ConvexBody> {
        self.domain.check_cell(index)?;
        Ok(&self.cells[index])
    }

    /// `|F(x)|` per cell.
    pub fn magnitudes(&self) -> Vec<f64> {
        self.cells.iter().map(ConvexBody::magnitude).collect()
    }

    fn same_shape(&self, other: &Self) -> Result<()> {
        if self.domain != other.domain {
            return Err(Error::DomainMismatch(format!("{:?} vs {:?}", self.domain, other.domain)));
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }

    /// Cellwise Minkowski sum.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| ConvexBody::weighted_sum(self.dim, &[(1.0, a), (1.0, b)], None))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.domain, self.dim, cells)
    }

    pub fn scale(&self, lambda: f64) -> Self {
        Self {
            domain: self.domain,
            dim: self.dim,
            cells: self.cells.iter().map(|c| c.scale(lambda)).collect(),
        }
    }

    /// Cellwise symmetric convex hull of the union.
    pub fn hull_union(&self, other: &Self) -> Result<Self> {
        self.same_shape(other)?;
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(a, b)| ConvexBody::hull_of(self.dim, &[a, b], None))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.domain, self.dim, cells)
    }
}

fn sorted_cells(domain: &DyadicDomain, cells: &[usize]) -> Result<Vec<usize>> {
    for &c in cells {
        domain.check_cell(c)?;
    }
    let mut v = cells.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

/// Aumann integral over a set of cells: `sum_c vol(c) F(c)`.
pub fn aumann_integral(f: &SetField, cells: &[usize]) -> Result<ConvexBody> {
    let cells = sorted_cells(&f.domain, cells)?;
    let vol = f.domain.cell_volume();
    let terms: Vec<(f64, &ConvexBody)> = cells.iter().map(|&c| (vol, &f.cells[c])).collect();
    ConvexBody::weighted_sum(f.dim, &terms, None)
}

/// Aumann integral over the whole domain.
pub fn aumann_integral_all(f: &SetField) -> Result<ConvexBody> {
    let all: Vec<usize> = (0..f.domain.num_cells()).collect();
    aumann_integral(f, &all)
}

/// `(|int_E F|, int_E |F|)`.
pub fn magnitude_bound_check(f: &SetField, cells: &[usize]) -> Result<(f64, f64)> {
    let lhs = aumann_integral(f, cells)?.magnitude();
    let vol = f.domain.cell_volume();
    let cells = sorted_cells(&f.domain, cells)?;
    let rhs = compensated_sum(cells.iter().map(|&c| vol * f.cells[c].magnitude()));
    Ok((lhs, rhs))
}

/// Seeded random field: every cell gets `generator_count` generators with
/// coordinates uniform in `[-1, 1]`, pruned and then scaled by `scale`.
pub fn random_simple_field(
    domain: DyadicDomain,
    dim: usize,
    seed: u64,
    scale: f64,
    generator_count: usize,
) -> Result<SetField> {
    if !scale.is_finite() {
        return Err(Error::NonFinite("field scale"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SetField::from_fn(domain, dim, |_| {
        let coords: Vec<f64> = (0..generator_count * dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
        Ok(ConvexBody::from_flat(dim, coords)?.scale(scale))
    })
}
