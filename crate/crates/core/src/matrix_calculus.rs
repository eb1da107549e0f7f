//! Symmetric positive definite matrices: powers, weighted geometric means,
//! matrix-induced norms and per-cell matrix fields.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::convex_body::Seminorm;
use crate::set_field::DyadicDomain;
use crate::{Error, Result};

/// Largest eigenvalue ratio accepted by [`SpdMatrix::new`].
pub const CONDITION_LIMIT: f64 = 1e12;
const SYMMETRY_TOL: f64 = 1e-12;

/// Symmetric positive definite `d x d` matrix, `1 <= d <= 3`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpdRepr", into = "SpdRepr")]
pub struct SpdMatrix {
    m: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct SpdRepr {
    dim: usize,
    /// Row-major entries.
    data: Vec<f64>,
}

impl TryFrom<SpdRepr> for SpdMatrix {
    type Error = Error;
    fn try_from(r: SpdRepr) -> Result<Self> {
        SpdMatrix::from_row_slice(r.dim, &r.data)
    }
}

impl From<SpdMatrix> for SpdRepr {
    fn from(s: SpdMatrix) -> Self {
        let d = s.dim();
        SpdRepr {
            dim: d,
            data: (0..d).flat_map(|r| (0..d).map(move |c| (r, c))).map(|ix| s.m[ix]).collect(),
        }
    }
}

impl SpdMatrix {
    /// Validates symmetry, positive definiteness and conditioning; the input
    /// is never symmetrized.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let d = m.nrows();
        if d != m.ncols() {
            return Err(Error::Invalid(format!("matrix is {}x{}, not square", d, m.ncols())));
        }
        if !(1..=3).contains(&d) {
            return Err(Error::UnsupportedDimension(d));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        let scale = m.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let asym = (0..d)
            .flat_map(|r| (0..d).map(move |c| (r, c)))
            .map(|(r, c)| (m[(r, c)] - m[(c, r)]).abs())
            .fold(0.0f64, f64::max);
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::NotSymmetric { asymmetry: asym });
        }
        Self::validated_symmetric(m)
    }

    pub fn from_row_slice(dim: usize, data: &[f64]) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, got: data.len() });
        }
        Self::new(DMatrix::from_row_slice(dim, dim, data))
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(diag)))
    }

    /// For computed results whose asymmetry is pure rounding: keeps the
    /// symmetric part, then validates definiteness and conditioning.
    pub(crate) fn from_computed(m: DMatrix<f64>) -> Result<Self> {
        let sym = (&m + m.transpose()) * 0.5;
        Self::validated_symmetric(sym)
    }

    fn validated_symmetric(m: DMatrix<f64>) -> Result<Self> {
        let eig = SymmetricEigen::new(m.clone());
        let min = eig.eigenvalues.min();
        let max = eig.eigenvalues.max();
        if !(min > 0.0) {
            return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
        }
        let cond = max / min;
        if cond > CONDITION_LIMIT {
            return Err(Error::IllConditioned { condition: cond, limit: CONDITION_LIMIT });
        }
        Ok(Self { m })
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    /// Eigenvalues (ascending) and matching orthonormal eigenvectors.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<f64>) {
        let eig = SymmetricEigen::new(self.m.clone());
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        (vals, vecs)
    }

    pub fn condition_number(&self) -> f64 {
        let (v, _) = self.eigen();
        v[v.len() - 1] / v[0]
    }

    /// `A^t` through the eigendecomposition.
    pub fn power(&self, t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::NonFinite("matrix power exponent"));
        }
        if t == 1.0 {
            return Ok(self.clone());
        }
        let d = self.dim();
        if t == 0.0 {
            return Self::identity(d);
        }
        let (vals, vecs) = self.eigen();
        let scaled = DMatrix::from_fn(d, d, |r, c| vecs[(r, c)] * vals[c].powf(t));
        Self::from_computed(scaled * vecs.transpose())
    }

    pub fn inverse(&self) -> Result<Self> {
        self.power(-1.0)
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.power(0.5)
    }

    /// The norm `v -> |A v|`.
    pub fn norm(&self) -> Seminorm {
        Seminorm::Matrix { matrix: self.m.clone() }
    }
}

/// `A^t` for SPD `A`.
pub fn spd_power(a: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    a.power(t)
}

/// Weighted geometric mean `A #_t B = A^(1/2) (A^(-1/2) B A^(-1/2))^t A^(1/2)`.
pub fn geometric_mean(a: &SpdMatrix, b: &SpdMatrix, t: f64) -> Result<SpdMatrix> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    if !(t > 0.0 && t < 1.0) {
        return Err(Error::OutOfRange(format!("geometric-mean weight t = {t} not in (0,1)")));
    }
    let h = a.power(0.5)?;
    let hi = a.power(-0.5)?;
    let mid = SpdMatrix::from_computed(hi.matrix() * b.matrix() * hi.matrix())?;
    let mt = mid.power(t)?;
    SpdMatrix::from_computed(h.matrix() * mt.matrix() * h.matrix())
}

/// `|W v|`.
pub fn matrix_norm_eval(w: &DMatrix<f64>, v: &[f64]) -> Result<f64> {
    if w.ncols() != v.len() {
        return Err(Error::DimensionMismatch { expected: w.ncols(), got: v.len() });
    }
    let mut s = 0.0;
    for r in 0..w.nrows() {
        let x: f64 = (0..w.ncols()).map(|c| w[(r, c)] * v[c]).sum();
        s += x * x;
    }
    Ok(s.sqrt())
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<f64>) -> f64 {
    match (m.nrows(), m.ncols()) {
        (0, _) | (_, 0) => 0.0,
        (1, 1) => m[(0, 0)].abs(),
        (2, 2) => {
            // Largest eigenvalue of M^T M = [[p, r], [r, s]].
            let (a, b, c, d) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
            let p = a * a + c * c;
            let s = b * b + d * d;
            let r = a * b + c * d;
            (0.5 * (p + s) + (0.5 * (p - s)).hypot(r)).sqrt()
        }
        _ => m.singular_values().max(),
    }
}

/// The double dual of the geometric mean of `p_i(v) = |W_i v|`, together
/// with the comparison matrix `(W0^2 #_t W1^2)^(1/2)`.
pub fn gm_double_dual_norm(
    w0: &SpdMatrix,
    w1: &SpdMatrix,
    t: f64,
    grid_size: usize,
) -> Result<(Seminorm, SpdMatrix)> {
    if w0.dim() != w1.dim() {
        return Err(Error::DimensionMismatch { expected: w0.dim(), got: w1.dim() });
    }
    let a = w0.power(2.0)?;
    let b = w1.power(2.0)?;
    let comparison = geometric_mean(&a, &b, t)?.sqrt()?;
    let norm = Seminorm::geom_mean_double_dual(w0.norm(), w1.norm(), t, w0.dim(), grid_size)?;
    Ok((norm, comparison))
}

/// A field of SPD matrices, one per dyadic cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FieldRepr", into = "FieldRepr")]
pub struct MatrixField {
    domain: DyadicDomain,
    dim: usize,
    cells: Vec<SpdMatrix>,
    sup_operator_norm: f64,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n: usize,
    grid_level: u32,
    dim: usize,
    sup_operator_norm: f64,
    cells: BTreeMap<usize, SpdMatrix>,
}

impl TryFrom<FieldRepr> for MatrixField {
    type Error = Error;
    fn try_from(r: FieldRepr) -> Result<Self> {
        let domain = DyadicDomain::new(r.n, r.grid_level)?;
        if r.cells.len() != domain.num_cells() {
            return Err(Error::Invalid(format!(
                "matrix field has {} cells, grid needs {}",
                r.cells.len(),
                domain.num_cells()
            )));
        }
        let mut cells = Vec::with_capacity(r.cells.len());
        for (i, (idx, m)) in r.cells.into_iter().enumerate() {
            if idx != i {
                return Err(Error::CellOutOfRange { index: idx, cells: domain.num_cells() });
            }
            cells.push(m);
        }
        let f = MatrixField::new(domain, cells)?;
        if f.dim != r.dim {
            return Err(Error::DimensionMismatch { expected: r.dim, got: f.dim });
        }
        Ok(f)
    }
}

impl From<MatrixField> for FieldRepr {
    fn from(f: MatrixField) -> Self {
        FieldRepr {
            n: f.domain.n(),
            grid_level: f.domain.level(),
            dim: f.dim,
            sup_operator_norm: f.sup_operator_norm,
            cells: f.cells.into_iter().enumerate().collect(),
        }
    }
}

impl MatrixField {
    pub fn new(domain: DyadicDomain, cells: Vec<SpdMatrix>) -> Result<Self> {
        if cells.len() != domain.num_cells() {
            return Err(Error::Invalid(format!(
                "matrix field has {} cells, grid needs {}",
                cells.len(),
                domain.num_cells()
            )));
        }
        let dim = cells[0].dim();
        if let Some(bad) = cells.iter().find(|c| c.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: bad.dim() });
        }
        let sup_operator_norm = cells.iter().map(|c| operator_norm(c.matrix())).fold(0.0, f64::max);
        Ok(Self { domain, dim, cells, sup_operator_norm })
    }

    pub fn from_fn<F: FnMut(usize) -> Result<SpdMatrix>>(domain: DyadicDomain, f: F) -> Result<Self> {
        let cells = (0..domain.num_cells()).map(f).collect::<Result<Vec<_>>>()?;
        Self::new(domain, cells)
    }

    pub fn constant(domain: DyadicDomain, m: SpdMatrix) -> Result<Self> {
        Self::new(domain, vec![m; domain.num_cells()])
    }

    pub fn domain(&self) -> DyadicDomain {
        self.domain
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[SpdMatrix] {
        &self.cells
    }

    pub fn get(&self, index: usize) -> Result<&SpdMatrix> {
        self.domain.check_cell(index)?;
        Ok(&self.cells[index])
    }

    /// `sup_x |W(x)|_op`, the boundedness certificate.
    pub fn sup_operator_norm(&self) -> f64 {
        self.sup_operator_norm
    }

    /// Largest per-cell condition number.
    pub fn max_condition_number(&self) -> f64 {
        self.cells.iter().map(SpdMatrix::condition_number).fold(1.0, f64::max)
    }

    pub fn map<F: FnMut(&SpdMatrix) -> Result<SpdMatrix>>(&self, f: F) -> Result<Self> {
        Self::new(self.domain, self.cells.iter().map(f).collect::<Result<Vec<_>>>()?)
    }
}
