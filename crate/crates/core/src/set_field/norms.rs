use serde::{Deserialize, Serialize};

use super::domain::DyadicDomain;
use super::field::SetField;
use crate::convex_body::{hausdorff, ConvexBody, Seminorm};
use crate::matrix_calculus::{matrix_norm_eval, MatrixField};
use crate::numeric::compensated_sum;
use crate::{Error, Result};

/// A seminorm per cell, `x -> rho_x`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum NormField {
    /// `rho_x = |.|` everywhere.
    Euclidean,
    /// `rho_x(v) = |W(x) v|`.
    Matrix { matrix_field: MatrixField },
    /// Arbitrary per-cell seminorms, row-major.
    PerCell { norms: Vec<Seminorm> },
}

impl NormField {
    /// Checks that the field fits a domain and body dimension.
    pub fn check(&self, domain: &DyadicDomain, dim: usize) -> Result<()> {
        match self {
            NormField::Euclidean => Ok(()),
            NormField::Matrix { matrix_field } => {
                if matrix_field.domain() != *domain {
                    return Err(Error::DomainMismatch("matrix field grid differs from the set field".into()));
                }
                if matrix_field.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: matrix_field.dim() });
                }
                Ok(())
            }
            NormField::PerCell { norms } => {
                if norms.len() != domain.num_cells() {
                    return Err(Error::DomainMismatch(format!(
                        "{} cell norms for {} cells",
                        norms.len(),
                        domain.num_cells()
                    )));
                }
                Ok(())
            }
        }
    }

    /// `rho_x(v)` on cell `cell`.
    pub fn eval(&self, cell: usize, v: &[f64]) -> Result<f64> {
        match self {
            NormField::Euclidean => Seminorm::Euclidean.eval(v),
            NormField::Matrix { matrix_field } => matrix_norm_eval(matrix_field.get(cell)?.matrix(), v),
            NormField::PerCell { norms } => norms
                .get(cell)
                .ok_or(Error::CellOutOfRange { index: cell, cells: norms.len() })?
                .eval(v),
        }
    }

    /// `rho_x(K) = sup_{v in K} rho_x(v)`.
    pub fn eval_body(&self, cell: usize, body: &ConvexBody) -> Result<f64> {
        let mut m = 0.0f64;
        for g in body.generators() {
            m = m.max(self.eval(cell, g)?);
        }
        Ok(m)
    }

    /// The seminorm on one cell as a standalone value.
    pub fn seminorm(&self, cell: usize) -> Result<Seminorm> {
        match self {
            NormField::Euclidean => Ok(Seminorm::Euclidean),
            NormField::Matrix { matrix_field } => Ok(matrix_field.get(cell)?.norm()),
            NormField::PerCell { norms } => norms
                .get(cell)
                .cloned()
                .ok_or(Error::CellOutOfRange { index: cell, cells: norms.len() }),
        }
    }
}

/// `rho_x(F(x))` for every cell.
pub fn cell_values(f: &SetField, rho: &NormField) -> Result<Vec<f64>> {
    rho.check(&f.domain(), f.dim())?;
    f.cells().iter().enumerate().map(|(c, b)| rho.eval_body(c, b)).collect()
}

fn check_p(p: f64) -> Result<()> {
    if p > 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("exponent p = {p} must be positive")))
    }
}

/// `(sum_c vol * v_c^p)^(1/p)`, or `max_c v_c` for `p = inf`, over cells of
/// equal volume.
pub fn lp_of_values(volume: f64, values: &[f64], p: f64) -> Result<f64> {
    check_p(p)?;
    if p.is_infinite() {
        return Ok(values.iter().copied().fold(0.0, f64::max));
    }
    let s = compensated_sum(values.iter().map(|v| volume * v.powf(p)));
    Ok(s.powf(1.0 / p))
}

/// `||F||_{L^p(rho)}`.
pub fn lp_norm(f: &SetField, rho: &NormField, p: f64) -> Result<f64> {
    check_p(p)?;
    lp_of_values(f.domain().cell_volume(), &cell_values(f, rho)?, p)
}

/// Exact distribution function of a simple function, stored as right-
/// continuous steps: `omega(lambda) = measures[i]` on `[levels[i], levels[i+1])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionTable {
    levels: Vec<f64>,
    measures: Vec<f64>,
}

impl DistributionTable {
    /// From per-cell values of cells of equal volume.
    pub fn from_values(volume: f64, values: &[f64]) -> Self {
        let mut sorted: Vec<f64> = values.iter().copied().filter(|&v| v > 0.0).collect();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let mut levels = vec![0.0];
        let mut measures = vec![n as f64 * volume];
        let mut i = 0;
        while i < n {
            let v = sorted[i];
            while i < n && sorted[i] == v {
                i += 1;
            }
            levels.push(v);
            measures.push((n - i) as f64 * volume);
        }
        Self { levels, measures }
    }

    /// Jump points `(lambda_i, omega(lambda_i))`, starting at `lambda = 0`.
    pub fn jumps(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.levels.iter().copied().zip(self.measures.iter().copied())
    }

    /// `omega(lambda)` for `lambda >= 0`.
    pub fn eval(&self, lambda: f64) -> f64 {
        let i = self.levels.partition_point(|&l| l <= lambda);
        if i == 0 {
            self.measures[0]
        } else {
            self.measures[i - 1]
        }
    }

    /// `p int_0^inf lambda^(p-1) omega(lambda) d lambda`, exact on steps.
    pub fn layer_cake(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        if p.is_infinite() {
            return Err(Error::OutOfRange("layer-cake integral needs finite p".into()));
        }
        Ok(compensated_sum(
            self.levels
                .windows(2)
                .zip(&self.measures)
                .map(|(w, m)| m * (w[1].powf(p) - w[0].powf(p))),
        ))
    }

    /// `sup_lambda lambda omega(lambda)^(1/p)`: on each step the sup is
    /// approached at the right end.
    pub fn weak_norm(&self, p: f64) -> Result<f64> {
        check_p(p)?;
        let mut best = 0.0f64;
        for (w, &m) in self.levels.windows(2).zip(&self.measures) {
            if m > 0.0 {
                let f = if p.is_infinite() { 1.0 } else { m.powf(1.0 / p) };
                best = best.max(w[1] * f);
            }
        }
        Ok(best)
    }
}

pub fn distribution(f: &SetField, rho: &NormField) -> Result<DistributionTable> {
    Ok(DistributionTable::from_values(f.domain().cell_volume(), &cell_values(f, rho)?))
}

/// Weak `L^p` quasinorm.
pub fn weak_norm(f: &SetField, rho: &NormField, p: f64) -> Result<f64> {
    distribution(f, rho)?.weak_norm(p)
}

/// `d_p(F, G) = (int d_{H, rho_x}(F(x), G(x))^p dx)^(1/p)`.
pub fn dp_distance(f: &SetField, g: &SetField, rho: &NormField, p: f64) -> Result<f64> {
    check_p(p)?;
    if f.domain() != g.domain() {
        return Err(Error::DomainMismatch(format!("{:?} vs {:?}", f.domain(), g.domain())));
    }
    if f.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: f.dim(), got: g.dim() });
    }
    rho.check(&f.domain(), f.dim())?;
    let vals = f
        .cells()
        .iter()
        .zip(g.cells())
        .enumerate()
        .map(|(c, (a, b))| hausdorff(a, b, &rho.seminorm(c)?))
        .collect::<Result<Vec<_>>>()?;
    lp_of_values(f.domain().cell_volume(), &vals, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_step_table() {
        let t = DistributionTable::from_values(0.5, &[1.0, 2.0]);
        assert_eq!(t.eval(0.0), 1.0);
        assert_eq!(t.eval(0.99), 1.0);
        assert_eq!(t.eval(1.0), 0.5);
        assert_eq!(t.eval(2.0), 0.0);
        assert_eq!(t.weak_norm(1.0).unwrap(), 1.0);
        // 1 * (1 - 0) + 0.5 * (4 - 1) = 2.5 = 0.5 * 1 + 0.5 * 4
        assert_eq!(t.layer_cake(2.0).unwrap(), 2.5);
    }

    #[test]
    fn zero_values() {
        let t = DistributionTable::from_values(0.25, &[0.0; 4]);
        assert_eq!(t.eval(0.0), 0.0);
        assert_eq!(t.weak_norm(2.0).unwrap(), 0.0);
        assert_eq!(t.layer_cake(3.0).unwrap(), 0.0);
    }
}
