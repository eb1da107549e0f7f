use serde::{Deserialize, Serialize};

use super::grid::{cubes_at_level, DyadicCube, Translation};
use crate::convex_body::{circle_directions, icosphere, ConvexBody};
use crate::set_field::{DyadicDomain, NormField, SetField};
use crate::{Error, Result};

fn check_alpha(alpha: f64) -> Result<()> {
    if (0.0..1.0).contains(&alpha) {
        Ok(())
    } else {
        Err(Error::OutOfRange(format!("alpha = {alpha} not in [0, 1)")))
    }
}

fn check_translation(domain: &DyadicDomain, tau: Translation) -> Result<()> {
    if tau.n() == domain.n() {
        Ok(())
    } else {
        Err(Error::DomainMismatch(format!(
            "translation in n = {} for a domain with n = {}",
            tau.n(),
            domain.n()
        )))
    }
}

/// `|Q|^(alpha - 1) int_Q F`, with `Q` clipped to the domain and `|Q|` the
/// clipped volume.
pub fn frac_average(f: &SetField, q: &DyadicCube, alpha: f64) -> Result<ConvexBody> {
    check_alpha(alpha)?;
    let domain = f.domain();
    let weights = q.cell_weights(&domain)?;
    let vol = domain.cell_volume();
    let terms: Vec<(f64, &ConvexBody)> = weights.iter().map(|&(c, w)| (w * vol, &f.cells()[c])).collect();
    let integral = ConvexBody::weighted_sum(f.dim(), &terms, None)?;
    let clipped: f64 = terms.iter().map(|(w, _)| w).sum();
    Ok(integral.scale(clipped.powf(alpha - 1.0)))
}

/// Integrals and clipped volumes of every cube of one grid, levels `0..=k`.
struct CubeTree {
    levels: Vec<Vec<DyadicCube>>,
    integrals: Vec<Vec<ConvexBody>>,
    volumes: Vec<Vec<f64>>,
}

fn position(level: &[DyadicCube], q: &DyadicCube) -> usize {
    level
        .binary_search_by(|c| c.coords().cmp(q.coords()))
        .expect("cube present in its level")
}

impl CubeTree {
    fn build(f: &SetField, tau: Translation) -> Result<Self> {
        let domain = f.domain();
        let k = domain.level() as i32;
        let vol = domain.cell_volume();
        let levels: Vec<Vec<DyadicCube>> = (0..=k).map(|j| cubes_at_level(tau, j)).collect();
        let mut integrals: Vec<Vec<ConvexBody>> = vec![Vec::new(); levels.len()];
        let mut volumes: Vec<Vec<f64>> = vec![Vec::new(); levels.len()];

        let leaves = &levels[k as usize];
        for q in leaves {
            let w = q.cell_weights(&domain)?;
            let terms: Vec<(f64, &ConvexBody)> = w.iter().map(|&(c, x)| (x * vol, &f.cells()[c])).collect();
            integrals[k as usize].push(ConvexBody::weighted_sum(f.dim(), &terms, None)?);
            volumes[k as usize].push(terms.iter().map(|(x, _)| x).sum());
        }
        for j in (0..k as usize).rev() {
            let parents = &levels[j];
            let mut members: Vec<Vec<usize>> = vec![Vec::new(); parents.len()];
            for (i, q) in levels[j + 1].iter().enumerate() {
                members[position(parents, &q.parent())].push(i);
            }
            for kids in &members {
                let terms: Vec<(f64, &ConvexBody)> = kids.iter().map(|&i| (1.0, &integrals[j + 1][i])).collect();
                let body = ConvexBody::weighted_sum(f.dim(), &terms, None)?;
                let v: f64 = kids.iter().map(|&i| volumes[j + 1][i]).sum();
                integrals[j].push(body);
                volumes[j].push(v);
            }
        }
        Ok(Self { levels, integrals, volumes })
    }
}

/// The dyadic fractional maximal operator of grid `D^tau`, stored as the
/// symmetric convex hull of all averages `A_{Q,alpha} F` over cubes of
/// levels `0..=k` meeting each finest cell.
///
/// For `tau = 0` the cubes meeting a cell are exactly those containing it.
/// For translated grids a cell can straddle cubes; the value on the cell is
/// then the hull over every cube meeting it, i.e. the sup over the cell.
pub fn dyadic_frac_maximal(f: &SetField, alpha: f64, tau: Translation) -> Result<SetField> {
    check_alpha(alpha)?;
    let domain = f.domain();
    check_translation(&domain, tau)?;
    let tree = CubeTree::build(f, tau)?;
    let dim = f.dim();

    // Running hull down each chain of ancestors.
    let mut hulls: Vec<ConvexBody> = Vec::new();
    for (j, level) in tree.levels.iter().enumerate() {
        let mut next = Vec::with_capacity(level.len());
        for (i, q) in level.iter().enumerate() {
            let avg = tree.integrals[j][i].scale(tree.volumes[j][i].powf(alpha - 1.0));
            let h = if j == 0 {
                avg
            } else {
                let p = position(&tree.levels[j - 1], &q.parent());
                ConvexBody::hull_of(dim, &[&hulls[p], &avg], None)?
            };
            next.push(h);
        }
        hulls = next;
    }

    let leaves = tree.levels.last().expect("at least level 0");
    let k = domain.level() as i32;
    SetField::from_fn(domain, dim, |cell| {
        let c = domain.coords(cell);
        let meeting: Vec<&ConvexBody> = leaves
            .iter()
            .zip(&hulls)
            .filter(|(q, _)| {
                let o = q.cell_overlap_units(c, k);
                o[0] > 0 && o[1] > 0
            })
            .map(|(_, h)| h)
            .collect();
        if tau.is_zero() {
            debug_assert_eq!(meeting.len(), 1);
        }
        ConvexBody::hull_of(dim, &meeting, None)
    })
}

/// `rho_x(M F(x))` per cell without forming the hulls: the seminorm of a
/// hull is the largest seminorm of its parts, so this is the max of
/// `rho_x(A_{Q,alpha} F)` over the cubes `Q` behind each cell's value.
pub fn maximal_norm_values(f: &SetField, alpha: f64, tau: Translation, rho: &NormField) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    let domain = f.domain();
    check_translation(&domain, tau)?;
    rho.check(&domain, f.dim())?;
    let tree = CubeTree::build(f, tau)?;
    let averages: Vec<Vec<ConvexBody>> = tree
        .integrals
        .iter()
        .zip(&tree.volumes)
        .map(|(ints, vols)| ints.iter().zip(vols).map(|(b, v)| b.scale(v.powf(alpha - 1.0))).collect())
        .collect();
    let k = domain.level() as i32;
    let leaves = tree.levels.last().expect("at least level 0");
    let mut out = Vec::with_capacity(domain.num_cells());
    for cell in 0..domain.num_cells() {
        let c = domain.coords(cell);
        let mut best = 0.0f64;
        for (i, q) in leaves.iter().enumerate() {
            let o = q.cell_overlap_units(c, k);
            if o[0] == 0 || o[1] == 0 {
                continue;
            }
            let (mut cube, mut idx) = (*q, i);
            for j in (0..=k as usize).rev() {
                best = best.max(rho.eval_body(cell, &averages[j][idx])?);
                if j > 0 {
                    cube = cube.parent();
                    idx = position(&tree.levels[j - 1], &cube);
                }
            }
        }
        out.push(best);
    }
    Ok(out)
}

/// Hull of the maximal fields of all `3^n` translated grids, with the
/// measured ratio of its magnitude to the standard-grid maximal function.
#[derive(Clone, Debug)]
pub struct MaximalEnvelope {
    pub field: SetField,
    /// `max_x |envelope(x)| / |M^0 F(x)|` over cells where the latter is
    /// positive (1 when no such cell exists).
    pub measured_constant: f64,
}

pub fn full_maximal_envelope(f: &SetField, alpha: f64) -> Result<MaximalEnvelope> {
    let n = f.domain().n();
    let mut fields = Vec::new();
    for tau in Translation::all(n) {
        fields.push(dyadic_frac_maximal(f, alpha, tau)?);
    }
    let base = fields[0].clone();
    let mut env = base.clone();
    for g in &fields[1..] {
        env = env.hull_union(g)?;
    }
    let measured_constant = env
        .cells()
        .iter()
        .zip(base.cells())
        .filter(|(_, b)| b.magnitude() > 0.0)
        .map(|(e, b)| e.magnitude() / b.magnitude())
        .fold(1.0, f64::max);
    Ok(MaximalEnvelope { field: env, measured_constant })
}

/// Classical dyadic fractional maximal function of a nonnegative cell
/// function, by direct enumeration of the cubes meeting each cell. Uses
/// floating-point cube geometry, independent of the exact grid code.
pub fn scalar_frac_maximal(
    domain: &DyadicDomain,
    g: &[f64],
    alpha: f64,
    tau: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if g.len() != domain.num_cells() {
        return Err(Error::DimensionMismatch { expected: domain.num_cells(), got: g.len() });
    }
    if g.iter().any(|&x| x < 0.0 || !x.is_finite()) {
        return Err(Error::OutOfRange("scalar maximal function needs finite nonnegative input".into()));
    }
    let n = domain.n();
    let zero = [0.0, 0.0];
    let tau = tau.unwrap_or(&zero[..n]);
    if tau.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: tau.len() });
    }
    let k = domain.level() as i32;
    let h = domain.cell_side();
    let overlap = |a: f64, b: f64, c: usize| -> f64 {
        let lo = c as f64 * h;
        (b.min(lo + h) - a.max(lo)).max(0.0)
    };

    let mut out = vec![0.0f64; domain.num_cells()];
    for j in 0..=k {
        let side = 0.5f64.powi(j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        // Intervals [side (m + sign tau), side (m + 1 + sign tau)) meeting [0,1).
        let axis_intervals = |a: usize| -> Vec<(f64, f64)> {
            let shift = sign * tau[a];
            let mut v = Vec::new();
            let mut m = -2i64;
            loop {
                let lo = side * (m as f64 + shift);
                if lo >= 1.0 - 1e-15 {
                    break;
                }
                let hi = lo + side;
                if hi > 1e-15 {
                    v.push((lo, hi));
                }
                m += 1;
            }
            v
        };
        let ax0 = axis_intervals(0);
        let ax1 = if n == 2 { axis_intervals(1) } else { vec![(0.0, 1.0)] };
        for &(a0, b0) in &ax0 {
            for &(a1, b1) in &ax1 {
                let mut integral = 0.0;
                let mut volume = 0.0;
                let mut touched = Vec::new();
                for (cell, &gc) in g.iter().enumerate() {
                    let c = domain.coords(cell);
                    let mut w = overlap(a0, b0, c[0]);
                    if n == 2 {
                        w *= overlap(a1, b1, c[1]);
                    }
                    // Drop slivers produced by rounding of thirds.
                    if w > 1e-12 * domain.cell_volume() {
                        integral += w * gc;
                        volume += w;
                        touched.push(cell);
                    }
                }
                if volume > 0.0 {
                    let avg = volume.powf(alpha - 1.0) * integral;
                    for cell in touched {
                        out[cell] = out[cell].max(avg);
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Outcome of [`sublinearity_check`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublinearityVerdict {
    /// `M(F+G)(x) ⊆ MF(x) + MG(x)` on every cell, up to tolerance.
    pub contained: bool,
    /// Largest `h_{M(F+G)}(u) - h_{MF}(u) - h_{MG}(u)` over cells and directions.
    pub max_excess: f64,
    /// Cells where the containment is strict in some direction.
    pub strict_cells: usize,
    /// Largest support discrepancy of `A_Q(F+G)` against `A_Q F + A_Q G`.
    pub linearity_error: f64,
    pub linear: bool,
}

fn check_directions(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0]],
        2 => circle_directions(360).into_iter().map(|d| d.to_vec()).collect(),
        _ => icosphere(3).into_iter().map(|d| d.to_vec()).collect(),
    }
}

pub fn sublinearity_check(f: &SetField, g: &SetField, alpha: f64, tau: Translation) -> Result<SublinearityVerdict> {
    let sum = f.add(g)?;
    let mf = dyadic_frac_maximal(f, alpha, tau)?;
    let mg = dyadic_frac_maximal(g, alpha, tau)?;
    let ms = dyadic_frac_maximal(&sum, alpha, tau)?;
    let dirs = check_directions(f.dim());
    let scale = 1.0 + mf.magnitudes().into_iter().chain(mg.magnitudes()).fold(0.0, f64::max);
    let tol = 1e-12 * scale;

    let mut max_excess = f64::NEG_INFINITY;
    let mut strict_cells = 0;
    for c in 0..f.domain().num_cells() {
        let mut strict = false;
        for u in &dirs {
            let e = ms.cells()[c].support(u)? - mf.cells()[c].support(u)? - mg.cells()[c].support(u)?;
            max_excess = max_excess.max(e);
            if e < -1e-9 * scale {
                strict = true;
            }
        }
        if strict {
            strict_cells += 1;
        }
    }

    let mut linearity_error = 0.0f64;
    for j in 0..=f.domain().level() as i32 {
        for q in cubes_at_level(tau, j) {
            let a = frac_average(&sum, &q, alpha)?;
            let b = frac_average(f, &q, alpha)?;
            let c = frac_average(g, &q, alpha)?;
            for u in &dirs {
                linearity_error = linearity_error.max((a.support(u)? - b.support(u)? - c.support(u)?).abs());
            }
        }
    }
    Ok(SublinearityVerdict {
        contained: max_excess <= tol,
        max_excess,
        strict_cells,
        linearity_error,
        linear: linearity_error <= tol,
    })
}
