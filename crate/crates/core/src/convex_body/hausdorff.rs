use nalgebra::DMatrix;

use super::body::ConvexBody;
use super::seminorm::{invertible, Seminorm};
use crate::numeric::dot;
use crate::{Error, Result};

/// Hausdorff distance between two bodies in the metric of a norm.
///
/// Matrix norms `|W v|` are handled by mapping both bodies through `W`.
/// Seminorms that are not recognised as norms are rejected.
pub fn hausdorff(a: &ConvexBody, b: &ConvexBody, rho: &Seminorm) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    match rho {
        Seminorm::Euclidean => euclidean_hausdorff(a, b),
        Seminorm::Matrix { matrix } => {
            if matrix.ncols() != a.dim() {
                return Err(Error::DimensionMismatch { expected: matrix.ncols(), got: a.dim() });
            }
            if !invertible(matrix) {
                return Err(Error::DegenerateNorm(
                    "Hausdorff distance needs an invertible matrix".into(),
                ));
            }
            euclidean_hausdorff(&a.map_linear(matrix)?, &b.map_linear(matrix)?)
        }
        _ => Err(Error::DegenerateNorm(
            "Hausdorff distance is only defined here for Euclidean and invertible matrix norms".into(),
        )),
    }
}

fn euclidean_hausdorff(a: &ConvexBody, b: &ConvexBody) -> Result<f64> {
    if a.dim() == 1 {
        return Ok((a.magnitude() - b.magnitude()).abs());
    }
    Ok(directed(a, b).max(directed(b, a)))
}

/// `max_{g in gen(a)} dist(g, b)`; the max of a convex function over a
/// polytope is attained at a vertex.
fn directed(a: &ConvexBody, b: &ConvexBody) -> f64 {
    let d = a.dim();
    let mut pts: Vec<Vec<f64>> = Vec::with_capacity(2 * b.num_generators());
    for g in b.generators() {
        pts.push(g.to_vec());
        pts.push(g.iter().map(|x| -x).collect());
    }
    if pts.is_empty() {
        pts.push(vec![0.0; d]);
    }
    a.generators()
        .map(|g| point_distance(g, &pts))
        .fold(0.0f64, f64::max)
}

/// Euclidean distance from `x` to `conv(pts)` by Wolfe's minimum-norm-point
/// algorithm on the translated set `pts - x`.
pub fn point_distance(x: &[f64], pts: &[Vec<f64>]) -> f64 {
    let d = x.len();
    let s: Vec<Vec<f64>> = pts
        .iter()
        .map(|p| p.iter().zip(x).map(|(a, b)| a - b).collect())
        .collect();
    let r2 = s.iter().map(|p| dot(p, p)).fold(0.0f64, f64::max);
    if r2 == 0.0 {
        return 0.0;
    }
    let tol = 1e-12 * r2;

    let start = (0..s.len())
        .min_by(|&i, &j| dot(&s[i], &s[i]).total_cmp(&dot(&s[j], &s[j])))
        .unwrap_or(0);
    let mut corral: Vec<usize> = vec![start];
    let mut lambda: Vec<f64> = vec![1.0];
    let mut y = s[start].clone();

    for _ in 0..(50 * (s.len() + d) + 100) {
        // Major cycle: most negative <y, s_j>.
        let yy = dot(&y, &y);
        let (j, m) = (0..s.len())
            .map(|j| (j, dot(&y, &s[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty point set");
        if yy - m <= tol || corral.contains(&j) {
            break;
        }
        corral.push(j);
        lambda.push(0.0);

        // Minor cycles.
        loop {
            let Some(alpha) = affine_minimizer(&corral, &s) else {
                corral.pop();
                lambda.pop();
                return dot(&y, &y).sqrt();
            };
            if alpha.iter().all(|&a| a > 1e-15) {
                lambda = alpha;
                break;
            }
            let mut theta = 1.0f64;
            for (l, a) in lambda.iter().zip(&alpha) {
                if *a <= 1e-15 && l - a > 0.0 {
                    theta = theta.min(l / (l - a));
                }
            }
            for (l, a) in lambda.iter_mut().zip(&alpha) {
                *l = theta * a + (1.0 - theta) * *l;
            }
            let mut k = 0;
            while k < corral.len() {
                if lambda[k] <= 1e-15 {
                    corral.remove(k);
                    lambda.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            if corral.len() == 1 {
                break;
            }
        }
        y = vec![0.0; d];
        for (&i, &l) in corral.iter().zip(&lambda) {
            for (yk, sk) in y.iter_mut().zip(&s[i]) {
                *yk += l * sk;
            }
        }
    }
    dot(&y, &y).sqrt()
}

/// Barycentric coordinates of the min-norm point of the affine hull of the
/// corral, from the KKT system `[S^T S, 1; 1^T, 0]`.
fn affine_minimizer(corral: &[usize], s: &[Vec<f64>]) -> Option<Vec<f64>> {
    let m = corral.len();
    let mut k = DMatrix::<f64>::zeros(m + 1, m + 1);
    for a in 0..m {
        for b in 0..m {
            k[(a, b)] = dot(&s[corral[a]], &s[corral[b]]);
        }
        k[(a, m)] = 1.0;
        k[(m, a)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let lu = k.clone().full_piv_lu();
    let sol = lu.solve(&rhs)?;
    if sol.iter().any(|x| !x.is_finite()) {
        return None;
    }
    let alpha: Vec<f64> = sol.iter().take(m).copied().collect();
    let residual = (&k * &sol - &rhs).norm();
    (residual < 1e-9).then_some(alpha)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_to_square() {
        let sq = vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]];
        assert!((point_distance(&[3.0, 0.0], &sq) - 2.0).abs() < 1e-12);
        assert!((point_distance(&[2.0, 2.0], &sq) - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(point_distance(&[0.5, 0.5], &sq), 0.0);
    }

    #[test]
    fn square_vs_segment() {
        let sq = ConvexBody::new(2, &[[1.0, 1.0], [1.0, -1.0]]).unwrap();
        let seg = ConvexBody::segment(&[1.0, 0.0]).unwrap();
        let h = hausdorff(&sq, &seg, &Seminorm::Euclidean).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn point_to_triangle_in_space() {
        let tri = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        let d = point_distance(&[0.0, 0.0, 0.0], &tri);
        assert!((d - 1.0 / 3f64.sqrt()).abs() < 1e-12);
    }
}
