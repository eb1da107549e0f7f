//! Minkowski functional of a symmetric polytope by a dense revised simplex.
//!
//! For generators `g_1..g_N` in `R^d` the gauge of `v` is
//!
//! ```text
//! min sum_i (a_i + b_i)  s.t.  sum_i (a_i - b_i) g_i = v,  a, b >= 0
//! ```
//!
//! The program has only `d <= 3` rows, so the basis inverse is rebuilt from
//! scratch at every pivot and pricing is a single pass `max_i |y . g_i|`.

const MAX_DIM: usize = 3;
const PRICE_TOL: f64 = 1e-12;
const PIVOT_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Var {
    /// Column `k`: `+g_{k/2}` for even `k`, `-g_{k/2}` for odd `k`.
    Col(usize),
    Art(usize),
}

type Mat = [[f64; MAX_DIM]; MAX_DIM];

fn invert(m: &Mat, d: usize) -> Option<Mat> {
    let mut a = *m;
    let mut inv: Mat = [[0.0; MAX_DIM]; MAX_DIM];
    for (i, row) in inv.iter_mut().enumerate().take(d) {
        row[i] = 1.0;
    }
    for c in 0..d {
        let p = (c..d).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-14 {
            return None;
        }
        a.swap(c, p);
        inv.swap(c, p);
        let piv = a[c][c];
        for k in 0..d {
            a[c][k] /= piv;
            inv[c][k] /= piv;
        }
        for r in 0..d {
            if r != c {
                let f = a[r][c];
                if f != 0.0 {
                    for k in 0..d {
                        a[r][k] -= f * a[c][k];
                        inv[r][k] -= f * inv[c][k];
                    }
                }
            }
        }
    }
    Some(inv)
}

struct Lp<'a> {
    d: usize,
    pts: &'a [[f64; MAX_DIM]],
    skip: Option<usize>,
    scale: f64,
    v: [f64; MAX_DIM],
    art_sign: [f64; MAX_DIM],
}

impl Lp<'_> {
    fn column(&self, var: Var) -> [f64; MAX_DIM] {
        match var {
            Var::Col(k) => {
                let g = self.pts[k / 2];
                let s = if k % 2 == 0 { 1.0 } else { -1.0 } / self.scale;
                [s * g[0], s * g[1], s * g[2]]
            }
            Var::Art(r) => {
                let mut e = [0.0; MAX_DIM];
                e[r] = self.art_sign[r];
                e
            }
        }
    }

    /// Runs one phase; `None` on unboundedness or breakdown.
    fn phase(&self, basis: &mut [Var; MAX_DIM], phase_one: bool) -> Option<[f64; MAX_DIM]> {
        let d = self.d;
        let n = self.pts.len();
        let cap = 50 * (n + d) + 200;
        let mut degenerate_run = 0usize;
        for _ in 0..cap {
            let mut b: Mat = [[0.0; MAX_DIM]; MAX_DIM];
            for (c, &var) in basis.iter().enumerate().take(d) {
                let col = self.column(var);
                for r in 0..d {
                    b[r][c] = col[r];
                }
            }
            let binv = invert(&b, d)?;
            let mut xb = [0.0; MAX_DIM];
            for r in 0..d {
                xb[r] = (0..d).map(|j| binv[r][j] * self.v[j]).sum::<f64>().max(0.0);
            }
            let cost = |var: Var| match (var, phase_one) {
                (Var::Art(_), true) => 1.0,
                (Var::Col(_), true) => 0.0,
                (Var::Art(_), false) => 0.0,
                (Var::Col(_), false) => 1.0,
            };
            let mut y = [0.0; MAX_DIM];
            for j in 0..d {
                y[j] = (0..d).map(|r| cost(basis[r]) * binv[r][j]).sum();
            }

            let bland = degenerate_run > 8;
            let base = if phase_one { 0.0 } else { 1.0 };
            let mut entering: Option<(usize, f64)> = None;
            for i in 0..n {
                if Some(i) == self.skip {
                    continue;
                }
                let g = self.pts[i];
                let s = (y[0] * g[0] + y[1] * g[1] + y[2] * g[2]) / self.scale;
                for (k, rc) in [(2 * i, base - s), (2 * i + 1, base + s)] {
                    if rc < -PRICE_TOL && basis[..d].iter().all(|&bv| bv != Var::Col(k)) {
                        match entering {
                            None => entering = Some((k, rc)),
                            Some((_, best)) if !bland && rc < best => entering = Some((k, rc)),
                            _ => {}
                        }
                    }
                }
                if bland && entering.is_some() {
                    break;
                }
            }
            let Some((k, _)) = entering else {
                return Some(xb);
            };

            let col = self.column(Var::Col(k));
            let mut db = [0.0; MAX_DIM];
            for r in 0..d {
                db[r] = (0..d).map(|j| binv[r][j] * col[j]).sum();
            }
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..d {
                if db[r] > PIVOT_TOL {
                    let ratio = xb[r] / db[r];
                    let better = match leave {
                        None => true,
                        Some((lr, lt)) => {
                            ratio < lt - 1e-15 || (ratio <= lt + 1e-15 && basis[r] < basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let (r, ratio) = leave?;
            degenerate_run = if ratio <= 1e-15 { degenerate_run + 1 } else { 0 };
            basis[r] = Var::Col(k);
        }
        log::warn!("gauge simplex hit its iteration cap ({cap}); returning current basis");
        None
    }

    fn solve(&self) -> Option<f64> {
        let d = self.d;
        let mut basis = [Var::Art(0), Var::Art(1), Var::Art(2)];
        let x1 = self.phase(&mut basis, true)?;
        let vnorm = self.v[..d].iter().map(|x| x * x).sum::<f64>().sqrt();
        let infeasibility: f64 = (0..d)
            .filter(|&r| matches!(basis[r], Var::Art(_)))
            .map(|r| x1[r])
            .sum();
        if infeasibility > 1e-10 * (1.0 + vnorm) {
            return None;
        }
        // Drive zero-level artificials out wherever a real column can replace them.
        for r in 0..d {
            if !matches!(basis[r], Var::Art(_)) {
                continue;
            }
            let mut b: Mat = [[0.0; MAX_DIM]; MAX_DIM];
            for (c, &var) in basis.iter().enumerate().take(d) {
                let col = self.column(var);
                for rr in 0..d {
                    b[rr][c] = col[rr];
                }
            }
            let binv = invert(&b, d)?;
            let replacement = (0..2 * self.pts.len())
                .filter(|&k| Some(k / 2) != self.skip && !basis.contains(&Var::Col(k)))
                .find(|&k| {
                    let col = self.column(Var::Col(k));
                    let e: f64 = (0..d).map(|j| binv[r][j] * col[j]).sum();
                    e.abs() > 1e-9
                });
            if let Some(k) = replacement {
                basis[r] = Var::Col(k);
            }
        }
        let x2 = self.phase(&mut basis, false)?;
        let total: f64 = (0..d)
            .filter(|&r| matches!(basis[r], Var::Col(_)))
            .map(|r| x2[r])
            .sum();
        Some(total)
    }
}

/// Gauge of `v` with respect to `conv(+-pts)` (ignoring `pts[skip]`).
///
/// Returns `None` when `v` is not in the span of the generators.
pub(crate) fn gauge_lp(d: usize, pts: &[[f64; MAX_DIM]], v: &[f64], skip: Option<usize>) -> Option<f64> {
    debug_assert!((1..=MAX_DIM).contains(&d) && v.len() == d);
    let scale = pts
        .iter()
        .enumerate()
        .filter(|(i, _)| Some(*i) != skip)
        .map(|(_, g)| (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt())
        .fold(0.0f64, f64::max);
    let mut vv = [0.0; MAX_DIM];
    for (dst, src) in vv.iter_mut().zip(v) {
        *dst = *src;
    }
    if vv.iter().all(|&x| x == 0.0) {
        return Some(0.0);
    }
    if scale == 0.0 {
        return None;
    }
    // Solve in units of the largest generator.
    for x in vv.iter_mut() {
        *x /= scale;
    }
    let mut art_sign = [1.0; MAX_DIM];
    for r in 0..d {
        if vv[r] < 0.0 {
            art_sign[r] = -1.0;
        }
    }
    Lp { d, pts, skip, scale, v: vv, art_sign }.solve()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pad(p: &[[f64; 2]]) -> Vec<[f64; 3]> {
        p.iter().map(|g| [g[0], g[1], 0.0]).collect()
    }

    #[test]
    fn cross_polytope_gauge_is_l1() {
        let pts = pad(&[[1.0, 0.0], [0.0, 1.0]]);
        let g = gauge_lp(2, &pts, &[1.0, 1.0], None).unwrap();
        assert!((g - 2.0).abs() < 1e-14);
        let g = gauge_lp(2, &pts, &[-0.25, 0.5], None).unwrap();
        assert!((g - 0.75).abs() < 1e-14);
    }

    #[test]
    fn cube_gauge_is_linf() {
        let pts = vec![
            [1.0, 1.0, 1.0],
            [1.0, 1.0, -1.0],
            [1.0, -1.0, 1.0],
            [1.0, -1.0, -1.0],
        ];
        let g = gauge_lp(3, &pts, &[0.3, -2.0, 0.7], None).unwrap();
        assert!((g - 2.0).abs() < 1e-13);
    }

    #[test]
    fn off_span_is_unbounded() {
        let pts = pad(&[[1.0, 0.0]]);
        assert!(gauge_lp(2, &pts, &[0.0, 1.0], None).is_none());
        assert_eq!(gauge_lp(2, &pts, &[-3.0, 0.0], None), Some(3.0));
    }

    #[test]
    fn skip_excludes_a_generator() {
        let pts = pad(&[[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]]);
        let g = gauge_lp(2, &pts, &[0.5, 0.5], Some(2)).unwrap();
        assert!((g - 1.0).abs() < 1e-14);
    }
}
