//! Planar kernels: symmetric hulls and many-body Minkowski sums of
//! origin-symmetric polygons.
//!
//! A symmetric polygon is stored as its canonical generators: one vertex of
//! every antipodal pair, flipped onto polar angles `[0, pi)` and sorted by
//! angle. The full counter-clockwise boundary is the generator list followed
//! by its negation.

use crate::numeric::compensated_sum;

pub(crate) type P2 = [f64; 2];

/// Adding `0.0` maps `-0.0` to `0.0`, so exact comparisons see one zero.
#[inline]
fn unsign_zero(p: P2) -> P2 {
    [p[0] + 0.0, p[1] + 0.0]
}

#[inline]
pub(crate) fn canonical(p: P2) -> P2 {
    let p = unsign_zero(p);
    if p[1] < 0.0 || (p[1] == 0.0 && p[0] < 0.0) {
        unsign_zero([-p[0], -p[1]])
    } else {
        p
    }
}

#[inline]
fn half_angle(p: P2) -> f64 {
    p[1].atan2(p[0])
}

fn sort_canonical(mut gens: Vec<P2>) -> Vec<P2> {
    gens.sort_by(|a, b| {
        half_angle(*a)
            .total_cmp(&half_angle(*b))
            .then(a[0].total_cmp(&b[0]))
            .then(a[1].total_cmp(&b[1]))
    });
    gens.dedup();
    gens
}

/// Canonical generators of `conv(+-candidates)`.
pub(crate) fn symmetric_hull(candidates: &[P2]) -> Vec<P2> {
    let mut pts: Vec<P2> = Vec::with_capacity(2 * candidates.len());
    for &c in candidates {
        let c = unsign_zero(c);
        if c != [0.0, 0.0] {
            pts.push(c);
            pts.push(unsign_zero([-c[0], -c[1]]));
        }
    }
    if pts.is_empty() {
        return Vec::new();
    }
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() <= 2 {
        return vec![canonical(pts[0])];
    }

    // Andrew's monotone chain. Turns within rounding of collinear count as
    // collinear, so thin bodies do not keep spurious vertices.
    let mut hull: Vec<P2> = Vec::with_capacity(pts.len() + 1);
    for &p in &pts {
        while hull.len() >= 2 && !left_turn(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    let lower_len = hull.len() + 1;
    for &p in pts.iter().rev().skip(1) {
        while hull.len() >= lower_len && !left_turn(hull[hull.len() - 2], hull[hull.len() - 1], p) {
            hull.pop();
        }
        hull.push(p);
    }
    hull.pop();

    if hull.len() <= 2 {
        return vec![canonical(hull[0])];
    }
    upper_arc(&hull).unwrap_or_else(|| sort_canonical(hull.into_iter().map(canonical).collect()))
}

fn is_upper(p: P2) -> bool {
    p[1] > 0.0 || (p[1] == 0.0 && p[0] > 0.0)
}

/// The half of a symmetric counter-clockwise cycle in the upper half plane,
/// in cycle order; `None` if that half is not one contiguous arc.
fn upper_arc(cycle: &[P2]) -> Option<Vec<P2>> {
    let n = cycle.len();
    let start = (0..n).find(|&i| is_upper(cycle[i]) && !is_upper(cycle[(i + n - 1) % n]))?;
    let arc: Vec<P2> = (0..n).map(|j| cycle[(start + j) % n]).take_while(|p| is_upper(*p)).collect();
    (2 * arc.len() == n).then_some(arc)
}

/// Counter-clockwise turn `o -> a -> b`, beyond rounding of its terms.
#[inline]
fn left_turn(o: P2, a: P2, b: P2) -> bool {
    let (ax, ay, bx, by) = (a[0] - o[0], a[1] - o[1], b[0] - o[0], b[1] - o[1]);
    let c = ax * by - ay * bx;
    c > COLLINEAR_EPS * ((ax * by).abs() + (ay * bx).abs())
}

/// Relative size below which a turn counts as collinear.
const COLLINEAR_EPS: f64 = 1e-12;

/// Full counter-clockwise vertex cycle of a canonical generator list.
pub(crate) fn full_cycle(gens: &[P2]) -> Vec<P2> {
    let mut v = Vec::with_capacity(2 * gens.len());
    v.extend_from_slice(gens);
    v.extend(gens.iter().map(|g| unsign_zero([-g[0], -g[1]])));
    v
}

fn edge_key(e: P2) -> f64 {
    let a = e[1].atan2(e[0]);
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Support function of a symmetric polygon by binary search over edge
/// normal angles.
#[derive(Clone, Debug)]
pub(crate) struct SupportTable {
    cycle: Vec<P2>,
    /// `(normal angle of the edge into cycle[i], i)`, sorted by angle.
    normals: Vec<(f64, usize)>,
}

impl SupportTable {
    /// `None` for segments and points.
    pub(crate) fn new(gens: &[P2]) -> Option<Self> {
        if gens.len() < 2 {
            return None;
        }
        let cycle = full_cycle(gens);
        let m = cycle.len();
        let mut normals: Vec<(f64, usize)> = (0..m)
            .map(|i| {
                let (a, b) = (cycle[(i + m - 1) % m], cycle[i]);
                (edge_key([b[1] - a[1], a[0] - b[0]]), i)
            })
            .collect();
        normals.sort_by(|x, y| x.0.total_cmp(&y.0));
        Some(Self { cycle, normals })
    }

    /// `max_z |<z, v>|` over the vertices.
    pub(crate) fn support(&self, v: P2) -> f64 {
        let m = self.cycle.len();
        let theta = edge_key(v);
        let k = self.normals.partition_point(|x| x.0 <= theta);
        let i = self.normals[(k + self.normals.len() - 1) % self.normals.len()].1;
        [i + m - 1, i, i + 1]
            .into_iter()
            .map(|j| {
                let z = self.cycle[j % m];
                (z[0] * v[0] + z[1] * v[1]).abs()
            })
            .fold(0.0, f64::max)
    }
}

/// Canonical generators of `sum_b w_b * P_b` for nonnegative weights.
///
/// Edges of every polygon are merged by slope starting from the common
/// lowest-leftmost vertex, the sum's own lowest-leftmost vertex.
pub(crate) fn weighted_sum(terms: &[(f64, &[P2])]) -> Vec<P2> {
    let live: Vec<(f64, &[P2])> = terms
        .iter()
        .copied()
        .filter(|(w, g)| *w != 0.0 && !g.is_empty())
        .collect();
    match live.len() {
        0 => return Vec::new(),
        1 => {
            let (w, g) = live[0];
            let w = w.abs();
            return sort_canonical(g.iter().map(|p| canonical([w * p[0], w * p[1]])).collect());
        }
        _ => {}
    }

    let mut start_x = Vec::with_capacity(live.len());
    let mut start_y = Vec::with_capacity(live.len());
    let mut edges: Vec<(f64, P2)> = Vec::new();
    for (w, gens) in live {
        let w = w.abs();
        let cycle: Vec<P2> = full_cycle(gens)
            .into_iter()
            .map(|p| [w * p[0], w * p[1]])
            .collect();
        let len = cycle.len();
        let s = (0..len)
            .min_by(|&i, &j| {
                cycle[i][1]
                    .total_cmp(&cycle[j][1])
                    .then(cycle[i][0].total_cmp(&cycle[j][0]))
            })
            .unwrap_or(0);
        start_x.push(cycle[s][0]);
        start_y.push(cycle[s][1]);
        for i in 0..len {
            let a = cycle[(s + i) % len];
            let b = cycle[(s + i + 1) % len];
            let e = [b[0] - a[0], b[1] - a[1]];
            if e != [0.0, 0.0] {
                edges.push((edge_key(e), e));
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));

    // Compensated walk keeps vertex drift at the ulp level.
    let (mut x, mut cx) = (compensated_sum(start_x), 0.0f64);
    let (mut y, mut cy) = (compensated_sum(start_y), 0.0f64);
    let mut verts = Vec::with_capacity(edges.len());
    verts.push([x, y]);
    for (_, e) in &edges {
        let t = x + e[0];
        cx += if x.abs() >= e[0].abs() { (x - t) + e[0] } else { (e[0] - t) + x };
        x = t;
        let t = y + e[1];
        cy += if y.abs() >= e[1].abs() { (y - t) + e[1] } else { (e[1] - t) + y };
        y = t;
        verts.push([x + cx, y + cy]);
    }
    symmetric_hull(&verts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hull_drops_interior_and_collinear_points() {
        let g = symmetric_hull(&[[1.0, 1.0], [1.0, -1.0], [0.5, 0.0], [1.0, 0.0], [0.0, 0.3]]);
        assert_eq!(g, vec![[1.0, 1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn hull_of_collinear_set_is_a_segment() {
        let g = symmetric_hull(&[[1.0, 2.0], [-2.0, -4.0], [0.5, 1.0]]);
        assert_eq!(g, vec![[2.0, 4.0]]);
    }

    #[test]
    fn sum_of_axis_segments_is_square() {
        let a = [[1.0, 0.0]];
        let b = [[0.0, 1.0]];
        let s = weighted_sum(&[(1.0, &a[..]), (1.0, &b[..])]);
        assert_eq!(s, vec![[1.0, 1.0], [-1.0, 1.0]]);
    }

    #[test]
    fn support_table_matches_a_full_scan() {
        let pts: Vec<P2> = (0..40)
            .map(|i| {
                let a = 0.37 * f64::from(i);
                [(1.0 + 0.5 * (3.0 * a).sin()) * a.cos(), (0.7 + 0.2 * a.cos()) * a.sin()]
            })
            .collect();
        let gens = symmetric_hull(&pts);
        let table = SupportTable::new(&gens).unwrap();
        for i in 0..3600 {
            let a = std::f64::consts::TAU * f64::from(i) / 3600.0;
            let v = [2.0 * a.cos(), 2.0 * a.sin()];
            let scan = gens.iter().map(|z| (z[0] * v[0] + z[1] * v[1]).abs()).fold(0.0, f64::max);
            assert!((table.support(v) - scan).abs() <= 1e-15 * scan, "{v:?}");
        }
    }

    #[test]
    fn weights_scale_terms() {
        let a = [[1.0, 0.0]];
        let s = weighted_sum(&[(0.5, &a[..]), (0.25, &a[..])]);
        assert_eq!(s, vec![[0.75, 0.0]]);
    }
}
