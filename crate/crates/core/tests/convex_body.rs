use proptest::prelude::*;
use setval::convex_body::{
    circle_directions, dual_by_grid, hausdorff, icosphere, ConvexBody, DirectionGrid, Seminorm,
};

/// Support function straight from raw points: `max_i |<g_i, u>|`.
fn raw_support(points: &[Vec<f64>], u: &[f64]) -> f64 {
    points
        .iter()
        .map(|g| g.iter().zip(u).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

fn dirs(dim: usize) -> Vec<Vec<f64>> {
    match dim {
        1 => vec![vec![1.0]],
        2 => circle_directions(360).iter().map(|d| d.to_vec()).collect(),
        _ => icosphere(3).iter().map(|d| d.to_vec()).collect(),
    }
}

fn points(dim: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, dim), 1..12)
}

#[test]
fn pruning_keeps_the_support_function() {
    let pts = vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![0.3, 0.3], vec![-0.5, 0.5]];
    let k = ConvexBody::new(2, &pts).unwrap();
    assert_eq!(k.num_generators(), 2);
    for u in dirs(2) {
        assert!((k.support(&u).unwrap() - raw_support(&pts, &u)).abs() < 1e-14);
    }
}

#[test]
fn cube_gauge_is_max_norm() {
    let cube = ConvexBody::new(3, &[[1.0, 1.0, 1.0], [1.0, 1.0, -1.0], [1.0, -1.0, 1.0], [1.0, -1.0, -1.0]])
        .unwrap();
    assert!((cube.gauge(&[0.5, -2.0, 1.0]).unwrap() - 2.0).abs() < 1e-12);
    assert!((cube.support(&[1.0, 1.0, 1.0]).unwrap() - 3.0).abs() < 1e-14);
}

#[test]
fn flat_body_has_unbounded_gauge_off_its_span() {
    let seg = ConvexBody::segment(&[1.0, 1.0]).unwrap();
    assert!(seg.gauge(&[1.0, 0.0]).is_err());
    assert!((seg.gauge(&[2.0, 2.0]).unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn euclidean_hausdorff_of_square_and_segment() {
    // The corners of [-1,1]^2 are at distance 1 from the segment.
    let sq = ConvexBody::new(2, &[[1.0, 1.0], [1.0, -1.0]]).unwrap();
    let seg = ConvexBody::segment(&[1.0, 0.0]).unwrap();
    assert!((hausdorff(&sq, &seg, &Seminorm::Euclidean).unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn matrix_dual_agrees_with_grid_dual() {
    let m = nalgebra::DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
    let norm = Seminorm::matrix(m).unwrap();
    let grid = DirectionGrid::new(2, 720).unwrap();
    for v in dirs(2).iter().step_by(17) {
        let closed = norm.dual_eval(v).unwrap();
        let grid_val = norm.dual_eval_on(v, &grid).unwrap();
        assert!((closed - grid_val).abs() < 1e-9 * closed, "{closed} vs {grid_val}");
    }
}

#[test]
fn gauge_dual_is_support() {
    let k = ConvexBody::new(2, &[[2.0, 0.0], [0.5, 1.0], [0.0, 0.3]]).unwrap();
    let g = Seminorm::gauge(k.clone());
    let grid = DirectionGrid::new(2, 720).unwrap();
    for v in dirs(2).iter().step_by(23) {
        let by_grid = dual_by_grid(|w| g.eval(w), v, &grid).unwrap();
        assert!((by_grid - k.support(v).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn double_dual_sits_below_the_geometric_mean() {
    let a = Seminorm::matrix(nalgebra::DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0])).unwrap();
    let b = Seminorm::matrix(nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap();
    let pt = Seminorm::geometric_mean(a.clone(), b.clone(), 0.3).unwrap();
    let pss = Seminorm::geom_mean_double_dual(a, b, 0.3, 2, 720).unwrap();
    for v in dirs(2) {
        assert!(pss.eval(&v).unwrap() <= pt.eval(&v).unwrap() * (1.0 + 1e-12));
    }
}

#[test]
fn outer_body_brackets_the_double_dual() {
    let m = |v: &[f64]| Seminorm::matrix(nalgebra::DMatrix::from_row_slice(3, 3, v)).unwrap();
    for dim in [2usize, 3] {
        let (a, b) = if dim == 2 {
            (
                Seminorm::matrix(nalgebra::DMatrix::from_row_slice(2, 2, &[3.0, 0.0, 0.0, 1.0])).unwrap(),
                Seminorm::matrix(nalgebra::DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0])).unwrap(),
            )
        } else {
            (m(&[2.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.5]), m(&[1.0, 0.5, 0.0, 0.0, 1.0, 0.3, 0.0, 0.0, 1.0]))
        };
        let mut prev: Option<Vec<f64>> = None;
        for size in [360, 720, 1440] {
            let Seminorm::GeomMeanDoubleDual(g) = Seminorm::geom_mean_double_dual(a.clone(), b.clone(), 0.3, dim, size).unwrap()
            else {
                unreachable!()
            };
            let outer = g.outer_body().unwrap();
            let mut uppers = Vec::new();
            for v in dirs(dim) {
                let (lo, hi) = (g.eval(&v).unwrap(), outer.gauge(&v).unwrap());
                assert!(lo <= hi * (1.0 + 1e-12), "{lo} > {hi}");
                assert!(hi - lo <= 0.05 * lo, "dim {dim}, size {size}: {lo} vs {hi}");
                uppers.push(hi);
            }
            if let Some(p) = prev {
                assert!(uppers.iter().zip(&p).all(|(u, q)| *u <= q * (1.0 + 1e-12)));
            }
            prev = Some(uppers);
        }
    }
}

#[test]
fn body_json_round_trip() {
    let k = ConvexBody::new(3, &[[1.0, 2.0, 0.0], [0.0, -1.0, 1.0]]).unwrap();
    let s = serde_json::to_string(&k).unwrap();
    let back: ConvexBody = serde_json::from_str(&s).unwrap();
    assert_eq!(k, back);
}

#[test]
fn sum_of_thin_nearly_collinear_bodies() {
    let pairs = |v: &[f64]| v.chunks(2).map(|c| c.to_vec()).collect::<Vec<_>>();
    let pa = pairs(&[
        -0.012371782284232509, 0.010150930084534713, -0.012371782284232507, 0.010150930084534715,
        -0.01059787215821491, 0.00869545364211445, -0.008880969546795328, 0.00728675132501282,
        -0.005611598083170081, 0.004604263031476573,
    ]);
    let pb = pairs(&[
        -0.012238070998450036, 0.010041221242081115, -0.004126393319167535, 0.003385666601775257,
        -0.003276024607305518, 0.0026879471348566974, -0.012238070998450038, 0.010041221242081113,
        -0.010677062708601155, 0.008760428738010782,
    ]);
    let a = ConvexBody::new(2, &pa).unwrap();
    let b = ConvexBody::new(2, &pb).unwrap();
    let s = ConvexBody::weighted_sum(2, &[(1.0, &a), (1.0, &b)], None).unwrap();
    for u in circle_directions(3600) {
        let want = raw_support(&pa, &u) + raw_support(&pb, &u);
        assert!((s.support(&u).unwrap() - want).abs() <= 1e-14, "{u:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn support_is_additive_under_minkowski_sum(dim in 1usize..=3, seed in any::<u64>()) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut draw = |k: usize| -> Vec<Vec<f64>> {
            (0..k).map(|_| (0..dim).map(|_| rand::Rng::random_range(&mut rng, -2.0..2.0)).collect()).collect()
        };
        let (pa, pb) = (draw(5), draw(4));
        let a = ConvexBody::new(dim, &pa).unwrap();
        let b = ConvexBody::new(dim, &pb).unwrap();
        let s = ConvexBody::weighted_sum(dim, &[(1.0, &a), (0.5, &b)], None).unwrap();
        for u in dirs(dim) {
            let lhs = s.support(&u).unwrap();
            let rhs = raw_support(&pa, &u) + 0.5 * raw_support(&pb, &u);
            prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs));
        }
    }

    #[test]
    fn thin_bodies_sum_exactly(
        angle in 0.0f64..std::f64::consts::TAU,
        lens in prop::collection::vec(0.01f64..2.0, 2..6),
        wobble in prop::collection::vec(-1e-9f64..1e-9, 10),
        k in 1usize..5,
    ) {
        // Generators along one line through the origin, perturbed off it by
        // rounding-sized amounts.
        let (c, s) = (angle.cos(), angle.sin());
        let pts: Vec<Vec<f64>> = lens
            .iter()
            .zip(&wobble)
            .map(|(l, w)| vec![l * c - w * s, l * s + w * c])
            .collect();
        let (pa, pb) = (pts[..k.min(pts.len())].to_vec(), pts[k.min(pts.len() - 1)..].to_vec());
        let a = ConvexBody::new(2, &pa).unwrap();
        let b = ConvexBody::new(2, &pb).unwrap();
        let sum = ConvexBody::weighted_sum(2, &[(1.0, &a), (1.0, &b)], None).unwrap();
        for u in dirs(2) {
            let want = raw_support(&pa, &u) + raw_support(&pb, &u);
            prop_assert!((sum.support(&u).unwrap() - want).abs() <= 1e-10 * (1.0 + want));
        }
    }

    #[test]
    fn hull_support_is_pointwise_max(pa in points(2), pb in points(2)) {
        let a = ConvexBody::new(2, &pa).unwrap();
        let b = ConvexBody::new(2, &pb).unwrap();
        let h = a.conv_union(&b).unwrap();
        for u in dirs(2) {
            let want = raw_support(&pa, &u).max(raw_support(&pb, &u));
            prop_assert!((h.support(&u).unwrap() - want).abs() <= 1e-12 * (1.0 + want));
        }
    }

    #[test]
    fn euclidean_hausdorff_is_support_gap(pa in points(2), pb in points(2)) {
        // d_H(A,B) = sup_|u|=1 |h_A(u) - h_B(u)|. Between edge normals the
        // gap is a single sinusoid, so a fine circle plus every edge normal
        // locates the sup to second order.
        let a = ConvexBody::new(2, &pa).unwrap();
        let b = ConvexBody::new(2, &pb).unwrap();
        let d = hausdorff(&a, &b, &Seminorm::Euclidean).unwrap();
        let all: Vec<&Vec<f64>> = pa.iter().chain(&pb).collect();
        let mut us: Vec<[f64; 2]> = circle_directions(20_000);
        for p in &all {
            for q in &all {
                for s in [1.0, -1.0] {
                    let e = [p[0] - s * q[0], p[1] - s * q[1]];
                    let l = e[0].hypot(e[1]);
                    if l > 0.0 {
                        us.push([-e[1] / l, e[0] / l]);
                    }
                }
            }
        }
        let sampled = us
            .iter()
            .map(|u| (raw_support(&pa, u) - raw_support(&pb, u)).abs())
            .fold(0.0, f64::max);
        prop_assert!(d >= sampled - 1e-9);
        prop_assert!(d <= sampled + 1e-6 * (1.0 + d));
    }

    #[test]
    fn gauge_inverts_scaling(pts in points(2), v in prop::collection::vec(-3.0f64..3.0, 2), lambda in 0.1f64..5.0) {
        let k = ConvexBody::new(2, &pts).unwrap();
        if let Ok(g) = k.gauge(&v) {
            let gs = k.scale(lambda).gauge(&v).unwrap();
            prop_assert!((gs * lambda - g).abs() <= 1e-9 * (1.0 + g));
            if g > 0.0 {
                // v / g lies in the body.
                let w: Vec<f64> = v.iter().map(|x| x / g).collect();
                for u in dirs(2) {
                    let lhs: f64 = w.iter().zip(&u).map(|(a, b)| a * b).sum();
                    prop_assert!(lhs <= k.support(&u).unwrap() + 1e-9);
                }
            }
        }
    }

    #[test]
    fn matrix_norm_triangle_inequality(
        m in prop::collection::vec(-2.0f64..2.0, 4),
        x in prop::collection::vec(-5.0f64..5.0, 2),
        y in prop::collection::vec(-5.0f64..5.0, 2),
    ) {
        let n = Seminorm::matrix(nalgebra::DMatrix::from_row_slice(2, 2, &m)).unwrap();
        let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
        prop_assert!(n.eval(&s).unwrap() <= n.eval(&x).unwrap() + n.eval(&y).unwrap() + 1e-12);
    }
}
