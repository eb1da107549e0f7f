use nalgebra::DMatrix;
use proptest::prelude::*;
use setval::matrix_calculus::{geometric_mean, operator_norm, spd_power, SpdMatrix};

fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
    (a - b).abs().max() <= tol * (1.0 + b.abs().max())
}

/// SPD matrix `L L^T + eps I` from free entries.
fn spd_from(entries: &[f64], d: usize) -> SpdMatrix {
    let l = DMatrix::from_fn(d, d, |r, c| if c <= r { entries[r * d + c] } else { 0.0 });
    let m = &l * l.transpose() + DMatrix::identity(d, d) * 0.2;
    SpdMatrix::new((m.clone() + m.transpose()) * 0.5).unwrap()
}

fn spd(d: usize) -> impl Strategy<Value = SpdMatrix> {
    prop::collection::vec(-2.0f64..2.0, d * d).prop_map(move |e| spd_from(&e, d))
}

#[test]
fn riccati_midpoint() {
    // A #_(1/2) B is the unique SPD solution of X A^-1 X = B.
    let a = spd_from(&[1.0, 0.0, 0.3, 2.0], 2);
    let b = spd_from(&[0.5, 0.0, -1.0, 1.0], 2);
    let x = geometric_mean(&a, &b, 0.5).unwrap();
    let lhs = x.matrix() * a.inverse().unwrap().matrix() * x.matrix();
    assert!(close(&lhs, b.matrix(), 1e-12));
}

#[test]
fn commuting_mean_is_entrywise() {
    let a = SpdMatrix::diagonal(&[4.0, 9.0]).unwrap();
    let b = SpdMatrix::diagonal(&[1.0, 1.0]).unwrap();
    let x = geometric_mean(&a, &b, 0.5).unwrap();
    assert!(close(x.matrix(), SpdMatrix::diagonal(&[2.0, 3.0]).unwrap().matrix(), 1e-14));
}

#[test]
fn operator_norm_of_rotation_scaled() {
    let (s, c) = 0.7f64.sin_cos();
    let r = DMatrix::from_row_slice(2, 2, &[c, -s, s, c]) * 3.0;
    assert!((operator_norm(&r) - 3.0).abs() < 1e-14);
    let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 5.0]);
    assert!((operator_norm(&m) - 5.0).abs() < 1e-12);
}

#[test]
fn rejects_asymmetric_input() {
    assert!(SpdMatrix::from_row_slice(2, &[2.0, 1.0, 0.0, 2.0]).is_err());
    assert!(SpdMatrix::from_row_slice(2, &[1.0, 2.0, 2.0, 1.0]).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_of_equal_matrices(a in spd(3), t in 0.01f64..0.99) {
        let x = geometric_mean(&a, &a, t).unwrap();
        prop_assert!(close(x.matrix(), a.matrix(), 1e-10));
    }

    #[test]
    fn mean_is_symmetric_in_weights(a in spd(2), b in spd(2), t in 0.01f64..0.99) {
        // A #_t B = B #_(1-t) A
        let x = geometric_mean(&a, &b, t).unwrap();
        let y = geometric_mean(&b, &a, 1.0 - t).unwrap();
        prop_assert!(close(x.matrix(), y.matrix(), 1e-8));
    }

    #[test]
    fn inverse_of_mean_is_mean_of_inverses(a in spd(2), b in spd(2), t in 0.01f64..0.99) {
        let lhs = geometric_mean(&a, &b, t).unwrap().inverse().unwrap();
        let rhs = geometric_mean(&a.inverse().unwrap(), &b.inverse().unwrap(), t).unwrap();
        prop_assert!(close(lhs.matrix(), rhs.matrix(), 1e-8));
    }

    #[test]
    fn powers_compose(a in spd(3), s in -1.5f64..1.5, t in -1.5f64..1.5) {
        let lhs = spd_power(&spd_power(&a, s).unwrap(), t);
        let rhs = spd_power(&a, s * t);
        if let (Ok(l), Ok(r)) = (lhs, rhs) {
            prop_assert!(close(l.matrix(), r.matrix(), 1e-8));
        }
    }

    #[test]
    fn json_round_trip(a in spd(3)) {
        let s = serde_json::to_string(&a).unwrap();
        let back: SpdMatrix = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(a, back);
    }
}
