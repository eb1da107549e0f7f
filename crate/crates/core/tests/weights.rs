use proptest::prelude::*;
use setval::convex_body::{circle_directions, DirectionGrid};
use setval::matrix_calculus::{MatrixField, SpdMatrix};
use setval::operators::{cubes_at_level, Translation};
use setval::set_field::{random_simple_field, DyadicDomain, NormField};
use setval::weights::*;

fn scalar_values(w: &MatrixField) -> Vec<f64> {
    w.cells().iter().map(|m| m.matrix()[(0, 0)]).collect()
}

#[test]
fn scalar_power_matches_classical_constant() {
    for k in [3, 5] {
        let dom = DyadicDomain::new(1, k).unwrap();
        for fixture in [
            FixtureKind::ScalarPower { exponent: 0.3, center: 0.0 },
            FixtureKind::ScalarPower { exponent: -0.25, center: 0.4 },
        ] {
            let w = fixture_weights(&fixture, dom).unwrap();
            for fam in [CubeFamily::Standard, CubeFamily::Translated] {
                let cubes = fam.cubes(&dom);
                for p in [1.5, 2.0, 3.0] {
                    let matrix = ap_matrix_constant(&w, p, &cubes, &fixture.id()).unwrap().supremum;
                    let wp: Vec<f64> = scalar_values(&w).iter().map(|x| x.powf(p)).collect();
                    let classical = scalar_ap_constant(&wp, &dom, p, &cubes).unwrap();
                    assert!((matrix - classical.powf(1.0 / p)).abs() <= 1e-9 * matrix);
                }
                let a1 = a1_matrix_constant(&w, &cubes, "a1").unwrap().supremum;
                let classical = scalar_a1_constant(&scalar_values(&w), &dom, &cubes).unwrap();
                assert!((a1 - classical).abs() <= 1e-12 * a1);
            }
        }
    }
}

#[test]
fn constant_fields_have_constant_one() {
    let dom = DyadicDomain::new(2, 3).unwrap();
    let a = SpdMatrix::from_row_slice(2, &[3.0, 1.0, 1.0, 2.0]).unwrap();
    for fixture in [FixtureKind::Identity { dim: 2 }, FixtureKind::Constant { matrix: a }] {
        let w = fixture_weights(&fixture, dom).unwrap();
        let cubes = CubeFamily::Translated.cubes(&dom);
        let r = ap_matrix_constant(&w, 2.5, &cubes, &fixture.id()).unwrap();
        assert!((r.supremum - 1.0).abs() < 1e-12, "{}", r.supremum);
        let r1 = a1_matrix_constant(&w, &cubes, &fixture.id()).unwrap();
        assert!((r1.supremum - 1.0).abs() < 1e-12);
    }
}

#[test]
fn nonconstant_fields_exceed_one() {
    let dom = DyadicDomain::new(1, 4).unwrap();
    let w = fixture_weights(&FixtureKind::RotatedDiagonal { exponents: [0.3, -0.2], turns: 1.0 }, dom).unwrap();
    let r = ap_matrix_constant(&w, 2.0, &CubeFamily::Standard.cubes(&dom), "rot").unwrap();
    assert!(r.supremum > 1.0 + 1e-3);
    assert_eq!(r.supremum, r.cubes.iter().map(|c| c.value).fold(0.0, f64::max));
}

#[test]
fn rho_average_two_cells() {
    let dom = DyadicDomain::new(1, 1).unwrap();
    let w = MatrixField::new(
        dom,
        vec![SpdMatrix::diagonal(&[1.0]).unwrap(), SpdMatrix::diagonal(&[3.0]).unwrap()],
    )
    .unwrap();
    let rho = NormField::Matrix { matrix_field: w };
    let q = cubes_at_level(Translation::zero(1), 0)[0];
    let got = rho_average(&rho, &dom, 3.0, &q, &[2.0]).unwrap();
    let want = ((2f64.powi(3) + 6f64.powi(3)) / 2.0).cbrt();
    assert!((got - want).abs() < 1e-14);
    let e = rho_average(&NormField::Euclidean, &dom, 2.0, &q, &[3.0, 4.0]).unwrap();
    assert!((e - 5.0).abs() < 1e-15);
}

#[test]
fn norm_check_for_euclidean_and_constant_fields() {
    let dom = DyadicDomain::new(1, 2).unwrap();
    let grid = DirectionGrid::new(2, 720).unwrap();
    let dirs: Vec<Vec<f64>> = circle_directions(24).iter().map(|d| d.to_vec()).collect();
    let cubes = CubeFamily::Standard.cubes(&dom);
    let v = ap_norm_check(&NormField::Euclidean, &dom, 2, 2.0, &cubes, &grid, &dirs, 20.0).unwrap();
    assert!((v.measured - 1.0).abs() < 1e-9 && v.passed);
    let a = SpdMatrix::from_row_slice(2, &[2.0, 0.7, 0.7, 1.0]).unwrap();
    let rho = NormField::Matrix { matrix_field: MatrixField::constant(dom, a).unwrap() };
    let v = ap_norm_check(&rho, &dom, 2, 3.0, &cubes, &grid, &dirs, 20.0).unwrap();
    assert!((v.measured - 1.0).abs() < 1e-9, "{}", v.measured);
}

#[test]
fn scalar_norm_check_is_the_ap_product() {
    // d = 1: <rho*>_{p'}(1) <rho>_p(1) per cube, the matrix constant itself.
    let dom = DyadicDomain::new(1, 3).unwrap();
    let w = fixture_weights(&FixtureKind::ScalarPower { exponent: 0.4, center: 0.0 }, dom).unwrap();
    let cubes = CubeFamily::Standard.cubes(&dom);
    let grid = DirectionGrid::new(1, 2).unwrap();
    let rho = NormField::Matrix { matrix_field: w.clone() };
    let v = ap_norm_check(&rho, &dom, 1, 2.0, &cubes, &grid, &[vec![1.0]], 10.0).unwrap();
    let ap = ap_matrix_constant(&w, 2.0, &cubes, "s").unwrap().supremum;
    assert!((v.measured - ap).abs() < 1e-12 * ap);
}

#[test]
fn reverse_factorization_identities() {
    let dom = DyadicDomain::new(1, 4).unwrap();
    let w0 = fixture_weights(&FixtureKind::RotatedDiagonal { exponents: [0.3, -0.2], turns: 1.0 }, dom).unwrap();
    let same = reverse_factorization(&w0, &w0, 0.4).unwrap();
    assert_eq!(same, w0);
    let cubes = CubeFamily::Standard.cubes(&dom);
    assert_eq!(
        ap_matrix_constant(&same, 2.0, &cubes, "a").unwrap().supremum,
        ap_matrix_constant(&w0, 2.0, &cubes, "a").unwrap().supremum
    );

    let s0 = fixture_weights(&FixtureKind::ScalarPower { exponent: 0.3, center: 0.0 }, dom).unwrap();
    let s1 = fixture_weights(&FixtureKind::ScalarPower { exponent: -0.2, center: 0.5 }, dom).unwrap();
    let t = 0.3;
    let wb = reverse_factorization(&s0, &s1, t).unwrap();
    for ((a, b), c) in scalar_values(&s0).iter().zip(scalar_values(&s1)).zip(scalar_values(&wb)) {
        let want = a.powf(1.0 - t) * b.powf(t);
        assert!((c - want).abs() <= 1e-13 * want);
    }
}

#[test]
fn random_fixture_is_refinement_stable() {
    let k = FixtureKind::RandomSpd { dim: 2, seed: 9, amplitude: 0.6, resolution: 2 };
    let c: Vec<f64> = (3..=6)
        .map(|lvl| {
            let dom = DyadicDomain::new(1, lvl).unwrap();
            let w = fixture_weights(&k, dom).unwrap();
            ap_matrix_constant(&w, 2.0, &CubeFamily::Standard.cubes(&dom), "r").unwrap().supremum
        })
        .collect();
    assert!(c.windows(2).all(|w| (w[1] - w[0]).abs() < 1e-12 * w[0]), "{c:?}");
}

#[test]
fn fixtures_guard_conditioning() {
    let dom = DyadicDomain::new(1, 10).unwrap();
    let bad = FixtureKind::RotatedDiagonal { exponents: [-0.99, 0.99], turns: 0.0 };
    assert!(fixture_weights(&bad, dom).is_err());
}

#[test]
fn report_serializes() {
    let dom = DyadicDomain::new(1, 2).unwrap();
    let w = fixture_weights(&FixtureKind::Identity { dim: 1 }, dom).unwrap();
    let r = ap_matrix_constant(&w, 2.0, &CubeFamily::Standard.cubes(&dom), "identity-d1").unwrap();
    let back: ApReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
    assert_eq!(back, r);
    assert_eq!(r.csv_row(), "identity-d1,2,2,1");
}

fn random_field(dim: usize, seed: u64) -> MatrixField {
    let dom = DyadicDomain::new(1, 3).unwrap();
    fixture_weights(&FixtureKind::RandomSpd { dim, seed, amplitude: 0.8, resolution: 3 }, dom).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ap_constant_at_least_one(seed in any::<u64>(), dim in 1usize..=3, p in 1.1f64..5.0) {
        let w = random_field(dim, seed);
        let r = ap_matrix_constant(&w, p, &CubeFamily::Translated.cubes(&w.domain()), "r").unwrap();
        prop_assert!(r.cubes.iter().all(|c| c.value >= 1.0 - 1e-12));
    }

    #[test]
    fn ap_constant_grows_with_the_family(seed in any::<u64>(), p in 1.1f64..5.0) {
        let w = random_field(2, seed);
        let dom = w.domain();
        let small = ap_matrix_constant(&w, p, &CubeFamily::Standard.cubes(&dom), "r").unwrap();
        let big = ap_matrix_constant(&w, p, &CubeFamily::Translated.cubes(&dom), "r").unwrap();
        prop_assert!(big.supremum >= small.supremum);
    }

    #[test]
    fn ap_constant_is_scale_invariant(seed in any::<u64>(), c in 0.1f64..10.0) {
        let w = random_field(2, seed);
        let scaled = w.map(|m| SpdMatrix::new(m.matrix() * c)).unwrap();
        let cubes = CubeFamily::Standard.cubes(&w.domain());
        let a = ap_matrix_constant(&w, 2.0, &cubes, "r").unwrap().supremum;
        let b = ap_matrix_constant(&scaled, 2.0, &cubes, "r").unwrap().supremum;
        prop_assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn averaging_contracts_euclidean_lp(seed in any::<u64>(), p in 1.0f64..4.0) {
        let dom = DyadicDomain::new(1, 3).unwrap();
        let f = random_simple_field(dom, 2, seed, 1.0, 3).unwrap();
        for q in CubeFamily::Translated.cubes(&dom) {
            prop_assert!(averaging_ratio(&f, &NormField::Euclidean, p, &q).unwrap() <= 1.0 + 1e-12);
        }
    }
}
