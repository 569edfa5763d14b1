mod common;

use common::label;
use mdl_core::discrepancy::{self, BinaryMatrix, Coloring, Rational, Verdict};
use mdl_core::domain::Label;
use mdl_core::rng;
use proptest::prelude::*;

/// Square 0/1 matrices with no empty row.
fn matrix(max_n: usize) -> impl Strategy<Value = BinaryMatrix> {
    (1..=max_n).prop_flat_map(|n| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), n), n).prop_map(move |mut rows| {
            for (i, r) in rows.iter_mut().enumerate() {
                if !r.iter().any(|&b| b) {
                    r[i % n] = true;
                }
            }
            BinaryMatrix::new(rows).unwrap()
        })
    })
}

fn all_colorings(n: usize) -> impl Iterator<Item = Vec<Label>> {
    (0u32..1 << n).map(move |code| (0..n).map(|j| label(code >> (n - 1 - j) & 1 == 1)).collect())
}

fn norms(a: &BinaryMatrix, z: &[Label]) -> (i64, i64) {
    let prod: Vec<i64> = (0..a.n())
        .map(|i| {
            (0..a.n())
                .filter(|&j| a.entry(i, j))
                .map(|j| z[j].as_i64())
                .sum()
        })
        .collect();
    (prod.iter().map(|v| v.abs()).max().unwrap(), prod.iter().map(|v| v * v).sum())
}

#[test]
fn identity_and_all_ones() {
    let id = BinaryMatrix::identity(4).unwrap();
    let w = discrepancy::bruteforce_min_discrepancy(&id).unwrap();
    assert_eq!(w.inf_norm, 1);
    let ones = BinaryMatrix::all_ones(4).unwrap();
    let w = discrepancy::bruteforce_min_discrepancy(&ones).unwrap();
    assert_eq!(w.inf_norm, 0);
    let (err, _) = discrepancy::min_deterministic_error(&discrepancy::matrix_to_family(&id)).unwrap();
    assert_eq!(err, Rational::from_integer(1));
    assert!(BinaryMatrix::new(vec![vec![true, false], vec![false, false]]).is_err());
    assert!(BinaryMatrix::new(vec![vec![true, false]]).is_err());
}

#[test]
fn dummy_point_scales_optimum() {
    let mut g = rng::from_seed(21);
    for _ in 0..5 {
        let (a, _) = discrepancy::planted_zero_matrix(8, 0.5, &mut g).unwrap();
        let rf = discrepancy::matrix_to_family(&a);
        let quarter = Rational::new(1, 4);
        let fam = discrepancy::dummy_point_variant(&rf, quarter).unwrap();
        assert_eq!(fam.domain_size(), 9);
        let (opt, best) = fam.min_error_over_labelings().unwrap();
        assert_eq!(opt, quarter);
        assert_eq!(best[8], Label::Pos);
    }
    let rf = discrepancy::matrix_to_family(&BinaryMatrix::identity(2).unwrap());
    assert!(discrepancy::dummy_point_variant(&rf, Rational::from_integer(0)).is_err());
    assert!(discrepancy::dummy_point_variant(&rf, Rational::new(3, 5)).is_err());
    assert!(discrepancy::dummy_point_variant(&rf, Rational::new(1, 2)).is_ok());
}

#[test]
fn generators_respect_their_contracts() {
    let mut g = rng::from_seed(22);
    let (a, z) = discrepancy::planted_zero_matrix(10, 0.4, &mut g).unwrap();
    assert!(a.product(z.labels()).unwrap().iter().all(|&v| v == 0));
    assert!(discrepancy::planted_zero_matrix(7, 0.4, &mut g).is_err());
    let s = discrepancy::sparse_matrix(10, 2, 4, &mut g).unwrap();
    assert!((0..10).all(|i| (2..=4).contains(&s.row_ones(i))));
    let (c, w) = discrepancy::certified_high_discrepancy_matrix(8, 2, 5, 2, 10_000, &mut g).unwrap();
    assert!(w.inf_norm >= 2);
    assert_eq!(discrepancy::bruteforce_min_discrepancy(&c).unwrap(), w);
}

#[test]
fn verdict_display() {
    assert_eq!(Verdict::ZeroDiscrepancyLikely.to_string(), "zero-discrepancy-likely");
    assert_eq!(Verdict::HighDiscrepancy.to_string(), "high-discrepancy");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn row_identity_is_exact(a in matrix(8), bits in prop::collection::vec(any::<bool>(), 8)) {
        let rf = discrepancy::matrix_to_family(&a);
        let v: Vec<Label> = bits[..a.n()].iter().map(|&b| label(b)).collect();
        for i in 0..a.n() {
            let r = discrepancy::row_errors(&rf, i, &v).unwrap();
            prop_assert_eq!(r.against_sign, r.predicted_against_sign(a.row_ones(i)));
            prop_assert_eq!(r.against_sign + r.with_sign, Rational::from_integer(1));
            prop_assert!(r.against_sign >= Rational::new(1, 2));
            prop_assert_eq!(r.dot, a.row_dot(i, &v));
        }
        let z = Coloring::new(v);
        prop_assert_eq!(discrepancy::coloring_error(&z, &rf).unwrap(), rf.family().worst_case_error(z.labels()).unwrap());
    }

    #[test]
    fn minimum_discrepancy_matches_enumeration(a in matrix(8)) {
        let n = a.n();
        let oracle = all_colorings(n)
            .map(|z| { let (inf, two) = norms(&a, &z); ((inf, two), z) })
            .min()
            .unwrap();
        let w = discrepancy::bruteforce_min_discrepancy(&a).unwrap();
        prop_assert_eq!((w.inf_norm, w.two_norm_sq), oracle.0);
        prop_assert_eq!(w.z.labels(), &oracle.1[..]);
        prop_assert_eq!(w.z.labels()[0], Label::Neg);
    }

    #[test]
    fn deterministic_error_bridges_to_discrepancy(a in matrix(8)) {
        let rf = discrepancy::matrix_to_family(&a);
        let (err, z) = discrepancy::min_deterministic_error(&rf).unwrap();
        let (direct, _) = rf.family().min_error_over_labelings().unwrap();
        prop_assert_eq!(err, direct);
        prop_assert!(err >= Rational::new(1, 2));
        prop_assert_eq!(discrepancy::coloring_error(&z, &rf).unwrap(), err);
        let w = discrepancy::bruteforce_min_discrepancy(&a).unwrap();
        prop_assert_eq!(w.inf_norm == 0, err == Rational::new(1, 2));
        // Through the norms: 1/2 + ‖Az‖∞ / (2 max m_i) ≤ er ≤ 1/2 + ‖Az‖∞ / 2.
        let max_m = (0..a.n()).map(|i| a.row_ones(i)).max().unwrap() as i64;
        prop_assert!(err >= Rational::new(1, 2) + Rational::new(w.inf_norm, 2 * max_m));
        prop_assert!(err <= Rational::new(1, 2) + Rational::new(w.inf_norm, 2));
    }

    #[test]
    fn distinguisher_thresholds_the_excess(a in matrix(6), bits in prop::collection::vec(any::<bool>(), 6), eps in 0.01f64..0.6) {
        let v: Vec<Label> = bits[..a.n()].iter().map(|&b| label(b)).collect();
        let (verdict, err) = discrepancy::distinguisher(&a, &v, eps).unwrap();
        let excess = discrepancy::ratio_to_f64(&(err - Rational::new(1, 2)));
        prop_assert_eq!(verdict == Verdict::ZeroDiscrepancyLikely, excess < eps);
    }

    #[test]
    fn matrix_text_round_trip(a in matrix(10)) {
        prop_assert_eq!(BinaryMatrix::parse(&a.to_string()).unwrap(), a);
    }

    #[test]
    fn float_family_matches_rational(a in matrix(6)) {
        let rf = discrepancy::matrix_to_family(&a);
        let fam = rf.family().to_family().unwrap();
        prop_assert_eq!(fam.k(), 2 * a.n());
        for (d, r) in fam.members().iter().zip(rf.family().members()) {
            for x in 0..a.n() {
                prop_assert!((d.mass()[x] - discrepancy::ratio_to_f64(&r.mass[x])).abs() < 1e-15);
            }
        }
    }
}
