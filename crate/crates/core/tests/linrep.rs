mod common;

use common::{random_rep, MODELS};
use num_bigint::BigInt;
use proptest::prelude::*;
use regseq_core::error::LinRepError;
use regseq_core::linalg::Matrix;
use regseq_core::linrep::{digits, digits_u64, parse_linrep, serialize_linrep, Mode};
use regseq_core::models;
use regseq_core::Rational;

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

#[test]
fn digit_expansions() {
    assert!(digits(&BigInt::from(0), 2).is_empty());
    assert_eq!(digits(&BigInt::from(6), 2), vec![0, 1, 1]);
    assert_eq!(digits_u64(100, 10), vec![0, 0, 1]);
}

#[test]
fn matrix_products() {
    let rep = models::sum_of_digits(2);
    assert_eq!(rep.matrix_f(&BigInt::from(0)), Matrix::identity(2));
    let f5 = rep.matrix_f(&BigInt::from(5));
    assert_eq!(f5, Matrix::from_rows(vec![vec![r(1), r(2)], vec![r(0), r(1)]]));
    let table = rep.f_table(1001);
    for n in 0..=500usize {
        assert_eq!(table[2 * n], rep.matrices[0].mul_m(&table[n]));
        assert_eq!(table[n], rep.matrix_f(&BigInt::from(n)));
    }
}

#[test]
fn terms() {
    assert_eq!(models::sum_of_digits(2).term_u64(5), r(2));
    assert_eq!(models::pascal_rhombus().term_u64(1), r(1));
    let e4 = models::esthetic(4);
    for n in 0..=1000 {
        let x = e4.term_u64(n);
        assert!(x == r(0) || x == r(1));
        assert_eq!(x == r(1), models::is_esthetic(n, 4), "n = {n}");
    }
}

#[test]
fn summatory_small() {
    let rep = models::sum_of_digits(2);
    assert_eq!(rep.summatory(&BigInt::from(0)), r(0));
    assert_eq!(rep.summatory(&BigInt::from(4)), r(4));
    assert_eq!(rep.summatory_direct(4), r(4));
}

#[test]
fn summatory_routes_agree_on_models() {
    for name in MODELS {
        let rep = models::by_name(name).unwrap();
        let mut running = r(0);
        for n in 0..=10_000u64 {
            let big = BigInt::from(n);
            assert_eq!(rep.summatory(&big), running, "{name}, N = {n}");
            if n % 250 == 0 {
                assert_eq!(rep.summatory_fast(&big).1, running, "{name}, N = {n}");
            }
            running += rep.term_u64(n);
        }
        assert_eq!(rep.summatory_direct(1234), rep.summatory(&BigInt::from(1234)));
    }
}

#[test]
fn json_round_trip_normalizes() {
    for name in MODELS {
        let rep = models::by_name(name).unwrap();
        let text = serialize_linrep(&rep);
        let back = parse_linrep(&text).unwrap();
        assert_eq!(back, rep);
        assert_eq!(serialize_linrep(&back), text);
    }
    let text = r#"{"q": 2, "dimension": 1, "mode": "matrix", "matrices": [[["2/4"]], [[1]]], "left": [1], "initial": ["3"]}"#;
    let rep = parse_linrep(text).unwrap();
    assert_eq!(rep.matrices[0].get(0, 0), &Rational::new(1.into(), 2.into()));
    assert!(serialize_linrep(&rep).contains("\"1/2\""));
}

#[test]
fn pascal_initial_vector() {
    let rep = parse_linrep(&serialize_linrep(&models::pascal_rhombus())).unwrap();
    assert_eq!(rep.initial, vec![r(0), r(1), r(1), r(0), r(2)]);
    assert_eq!(rep.mode, Mode::Sequence);
}

#[test]
fn input_errors() {
    let bad_mode = r#"{"q": 2, "dimension": 1, "mode": "sequence", "matrices": [[[2]], [[1]]], "left": [1], "initial": [1]}"#;
    assert!(matches!(parse_linrep(bad_mode), Err(LinRepError::ModeViolation(_))));
    let bad_dim = r#"{"q": 2, "dimension": 2, "mode": "matrix", "matrices": [[[1, 0], [0, 1]], [[1, 0]]], "left": [1, 0], "initial": [1, 0]}"#;
    match parse_linrep(bad_dim) {
        Err(LinRepError::DimensionMismatch { path, .. }) => assert_eq!(path, "matrices[1]"),
        other => panic!("{other:?}"),
    }
    let bad_entry = r#"{"q": 2, "dimension": 1, "mode": "matrix", "matrices": [[[1]], [["x"]]], "left": [1], "initial": [1]}"#;
    match parse_linrep(bad_entry) {
        Err(LinRepError::Schema { path, .. }) => assert_eq!(path, "matrices[1][0][0]"),
        other => panic!("{other:?}"),
    }
    assert!(matches!(parse_linrep("{"), Err(LinRepError::Schema { .. })));
    assert!(matches!(parse_linrep(r#"{"q": 1}"#), Err(LinRepError::Schema { .. })));
}

proptest! {
    #[test]
    fn digits_round_trip(n in any::<u64>(), q in 2u32..17) {
        let ds = digits_u64(n, q);
        let back = ds.iter().rev().fold(0u128, |acc, &d| acc * q as u128 + d as u128);
        prop_assert_eq!(back, n as u128);
        prop_assert!(ds.last().map_or(n == 0, |&d| d != 0));
        prop_assert_eq!(digits(&BigInt::from(n), q), ds);
    }

    #[test]
    fn random_reps_summatory(seed in any::<u64>(), sequence in any::<bool>(), n in 0u64..3000) {
        let rep = random_rep(seed, sequence);
        prop_assert_eq!(rep.summatory(&BigInt::from(n)), rep.summatory_direct(n));
        prop_assert_eq!(rep.summatory_fast(&BigInt::from(n)).1, rep.summatory_direct(n));
        let back = parse_linrep(&serialize_linrep(&rep)).unwrap();
        prop_assert_eq!(back, rep);
    }
}
