mod common;

use common::{dec, matches_decimal};
use proptest::prelude::*;
use regseq_core::ball::laurent_div;
use regseq_core::ball::{binom_neg_s, ball_div, CBall, Jet, RBall};
use regseq_core::bigfloat::BigFloat;
use regseq_core::error::BallError;
use regseq_core::Rational;

type B = RBall<BigFloat>;

fn rat(p: i64, q: i64) -> Rational {
    Rational::new(p.into(), q.into())
}

#[test]
fn exact_product_stays_exact() {
    let one = B::one(128);
    let p = one.mul_ref(&one);
    assert!(p.contains_f64(1.0));
    assert_eq!(p.rad, 0.0);
}

#[test]
fn radii_add() {
    let a = RBall::<f64>::new(2.0, 0.1);
    let b = RBall::<f64>::new(3.0, 0.2);
    let s = a.add_ref(&b);
    assert!(s.contains_f64(5.0));
    assert!(s.rad >= 0.3 - 1e-16 && s.rad < 0.3 + 1e-14);
    assert!(s.contains_f64(5.3 - 1e-12));
    assert!(!s.contains_f64(5.31));
}

#[test]
fn exp_zero_is_one() {
    let e = B::zero(128).exp();
    assert!(e.contains_f64(1.0));
    assert!(e.rad < 1e-35);
}

#[test]
fn log_inverts_power() {
    let two = B::from_i64(2, 128);
    let four = two.pow(&two).unwrap();
    let l = four.ln().unwrap();
    let expect = B::ln2(128).mul_i64(2);
    assert!(l.overlaps(&expect));
    assert!(l.rad < 1e-35);
}

#[test]
fn pascal_growth_exponent() {
    let p = 128;
    let lam = B::from_i64(17, p).sqrt().add_ref(&B::from_i64(3, p)).div_i64(2);
    let v = lam.ln().unwrap().div_ref(&B::ln2(p)).add_ref(&B::one(p));
    assert!(matches_decimal(&v, "2.83250638358045"));
    assert!(v.rad < 1e-30);
}

#[test]
fn domain_errors() {
    let z = CBall::<f64>::zero(53);
    assert_eq!(ball_div(&CBall::one(53), &z).unwrap_err(), BallError::DivisorContainsZero);
    assert!(RBall::<f64>::from_f64(-1.0, 53).ln().is_err());
    assert!(CBall::<f64>::from_f64(-2.0, 0.0, 53).ln().is_err());
}

#[test]
fn jet_product_truncates() {
    let p = 64;
    let a = Jet::<BigFloat>::from_coeffs(vec![CBall::one(p), CBall::one(p)], 2);
    let b = Jet::<BigFloat>::from_coeffs(vec![CBall::one(p), CBall::from_i64(-1, p)], 2);
    let c = a.mul_ref(&b);
    assert_eq!(c.coeffs.len(), 3);
    assert!(c.coeff(0).contains_f64(1.0, 0.0));
    assert!(c.coeff(1).contains_f64(0.0, 0.0));
    assert!(c.coeff(2).contains_f64(-1.0, 0.0));
}

#[test]
fn one_minus_two_to_minus_z() {
    let p = 128;
    let ln2 = B::ln2(p);
    let j = Jet::constant(CBall::one(p), 3).sub_ref(&Jet::exp_linear(&CBall::zero(p), &ln2.neg_ref(), 3));
    let l = ln2.to_f64();
    let want = [0.0, l, -l * l / 2.0, l * l * l / 6.0];
    for (i, w) in want.iter().enumerate() {
        let c = j.coeff(i);
        assert!((c.re.to_f64() - w).abs() < 1e-15, "coefficient {i}");
        assert!(c.im.contains_f64(0.0));
    }
    assert!(j.coeff(0).contains_f64(0.0, 0.0));
}

#[test]
fn laurent_simple_cases() {
    let p = 64;
    let z = Jet::<BigFloat>::from_coeffs(vec![CBall::zero(p), CBall::one(p)], 4);
    let one = Jet::constant(CBall::one(p), 4);
    let l = laurent_div(&one, &z, 1).unwrap();
    assert_eq!(l.valuation, -1);
    assert!(l.coeff(-1).unwrap().contains_f64(1.0, 0.0));
    assert!(l.coeff(0).unwrap().contains_f64(0.0, 0.0));

    let z2 = Jet::from_coeffs(vec![CBall::zero(p), CBall::zero(p), CBall::one(p)], 4);
    let l = laurent_div(&z2, &z, 1).unwrap();
    assert!(l.coeff(0).unwrap().contains_f64(0.0, 0.0));
    assert!(l.coeff(1).unwrap().contains_f64(1.0, 0.0));
    assert!(matches!(laurent_div(&one, &one, 1), Err(BallError::ValuationTooHigh(0))));
}

#[test]
fn binomials() {
    let p = 128;
    assert!(binom_neg_s(&CBall::<BigFloat>::from_i64(2, p), 0).contains_f64(1.0, 0.0));
    assert!(binom_neg_s(&CBall::<BigFloat>::from_i64(2, p), 1).contains_f64(-2.0, 0.0));
    // |binom(-s, k)| ~ k^(s-1) / Gamma(s)
    let s = 2.5;
    let k = 1000;
    let b = binom_neg_s(&CBall::<f64>::from_f64(s, 0.0, 53), k).abs();
    let gamma = 1.329_340_388_179_137;
    let stirling = (k as f64).powf(s - 1.0) / gamma;
    assert!((b.to_f64() / stirling - 1.0).abs() < 1e-2);
}

#[test]
fn json_round_trip() {
    let b = CBall::<BigFloat>::from_rational(&rat(1, 3), 128).add_ref(&CBall::i(128));
    let j = b.to_json();
    let back = CBall::<BigFloat>::from_json(&j, 128).unwrap();
    assert!(back.contains(&b));
    assert_eq!(serde_json::to_string(&back.to_json()).unwrap(), serde_json::to_string(&j).unwrap());
}

/// Exact power-series quotient `g / h` up to `n` coefficients.
fn series_div(g: &[Rational], h: &[Rational], n: usize) -> Vec<Rational> {
    let mut out: Vec<Rational> = Vec::with_capacity(n);
    for k in 0..n {
        let mut acc = g.get(k).cloned().unwrap_or_else(|| rat(0, 1));
        for i in 1..=k {
            if let Some(hi) = h.get(i) {
                acc -= hi * &out[k - i];
            }
        }
        out.push(acc / &h[0]);
    }
    out
}

fn small_ints(n: usize) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-9i64..=9, n)
}

fn jet_of(c: &[i64], order: usize, prec: u32) -> Jet<BigFloat> {
    Jet::from_coeffs(c.iter().map(|&v| CBall::from_i64(v, prec)).collect(), order)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn arithmetic_contains_exact(a in -1000i64..1000, b in 1i64..1000, c in -1000i64..1000, d in 1i64..1000) {
        let (x, y) = (rat(a, b), rat(c, d));
        for prec in [53u32, 64, 200] {
            let bx = B::from_rational(&x, prec);
            let by = B::from_rational(&y, prec);
            prop_assert!(bx.add_ref(&by).contains_rational(&(&x + &y)));
            prop_assert!(bx.sub_ref(&by).contains_rational(&(&x - &y)));
            prop_assert!(bx.mul_ref(&by).contains_rational(&(&x * &y)));
            if c != 0 {
                prop_assert!(bx.div_ref(&by).contains_rational(&(&x / &y)));
            }
            let fx = RBall::<f64>::from_rational(&x, 53);
            let fy = RBall::<f64>::from_rational(&y, 53);
            prop_assert!(fx.mul_ref(&fy).contains_rational(&(&x * &y)));
            prop_assert!(fx.add_ref(&fy).contains_rational(&(&x + &y)));
        }
    }

    #[test]
    fn complex_product_contains_exact(a in -50i64..50, b in -50i64..50, c in -50i64..50, d in 1i64..50) {
        let z = CBall::<BigFloat>::new(B::from_rational(&rat(a, 7), 64), B::from_rational(&rat(b, 3), 64));
        let w = CBall::<BigFloat>::new(B::from_rational(&rat(c, d), 64), B::from_rational(&rat(1, d), 64));
        let p = z.mul_ref(&w);
        let (zr, zi, wr, wi) = (rat(a, 7), rat(b, 3), rat(c, d), rat(1, d));
        prop_assert!(p.re.contains_rational(&(&zr * &wr - &zi * &wi)));
        prop_assert!(p.im.contains_rational(&(&zr * &wi + &zi * &wr)));
        let q = z.div_ref(&w);
        let n = &wr * &wr + &wi * &wi;
        prop_assert!(q.re.contains_rational(&((&zr * &wr + &zi * &wi) / &n)));
        prop_assert!(q.im.contains_rational(&((&zi * &wr - &zr * &wi) / &n)));
    }

    #[test]
    fn jet_division_inverts_product(f in small_ints(4), g in small_ints(4), g0 in 1i64..9) {
        let mut g = g;
        g[0] = g0;
        let fj = jet_of(&f, 3, 128);
        let gj = jet_of(&g, 3, 128);
        let back = fj.mul_ref(&gj).div_ref(&gj).unwrap();
        for (i, &v) in f.iter().enumerate() {
            prop_assert!(back.coeff(i).contains_f64(v as f64, 0.0));
        }
    }

    #[test]
    fn laurent_matches_exact_division(g in small_ints(5), h in small_ints(5), h0 in 1i64..9, a in 1usize..4) {
        let mut h = h;
        h[0] = h0;
        let order = 8;
        let mut den = vec![0i64; a];
        den.extend_from_slice(&h);
        let l = laurent_div(&jet_of(&g, order, 128), &jet_of(&den, order, 128), a).unwrap();
        let gr: Vec<Rational> = g.iter().map(|&v| rat(v, 1)).collect();
        let hr: Vec<Rational> = h.iter().map(|&v| rat(v, 1)).collect();
        let exact = series_div(&gr, &hr, order + 1 - a);
        for (k, e) in exact.iter().enumerate() {
            let c = l.coeff(k as i64 - a as i64).unwrap();
            prop_assert!(c.re.contains_rational(e), "Z^{} of {:?}/{:?}", k as i64 - a as i64, g, den);
            prop_assert!(c.im.contains_zero());
        }
    }

    #[test]
    fn decimal_helper_round_trips(n in -10_000_000i64..10_000_000) {
        let s = format!("{}.{:03}", n / 1000, (n % 1000).abs());
        let s = if n < 0 && n / 1000 == 0 { format!("-{s}") } else { s };
        prop_assert_eq!(dec(&s), rat(n, 1000));
    }
}
