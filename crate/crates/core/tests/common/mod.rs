#![allow(dead_code)]

use num_bigint::BigInt;
use regseq_core::ball::{CBall, RBall};
use regseq_core::scalar::MidScalar;
use regseq_core::Rational;

/// Exact value of a decimal literal such as `-0.0107921`.
pub fn dec(s: &str) -> Rational {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(b) => (true, b),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    let digits: BigInt = format!("{int}{frac}").parse().unwrap();
    let v = Rational::new(digits, BigInt::from(10).pow(frac.len() as u32));
    if neg {
        -v
    } else {
        v
    }
}

/// One unit in the last printed place of a decimal literal.
pub fn last_place(s: &str) -> Rational {
    let frac = s.split_once('.').map(|(_, f)| f.len()).unwrap_or(0);
    Rational::new(1.into(), BigInt::from(10).pow(frac as u32))
}

/// `|mid - x| <= rad + tol` in exact arithmetic.
pub fn near<S: MidScalar>(b: &RBall<S>, x: &Rational, tol: &Rational) -> bool {
    let m = b.mid.to_bigfloat().to_rational();
    let r = regseq_core::bigfloat::BigFloat::from_f64(b.rad, 0).0.to_rational();
    let d = &m - x;
    let d = if d < Rational::from_integer(0.into()) { -d } else { d };
    d <= r + tol
}

/// The ball meets the printed value, allowing for the rounding of its last digit.
pub fn matches_decimal<S: MidScalar>(b: &RBall<S>, s: &str) -> bool {
    near(b, &dec(s), &last_place(s))
}

pub fn matches_complex<S: MidScalar>(b: &CBall<S>, re: &str, im: &str) -> bool {
    matches_decimal(&b.re, re) && matches_decimal(&b.im, im)
}

/// Every built-in model name accepted by `models::by_name`.
pub const MODELS: [&str; 7] = ["sum-of-digits", "esthetic:2", "esthetic:3", "esthetic:4", "esthetic:5", "pascal", "stern-brocot"];

/// Random representation with small integer entries; sequence mode pins the first column of `A_0` to `e_1 = v0`.
pub fn random_rep(seed: u64, sequence: bool) -> regseq_core::linrep::LinRep {
    use rand::{Rng, SeedableRng};
    use regseq_core::linalg::Matrix;
    use regseq_core::linrep::{LinRep, Mode};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let q = rng.gen_range(2..=3u32);
    let d = rng.gen_range(1..=3usize);
    let r = |v: i64| Rational::from_integer(v.into());
    let ms: Vec<Matrix<Rational>> = (0..q)
        .map(|digit| {
            let mut m = Matrix::<Rational>::zeros(d, d);
            for i in 0..d {
                for j in 0..d {
                    m.set(i, j, r(rng.gen_range(-1..=2)));
                }
            }
            if sequence && digit == 0 {
                for i in 0..d {
                    m.set(i, 0, r((i == 0) as i64));
                }
            }
            m
        })
        .collect();
    let left: Vec<Rational> = (0..d).map(|_| r(rng.gen_range(-2..=2))).collect();
    let initial: Vec<Rational> = if sequence {
        (0..d).map(|i| r((i == 0) as i64)).collect()
    } else {
        (0..d).map(|_| r(rng.gen_range(-2..=2))).collect()
    };
    let mode = if sequence { Mode::Sequence } else { Mode::MatrixProduct };
    LinRep::new(q, ms, left, initial, mode).expect("valid by construction")
}
