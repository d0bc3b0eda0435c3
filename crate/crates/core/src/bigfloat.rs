//! Binary floating point numbers with arbitrary mantissa length.
//!
//! Every operation returns the rounded result together with an `f64` upper
//! bound on the absolute rounding error, which is what the ball layer needs.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::cmp::Ordering;
use std::fmt;

/// Precision used when an operation on two exact operands cannot be exact.
pub const DEFAULT_PREC: u32 = 128;

/// `man * 2^exp`, rounded to at most `prec` mantissa bits (`prec == 0` means exact).
#[derive(Clone, Debug)]
pub struct BigFloat {
    man: BigInt,
    exp: i64,
    prec: u32,
}

/// Smallest power of two `>= 2^e` representable as `f64` (saturating).
pub fn pow2_up(e: i64) -> f64 {
    if e > 1023 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        f64::from_bits(1)
    }
}

/// `x * 2^e`, correctly handling range extremes (rounds when the result is subnormal).
pub fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= pow2_up(1000);
        e -= 1000;
        if x.is_infinite() {
            return x;
        }
    }
    while e < -1000 {
        x *= pow2_up(-1000);
        e += 1000;
        if x == 0.0 {
            return x;
        }
    }
    x * pow2_up(e)
}

fn bits(m: &BigInt) -> u64 {
    m.bits()
}

impl BigFloat {
    pub fn zero() -> Self {
        BigFloat { man: BigInt::zero(), exp: 0, prec: 0 }
    }

    pub fn precision(&self) -> u32 {
        self.prec
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.man
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    /// Builds `man * 2^exp` and rounds to `prec` bits.
    pub fn from_parts(man: BigInt, exp: i64, prec: u32) -> (Self, f64) {
        Self::round(man, exp, prec)
    }

    fn round(man: BigInt, exp: i64, prec: u32) -> (Self, f64) {
        if man.is_zero() {
            return (BigFloat { man, exp: 0, prec }, 0.0);
        }
        let b = bits(&man);
        if prec == 0 || b <= prec as u64 {
            return (Self::strip(BigFloat { man, exp, prec }), 0.0);
        }
        let shift = b - prec as u64;
        let neg = man.is_negative();
        let mut mag = man.magnitude().clone();
        mag += num_bigint::BigUint::one() << (shift - 1);
        mag >>= shift;
        let man = BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, mag);
        let err = pow2_up(exp + shift as i64 - 1);
        (Self::strip(BigFloat { man, exp: exp + shift as i64, prec }), err)
    }

    fn strip(mut v: Self) -> Self {
        if let Some(tz) = v.man.trailing_zeros() {
            if tz > 0 {
                v.man >>= tz;
                v.exp += tz as i64;
            }
        }
        v
    }

    pub fn from_i64(v: i64, prec: u32) -> (Self, f64) {
        Self::round(BigInt::from(v), 0, prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> (Self, f64) {
        Self::round(v.clone(), 0, prec)
    }

    /// Exact conversion of a finite `f64`, then rounded to `prec`.
    pub fn from_f64(v: f64, prec: u32) -> (Self, f64) {
        assert!(v.is_finite(), "non-finite f64 cannot become a BigFloat");
        if v == 0.0 {
            return (Self::zero_with(prec), 0.0);
        }
        let b = v.to_bits();
        let sign = b >> 63;
        let e = ((b >> 52) & 0x7ff) as i64;
        let frac = b & ((1u64 << 52) - 1);
        let (m, ex) = if e == 0 { (frac, -1074) } else { (frac | (1u64 << 52), e - 1075) };
        let mut man = BigInt::from(m);
        if sign == 1 {
            man = -man;
        }
        Self::round(man, ex, prec)
    }

    pub fn from_rational(v: &BigRational, prec: u32) -> (Self, f64) {
        if v.denom().is_one() {
            return Self::from_bigint(v.numer(), prec);
        }
        let prec = if prec == 0 { DEFAULT_PREC } else { prec };
        let (n, _) = Self::from_bigint(v.numer(), 0);
        let (d, _) = Self::from_bigint(v.denom(), 0);
        n.with_prec(prec).div(&d)
    }

    pub fn zero_with(prec: u32) -> Self {
        BigFloat { man: BigInt::zero(), exp: 0, prec }
    }

    /// Same value with a new precision target (rounds if it shrinks).
    pub fn with_prec(&self, prec: u32) -> Self {
        let mut c = self.clone();
        c.prec = prec;
        c
    }

    pub fn rounded(&self, prec: u32) -> (Self, f64) {
        Self::round(self.man.clone(), self.exp, prec)
    }

    pub fn is_zero(&self) -> bool {
        self.man.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.man.is_negative()
    }

    pub fn signum(&self) -> i32 {
        match self.man.sign() {
            Sign::Minus => -1,
            Sign::NoSign => 0,
            Sign::Plus => 1,
        }
    }

    pub fn neg(&self) -> Self {
        BigFloat { man: -self.man.clone(), exp: self.exp, prec: self.prec }
    }

    pub fn abs(&self) -> Self {
        BigFloat { man: self.man.abs(), exp: self.exp, prec: self.prec }
    }

    /// Exact multiplication by `2^e`.
    pub fn mul_pow2(&self, e: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        BigFloat { man: self.man.clone(), exp: self.exp + e, prec: self.prec }
    }

    /// Exponent of the leading bit plus one: `2^(top-1) <= |x| < 2^top`.
    pub fn top(&self) -> i64 {
        self.exp + bits(&self.man) as i64
    }

    fn join_prec(&self, o: &Self) -> u32 {
        self.prec.max(o.prec)
    }

    pub fn add(&self, o: &Self) -> (Self, f64) {
        let p = self.join_prec(o);
        if o.is_zero() {
            let (mut v, e) = Self::round(self.man.clone(), self.exp, p);
            v.prec = p;
            return (v, e);
        }
        if self.is_zero() {
            let (mut v, e) = Self::round(o.man.clone(), o.exp, p);
            v.prec = p;
            return (v, e);
        }
        if p > 0 {
            let (big, small) = if self.top() >= o.top() { (self, o) } else { (o, self) };
            let cut = big.top() - p as i64 - 4;
            if small.top() < cut && small.top() < big.exp {
                let (mut v, e) = Self::round(big.man.clone(), big.exp, p);
                v.prec = p;
                let se = pow2_up(small.top());
                return (v, (e + se).next_up());
            }
        }
        let e = self.exp.min(o.exp);
        let a = &self.man << (self.exp - e) as usize;
        let b = &o.man << (o.exp - e) as usize;
        Self::round(a + b, e, p)
    }

    pub fn sub(&self, o: &Self) -> (Self, f64) {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> (Self, f64) {
        let p = self.join_prec(o);
        if self.is_zero() || o.is_zero() {
            return (Self::zero_with(p), 0.0);
        }
        Self::round(&self.man * &o.man, self.exp + o.exp, p)
    }

    /// Division; panics on a zero divisor.
    pub fn div(&self, o: &Self) -> (Self, f64) {
        assert!(!o.is_zero(), "BigFloat division by zero");
        let mut p = self.join_prec(o);
        if p == 0 {
            p = DEFAULT_PREC;
        }
        if self.is_zero() {
            return (Self::zero_with(p), 0.0);
        }
        let want = p as i64 + 2;
        let shift = (want + bits(&o.man) as i64 - bits(&self.man) as i64).max(0);
        let num = &self.man << shift as usize;
        let (qt, rem) = num.div_rem(&o.man);
        let qexp = self.exp - shift - o.exp;
        let trunc = if rem.is_zero() { 0.0 } else { pow2_up(qexp) };
        let (v, e) = Self::round(qt, qexp, p);
        (v, (trunc + e).next_up())
    }

    /// Square root of a non-negative value.
    pub fn sqrt(&self) -> (Self, f64) {
        assert!(!self.is_negative(), "sqrt of negative BigFloat");
        let p = if self.prec == 0 { DEFAULT_PREC } else { self.prec };
        if self.is_zero() {
            return (Self::zero_with(p), 0.0);
        }
        let mut shift = (2 * (p as i64 + 2) - bits(&self.man) as i64).max(0);
        if (self.exp - shift).rem_euclid(2) != 0 {
            shift += 1;
        }
        let m = (&self.man << shift as usize).magnitude().sqrt();
        let e = (self.exp - shift) / 2;
        let exact = (&m * &m) == (&self.man << shift as usize).magnitude().clone();
        let trunc = if exact { 0.0 } else { pow2_up(e) };
        let (v, r) = Self::round(BigInt::from(m), e, p);
        (v, (trunc + r).next_up())
    }

    /// Nearest-ish `f64` (round to nearest on the top 64 bits).
    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let b = bits(&self.man) as i64;
        let shift = (b - 64).max(0);
        let top = (self.man.magnitude() >> shift as usize).to_u64().unwrap_or(u64::MAX);
        let v = ldexp(top as f64, self.exp + shift);
        if self.is_negative() {
            -v
        } else {
            v
        }
    }

    /// Upper bound on `|x|` as `f64`.
    pub fn abs_upper(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let v = self.to_f64().abs();
        if v.is_infinite() {
            return v;
        }
        v.next_up()
    }

    /// Lower bound on `|x|` as `f64`.
    pub fn abs_lower(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let v = self.to_f64().abs();
        if v.is_infinite() {
            return f64::MAX;
        }
        v.next_down().max(0.0)
    }

    /// Exact comparison of `|self|` against a non-negative `f64`.
    pub fn abs_cmp_f64(&self, r: f64) -> Ordering {
        if r.is_infinite() {
            return Ordering::Less;
        }
        let (rb, _) = Self::from_f64(r, 0);
        self.abs().cmp_exact(&rb)
    }

    pub fn cmp_exact(&self, o: &Self) -> Ordering {
        if self.is_zero() || o.is_zero() {
            return self.signum().cmp(&o.signum());
        }
        if self.signum() != o.signum() {
            return self.signum().cmp(&o.signum());
        }
        let e = self.exp.min(o.exp);
        let a = &self.man << (self.exp - e) as usize;
        let b = &o.man << (o.exp - e) as usize;
        a.cmp(&b)
    }

    /// Nearest integer (ties away from zero) as a `BigInt`.
    pub fn round_to_bigint(&self) -> BigInt {
        if self.exp >= 0 {
            return &self.man << self.exp as usize;
        }
        let sh = (-self.exp) as usize;
        let neg = self.is_negative();
        let mut mag = self.man.magnitude().clone();
        mag += num_bigint::BigUint::one() << (sh - 1);
        mag >>= sh;
        BigInt::from_biguint(if neg { Sign::Minus } else { Sign::Plus }, mag)
    }

    /// Exact value as a rational number.
    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.man << self.exp as usize)
        } else {
            BigRational::new(self.man.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    /// Exact decimal expansion (dyadic numbers have finite decimal expansions).
    pub fn to_decimal_exact(&self) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        if self.exp >= 0 {
            return (&self.man << self.exp as usize).to_string();
        }
        let k = (-self.exp) as u32;
        let scaled = self.man.abs() * num_traits::pow(BigInt::from(5), k as usize);
        let mut digits = scaled.to_string();
        let k = k as usize;
        if digits.len() <= k {
            digits = format!("{}{}", "0".repeat(k + 1 - digits.len()), digits);
        }
        let (ip, fp) = digits.split_at(digits.len() - k);
        let fp = fp.trim_end_matches('0');
        let sign = if self.is_negative() { "-" } else { "" };
        if fp.is_empty() {
            format!("{sign}{ip}")
        } else {
            format!("{sign}{ip}.{fp}")
        }
    }

    /// Parses an exact decimal string; fails unless the value is dyadic.
    pub fn parse_decimal_exact(s: &str) -> Option<Self> {
        let s = s.trim();
        let (neg, body) = match s.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, s.strip_prefix('+').unwrap_or(s)),
        };
        let (ip, fp) = match body.split_once('.') {
            Some((a, b)) => (a, b),
            None => (body, ""),
        };
        if ip.is_empty() && fp.is_empty() {
            return None;
        }
        if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
            return None;
        }
        let digits = format!("{ip}{fp}");
        let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let k = fp.len();
        let r = BigRational::new(n, num_traits::pow(BigInt::from(10), k));
        let den = r.denom().clone();
        if den.magnitude().count_ones() != 1 {
            return None;
        }
        let tz = den.trailing_zeros().unwrap_or(0) as i64;
        let man = if neg { -r.numer().clone() } else { r.numer().clone() };
        Some(BigFloat::round(man, -tz, 0).0)
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, o: &Self) -> bool {
        self.cmp_exact(o) == Ordering::Equal
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp_exact(o))
    }
}

impl fmt::Display for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}", self.to_f64())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_f64() {
        for &x in &[1.0, -2.5, 1e-300, 3.141592653589793, 5e-324, 1.7e308] {
            let (b, e) = BigFloat::from_f64(x, 0);
            assert_eq!(e, 0.0);
            assert_eq!(b.to_f64(), x);
        }
    }

    #[test]
    fn division_error_bound() {
        let (one, _) = BigFloat::from_i64(1, 100);
        let (three, _) = BigFloat::from_i64(3, 100);
        let (q, e) = one.div(&three);
        let diff = q.to_rational() - BigRational::new(1.into(), 3.into());
        let (d, _) = BigFloat::from_rational(&diff.abs(), 64);
        assert!(d.to_f64() <= e);
        assert!(e < 1e-29);
    }

    #[test]
    fn decimal_exact() {
        let (x, _) = BigFloat::from_f64(-0.375, 0);
        assert_eq!(x.to_decimal_exact(), "-0.375");
        assert_eq!(BigFloat::parse_decimal_exact("-0.375").unwrap(), x);
        assert!(BigFloat::parse_decimal_exact("0.1").is_none());
    }

    #[test]
    fn sqrt_two() {
        let (two, _) = BigFloat::from_i64(2, 200);
        let (r, e) = two.sqrt();
        let (sq, e2) = r.mul(&r);
        let (d, _) = sq.sub(&two);
        assert!(d.abs_upper() <= 2.0 * e * 1.5 + e2 + 1e-59);
    }
}
