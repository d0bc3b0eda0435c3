//! Midpoint scalars for balls: `f64` and [`BigFloat`].
//!
//! Arithmetic returns `(value, err)` where `err` bounds the rounding error.

use crate::bigfloat::{pow2_up, BigFloat};
use num_bigint::BigInt;
use num_rational::BigRational;
use std::cmp::Ordering;
use std::fmt::Debug;

pub trait MidScalar: Clone + Debug + Send + Sync + 'static {
    /// Working precision in bits carried by this value.
    fn precision(&self) -> u32;
    fn zero_prec(prec: u32) -> Self;
    fn from_i64(v: i64, prec: u32) -> (Self, f64);
    fn from_f64(v: f64, prec: u32) -> (Self, f64);
    fn from_bigfloat(v: &BigFloat, prec: u32) -> (Self, f64);
    fn to_bigfloat(&self) -> BigFloat;
    fn to_f64(&self) -> f64;

    fn add(&self, o: &Self) -> (Self, f64);
    fn sub(&self, o: &Self) -> (Self, f64);
    fn mul(&self, o: &Self) -> (Self, f64);
    fn div(&self, o: &Self) -> (Self, f64);
    fn sqrt(&self) -> (Self, f64);
    fn neg(&self) -> Self;
    fn mul_pow2(&self, e: i64) -> (Self, f64);
    /// Same value re-targeted to `prec` bits (no-op for fixed-precision types).
    fn with_precision(&self, prec: u32) -> (Self, f64);

    fn is_zero(&self) -> bool;
    fn signum(&self) -> i32;
    fn abs_upper(&self) -> f64;
    fn abs_lower(&self) -> f64;
    /// Exact comparison of `|self|` with a non-negative `f64`.
    fn abs_cmp(&self, r: f64) -> Ordering;
    fn cmp_exact(&self, o: &Self) -> Ordering;
    /// Nearest integer.
    fn round_int(&self) -> BigInt;

    fn from_bigint(v: &BigInt, prec: u32) -> (Self, f64) {
        let (b, e) = BigFloat::from_bigint(v, prec.max(64));
        let (s, e2) = Self::from_bigfloat(&b, prec);
        (s, (e + e2).next_up())
    }

    fn from_rational(v: &BigRational, prec: u32) -> (Self, f64) {
        let (b, e) = BigFloat::from_rational(v, prec.max(64) + 8);
        let (s, e2) = Self::from_bigfloat(&b, prec);
        (s, (e + e2).next_up())
    }

    fn to_decimal_exact(&self) -> String {
        self.to_bigfloat().to_decimal_exact()
    }
}

fn f64_err(r: f64) -> f64 {
    if !r.is_finite() {
        return f64::INFINITY;
    }
    (r.abs() * pow2_up(-53)).next_up() + f64::from_bits(1)
}

impl MidScalar for f64 {
    fn precision(&self) -> u32 {
        53
    }
    fn zero_prec(_: u32) -> Self {
        0.0
    }
    fn from_i64(v: i64, _: u32) -> (Self, f64) {
        let r = v as f64;
        let e = if (r as i128) == v as i128 { 0.0 } else { f64_err(r) };
        (r, e)
    }
    fn from_f64(v: f64, _: u32) -> (Self, f64) {
        (v, 0.0)
    }
    fn from_bigfloat(v: &BigFloat, _: u32) -> (Self, f64) {
        let r = v.to_f64();
        if !r.is_finite() {
            return (r, f64::INFINITY);
        }
        let (back, _) = BigFloat::from_f64(r, 0);
        if back == *v {
            (r, 0.0)
        } else {
            (r, f64_err(r))
        }
    }
    fn to_bigfloat(&self) -> BigFloat {
        BigFloat::from_f64(*self, 53).0
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add(&self, o: &Self) -> (Self, f64) {
        let r = self + o;
        (r, f64_err(r))
    }
    fn sub(&self, o: &Self) -> (Self, f64) {
        let r = self - o;
        (r, f64_err(r))
    }
    fn mul(&self, o: &Self) -> (Self, f64) {
        let r = self * o;
        (r, f64_err(r))
    }
    fn div(&self, o: &Self) -> (Self, f64) {
        let r = self / o;
        (r, f64_err(r))
    }
    fn sqrt(&self) -> (Self, f64) {
        let r = f64::sqrt(*self);
        (r, f64_err(r))
    }
    fn neg(&self) -> Self {
        -self
    }
    fn mul_pow2(&self, e: i64) -> (Self, f64) {
        let r = crate::bigfloat::ldexp(*self, e);
        if r == 0.0 && *self != 0.0 || r.is_subnormal() {
            (r, f64::from_bits(1))
        } else if r.is_infinite() {
            (r, f64::INFINITY)
        } else {
            (r, 0.0)
        }
    }
    fn with_precision(&self, _: u32) -> (Self, f64) {
        (*self, 0.0)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn signum(&self) -> i32 {
        if *self > 0.0 {
            1
        } else if *self < 0.0 {
            -1
        } else {
            0
        }
    }
    fn abs_upper(&self) -> f64 {
        self.abs()
    }
    fn abs_lower(&self) -> f64 {
        self.abs()
    }
    fn abs_cmp(&self, r: f64) -> Ordering {
        self.abs().partial_cmp(&r).unwrap_or(Ordering::Less)
    }
    fn cmp_exact(&self, o: &Self) -> Ordering {
        self.partial_cmp(o).unwrap_or(Ordering::Equal)
    }
    fn round_int(&self) -> BigInt {
        BigFloat::from_f64(self.round(), 0).0.round_to_bigint()
    }
}

impl MidScalar for BigFloat {
    fn precision(&self) -> u32 {
        BigFloat::precision(self)
    }
    fn zero_prec(prec: u32) -> Self {
        BigFloat::zero_with(prec)
    }
    fn from_i64(v: i64, prec: u32) -> (Self, f64) {
        let (mut b, e) = BigFloat::from_i64(v, prec);
        b = b.with_prec(prec);
        (b, e)
    }
    fn from_f64(v: f64, prec: u32) -> (Self, f64) {
        let (b, e) = BigFloat::from_f64(v, prec);
        (b.with_prec(prec), e)
    }
    fn from_bigfloat(v: &BigFloat, prec: u32) -> (Self, f64) {
        let (b, e) = v.rounded(prec);
        (b.with_prec(prec), e)
    }
    fn from_bigint(v: &BigInt, prec: u32) -> (Self, f64) {
        let (b, e) = BigFloat::from_bigint(v, prec);
        (b.with_prec(prec), e)
    }
    fn from_rational(v: &BigRational, prec: u32) -> (Self, f64) {
        let (b, e) = BigFloat::from_rational(v, prec);
        (b.with_prec(prec), e)
    }
    fn to_bigfloat(&self) -> BigFloat {
        self.clone()
    }
    fn to_f64(&self) -> f64 {
        BigFloat::to_f64(self)
    }
    fn add(&self, o: &Self) -> (Self, f64) {
        BigFloat::add(self, o)
    }
    fn sub(&self, o: &Self) -> (Self, f64) {
        BigFloat::sub(self, o)
    }
    fn mul(&self, o: &Self) -> (Self, f64) {
        BigFloat::mul(self, o)
    }
    fn div(&self, o: &Self) -> (Self, f64) {
        BigFloat::div(self, o)
    }
    fn sqrt(&self) -> (Self, f64) {
        BigFloat::sqrt(self)
    }
    fn neg(&self) -> Self {
        BigFloat::neg(self)
    }
    fn mul_pow2(&self, e: i64) -> (Self, f64) {
        (BigFloat::mul_pow2(self, e), 0.0)
    }
    fn with_precision(&self, prec: u32) -> (Self, f64) {
        let (b, e) = self.rounded(prec);
        (b.with_prec(prec), e)
    }
    fn is_zero(&self) -> bool {
        BigFloat::is_zero(self)
    }
    fn signum(&self) -> i32 {
        BigFloat::signum(self)
    }
    fn abs_upper(&self) -> f64 {
        BigFloat::abs_upper(self)
    }
    fn abs_lower(&self) -> f64 {
        BigFloat::abs_lower(self)
    }
    fn abs_cmp(&self, r: f64) -> Ordering {
        self.abs_cmp_f64(r)
    }
    fn cmp_exact(&self, o: &Self) -> Ordering {
        BigFloat::cmp_exact(self, o)
    }
    fn round_int(&self) -> BigInt {
        self.round_to_bigint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_error_bound_is_valid() {
        let a = 0.1f64;
        let b = 0.2f64;
        let (r, e) = MidScalar::add(&a, &b);
        let exact = BigFloat::from_f64(a, 0).0.add(&BigFloat::from_f64(b, 0).0).0;
        let diff = exact.sub(&BigFloat::from_f64(r, 0).0).0;
        assert!(diff.abs_upper() <= e);
    }
}
