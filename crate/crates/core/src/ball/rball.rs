use crate::bigfloat::BigFloat;
use crate::scalar::MidScalar;
use num_bigint::BigInt;
use num_rational::BigRational;
use std::cmp::Ordering;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// `a + b` rounded up.
#[inline]
pub fn up_add(a: f64, b: f64) -> f64 {
    (a + b).next_up()
}

/// `a * b` rounded up (with `0 * inf = 0`).
#[inline]
pub fn up_mul(a: f64, b: f64) -> f64 {
    if a == 0.0 || b == 0.0 {
        0.0
    } else {
        (a * b).next_up()
    }
}

/// `a / b` rounded up, `b > 0`.
#[inline]
pub fn up_div(a: f64, b: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else if b <= 0.0 {
        f64::INFINITY
    } else {
        (a / b).next_up()
    }
}

/// Real ball `[mid - rad, mid + rad]`.
#[derive(Clone, Debug)]
pub struct RBall<S> {
    pub mid: S,
    pub rad: f64,
}

impl<S: MidScalar> RBall<S> {
    pub fn new(mid: S, rad: f64) -> Self {
        RBall { mid, rad }
    }

    pub fn exact(mid: S) -> Self {
        RBall { mid, rad: 0.0 }
    }

    fn from_pair((mid, rad): (S, f64)) -> Self {
        RBall { mid, rad }
    }

    pub fn zero(prec: u32) -> Self {
        RBall::exact(S::zero_prec(prec))
    }

    pub fn one(prec: u32) -> Self {
        Self::from_i64(1, prec)
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_pair(S::from_i64(v, prec))
    }

    pub fn from_f64(v: f64, prec: u32) -> Self {
        Self::from_pair(S::from_f64(v, prec))
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> Self {
        Self::from_pair(S::from_bigint(v, prec))
    }

    pub fn from_rational(v: &BigRational, prec: u32) -> Self {
        Self::from_pair(S::from_rational(v, prec))
    }

    /// A ball of infinite radius (the whole line).
    pub fn whole(prec: u32) -> Self {
        RBall { mid: S::zero_prec(prec), rad: f64::INFINITY }
    }

    pub fn prec(&self) -> u32 {
        self.mid.precision()
    }

    pub fn is_finite(&self) -> bool {
        self.rad.is_finite()
    }

    pub fn is_exact(&self) -> bool {
        self.rad == 0.0
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        let (m, e) = self.mid.with_precision(prec);
        RBall { mid: m, rad: up_add(self.rad, e) }
    }

    pub fn convert<T: MidScalar>(&self, prec: u32) -> RBall<T> {
        let (m, e) = T::from_bigfloat(&self.mid.to_bigfloat(), prec);
        RBall { mid: m, rad: up_add(self.rad, e) }
    }

    pub fn add_error(&mut self, e: f64) {
        self.rad = up_add(self.rad, e);
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    /// Upper bound for `sup |x|`.
    pub fn abs_upper(&self) -> f64 {
        up_add(self.mid.abs_upper(), self.rad)
    }

    /// Lower bound for `inf |x|` (zero when the ball contains zero).
    pub fn abs_lower(&self) -> f64 {
        if self.contains_zero() {
            return 0.0;
        }
        (self.mid.abs_lower() - self.rad).next_down().max(0.0)
    }

    /// Rigorous upper end of the ball as `f64`.
    pub fn upper_f64(&self) -> f64 {
        let m = if self.mid.signum() >= 0 { self.mid.abs_upper() } else { -self.mid.abs_lower() };
        up_add(m, self.rad)
    }

    /// Rigorous lower end of the ball as `f64`.
    pub fn lower_f64(&self) -> f64 {
        let m = if self.mid.signum() >= 0 { self.mid.abs_lower() } else { -self.mid.abs_upper() };
        (m - self.rad).next_down()
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs_cmp(self.rad) != Ordering::Greater
    }

    pub fn is_positive(&self) -> bool {
        self.mid.signum() > 0 && !self.contains_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mid.signum() < 0 && !self.contains_zero()
    }

    fn exact_dist(&self, x: &BigFloat) -> BigFloat {
        let m = self.mid.to_bigfloat().with_prec(0);
        m.sub(&x.with_prec(0)).0.abs()
    }

    /// Whether the exact dyadic `x` lies in the ball.
    pub fn contains_bigfloat(&self, x: &BigFloat) -> bool {
        if !self.rad.is_finite() {
            return true;
        }
        self.exact_dist(x).abs_cmp_f64(self.rad) != Ordering::Greater
    }

    pub fn contains_f64(&self, x: f64) -> bool {
        self.contains_bigfloat(&BigFloat::from_f64(x, 0).0)
    }

    /// Whether the exact rational `x` lies in the ball.
    pub fn contains_rational(&self, x: &BigRational) -> bool {
        if !self.rad.is_finite() {
            return true;
        }
        let m = self.mid.to_bigfloat().to_rational();
        let r = BigFloat::from_f64(self.rad, 0).0.to_rational();
        let d = m - x;
        let d = if d < BigRational::from_integer(0.into()) { -d } else { d };
        d <= r
    }

    /// Whether `other` is entirely inside `self`.
    pub fn contains(&self, other: &Self) -> bool {
        if !self.rad.is_finite() {
            return true;
        }
        if !other.rad.is_finite() {
            return false;
        }
        let d = self.exact_dist(&other.mid.to_bigfloat());
        let total = d.add(&BigFloat::from_f64(other.rad, 0).0).0;
        total.abs_cmp_f64(self.rad) != Ordering::Greater
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        let r = up_add(self.rad, other.rad);
        if !r.is_finite() {
            return true;
        }
        self.exact_dist(&other.mid.to_bigfloat()).abs_cmp_f64(r) != Ordering::Greater
    }

    pub fn mul_pow2(&self, e: i64) -> Self {
        let (m, err) = self.mid.mul_pow2(e);
        let r = crate::bigfloat::ldexp(self.rad, e);
        let r = if r == 0.0 && self.rad > 0.0 || r.is_subnormal() { up_add(r, f64::from_bits(1)) } else { r };
        RBall { mid: m, rad: up_add(r, err) }
    }

    pub fn sqr(&self) -> Self {
        self.mul_ref(self)
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        let (m, e) = self.mid.add(&o.mid);
        RBall { mid: m, rad: up_add(up_add(self.rad, o.rad), e) }
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        let (m, e) = self.mid.sub(&o.mid);
        RBall { mid: m, rad: up_add(up_add(self.rad, o.rad), e) }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        let (m, e) = self.mid.mul(&o.mid);
        let mut r = e;
        if o.rad != 0.0 {
            r = up_add(r, up_mul(self.mid.abs_upper(), o.rad));
        }
        if self.rad != 0.0 {
            r = up_add(r, up_mul(o.mid.abs_upper(), self.rad));
            r = up_add(r, up_mul(self.rad, o.rad));
        }
        RBall { mid: m, rad: r }
    }

    /// Division; a divisor containing zero yields the whole line.
    pub fn div_ref(&self, o: &Self) -> Self {
        if o.contains_zero() {
            return Self::whole(self.prec().max(o.prec()));
        }
        let (q, e) = self.mid.div(&o.mid);
        if self.rad == 0.0 && o.rad == 0.0 {
            return RBall { mid: q, rad: e };
        }
        let denom = (o.mid.abs_lower() - o.rad).next_down();
        let qa = up_add(q.abs_upper(), e);
        let num = up_add(self.rad, up_mul(qa, o.rad));
        RBall { mid: q, rad: up_add(up_div(num, denom), e) }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self.mul_ref(&Self::from_i64(k, self.prec()))
    }

    pub fn div_i64(&self, k: i64) -> Self {
        self.div_ref(&Self::from_i64(k, self.prec()))
    }

    pub fn recip(&self) -> Self {
        Self::one(self.prec()).div_ref(self)
    }

    pub fn neg_ref(&self) -> Self {
        RBall { mid: self.mid.neg(), rad: self.rad }
    }

    pub fn abs(&self) -> Self {
        if self.mid.signum() < 0 {
            self.neg_ref()
        } else {
            self.clone()
        }
    }

    /// Square root; a ball reaching below zero is clipped to `[0, sqrt(upper)]`.
    pub fn sqrt(&self) -> Self {
        let p = self.prec();
        if self.mid.signum() <= 0 || self.contains_zero() {
            let up = self.upper_f64().max(0.0);
            let s = (up.sqrt() * (1.0 + 1e-15)).next_up();
            return RBall { mid: S::zero_prec(p), rad: s };
        }
        let (m, e) = self.mid.sqrt();
        if self.rad == 0.0 {
            return RBall { mid: m, rad: e };
        }
        let lo = (self.mid.abs_lower() - self.rad).next_down();
        let slo = (lo.sqrt() * (1.0 - 1e-15)).next_down();
        RBall { mid: m, rad: up_add(up_div(self.rad, slo), e) }
    }

    pub fn max_upper(a: &Self, b: &Self) -> f64 {
        a.upper_f64().max(b.upper_f64())
    }

    pub fn to_decimal_mid(&self) -> String {
        self.mid.to_decimal_exact()
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $m:ident) => {
        impl<'a, S: MidScalar> $tr<&'a RBall<S>> for &'a RBall<S> {
            type Output = RBall<S>;
            fn $f(self, o: &'a RBall<S>) -> RBall<S> {
                self.$m(o)
            }
        }
        impl<S: MidScalar> $tr<RBall<S>> for RBall<S> {
            type Output = RBall<S>;
            fn $f(self, o: RBall<S>) -> RBall<S> {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);
binop!(Div, div, div_ref);

impl<S: MidScalar> Neg for RBall<S> {
    type Output = RBall<S>;
    fn neg(self) -> RBall<S> {
        self.neg_ref()
    }
}

impl<S: MidScalar> num_traits::Zero for RBall<S> {
    fn zero() -> Self {
        RBall::zero(0)
    }
    fn is_zero(&self) -> bool {
        self.rad == 0.0 && self.mid.is_zero()
    }
}

impl<S: MidScalar> num_traits::One for RBall<S> {
    fn one() -> Self {
        RBall::one(0)
    }
}
