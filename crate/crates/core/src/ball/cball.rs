use super::rball::RBall;
use crate::scalar::MidScalar;
use num_rational::BigRational;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Complex rectangle `re + i im` with independent real and imaginary radii.
#[derive(Clone, Debug)]
pub struct CBall<S> {
    pub re: RBall<S>,
    pub im: RBall<S>,
}

impl<S: MidScalar> CBall<S> {
    pub fn new(re: RBall<S>, im: RBall<S>) -> Self {
        CBall { re, im }
    }

    pub fn from_real(re: RBall<S>) -> Self {
        let p = re.prec();
        CBall { re, im: RBall::zero(p) }
    }

    pub fn zero(prec: u32) -> Self {
        CBall { re: RBall::zero(prec), im: RBall::zero(prec) }
    }

    pub fn one(prec: u32) -> Self {
        CBall { re: RBall::one(prec), im: RBall::zero(prec) }
    }

    pub fn i(prec: u32) -> Self {
        CBall { re: RBall::zero(prec), im: RBall::one(prec) }
    }

    pub fn from_i64(v: i64, prec: u32) -> Self {
        Self::from_real(RBall::from_i64(v, prec))
    }

    pub fn from_rational(v: &BigRational, prec: u32) -> Self {
        Self::from_real(RBall::from_rational(v, prec))
    }

    pub fn from_f64(re: f64, im: f64, prec: u32) -> Self {
        CBall { re: RBall::from_f64(re, prec), im: RBall::from_f64(im, prec) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn with_precision(&self, prec: u32) -> Self {
        CBall { re: self.re.with_precision(prec), im: self.im.with_precision(prec) }
    }

    pub fn convert<T: MidScalar>(&self, prec: u32) -> CBall<T> {
        CBall { re: self.re.convert(prec), im: self.im.convert(prec) }
    }

    /// Largest of the two component radii.
    pub fn rad(&self) -> f64 {
        self.re.rad.max(self.im.rad)
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn add_error(&mut self, e: f64) {
        self.re.add_error(e);
        self.im.add_error(e);
    }

    pub fn contains_zero(&self) -> bool {
        self.re.contains_zero() && self.im.contains_zero()
    }

    pub fn is_real_exact(&self) -> bool {
        self.im.is_exact() && self.im.mid.is_zero()
    }

    pub fn contains(&self, o: &Self) -> bool {
        self.re.contains(&o.re) && self.im.contains(&o.im)
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        self.re.overlaps(&o.re) && self.im.overlaps(&o.im)
    }

    pub fn contains_f64(&self, re: f64, im: f64) -> bool {
        self.re.contains_f64(re) && self.im.contains_f64(im)
    }

    /// Upper bound for `sup |z|`.
    pub fn abs_upper(&self) -> f64 {
        let a = self.re.abs_upper();
        let b = self.im.abs_upper();
        (a.hypot(b) * (1.0 + 4.0 * f64::EPSILON)).next_up()
    }

    /// Lower bound for `inf |z|`.
    pub fn abs_lower(&self) -> f64 {
        let a = self.re.abs_lower();
        let b = self.im.abs_lower();
        (a.hypot(b) * (1.0 - 4.0 * f64::EPSILON)).next_down().max(0.0)
    }

    /// Upper bound for the largest component magnitude.
    pub fn norm_inf_upper(&self) -> f64 {
        self.re.abs_upper().max(self.im.abs_upper())
    }

    pub fn conj(&self) -> Self {
        CBall { re: self.re.clone(), im: self.im.neg_ref() }
    }

    pub fn neg_ref(&self) -> Self {
        CBall { re: self.re.neg_ref(), im: self.im.neg_ref() }
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        CBall { re: self.re.add_ref(&o.re), im: self.im.add_ref(&o.im) }
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        CBall { re: self.re.sub_ref(&o.re), im: self.im.sub_ref(&o.im) }
    }

    pub fn mul_ref(&self, o: &Self) -> Self {
        if o.is_real_exact() {
            return self.mul_real(&o.re);
        }
        if self.is_real_exact() {
            return o.mul_real(&self.re);
        }
        let re = self.re.mul_ref(&o.re).sub_ref(&self.im.mul_ref(&o.im));
        let im = self.re.mul_ref(&o.im).add_ref(&self.im.mul_ref(&o.re));
        CBall { re, im }
    }

    pub fn mul_real(&self, r: &RBall<S>) -> Self {
        CBall { re: self.re.mul_ref(r), im: self.im.mul_ref(r) }
    }

    pub fn div_real(&self, r: &RBall<S>) -> Self {
        CBall { re: self.re.div_ref(r), im: self.im.div_ref(r) }
    }

    pub fn mul_i64(&self, k: i64) -> Self {
        self.mul_real(&RBall::from_i64(k, self.prec()))
    }

    pub fn div_i64(&self, k: i64) -> Self {
        self.div_real(&RBall::from_i64(k, self.prec()))
    }

    pub fn mul_pow2(&self, e: i64) -> Self {
        CBall { re: self.re.mul_pow2(e), im: self.im.mul_pow2(e) }
    }

    /// `|z|^2` as a real ball.
    pub fn norm_sqr(&self) -> RBall<S> {
        self.re.sqr().add_ref(&self.im.sqr())
    }

    /// Division; a divisor that may vanish yields an unbounded ball.
    pub fn div_ref(&self, o: &Self) -> Self {
        if o.is_real_exact() {
            return self.div_real(&o.re);
        }
        let n = o.norm_sqr();
        let num = self.mul_ref(&o.conj());
        num.div_real(&n)
    }

    pub fn recip(&self) -> Self {
        Self::one(self.prec()).div_ref(self)
    }

    pub fn sqr(&self) -> Self {
        self.mul_ref(self)
    }

    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Union hull: smallest rectangle (midpoint of `self`) containing both.
    pub fn hull(&self, o: &Self) -> Self {
        let mut r = self.clone();
        r.re.rad = r.re.rad.max(self.re.sub_ref(&o.re).abs_upper());
        r.im.rad = r.im.rad.max(self.im.sub_ref(&o.im).abs_upper());
        r
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident, $m:ident) => {
        impl<'a, S: MidScalar> $tr<&'a CBall<S>> for &'a CBall<S> {
            type Output = CBall<S>;
            fn $f(self, o: &'a CBall<S>) -> CBall<S> {
                self.$m(o)
            }
        }
        impl<S: MidScalar> $tr<CBall<S>> for CBall<S> {
            type Output = CBall<S>;
            fn $f(self, o: CBall<S>) -> CBall<S> {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);
binop!(Div, div, div_ref);

impl<S: MidScalar> Neg for CBall<S> {
    type Output = CBall<S>;
    fn neg(self) -> CBall<S> {
        self.neg_ref()
    }
}

impl<S: MidScalar> num_traits::Zero for CBall<S> {
    fn zero() -> Self {
        CBall::zero(0)
    }
    fn is_zero(&self) -> bool {
        num_traits::Zero::is_zero(&self.re) && num_traits::Zero::is_zero(&self.im)
    }
}

impl<S: MidScalar> num_traits::One for CBall<S> {
    fn one() -> Self {
        CBall::one(0)
    }
}
