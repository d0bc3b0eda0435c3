//! exp, ln, sin/cos, atan and constants on balls.
//!
//! Argument reduction followed by Taylor series with an explicit remainder.

use super::cball::CBall;
use super::rball::{up_add, up_div, up_mul, RBall};
use crate::error::BallError;
use crate::scalar::MidScalar;
use std::any::{Any, TypeId};
use std::cell::RefCell;
use std::cmp::Ordering;
use std::collections::HashMap;

type ConstKey = (TypeId, u32, u8);

thread_local! {
    static CONSTS: RefCell<HashMap<ConstKey, Box<dyn Any>>> = RefCell::new(HashMap::new());
}

const K_PI: u8 = 0;
const K_LN2: u8 = 1;

fn cached<S: MidScalar>(kind: u8, prec: u32, f: impl FnOnce() -> RBall<S>) -> RBall<S> {
    let key = (TypeId::of::<S>(), prec, kind);
    let hit = CONSTS.with(|c| c.borrow().get(&key).and_then(|b| b.downcast_ref::<RBall<S>>().cloned()));
    if let Some(v) = hit {
        return v;
    }
    let v = f();
    CONSTS.with(|c| c.borrow_mut().insert(key, Box::new(v.clone())));
    v
}

/// True for scalar types whose precision cannot be raised (plain `f64`).
pub fn is_fixed<S: MidScalar>() -> bool {
    S::zero_prec(4096).precision() < 4096
}

fn work_prec<S: MidScalar>(p: u32, extra: u32) -> u32 {
    if is_fixed::<S>() {
        p
    } else {
        p + extra
    }
}

fn tol(wp: u32) -> f64 {
    crate::bigfloat::pow2_up(-(wp as i64) - 4)
}

/// Upper bound for `e^r - 1`, `r >= 0`.
fn expm1_up(r: f64) -> f64 {
    if r <= 1.0 {
        up_add(r, up_mul(r, r))
    } else {
        (r.exp() * (1.0 + 1e-12)).next_up()
    }
}

impl<S: MidScalar> RBall<S> {
    fn exact_at(&self, wp: u32) -> Self {
        RBall::exact(self.mid.with_precision(wp).0)
    }

    /// `pi` to `prec` bits.
    pub fn pi(prec: u32) -> Self {
        cached(K_PI, prec, || {
            let wp = work_prec::<S>(prec, 16);
            let a = RBall::<S>::one(wp).div_i64(5);
            let b = RBall::<S>::one(wp).div_i64(239);
            let v = atan_series(&a).mul_i64(16).sub_ref(&atan_series(&b).mul_i64(4));
            v.with_precision(prec)
        })
    }

    /// `log 2` to `prec` bits.
    pub fn ln2(prec: u32) -> Self {
        cached(K_LN2, prec, || {
            let wp = work_prec::<S>(prec, 16);
            let y = RBall::<S>::one(wp).div_i64(3);
            let y2 = y.sqr();
            let mut term = y.clone();
            let mut sum = y.clone();
            let t = tol(wp);
            let mut i = 1i64;
            loop {
                term = term.mul_ref(&y2);
                let piece = term.div_i64(2 * i + 1);
                sum = sum.add_ref(&piece);
                i += 1;
                if piece.abs_upper() < t {
                    let rem = up_mul(up_div(term.abs_upper(), (2 * i + 1) as f64), 9.0 / 8.0);
                    sum.add_error(rem);
                    break;
                }
            }
            sum.mul_pow2(1).with_precision(prec)
        })
    }

    pub fn exp(&self) -> Self {
        let p = self.prec();
        if !self.rad.is_finite() {
            return RBall::whole(p);
        }
        let mf = self.mid.to_f64();
        if mf.is_nan() || mf.abs() > 1e15 {
            return if mf < 0.0 && up_add(mf, self.rad) < -1e6 {
                RBall::new(S::zero_prec(p), f64::from_bits(1))
            } else {
                RBall::whole(p)
            };
        }
        let extra = 24 + (mf.abs() + 1.0).log2().ceil() as u32;
        let wp = work_prec::<S>(p, extra);
        let x = self.exact_at(wp);
        let k = (mf / std::f64::consts::LN_2).round() as i64;
        let r = if k != 0 { x.sub_ref(&RBall::ln2(wp).mul_i64(k)) } else { x };
        let j: i64 = if is_fixed::<S>() { 2 } else { ((wp as f64).sqrt() / 2.0) as i64 };
        let r = r.mul_pow2(-j);
        let ra = r.abs_upper();
        let t = tol(wp);
        let mut sum = RBall::one(wp);
        let mut term = RBall::one(wp);
        let mut i = 1i64;
        loop {
            term = term.mul_ref(&r).div_i64(i);
            sum = sum.add_ref(&term);
            let tu = term.abs_upper();
            if up_mul(tu, ra) < t && i > 1 {
                sum.add_error(up_mul(2.0, up_div(up_mul(tu, ra), (i + 1) as f64)));
                break;
            }
            i += 1;
        }
        for _ in 0..j {
            sum = sum.sqr();
        }
        let mut res = sum.mul_pow2(k).with_precision(p);
        if self.rad > 0.0 {
            let a = res.abs_upper();
            res.add_error(up_mul(a, expm1_up(self.rad)));
        }
        res
    }

    /// Natural logarithm of a positive ball.
    pub fn ln(&self) -> Result<Self, BallError> {
        if !self.is_positive() || !self.rad.is_finite() {
            return Err(BallError::Domain("ln of a ball not certified positive".into()));
        }
        let p = self.prec();
        let wp = work_prec::<S>(p, 20);
        let m = self.mid.with_precision(wp).0;
        let mb = m.to_bigfloat();
        let top = mb.top();
        let y0 = mb.mul_pow2(-top).to_f64().ln() + top as f64 * std::f64::consts::LN_2;
        let mut y = S::from_f64(y0, wp).0;
        if !is_fixed::<S>() {
            let mut bits = 48u32;
            while bits < wp {
                let cp = (2 * bits + 16).min(wp);
                let yc = RBall::exact(y.with_precision(cp).0);
                let mc = RBall::exact(m.with_precision(cp).0);
                let d = mc.mul_ref(&yc.neg_ref().exp()).sub_ref(&RBall::one(cp));
                y = y.add(&d.mid).0.with_precision(wp).0;
                bits *= 2;
            }
        }
        let yb = RBall::exact(y);
        let delta = RBall::exact(m).mul_ref(&yb.neg_ref().exp()).sub_ref(&RBall::one(wp));
        let da = delta.abs_upper();
        if !(da < 0.5) {
            return Err(BallError::Domain("ln refinement did not converge".into()));
        }
        let mut res = yb.add_ref(&delta);
        res.add_error(up_mul(da, da));
        let mut res = res.with_precision(p);
        if self.rad > 0.0 {
            let lo = self.lower_f64();
            res.add_error(up_div(self.rad, lo));
        }
        Ok(res)
    }

    /// `(sin x, cos x)`.
    pub fn sin_cos(&self) -> (Self, Self) {
        let p = self.prec();
        let mf = self.mid.to_f64();
        if !self.rad.is_finite() || mf.is_nan() || mf.abs() > 1e15 {
            let u = RBall::new(S::zero_prec(p), 1.0);
            return (u.clone(), u);
        }
        let extra = 24 + (mf.abs() + 1.0).log2().ceil() as u32;
        let wp = work_prec::<S>(p, extra);
        let x = self.exact_at(wp);
        let k = (mf / std::f64::consts::FRAC_PI_2).round() as i64;
        let r = if k != 0 { x.sub_ref(&RBall::pi(wp).mul_pow2(-1).mul_i64(k)) } else { x };
        let j: i64 = if is_fixed::<S>() { 1 } else { 3 };
        let r = r.mul_pow2(-j);
        let r2 = r.sqr();
        let r2a = r2.abs_upper();
        let t = tol(wp);
        let mut s = r.clone();
        let mut ts = r.clone();
        let mut c = RBall::one(wp);
        let mut tc = RBall::one(wp);
        let mut i = 1i64;
        loop {
            ts = ts.mul_ref(&r2).div_i64((2 * i) * (2 * i + 1)).neg_ref();
            tc = tc.mul_ref(&r2).div_i64((2 * i - 1) * (2 * i)).neg_ref();
            s = s.add_ref(&ts);
            c = c.add_ref(&tc);
            if ts.abs_upper() < t && tc.abs_upper() < t {
                let ns = up_div(up_mul(ts.abs_upper(), r2a), ((2 * i + 2) * (2 * i + 3)) as f64);
                let nc = up_div(up_mul(tc.abs_upper(), r2a), ((2 * i + 1) * (2 * i + 2)) as f64);
                s.add_error(up_mul(2.0, ns));
                c.add_error(up_mul(2.0, nc));
                break;
            }
            i += 1;
        }
        let one = RBall::one(wp);
        for _ in 0..j {
            let s2 = s.mul_ref(&c).mul_pow2(1);
            let c2 = one.sub_ref(&s.sqr().mul_pow2(1));
            s = s2;
            c = c2;
        }
        let (mut s, mut c) = match k.rem_euclid(4) {
            0 => (s, c),
            1 => (c, s.neg_ref()),
            2 => (s.neg_ref(), c.neg_ref()),
            _ => (c.neg_ref(), s),
        };
        s = s.with_precision(p);
        c = c.with_precision(p);
        if self.rad > 0.0 {
            s.add_error(self.rad);
            c.add_error(self.rad);
        }
        (s, c)
    }

    pub fn atan(&self) -> Self {
        let p = self.prec();
        if !self.rad.is_finite() {
            return RBall::new(S::zero_prec(p), 1.6);
        }
        let wp = work_prec::<S>(p, 16);
        let x = self.exact_at(wp);
        let mut res = if self.mid.abs_cmp(1.0) == Ordering::Greater {
            let inv = RBall::one(wp).div_ref(&x);
            let h = RBall::pi(wp).mul_pow2(-1);
            let a = atan_reduced(&inv);
            if self.mid.signum() > 0 {
                h.sub_ref(&a)
            } else {
                h.neg_ref().sub_ref(&a)
            }
        } else {
            atan_reduced(&x)
        };
        res = res.with_precision(p);
        res.add_error(self.rad);
        res
    }

    /// Principal argument of `x + i y` for `self = y`.
    pub fn atan2(&self, x: &Self) -> Result<Self, BallError> {
        let y = self;
        let p = y.prec().max(x.prec());
        if x.is_positive() {
            return Ok(y.div_ref(x).atan());
        }
        if y.is_positive() || y.is_negative() {
            let h = RBall::pi(p).mul_pow2(-1);
            let a = x.div_ref(y).atan();
            return Ok(if y.is_positive() { h.sub_ref(&a) } else { h.neg_ref().sub_ref(&a) });
        }
        if x.is_negative() && y.rad == 0.0 && y.mid.is_zero() {
            return Ok(RBall::pi(p));
        }
        if x.contains_zero() {
            return Err(BallError::Domain("argument of a ball containing zero".into()));
        }
        Err(BallError::BranchCut)
    }

    /// `x^y = exp(y ln x)` for positive `x`.
    pub fn pow(&self, y: &Self) -> Result<Self, BallError> {
        Ok(y.mul_ref(&self.ln()?).exp())
    }
}

/// Taylor series of atan for small exact-ish arguments (`|x| <= 1/2`).
fn atan_series<S: MidScalar>(x: &RBall<S>) -> RBall<S> {
    let wp = x.prec();
    let t = tol(wp);
    let x2 = x.sqr();
    let x2a = x2.abs_upper();
    let mut term = x.clone();
    let mut sum = x.clone();
    let mut i = 1i64;
    loop {
        term = term.mul_ref(&x2).neg_ref();
        let piece = term.div_i64(2 * i + 1);
        sum = sum.add_ref(&piece);
        if piece.abs_upper() < t {
            let rem = up_div(up_mul(term.abs_upper(), x2a), (2 * i + 3) as f64);
            sum.add_error(up_mul(2.0, rem));
            break;
        }
        i += 1;
    }
    sum
}

fn atan_reduced<S: MidScalar>(x: &RBall<S>) -> RBall<S> {
    let wp = x.prec();
    let one = RBall::one(wp);
    let j: i64 = if is_fixed::<S>() { 2 } else { 4 };
    let mut y = x.clone();
    for _ in 0..j {
        let s = one.add_ref(&y.sqr()).sqrt();
        y = y.div_ref(&one.add_ref(&s));
    }
    atan_series(&y).mul_pow2(j)
}

impl<S: MidScalar> CBall<S> {
    pub fn exp(&self) -> Self {
        let e = self.re.exp();
        if self.im.is_exact() && self.im.mid.is_zero() {
            return CBall::from_real(e);
        }
        let (s, c) = self.im.sin_cos();
        CBall { re: e.mul_ref(&c), im: e.mul_ref(&s) }
    }

    /// Principal logarithm; fails on balls meeting `(-inf, 0]`.
    pub fn ln(&self) -> Result<Self, BallError> {
        if self.contains_zero() || (self.im.contains_zero() && !self.re.is_positive()) {
            return Err(BallError::BranchCut);
        }
        if self.is_real_exact() && self.re.is_positive() {
            return Ok(CBall::from_real(self.re.ln()?));
        }
        let arg = self.im.atan2(&self.re)?;
        let m = self.norm_sqr().ln()?.mul_pow2(-1);
        Ok(CBall { re: m, im: arg })
    }

    /// `self^e` on the principal branch.
    pub fn pow(&self, e: &Self) -> Result<Self, BallError> {
        Ok(e.mul_ref(&self.ln()?).exp())
    }

    pub fn abs(&self) -> RBall<S> {
        self.norm_sqr().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bigfloat::BigFloat;

    type B = RBall<BigFloat>;

    #[test]
    fn pi_digits() {
        let p = B::pi(200);
        assert!(p.rad < 1e-58);
        assert!(p.contains_f64(std::f64::consts::PI) || p.overlaps(&B::from_f64(std::f64::consts::PI, 200).with_err(1e-15)));
        let pf = RBall::<f64>::pi(53);
        assert!(pf.overlaps(&RBall::new(std::f64::consts::PI, 1e-15)));
    }

    impl B {
        fn with_err(mut self, e: f64) -> Self {
            self.add_error(e);
            self
        }
    }

    #[test]
    fn exp_ln_inverse() {
        for &v in &[0.5, 1.0, 2.0, 10.0, 1e-5, 123.456] {
            let x = B::from_f64(v, 160);
            let y = x.ln().unwrap().exp();
            assert!(y.contains(&x) || y.overlaps(&x));
            assert!(y.rad < 1e-40 * v.max(1.0));
        }
    }

    #[test]
    fn sin_cos_pythagoras() {
        let x = B::from_f64(12345.678, 128);
        let (s, c) = x.sin_cos();
        let one = s.sqr().add_ref(&c.sqr());
        assert!(one.contains_f64(1.0));
        assert!(one.rad < 1e-30);
        assert!(s.overlaps(&B::from_f64(12345.678f64.sin(), 128).with_err(1e-12)));
    }

    #[test]
    fn atan_one_is_quarter_pi() {
        let a = B::one(128).atan();
        let q = B::pi(128).mul_pow2(-2);
        assert!(a.overlaps(&q));
        assert!(a.rad < 1e-35);
    }
}
