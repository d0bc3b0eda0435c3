use super::cball::CBall;
use super::rball::RBall;
use crate::error::BallError;
use crate::scalar::MidScalar;
use std::ops::{Add, Mul, Neg, Sub};

/// Order of a jet that is an exact polynomial (no truncation).
pub const EXACT_ORDER: usize = usize::MAX;

/// Truncated power series `sum c_i Z^i mod Z^(order+1)` with ball coefficients.
///
/// Finite-order jets store exactly `order + 1` coefficients; exact jets
/// (`order == EXACT_ORDER`) store as many as they need.
#[derive(Clone, Debug)]
pub struct Jet<S> {
    pub coeffs: Vec<CBall<S>>,
    pub order: usize,
}

fn target_len(order: usize, natural: usize) -> usize {
    if order == EXACT_ORDER {
        natural.max(1)
    } else {
        order + 1
    }
}

impl<S: MidScalar> Jet<S> {
    pub fn from_coeffs(mut coeffs: Vec<CBall<S>>, order: usize) -> Self {
        let prec = coeffs.first().map(|c| c.prec()).unwrap_or(0);
        let n = target_len(order, coeffs.len());
        coeffs.truncate(n);
        while coeffs.len() < n {
            coeffs.push(CBall::zero(prec));
        }
        Jet { coeffs, order }
    }

    pub fn zero(order: usize, prec: u32) -> Self {
        Self::from_coeffs(vec![CBall::zero(prec)], order)
    }

    pub fn constant(c: CBall<S>, order: usize) -> Self {
        Self::from_coeffs(vec![c], order)
    }

    /// The affine jet `s0 + Z`.
    pub fn variable(s0: CBall<S>, order: usize) -> Self {
        let p = s0.prec();
        Self::from_coeffs(vec![s0, CBall::one(p)], order)
    }

    pub fn prec(&self) -> u32 {
        self.coeffs.iter().map(|c| c.prec()).max().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> CBall<S> {
        self.coeffs.get(i).cloned().unwrap_or_else(|| CBall::zero(self.prec()))
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        Self::from_coeffs(self.coeffs.clone(), order)
    }

    /// Drops the first `a` coefficients (exact division by `Z^a`).
    pub fn shift_down(&self, a: usize) -> Self {
        let order = if self.order == EXACT_ORDER { EXACT_ORDER } else { self.order - a };
        let c: Vec<_> = self.coeffs.iter().skip(a).cloned().collect();
        if c.is_empty() {
            return Self::zero(order, self.prec());
        }
        Self::from_coeffs(c, order)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    pub fn add_error(&mut self, e: &[f64]) {
        for (c, &x) in self.coeffs.iter_mut().zip(e) {
            c.add_error(x);
        }
    }

    pub fn max_rad(&self) -> f64 {
        self.coeffs.iter().map(|c| c.rad()).fold(0.0, f64::max)
    }

    pub fn contains(&self, o: &Self) -> bool {
        let n = self.coeffs.len().max(o.coeffs.len());
        (0..n).all(|i| self.coeff(i).contains(&o.coeff(i)))
    }

    pub fn overlaps(&self, o: &Self) -> bool {
        let n = self.coeffs.len().min(o.coeffs.len());
        (0..n).all(|i| self.coeff(i).overlaps(&o.coeff(i)))
    }

    fn zip_with(&self, o: &Self, f: impl Fn(&CBall<S>, &CBall<S>) -> CBall<S>) -> Self {
        let order = self.order.min(o.order);
        let n = target_len(order, self.coeffs.len().max(o.coeffs.len()));
        let p = self.prec().max(o.prec());
        let z = CBall::zero(p);
        let c = (0..n)
            .map(|i| f(self.coeffs.get(i).unwrap_or(&z), o.coeffs.get(i).unwrap_or(&z)))
            .collect();
        Jet { coeffs: c, order }
    }

    pub fn add_ref(&self, o: &Self) -> Self {
        self.zip_with(o, |a, b| a.add_ref(b))
    }

    pub fn sub_ref(&self, o: &Self) -> Self {
        self.zip_with(o, |a, b| a.sub_ref(b))
    }

    pub fn neg_ref(&self) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|c| c.neg_ref()).collect(), order: self.order }
    }

    /// Truncated Cauchy product.
    pub fn mul_ref(&self, o: &Self) -> Self {
        let order = self.order.min(o.order);
        let natural = self.coeffs.len() + o.coeffs.len() - 1;
        let n = target_len(order, natural).min(natural.max(1));
        let p = self.prec().max(o.prec());
        let mut c = Vec::with_capacity(n);
        for k in 0..n {
            let mut acc: Option<CBall<S>> = None;
            let lo = k.saturating_sub(o.coeffs.len() - 1);
            for i in lo..=k.min(self.coeffs.len() - 1) {
                let t = self.coeffs[i].mul_ref(&o.coeffs[k - i]);
                acc = Some(match acc {
                    None => t,
                    Some(a) => a.add_ref(&t),
                });
            }
            c.push(acc.unwrap_or_else(|| CBall::zero(p)));
        }
        Self::from_coeffs(c, order)
    }

    pub fn scale(&self, c: &CBall<S>) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|x| x.mul_ref(c)).collect(), order: self.order }
    }

    pub fn scale_real(&self, c: &RBall<S>) -> Self {
        Jet { coeffs: self.coeffs.iter().map(|x| x.mul_real(c)).collect(), order: self.order }
    }

    /// Power-series division; the divisor's constant term must exclude zero.
    pub fn div_ref(&self, o: &Self) -> Result<Self, BallError> {
        let d0 = &o.coeffs[0];
        if d0.contains_zero() {
            return Err(BallError::LeadingCoefficientContainsZero);
        }
        let order = self.order.min(o.order);
        assert!(order != EXACT_ORDER, "division of exact polynomials needs a finite order");
        let inv = d0.recip();
        let mut q: Vec<CBall<S>> = Vec::with_capacity(order + 1);
        for k in 0..=order {
            let mut acc = self.coeff(k);
            for i in 1..=k.min(o.coeffs.len() - 1) {
                acc = acc.sub_ref(&o.coeffs[i].mul_ref(&q[k - i]));
            }
            q.push(acc.mul_ref(&inv));
        }
        Ok(Jet { coeffs: q, order })
    }

    /// `exp` of a finite-order jet.
    pub fn exp(&self) -> Self {
        assert!(self.order != EXACT_ORDER, "exp needs a finite order");
        let e0 = self.coeffs[0].exp();
        let mut e = vec![e0];
        for k in 1..=self.order {
            let mut acc = CBall::zero(self.prec());
            for i in 1..=k {
                let ji = self.coeff(i);
                acc = acc.add_ref(&ji.mul_ref(&e[k - i]).mul_i64(i as i64));
            }
            e.push(acc.div_i64(k as i64));
        }
        Jet { coeffs: e, order: self.order }
    }

    /// `exp(c + a Z)` for a real slope `a`: coefficients `e^c a^k / k!`.
    pub fn exp_linear(c: &CBall<S>, a: &RBall<S>, order: usize) -> Self {
        let mut v = vec![c.exp()];
        for k in 1..=order {
            let next = v[k - 1].mul_real(a).div_i64(k as i64);
            v.push(next);
        }
        Jet { coeffs: v, order }
    }

    /// `binom(-s, k) = (-s)(-s-1)...(-s-k+1)/k!`.
    pub fn binom_neg_s(s: &Self, k: usize) -> Self {
        let p = s.prec();
        let mut b = Jet::constant(CBall::one(p), s.order);
        let ms = s.neg_ref();
        for i in 0..k {
            let f = ms.sub_ref(&Jet::constant(CBall::from_i64(i as i64, p), EXACT_ORDER));
            b = b.mul_ref(&f).scale_real(&RBall::one(p).div_i64(i as i64 + 1));
        }
        b
    }
}

/// `binom(-s, k)` for a complex ball.
pub fn binom_neg_s<S: MidScalar>(s: &CBall<S>, k: usize) -> CBall<S> {
    let p = s.prec();
    let mut b = CBall::one(p);
    let ms = s.neg_ref();
    for i in 0..k {
        let f = ms.sub_ref(&CBall::from_i64(i as i64, p));
        b = b.mul_ref(&f).div_i64(i as i64 + 1);
    }
    b
}

macro_rules! binop {
    ($tr:ident, $f:ident, $m:ident) => {
        impl<'a, S: MidScalar> $tr<&'a Jet<S>> for &'a Jet<S> {
            type Output = Jet<S>;
            fn $f(self, o: &'a Jet<S>) -> Jet<S> {
                self.$m(o)
            }
        }
        impl<S: MidScalar> $tr<Jet<S>> for Jet<S> {
            type Output = Jet<S>;
            fn $f(self, o: Jet<S>) -> Jet<S> {
                self.$m(&o)
            }
        }
    };
}

binop!(Add, add, add_ref);
binop!(Sub, sub, sub_ref);
binop!(Mul, mul, mul_ref);

impl<S: MidScalar> Neg for Jet<S> {
    type Output = Jet<S>;
    fn neg(self) -> Jet<S> {
        self.neg_ref()
    }
}

impl<S: MidScalar> num_traits::Zero for Jet<S> {
    fn zero() -> Self {
        Jet::zero(EXACT_ORDER, 0)
    }
    fn is_zero(&self) -> bool {
        self.coeffs.iter().all(num_traits::Zero::is_zero)
    }
}

impl<S: MidScalar> num_traits::One for Jet<S> {
    fn one() -> Self {
        Jet::constant(CBall::one(0), EXACT_ORDER)
    }
}
