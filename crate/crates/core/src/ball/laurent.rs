use super::cball::CBall;
use super::jet::Jet;
use crate::error::BallError;
use crate::scalar::MidScalar;

/// `sum_{j >= valuation} body[j - valuation] Z^j`, truncated at `valuation + body.order`.
#[derive(Clone, Debug)]
pub struct LaurentSeries<S> {
    pub valuation: i64,
    pub body: Jet<S>,
    /// Set when the ball of the leading coefficient contains zero.
    pub leading_contains_zero: bool,
}

impl<S: MidScalar> LaurentSeries<S> {
    pub fn new(valuation: i64, body: Jet<S>) -> Self {
        let lz = body.coeffs[0].contains_zero();
        LaurentSeries { valuation, body, leading_contains_zero: lz }
    }

    /// Largest exponent that is still represented.
    pub fn top(&self) -> i64 {
        self.valuation + self.body.order as i64
    }

    /// Coefficient of `Z^j` (`None` beyond the truncation order).
    pub fn coeff(&self, j: i64) -> Option<CBall<S>> {
        if j > self.top() {
            return None;
        }
        if j < self.valuation {
            return Some(CBall::zero(self.body.prec()));
        }
        Some(self.body.coeff((j - self.valuation) as usize))
    }

    /// Adds a power series (an analytic function expanded at the same point).
    pub fn add_jet(&self, j: &Jet<S>) -> Self {
        let top = self.top().min(j.order as i64);
        let p = self.body.prec();
        let v = self.valuation.min(0);
        let coeffs = (v..=top)
            .map(|e| {
                let a = self.coeff(e).unwrap_or_else(|| CBall::zero(p));
                if e >= 0 {
                    a.add_ref(&j.coeff(e as usize))
                } else {
                    a
                }
            })
            .collect();
        LaurentSeries::new(v, Jet::from_coeffs(coeffs, (top - v) as usize))
    }

    pub fn mul_jet(&self, j: &Jet<S>) -> Self {
        LaurentSeries::new(self.valuation, self.body.mul_ref(j))
    }

    pub fn div_jet(&self, j: &Jet<S>) -> Result<Self, BallError> {
        Ok(LaurentSeries::new(self.valuation, self.body.div_ref(j)?))
    }
}

/// `num / den` where `den` has a zero of known order `den_valuation` at `Z = 0`.
pub fn laurent_div<S: MidScalar>(
    num: &Jet<S>,
    den: &Jet<S>,
    den_valuation: usize,
) -> Result<LaurentSeries<S>, BallError> {
    for i in 0..den_valuation {
        if !den.coeff(i).contains_zero() {
            return Err(BallError::ValuationTooHigh(i));
        }
    }
    if den.coeff(den_valuation).contains_zero() {
        return Err(BallError::ValuationNotCertified(den_valuation));
    }
    let d = den.shift_down(den_valuation);
    let mut order = num.order.min(d.order);
    if order == super::jet::EXACT_ORDER {
        order = num.coeffs.len().max(d.coeffs.len()) - 1;
    }
    let body = num.truncate(order).div_ref(&d.truncate(order))?;
    Ok(LaurentSeries::new(-(den_valuation as i64), body))
}
