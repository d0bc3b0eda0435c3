//! Rigorous midpoint-radius arithmetic: real and complex balls, jets and
//! Laurent series.

mod cball;
pub mod elementary;
mod jet;
mod laurent;
mod rball;

pub use cball::CBall;
pub use jet::{binom_neg_s, Jet, EXACT_ORDER};
pub use laurent::{laurent_div, LaurentSeries};
pub use rball::{up_add, up_div, up_mul, RBall};

use crate::bigfloat::BigFloat;
use crate::error::BallError;
use crate::scalar::MidScalar;
use serde::{Deserialize, Serialize};

/// Wire format of a complex ball; all fields are exact decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CBallJson {
    pub mid_re: String,
    pub mid_im: String,
    pub rad: String,
}

/// Wire format of a real ball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RBallJson {
    pub mid: String,
    pub rad: String,
}

fn f64_decimal(x: f64) -> String {
    if x.is_infinite() {
        return "inf".into();
    }
    // Shortest representation that parses back to the same double.
    format!("{x:e}")
}

fn parse_rad(s: &str) -> Result<f64, BallError> {
    if s == "inf" {
        return Ok(f64::INFINITY);
    }
    if s.contains('e') {
        return s.parse::<f64>().map_err(|_| BallError::Domain(format!("bad radius {s}")));
    }
    let b = BigFloat::parse_decimal_exact(s).ok_or_else(|| BallError::Domain(format!("bad radius {s}")))?;
    let v = b.to_f64();
    if BigFloat::from_f64(v, 0).0 == b {
        Ok(v)
    } else {
        Ok(v.next_up())
    }
}

fn widen(r: f64, e: f64) -> f64 {
    if e == 0.0 {
        r
    } else {
        up_add(r, e)
    }
}

impl<S: MidScalar> CBall<S> {
    /// Serialized form; the single radius is the larger component radius.
    pub fn to_json(&self) -> CBallJson {
        CBallJson {
            mid_re: self.re.mid.to_decimal_exact(),
            mid_im: self.im.mid.to_decimal_exact(),
            rad: f64_decimal(self.rad()),
        }
    }

    pub fn from_json(j: &CBallJson, prec: u32) -> Result<Self, BallError> {
        let re = BigFloat::parse_decimal_exact(&j.mid_re).ok_or_else(|| BallError::Domain(format!("bad decimal {}", j.mid_re)))?;
        let im = BigFloat::parse_decimal_exact(&j.mid_im).ok_or_else(|| BallError::Domain(format!("bad decimal {}", j.mid_im)))?;
        let r = parse_rad(&j.rad)?;
        let (a, ea) = S::from_bigfloat(&re, prec);
        let (b, eb) = S::from_bigfloat(&im, prec);
        Ok(CBall { re: RBall::new(a, widen(r, ea)), im: RBall::new(b, widen(r, eb)) })
    }
}

impl<S: MidScalar> RBall<S> {
    pub fn to_json(&self) -> RBallJson {
        RBallJson { mid: self.mid.to_decimal_exact(), rad: f64_decimal(self.rad) }
    }

    pub fn from_json(j: &RBallJson, prec: u32) -> Result<Self, BallError> {
        let m = BigFloat::parse_decimal_exact(&j.mid).ok_or_else(|| BallError::Domain(format!("bad decimal {}", j.mid)))?;
        let r = parse_rad(&j.rad)?;
        let (a, e) = S::from_bigfloat(&m, prec);
        Ok(RBall::new(a, widen(r, e)))
    }
}

/// Checked complex division.
pub fn ball_div<S: MidScalar>(a: &CBall<S>, b: &CBall<S>) -> Result<CBall<S>, BallError> {
    if b.contains_zero() {
        return Err(BallError::DivisorContainsZero);
    }
    Ok(a.div_ref(b))
}
