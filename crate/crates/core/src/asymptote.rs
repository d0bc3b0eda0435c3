//! The assembled asymptotic expansion of `X(N)` and empirical cross-checks.

use crate::ball::{CBall, CBallJson, RBall, RBallJson};
use crate::bigfloat::BigFloat;
use crate::error::AsymptoteError;
use crate::fourier::{
    eigen_tables, fourier_eval_f64, log_q, member_ell_max, symmetric_group, FourierConfig, FourierContext, FourierTable,
    FourierTableJson,
};
use crate::linalg::Matrix;
use crate::linrep::{LinRep, Mode};
use crate::scalar::MidScalar;
use crate::spectral::{find_family, Side, SpectralData};
use crate::Rational;
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::Serialize;

/// One summand `N^{log_q lambda} (log N)^k / k! Phi_{lambda k}(log_q N)`.
#[derive(Clone, Debug)]
pub struct Term<S> {
    pub lambda: CBall<S>,
    /// `log_q lambda` on the principal branch.
    pub exponent: CBall<S>,
    pub k: usize,
    /// Regrouped over the eigenvalue's rotation family.
    pub fluctuation: FourierTable<S>,
    /// Open upper bound `log_q(|lambda| / R)` for Hölder exponents; `None` if `R = 0`.
    pub holder: Option<RBall<S>>,
    /// All non-constant Fourier coefficients contain zero (a hint, not a proof).
    pub constant_hint: bool,
}

/// `K = (I - C)^{-1} (I - A_0)` and `theta = 0` for matrix-product representations.
#[derive(Clone, Debug)]
pub struct Constants {
    pub k: Matrix<Rational>,
    pub theta: Rational,
}

#[derive(Clone, Debug)]
pub struct AsymptoticExpansion<S> {
    pub q: u32,
    pub terms: Vec<Term<S>>,
    /// `log_q R`; `None` when `R = 0`.
    pub error_exponent: Option<RBall<S>>,
    /// `max m(lambda)` over `|lambda| = R` (0 if there is none).
    pub error_log_power: usize,
    /// No eigenvalue of `C` lies on or inside the circle of radius `R`.
    pub error_omitted: bool,
    pub constants: Option<Constants>,
    /// Eigenvalues beyond `R` whose contribution vanishes identically.
    pub vanishing: Vec<CBall<S>>,
    /// Eigenvalues absorbed by the error term.
    pub in_error: Vec<CBall<S>>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct ExpansionConfig {
    pub fourier: FourierConfig,
}

fn jsr_r<S: MidScalar>(sd: &SpectralData<S>, prec: u32) -> RBall<S> {
    let r = &sd.jsr.r_ball;
    let (m, e) = S::from_bigfloat(&r.mid, prec);
    let mut b = RBall::new(m, r.rad);
    b.add_error(e);
    b
}

/// `log_q(|lambda| / R)`.
pub fn holder_bound<S: MidScalar>(lambda: &CBall<S>, exact: Option<&Rational>, sd: &SpectralData<S>, q: u32, prec: u32) -> Option<RBall<S>> {
    let r = jsr_r(sd, prec);
    if !r.is_positive() {
        return None;
    }
    let abs = match exact {
        Some(x) => RBall::from_rational(&num_traits::Signed::abs(x), prec),
        None => lambda.with_precision(prec).abs(),
    };
    let ln_q = RBall::<S>::from_i64(q as i64, prec).ln().ok()?;
    Some(abs.ln().ok()?.sub_ref(&r.ln().ok()?).div_ref(&ln_q))
}

/// Largest rotation-family period among the eigenvalues that contribute main terms.
pub fn max_period<S: MidScalar>(rep: &LinRep, sd: &SpectralData<S>, prec: u32) -> Result<usize, AsymptoteError> {
    let c = rep.derived().c;
    let mut p = 1;
    for i in 0..sd.eigen.len() {
        if sd.sides[i] == Side::Above && !sd.vanishing[i] {
            p = p.max(find_family(&c, &sd.eigen, i, prec)?.p);
        }
    }
    Ok(p)
}

/// All main terms, the error term and, for matrix products, the constants.
pub fn expansion<S: MidScalar>(
    rep: &LinRep,
    sd: &SpectralData<S>,
    cfg: &ExpansionConfig,
) -> Result<AsymptoticExpansion<S>, AsymptoteError> {
    let eigen = &sd.eigen;
    let prec = cfg.fourier.prec;
    let c = rep.derived().c;
    let mut notes = Vec::new();
    let r_ball = jsr_r(sd, prec);

    let constants = if rep.mode == Mode::MatrixProduct {
        if rep.is_one_eigenvalue_of_c() {
            if r_ball.upper_f64() < 1.0 {
                return Err(AsymptoteError::UnsupportedConstants);
            }
            notes.push("1 is an eigenvalue of C; the constant term is absorbed by the error term since R >= 1".into());
            None
        } else {
            let id = Matrix::<Rational>::identity(rep.d);
            let inv = id.sub_m(&c).try_inv().expect("1 is not an eigenvalue of C");
            Some(Constants { k: inv.mul_m(&id.sub_m(&rep.matrices[0])), theta: Rational::from_integer(0.into()) })
        }
    } else {
        None
    };

    let mut order: Vec<usize> = (0..eigen.len()).collect();
    order.sort_by(|&a, &b| eigen[b].abs_upper().partial_cmp(&eigen[a].abs_upper()).unwrap_or(std::cmp::Ordering::Equal));
    let mut assigned = vec![false; eigen.len()];
    let mut terms = Vec::new();
    let mut vanishing = Vec::new();
    let fctx = FourierContext::<S>::new(rep, &cfg.fourier)?;
    let wp = fctx.working_precision();
    for &idx in &order {
        if assigned[idx] || sd.sides[idx] != Side::Above || sd.vanishing[idx] {
            continue;
        }
        let fam = find_family(&c, eigen, idx, prec)?;
        for &m in &fam.members {
            assigned[m] = true;
        }
        let rep_e = &eigen[fam.representative];
        let m_ell = member_ell_max(cfg.fourier.ell_max, &fam);
        let mut member_tabs: Vec<Option<Vec<FourierTable<S>>>> = Vec::with_capacity(fam.p);
        for &m in &fam.members {
            member_tabs.push(if sd.vanishing[m] { None } else { Some(eigen_tables(&fctx, &eigen[m], if fam.p == 1 { cfg.fourier.ell_max } else { m_ell })?) });
        }
        let exponent = log_q(rep_e, rep.q, wp)?;
        let holder = holder_bound(&rep_e.lambda, rep_e.exact.as_ref(), sd, rep.q, wp);
        for k in (0..rep_e.jordan_m).rev() {
            let per_member: Vec<Option<FourierTable<S>>> = member_tabs.iter().map(|t| t.as_ref().map(|v| v[k].clone())).collect();
            let fluct = symmetric_group(&per_member, &rep_e.lambda, k, &fam, cfg.fourier.ell_max)?;
            let constant_hint = fluct.iter().all(|(l, c)| l == 0 || c.contains_zero());
            terms.push(Term { lambda: rep_e.lambda.clone(), exponent: exponent.clone(), k, fluctuation: fluct, holder: holder.clone(), constant_hint });
        }
    }
    for &idx in &order {
        if !assigned[idx] && sd.sides[idx] == Side::Above {
            vanishing.push(eigen[idx].lambda.clone());
        }
    }
    terms.sort_by(|a, b| {
        let (ra, rb) = (a.exponent.re.to_f64(), b.exponent.re.to_f64());
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal).then(b.k.cmp(&a.k))
    });
    let in_error: Vec<CBall<S>> = (0..eigen.len()).filter(|&i| sd.sides[i] != Side::Above).map(|i| eigen[i].lambda.clone()).collect();
    let error_log_power = (0..eigen.len()).filter(|&i| sd.sides[i] == Side::Tie).map(|i| eigen[i].jordan_m).max().unwrap_or(0);
    let error_exponent = if r_ball.is_positive() {
        let ln_q = RBall::<S>::from_i64(rep.q as i64, prec).ln().map_err(crate::error::FourierError::from)?;
        Some(r_ball.ln().map_err(crate::error::FourierError::from)?.div_ref(&ln_q))
    } else {
        None
    };
    if !sd.jsr.products_bounded {
        notes.push("products are not certified O(R^l); the error exponent holds for every R' > R".into());
    }
    Ok(AsymptoticExpansion {
        q: rep.q,
        terms,
        error_exponent,
        error_log_power,
        error_omitted: in_error.is_empty(),
        constants,
        vanishing,
        in_error,
        notes,
    })
}

/// `X(N)` at `N = round(q^{j + u})`, rescaled for one term.
#[derive(Clone, Debug)]
pub struct EmpiricalSample {
    pub u: f64,
    pub j: u32,
    pub n: BigInt,
    /// `log_q N - j`, the point where the fluctuation is evaluated.
    pub u_eff: f64,
    pub x: Rational,
    pub value: (f64, f64),
}

/// `round(q^t)`, exact enough for `t` up to a few hundred.
pub fn q_power_point(q: u32, t: f64) -> BigInt {
    let lg = t * (q as f64).log2();
    if lg < 50.0 {
        return BigInt::from((q as f64).powf(t).round() as u64);
    }
    let prec = (lg as u32) + 64;
    let x = RBall::<BigFloat>::from_i64(q as i64, prec).ln().expect("q >= 2").mul_ref(&RBall::from_f64(t, prec)).exp();
    x.mid.round_to_bigint()
}

fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 60;
    (n >> shift).to_f64().unwrap().ln() + shift as f64 * std::f64::consts::LN_2
}

fn rat_f64(x: &Rational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `N^e (log N)^k / k!` in double precision, as a complex number.
fn term_scale(e: (f64, f64), k: usize, ln_n: f64) -> (f64, f64) {
    let mag = (e.0 * ln_n).exp();
    let ang = e.1 * ln_n;
    let mut f = 1.0;
    for i in 1..=k {
        f *= ln_n / i as f64;
    }
    (mag * f * ang.cos(), mag * f * ang.sin())
}

fn cmul(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0 * b.0 - a.1 * b.1, a.0 * b.1 + a.1 * b.0)
}

fn cdiv(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    let n = b.0 * b.0 + b.1 * b.1;
    ((a.0 * b.0 + a.1 * b.1) / n, (a.1 * b.0 - a.0 * b.1) / n)
}

/// Empirical values of term `t` at the grid points: `X(N)` minus the earlier (larger)
/// terms, evaluated by their truncated series at midpoints, divided by the term's scale.
pub fn empirical_sample<S: MidScalar>(
    rep: &LinRep,
    exp: &AsymptoticExpansion<S>,
    t: usize,
    u_grid: &[f64],
    j: u32,
    degree: usize,
) -> Vec<EmpiricalSample> {
    let ln_q = (rep.q as f64).ln();
    u_grid
        .iter()
        .map(|&u| {
            let n = q_power_point(rep.q, j as f64 + u);
            let x = rep.summatory(&n);
            let ln_n = ln_big(&n);
            let mut rest = (rat_f64(&x), 0.0);
            for higher in &exp.terms[..t] {
                let fl = higher.fluctuation.effective();
                let ue = (ln_n / ln_q).rem_euclid(fl.period as f64);
                let phi = fourier_eval_f64(&fl, ue, degree);
                let sc = term_scale(higher.exponent.to_f64_pair(), higher.k, ln_n);
                let v = cmul(sc, phi);
                rest = (rest.0 - v.0, rest.1 - v.1);
            }
            let me = &exp.terms[t];
            let value = cdiv(rest, term_scale(me.exponent.to_f64_pair(), me.k, ln_n));
            EmpiricalSample { u, j, u_eff: ln_n / ln_q - j as f64, n, x, value }
        })
        .collect()
}

/// One CSV row of the dual-route comparison.
#[derive(Clone, Debug, Serialize)]
pub struct SampleRow {
    pub u: f64,
    pub j: u32,
    pub empirical_re: f64,
    pub empirical_im: f64,
    pub series_re: f64,
    pub series_im: f64,
    pub abs_diff: f64,
}

/// Empirical values against the truncated Fourier series on `u_points` points of one period.
pub fn dual_route<S: MidScalar>(
    rep: &LinRep,
    exp: &AsymptoticExpansion<S>,
    t: usize,
    u_points: usize,
    j: u32,
    degree: usize,
) -> Vec<SampleRow> {
    let fl = exp.terms[t].fluctuation.effective();
    let period = exp.terms[t].fluctuation.period as f64;
    let grid: Vec<f64> = (0..u_points).map(|i| period * i as f64 / u_points as f64).collect();
    empirical_sample(rep, exp, t, &grid, j, degree)
        .into_iter()
        .map(|s| {
            let ue = s.u_eff.rem_euclid(fl.period as f64);
            let (sr, si) = fourier_eval_f64(&fl, ue, degree);
            SampleRow {
                u: s.u,
                j: s.j,
                empirical_re: s.value.0,
                empirical_im: s.value.1,
                series_re: sr,
                series_im: si,
                abs_diff: (s.value.0 - sr).hypot(s.value.1 - si),
            }
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct TermJson {
    pub lambda: CBallJson,
    pub exponent: CBallJson,
    pub k: usize,
    pub holder: Option<RBallJson>,
    pub one_periodic: bool,
    pub constant_hint: bool,
    pub fluctuation: FourierTableJson,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpansionJson {
    pub terms: Vec<TermJson>,
    pub error_exponent: Option<RBallJson>,
    pub error_log_power: usize,
    pub error_omitted: bool,
    pub constants: Option<Vec<Vec<String>>>,
    pub vanishing: Vec<CBallJson>,
    pub in_error: Vec<CBallJson>,
    pub notes: Vec<String>,
}

impl<S: MidScalar> AsymptoticExpansion<S> {
    pub fn to_json(&self) -> ExpansionJson {
        ExpansionJson {
            terms: self
                .terms
                .iter()
                .map(|t| TermJson {
                    lambda: t.lambda.to_json(),
                    exponent: t.exponent.to_json(),
                    k: t.k,
                    holder: t.holder.as_ref().map(|h| h.to_json()),
                    one_periodic: t.fluctuation.one_periodic,
                    constant_hint: t.constant_hint,
                    fluctuation: t.fluctuation.to_json(),
                })
                .collect(),
            error_exponent: self.error_exponent.as_ref().map(|e| e.to_json()),
            error_log_power: self.error_log_power,
            error_omitted: self.error_omitted,
            constants: self.constants.as_ref().map(|c| (0..c.k.rows).map(|i| c.k.row(i).iter().map(|x| x.to_string()).collect()).collect()),
            vanishing: self.vanishing.iter().map(|c| c.to_json()).collect(),
            in_error: self.in_error.iter().map(|c| c.to_json()).collect(),
            notes: self.notes.clone(),
        }
    }
}
