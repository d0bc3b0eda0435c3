//! Fourier coefficients of the fluctuations as Laurent coefficients of
//! `(x(0) + X(s)) / s` at the poles `log_q lambda + 2 l pi i / log q`.

use crate::ball::{laurent_div, CBall, CBallJson, Jet, LaurentSeries, RBall};
use crate::dirichlet::{DirichletConfig, DirichletContext};
use crate::error::FourierError;
use crate::linalg::Matrix;
use crate::linrep::LinRep;
use crate::scalar::MidScalar;
use crate::spectral::{EigenDatum, Family};
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug)]
pub struct FourierConfig {
    pub prec: u32,
    pub n0: u64,
    pub ell_max: usize,
    /// Fill `phi_{-l}` from `conj(phi_l)` where the pole sites are conjugate.
    pub conjugate_fill: bool,
    /// Jet order beyond the minimal `2a - 1`.
    pub extra_order: usize,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig { prec: 128, n0: 1024, ell_max: 10, conjugate_fill: true, extra_order: 0 }
    }
}

/// Where a Laurent expansion is taken.
#[derive(Clone, Debug)]
pub struct PoleSite<S> {
    pub s0: CBall<S>,
    /// Order of the zero of `det(I - q^{-s} C)`; the algebraic multiplicity of `lambda`.
    pub det_valuation: usize,
    pub max_pole_order: usize,
}

/// `log_q lambda` on the principal branch.
pub fn log_q<S: MidScalar>(e: &EigenDatum<S>, q: u32, prec: u32) -> Result<CBall<S>, FourierError> {
    let ln_q = RBall::<S>::from_i64(q as i64, prec).ln()?;
    let pi = RBall::<S>::pi(prec);
    let ln = match &e.exact {
        Some(r) if r.is_zero() => return Err(FourierError::ZeroPoleSite),
        Some(r) => {
            let l = RBall::from_rational(&r.abs(), prec).ln()?;
            let im = if r.is_negative() { pi } else { RBall::zero(prec) };
            CBall::new(l, im)
        }
        None if e.is_real && e.lambda.re.upper_f64() < 0.0 => {
            let l = e.lambda.re.with_precision(prec).neg_ref().ln()?;
            CBall::new(l, pi)
        }
        None => e.lambda.with_precision(prec).ln()?,
    };
    Ok(ln.div_real(&ln_q))
}

/// `log_q lambda + 2 l pi i / (p log q)`.
pub fn pole_site<S: MidScalar>(e: &EigenDatum<S>, q: u32, ell: i64, p: usize, prec: u32) -> Result<PoleSite<S>, FourierError> {
    let base = log_q(e, q, prec)?;
    let ln_q = RBall::<S>::from_i64(q as i64, prec).ln()?;
    let chi = RBall::<S>::pi(prec).mul_i64(2 * ell).div_i64(p as i64).div_ref(&ln_q);
    let s0 = base.add_ref(&CBall::new(RBall::zero(prec), chi));
    Ok(PoleSite { s0, det_valuation: e.alg_mult, max_pole_order: e.jordan_m })
}

/// Shared data for Laurent expansions of one representation.
pub struct FourierContext<S> {
    pub rep: LinRep,
    pub cfg: FourierConfig,
    dctx: DirichletContext<S>,
    c: Matrix<RBall<S>>,
    left: Vec<(usize, RBall<S>)>,
    ln_q: RBall<S>,
    wp: u32,
}

impl<S: MidScalar> FourierContext<S> {
    pub fn new(rep: &LinRep, cfg: &FourierConfig) -> Result<Self, FourierError> {
        let dcfg = DirichletConfig { n0: cfg.n0, prec: cfg.prec, ..DirichletConfig::for_rep(rep) };
        let v0 = Matrix::from_vec(rep.d, 1, rep.initial.clone());
        let dctx = DirichletContext::new(rep, &dcfg, &v0)?;
        let wp = dctx.working_precision();
        let c = rep.derived().c.to_balls::<S>(wp);
        let left = rep
            .left
            .iter()
            .enumerate()
            .filter(|(_, e)| !e.is_zero())
            .map(|(i, e)| (i, RBall::from_rational(e, wp)))
            .collect();
        Ok(FourierContext { rep: rep.clone(), cfg: cfg.clone(), dctx, c, left, ln_q: RBall::from_i64(rep.q as i64, wp).ln()?, wp })
    }

    pub fn working_precision(&self) -> u32 {
        self.wp
    }

    /// Laurent series of `(x(0) + X(s)) / s` at the site, in `Z = s - s0`.
    ///
    /// Only the principal part is meaningful: the analytic head sum and `x(0)` are
    /// omitted since they cannot change negative powers.
    pub fn laurent_at(&self, site: &PoleSite<S>) -> Result<LaurentSeries<S>, FourierError> {
        let a = site.det_valuation;
        let order = 2 * a - 1 + self.cfg.extra_order;
        let s0 = site.s0.with_precision(self.wp);
        if s0.contains_zero() {
            return Err(FourierError::ZeroPoleSite);
        }
        let g = self.dctx.eval_g(&s0, order)?;
        let d = self.rep.d;
        let x = Jet::exp_linear(&s0.neg_ref().mul_real(&self.ln_q), &self.ln_q.neg_ref(), order);
        let one = Jet::constant(CBall::one(self.wp), order);
        let m = Matrix::from_fn(d, d, |i, j| {
            let cx = x.scale_real(self.c.get(i, j));
            if i == j {
                one.sub_ref(&cx)
            } else {
                cx.neg_ref()
            }
        });
        let det = m.det();
        let mut num = Jet::zero(order, self.wp);
        for (i, e) in &self.left {
            let mut mi = m.clone();
            for r in 0..d {
                mi.set(r, *i, g.get(r, 0).clone());
            }
            num = num.add_ref(&mi.det().scale_real(e));
        }
        let l = laurent_div(&num, &det, a)?;
        let inv_s = one.div_ref(&Jet::variable(s0.clone(), order))?;
        let l = l.mul_jet(&inv_s);
        let m_max = site.max_pole_order as i64;
        for j in -(a as i64)..-m_max {
            if let Some(c) = l.coeff(j) {
                if !c.contains_zero() {
                    return Err(FourierError::PoleOrderExceeded(j));
                }
            }
        }
        Ok(l)
    }

    /// `phi_{lambda k l}` for all `0 <= k < m(lambda)` at one site.
    pub fn coefficients_at(&self, site: &PoleSite<S>) -> Result<Vec<CBall<S>>, FourierError> {
        let l = self.laurent_at(site)?;
        Ok((0..site.max_pole_order)
            .map(|k| l.coeff(-(k as i64) - 1).unwrap_or_else(|| CBall::zero(self.wp)))
            .collect())
    }
}

/// Non-vanishing status of a coefficient ball.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Nonzero,
    /// Inconclusive: the ball contains zero.
    ContainsZero,
}

/// `phi_l` for `|l| <= ell_max` of the fluctuation attached to `(lambda, k)`.
#[derive(Clone, Debug)]
pub struct FourierTable<S> {
    pub lambda: CBall<S>,
    pub k: usize,
    pub period: usize,
    pub ell_max: usize,
    coeffs: Vec<CBall<S>>,
    /// All coefficients off the multiples of `period` are exactly zero, so the
    /// fluctuation is 1-periodic.
    pub one_periodic: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientJson {
    pub ell: i64,
    pub value: CBallJson,
    pub status: Status,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FourierTableJson {
    pub lambda: CBallJson,
    pub k: usize,
    pub period: usize,
    pub coefficients: Vec<CoefficientJson>,
}

impl<S: MidScalar> FourierTable<S> {
    /// `coeffs[i]` is `phi_{i - ell_max}`.
    pub fn new(lambda: CBall<S>, k: usize, period: usize, coeffs: Vec<CBall<S>>) -> Self {
        assert!(coeffs.len() % 2 == 1, "coefficients must cover a symmetric range");
        let ell_max = coeffs.len() / 2;
        FourierTable { lambda, k, period, ell_max, coeffs, one_periodic: period == 1 }
    }

    pub fn coeff(&self, ell: i64) -> Option<&CBall<S>> {
        if ell.unsigned_abs() as usize > self.ell_max {
            return None;
        }
        self.coeffs.get((ell + self.ell_max as i64) as usize)
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, &CBall<S>)> {
        let m = self.ell_max as i64;
        self.coeffs.iter().enumerate().map(move |(i, c)| (i as i64 - m, c))
    }

    /// The same fluctuation written with period 1 when that is certified.
    pub fn effective(&self) -> FourierTable<S> {
        if self.period == 1 || !self.one_periodic {
            return self.clone();
        }
        let p = self.period as i64;
        let m = self.ell_max as i64 / p;
        let coeffs = (-m..=m).map(|l| self.coeff(l * p).cloned().expect("in range")).collect();
        let mut t = FourierTable::new(self.lambda.clone(), self.k, 1, coeffs);
        t.one_periodic = true;
        t
    }

    pub fn nonvanishing_report(&self) -> Vec<(i64, Status)> {
        self.iter()
            .map(|(l, c)| (l, if c.contains_zero() { Status::ContainsZero } else { Status::Nonzero }))
            .collect()
    }

    /// `phi_{-l}` and `conj(phi_l)` intersect for every stored `l`.
    pub fn conjugate_symmetric(&self) -> bool {
        (1..=self.ell_max as i64).all(|l| self.coeff(-l).unwrap().overlaps(&self.coeff(l).unwrap().conj()))
            && self.coeff(0).unwrap().im.contains_zero()
    }

    pub fn max_rad(&self) -> f64 {
        self.coeffs.iter().map(|c| c.rad()).fold(0.0, f64::max)
    }

    pub fn to_json(&self) -> FourierTableJson {
        FourierTableJson {
            lambda: self.lambda.to_json(),
            k: self.k,
            period: self.period,
            coefficients: self
                .nonvanishing_report()
                .into_iter()
                .map(|(ell, status)| CoefficientJson { ell, value: self.coeff(ell).unwrap().to_json(), status })
                .collect(),
        }
    }
}

/// `sum_{|l| <= degree} phi_l exp(2 l pi i u / period)` in ball arithmetic.
///
/// The truncation of the series is not bounded.
pub fn fourier_eval<S: MidScalar>(table: &FourierTable<S>, u: f64, degree: usize) -> CBall<S> {
    let prec = table.lambda.prec().max(53);
    let deg = degree.min(table.ell_max) as i64;
    let two_pi = RBall::<S>::pi(prec).mul_pow2(1);
    let u = RBall::<S>::from_f64(u, prec).div_i64(table.period as i64);
    let (s, c) = two_pi.mul_ref(&u).sin_cos();
    let w = CBall::new(c, s);
    let mut acc = table.coeff(0).cloned().unwrap_or_else(|| CBall::zero(prec));
    let mut wp = CBall::one(prec);
    for l in 1..=deg {
        wp = wp.mul_ref(&w);
        acc = acc.add_ref(&table.coeff(l).unwrap().mul_ref(&wp));
        acc = acc.add_ref(&table.coeff(-l).unwrap().mul_ref(&wp.conj()));
    }
    acc
}

/// Fast midpoint evaluation of the same partial sum.
pub fn fourier_eval_f64<S: MidScalar>(table: &FourierTable<S>, u: f64, degree: usize) -> (f64, f64) {
    let deg = degree.min(table.ell_max) as i64;
    let t = 2.0 * std::f64::consts::PI * u / table.period as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for l in -deg..=deg {
        let (a, b) = table.coeff(l).unwrap().to_f64_pair();
        let (s, c) = (t * l as f64).sin_cos();
        re += a * c - b * s;
        im += a * s + b * c;
    }
    (re, im)
}

/// How `phi_{-l}` relates to `phi_l` by conjugation for the sites of `e`.
fn conjugate_partner<S: MidScalar>(e: &EigenDatum<S>, arg_offset_zero: bool) -> Option<fn(i64) -> i64> {
    if !e.is_real {
        return None;
    }
    if arg_offset_zero {
        Some(|l| -l)
    } else {
        Some(|l| -l - 1)
    }
}

fn lambda_is_negative<S: MidScalar>(e: &EigenDatum<S>) -> bool {
    match &e.exact {
        Some(r) => r.is_negative(),
        None => e.is_real && e.lambda.re.upper_f64() < 0.0,
    }
}

/// Period-1 tables `k = 0..m(lambda)` of one eigenvalue over `|l| <= ell_max`.
pub fn eigen_tables<S: MidScalar>(
    fctx: &FourierContext<S>,
    e: &EigenDatum<S>,
    ell_max: usize,
) -> Result<Vec<FourierTable<S>>, FourierError> {
    let q = fctx.rep.q;
    let wp = fctx.working_precision();
    let partner = if fctx.cfg.conjugate_fill { conjugate_partner(e, !lambda_is_negative(e)) } else { None };
    let lo = -(ell_max as i64);
    let hi = ell_max as i64;
    let direct: Vec<i64> = match partner {
        Some(f) => (lo..=hi).filter(|&l| f(l) <= l || f(l) < lo || f(l) > hi).collect(),
        None => (lo..=hi).collect(),
    };
    log::debug!("fourier tables for {:?}: {} sites", e.lambda.to_f64_pair(), direct.len());
    let computed: Vec<(i64, Vec<CBall<S>>)> = direct
        .par_iter()
        .map(|&l| {
            let site = pole_site(e, q, l, 1, wp)?;
            Ok((l, fctx.coefficients_at(&site)?))
        })
        .collect::<Result<_, FourierError>>()?;
    let m = e.jordan_m;
    let n = (2 * ell_max + 1) as usize;
    let mut cols: Vec<Vec<Option<CBall<S>>>> = vec![vec![None; n]; m];
    for (l, v) in &computed {
        for (k, c) in v.iter().enumerate() {
            cols[k][(l - lo) as usize] = Some(c.clone());
        }
    }
    if let Some(f) = partner {
        for (l, v) in &computed {
            let pl = f(*l);
            if pl >= lo && pl <= hi {
                for (k, c) in v.iter().enumerate() {
                    let slot = &mut cols[k][(pl - lo) as usize];
                    if slot.is_none() {
                        *slot = Some(c.conj());
                    }
                }
            }
        }
    }
    Ok(cols
        .into_iter()
        .enumerate()
        .map(|(k, col)| {
            let coeffs = col.into_iter().map(|c| c.expect("every site computed or mirrored")).collect();
            FourierTable::new(e.lambda.clone(), k, 1, coeffs)
        })
        .collect())
}

/// `phi_{lambda k l}` for `|l| <= cfg.ell_max`.
pub fn fourier_table<S: MidScalar>(
    rep: &LinRep,
    eigen: &[EigenDatum<S>],
    idx: usize,
    k: usize,
    cfg: &FourierConfig,
) -> Result<FourierTable<S>, FourierError> {
    let m = eigen[idx].jordan_m;
    if k >= m {
        return Err(FourierError::InvalidLogPower { k, m });
    }
    let fctx = FourierContext::new(rep, cfg)?;
    Ok(eigen_tables(&fctx, &eigen[idx], cfg.ell_max)?.swap_remove(k))
}

/// The Laurent series of `(x(0) + X(s)) / s` at `log_q lambda + chi_l`.
pub fn laurent_x_at_pole<S: MidScalar>(
    rep: &LinRep,
    eigen: &[EigenDatum<S>],
    idx: usize,
    ell: i64,
    cfg: &FourierConfig,
) -> Result<LaurentSeries<S>, FourierError> {
    let fctx = FourierContext::new(rep, cfg)?;
    let site = pole_site(&eigen[idx], rep.q, ell, 1, fctx.working_precision())?;
    fctx.laurent_at(&site)
}

/// Regroups the period-1 tables of a rotation family into one `p`-periodic table.
///
/// `tables[j]` belongs to `family.members[j]`, the eigenvalue
/// `exp(2 pi i (j0 + j) / p) lambda`; its `l'`-th coefficient becomes
/// `phi_{p l' + j0 + j}`. `None` marks a member whose contribution vanishes exactly.
pub fn symmetric_group<S: MidScalar>(
    tables: &[Option<FourierTable<S>>],
    lambda: &CBall<S>,
    k: usize,
    family: &Family,
    ell_max: usize,
) -> Result<FourierTable<S>, FourierError> {
    let p = family.p as i64;
    if tables.len() != family.p {
        return Err(FourierError::Spectral(crate::error::SpectralError::InconsistentFamily(format!(
            "{} tables for a family of {}",
            tables.len(),
            family.p
        ))));
    }
    let prec = lambda.prec();
    let lo = -(ell_max as i64);
    let mut coeffs = Vec::with_capacity(2 * ell_max + 1);
    for l in lo..=ell_max as i64 {
        let j = (l - family.j0).rem_euclid(p);
        let lp = (l - family.j0 - j) / p;
        let c = match &tables[j as usize] {
            None => CBall::zero(prec),
            Some(t) => t.coeff(lp).cloned().ok_or_else(|| {
                FourierError::Spectral(crate::error::SpectralError::InconsistentFamily(format!(
                    "member table lacks l' = {lp}"
                )))
            })?,
        };
        coeffs.push(c);
    }
    let mut t = FourierTable::new(lambda.clone(), k, family.p, coeffs);
    t.one_periodic = (0..family.p).all(|j| (family.j0 + j as i64).rem_euclid(p) == 0 || tables[j].is_none());
    Ok(t)
}

/// Member-table range needed for a `p`-periodic table up to `ell_max`.
pub fn member_ell_max(ell_max: usize, family: &Family) -> usize {
    (ell_max + family.j0.unsigned_abs() as usize) / family.p + 1
}
