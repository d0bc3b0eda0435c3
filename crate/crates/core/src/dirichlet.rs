//! The matrix Dirichlet series `F_{n0}(s) = sum_{n >= n0} n^{-s} f(n)` and the right-hand
//! side `G_{n0}(s)` of its functional equation `(I - q^{-s} C) F_{n0}(s) = G_{n0}(s)`.
//!
//! Values are jets in `Z = s - s0`. Away from large real parts `F` is obtained from the
//! recursion over shifts `s0 + k`; every truncation and tail is bounded rigorously and
//! added to the radii. Bounds for derivative coefficients come from Cauchy estimates on a
//! disc of radius [`CAUCHY_RADIUS`].

use crate::ball::elementary::is_fixed;
use crate::ball::{binom_neg_s, up_mul, CBall, Jet, RBall, EXACT_ORDER};
use crate::error::DirichletError;
use crate::linalg::Matrix;
use crate::linrep::LinRep;
use crate::scalar::MidScalar;
use crate::spectral::rat_upper;
use crate::Rational;
use nalgebra::{Complex as C64, DMatrix};
use num_traits::Zero;

/// Radius of the disc used for Cauchy estimates of jet coefficients.
pub const CAUCHY_RADIUS: f64 = 0.5;

pub type JetMatrix<S> = Matrix<Jet<S>>;

#[derive(Clone, Debug)]
pub struct DirichletConfig {
    pub n0: u64,
    pub prec: u32,
    /// Cap on the number of binomial terms per shift.
    pub k_max: usize,
    /// Above this real part [`eval_f`] sums directly.
    pub re_base: f64,
    /// Cut-off of direct partial sums.
    pub n_cut: u64,
    /// Memoise the values at each shift (results are identical either way).
    pub use_cache: bool,
    /// Largest shift the recursion may reach.
    pub max_shift: usize,
}

impl DirichletConfig {
    pub fn for_rep(rep: &LinRep) -> Self {
        let nd = NormData::new(rep);
        DirichletConfig {
            n0: 1024,
            prec: 128,
            k_max: 600,
            re_base: nd.log_q_m + 3.0,
            n_cut: 100_000,
            use_cache: true,
            max_shift: 4000,
        }
    }

    pub fn validate(&self, rep: &LinRep) -> Result<(), DirichletError> {
        let nd = NormData::new(rep);
        if self.n0 < 2 {
            return Err(DirichletError::Domain(format!("n0 = {} < 2", self.n0)));
        }
        if self.re_base <= nd.log_q_m + 1.0 {
            return Err(DirichletError::Domain(format!("re_base {} <= log_q M + 1", self.re_base)));
        }
        Ok(())
    }
}

/// Norm data of the digit matrices, as `f64` upper bounds.
#[derive(Clone, Debug)]
pub struct NormData {
    pub q: u32,
    /// `max(1, max_r ||A_r||)` (row-sum norm).
    pub m: f64,
    /// Upper bound for `log_q m`.
    pub log_q_m: f64,
    pub a_norms: Vec<f64>,
}

impl NormData {
    pub fn new(rep: &LinRep) -> Self {
        let a_norms: Vec<f64> = rep.matrices.iter().map(|a| rat_upper(&a.norm_inf())).collect();
        let m = a_norms.iter().copied().fold(1.0, f64::max);
        let lq = RBall::<f64>::from_f64(m, 53)
            .ln()
            .expect("m >= 1")
            .div_ref(&RBall::<f64>::from_i64(rep.q as i64, 53).ln().expect("q >= 2"))
            .upper_f64();
        NormData { q: rep.q, m, log_q_m: lq.max(0.0), a_norms }
    }

    /// `sum_r ||A_r|| (r/q)^k` as a ball.
    fn digit_weight(&self, k: usize) -> RBall<f64> {
        let mut acc = RBall::<f64>::zero(53);
        for (r, &a) in self.a_norms.iter().enumerate() {
            if r == 0 && k > 0 {
                continue;
            }
            let mut t = RBall::from_f64(a, 53);
            let ratio = RBall::<f64>::from_i64(r as i64, 53).div_i64(self.q as i64);
            for _ in 0..k {
                t = t.mul_ref(&ratio);
            }
            acc = acc.add_ref(&t);
        }
        acc
    }

    fn weight_f64(&self, k: usize) -> f64 {
        let q = self.q as f64;
        self.a_norms
            .iter()
            .enumerate()
            .map(|(r, &a)| if r == 0 && k > 0 { 0.0 } else { a * (r as f64 / q).powi(k as i32) })
            .sum()
    }
}

fn tail_ball(nd: &NormData, re_s: &RBall<f64>, n0: u64) -> Result<f64, DirichletError> {
    if n0 < 2 {
        return Err(DirichletError::Domain(format!("n0 = {n0} < 2")));
    }
    let e = re_s.sub_ref(&RBall::from_f64(nd.log_q_m, 53)).sub_ref(&RBall::one(53));
    if !e.is_positive() {
        return Err(DirichletError::Domain(format!(
            "Re s = {} does not exceed log_q M + 1 = {}",
            re_s.lower_f64(),
            nd.log_q_m + 1.0
        )));
    }
    // The bound decreases in Re s: evaluate at the lower endpoint.
    let e = RBall::<f64>::from_f64(e.lower_f64(), 53);
    let ln = RBall::<f64>::from_i64((n0 - 1) as i64, 53).ln()?;
    let den = e.mul_ref(&e.mul_ref(&ln).exp());
    Ok(RBall::<f64>::from_f64(nd.m, 53).div_ref(&den).upper_f64())
}

/// Upper bound for `sum_{n >= n0} ||f(n)|| n^{-re_s}`.
pub fn tail_bound(rep: &LinRep, re_s: f64, n0: u64) -> Result<f64, DirichletError> {
    tail_ball(&NormData::new(rep), &RBall::from_f64(re_s, 53), n0)
}

fn trunc_ball(nd: &NormData, s: &CBall<f64>, k: usize, n0: u64) -> Result<f64, DirichletError> {
    let lo = s.re.lower_f64();
    if lo + k as f64 <= 0.0 {
        return Err(DirichletError::Domain(format!("Re s + K = {} <= 0", lo + k as f64)));
    }
    let tail = tail_ball(nd, &s.re.add_ref(&RBall::from_i64(k as i64, 53)), n0)?;
    let lnq = RBall::<f64>::from_i64(nd.q as i64, 53).ln()?;
    let qpow = RBall::<f64>::from_f64(-lo, 53).mul_ref(&lnq).exp().upper_f64();
    let b = binom_neg_s(s, k).abs_upper();
    let w = nd.digit_weight(k).upper_f64();
    Ok(up_mul(up_mul(qpow, b), up_mul(tail, w)))
}

/// Bound for the error of cutting the binomial sum of `G_{n0}(s)` before index `k`.
pub fn truncation_bound<S: MidScalar>(rep: &LinRep, s: &CBall<S>, k: usize, n0: u64) -> Result<f64, DirichletError> {
    trunc_ball(&NormData::new(rep), &s.convert::<f64>(53), k, n0)
}

fn disc(s: &CBall<f64>, order: usize) -> CBall<f64> {
    let mut d = s.clone();
    if order > 0 {
        d.add_error(CAUCHY_RADIUS);
    }
    d
}

/// Per-coefficient bounds `b / rho^i` for a function bounded by `b` on the disc.
fn cauchy(b: f64, order: usize, scale: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(order + 1);
    let mut v = up_mul(b, scale);
    for _ in 0..=order {
        out.push(v);
        v = up_mul(v, 1.0 / CAUCHY_RADIUS);
    }
    out
}

fn jet_tail(nd: &NormData, s: &CBall<f64>, order: usize, n0: u64, scale: f64) -> Result<Vec<f64>, DirichletError> {
    let d = disc(s, order);
    Ok(cauchy(tail_ball(nd, &d.re, n0)?, order, scale))
}

fn jet_trunc(nd: &NormData, s: &CBall<f64>, k: usize, order: usize, n0: u64, scale: f64) -> Result<Vec<f64>, DirichletError> {
    let d = disc(s, order);
    Ok(cauchy(trunc_ball(nd, &d, k, n0)?, order, scale))
}

fn add_error_all<S: MidScalar>(m: &mut JetMatrix<S>, e: &[f64]) {
    for j in &mut m.data {
        j.add_error(e);
    }
}

fn jet_zeros<S: MidScalar>(rows: usize, cols: usize, order: usize, prec: u32) -> JetMatrix<S> {
    Matrix::from_vec(rows, cols, vec![Jet::zero(order, prec); rows * cols])
}

fn const_jets<S: MidScalar>(m: &Matrix<RBall<S>>) -> JetMatrix<S> {
    m.map(|x| {
        if x.is_exact() && x.mid.is_zero() {
            Jet::zero(EXACT_ORDER, 0)
        } else {
            Jet::constant(CBall::from_real(x.clone()), EXACT_ORDER)
        }
    })
}

fn scale_all<S: MidScalar>(m: &JetMatrix<S>, j: &Jet<S>) -> JetMatrix<S> {
    m.map(|x| if x.is_zero() { x.clone() } else { x.mul_ref(j) })
}

/// `n^{-s0}` and `ln n` for `1 <= n < limit`, built multiplicatively over primes.
/// Smallest prime factors and `ln n` for `n < limit`.
fn log_table<S: MidScalar>(limit: usize, wp: u32) -> Result<(Vec<usize>, Vec<RBall<S>>), DirichletError> {
    let mut spf = vec![0usize; limit.max(2)];
    for i in 2..limit {
        if spf[i] == 0 {
            let mut j = i;
            while j < limit {
                if spf[j] == 0 {
                    spf[j] = i;
                }
                j += i;
            }
        }
    }
    let mut ln = vec![RBall::zero(wp); limit.max(2)];
    for n in 2..limit {
        let p = spf[n];
        ln[n] = if p == n { RBall::from_i64(n as i64, wp).ln()? } else { ln[p].add_ref(&ln[n / p]) };
    }
    Ok((spf, ln))
}

/// `n^{-s0}` for `n < spf.len()`, multiplicative over the prime factorisation.
fn power_table<S: MidScalar>(s0: &CBall<S>, spf: &[usize], ln: &[RBall<S>], wp: u32) -> Vec<CBall<S>> {
    let mut pw = vec![CBall::one(wp); spf.len()];
    let ms = s0.neg_ref();
    for n in 2..spf.len() {
        let p = spf[n];
        pw[n] = if p == n { ms.mul_real(&ln[n]).exp() } else { pw[p].mul_ref(&pw[n / p]) };
    }
    pw
}

fn n_jet<S: MidScalar>(pw: &CBall<S>, ln: &RBall<S>, order: usize) -> Jet<S> {
    let mut c = Vec::with_capacity(order + 1);
    c.push(pw.clone());
    let mln = ln.neg_ref();
    for i in 1..=order {
        let next = c[i - 1].mul_real(&mln).div_i64(i as i64);
        c.push(next);
    }
    Jet::from_coeffs(c, order)
}

/// What the recursion does at one shift `s0 + j`.
#[derive(Clone, Debug)]
pub enum Level {
    Unused,
    /// `F = 0` with the tail bound as radius.
    Base { err: Vec<f64> },
    /// `G` uses binomial terms `1 <= k < k_cut`.
    Recurse { k_cut: usize, err: Vec<f64> },
}

/// Shared per-representation data; reusable across evaluation points.
pub struct DirichletContext<S> {
    pub rep: LinRep,
    pub cfg: DirichletConfig,
    pub nd: NormData,
    w: Matrix<Rational>,
    w_norm: f64,
    wp: u32,
    /// Nonzero entries of `f(n) W`, `0 <= n < q n0`, as (flat index, value).
    fw_sparse: Vec<Vec<(usize, RBall<S>)>>,
    spf: Vec<usize>,
    ln_n: Vec<RBall<S>>,
    c_jets: JetMatrix<S>,
    c_f64: DMatrix<C64<f64>>,
    /// `P_k = sum_r (r/q)^k A_r`.
    p_mats: Vec<JetMatrix<S>>,
    ln_q: RBall<S>,
}

impl<S: MidScalar> DirichletContext<S> {
    /// `w` multiplies from the right: the context evaluates `F_{n0}(s) W`.
    pub fn new(rep: &LinRep, cfg: &DirichletConfig, w: &Matrix<Rational>) -> Result<Self, DirichletError> {
        cfg.validate(rep)?;
        let wp = if is_fixed::<S>() { 53 } else { cfg.prec + 24 };
        let nd = NormData::new(rep);
        let q = rep.q as usize;
        let limit = q * cfg.n0 as usize;
        let mut exact: Vec<Matrix<Rational>> = Vec::with_capacity(limit);
        exact.push(w.clone());
        for n in 1..limit {
            let v = rep.matrices[n % q].mul_m(&exact[n / q]);
            exact.push(v);
        }
        let (spf, ln_n) = log_table::<S>(limit, wp)?;
        let fw_sparse = exact
            .iter()
            .map(|m| {
                m.data
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(i, x)| (i, RBall::from_rational(x, wp)))
                    .collect()
            })
            .collect();
        let c = rep.derived().c;
        let c_f64 = c.to_f64().map(|x| C64::new(x, 0.0));
        let c_jets = const_jets(&c.to_balls::<S>(wp));
        let mut p_mats = Vec::with_capacity(cfg.k_max + 1);
        let ratios: Vec<RBall<S>> = (0..q).map(|r| RBall::from_i64(r as i64, wp).div_i64(q as i64)).collect();
        let mut pows: Vec<RBall<S>> = vec![RBall::one(wp); q];
        for k in 0..=cfg.k_max {
            let mut acc: Matrix<RBall<S>> = Matrix::zeros(rep.d, rep.d);
            for r in 0..q {
                if k > 0 && r == 0 {
                    continue;
                }
                acc = acc.add_m(&rep.matrices[r].to_balls::<S>(wp).map(|x| x.mul_ref(&pows[r])));
            }
            p_mats.push(const_jets(&acc));
            for r in 0..q {
                pows[r] = pows[r].mul_ref(&ratios[r]);
            }
        }
        Ok(DirichletContext {
            rep: rep.clone(),
            cfg: cfg.clone(),
            nd,
            w_norm: rat_upper(&w.norm_inf()),
            w: w.clone(),
            wp,
            fw_sparse,
            spf,
            ln_n,
            c_jets,
            c_f64,
            p_mats,
            ln_q: RBall::from_i64(q as i64, wp).ln()?,
        })
    }

    pub fn working_precision(&self) -> u32 {
        self.wp
    }

    fn target(&self) -> f64 {
        let bits = if is_fixed::<S>() { 52 } else { self.cfg.prec as i32 + 8 };
        2f64.powi(-bits)
    }

    /// Estimate of `||(I - q^{-s} C)^{-1}||` used for planning only.
    fn inv_norm_est(&self, re: f64, im: f64) -> f64 {
        let lq = (self.nd.q as f64).ln();
        let x = C64::new(-re * lq, -im * lq).exp();
        let n = self.rep.d;
        let m = DMatrix::<C64<f64>>::identity(n, n) - self.c_f64.map(|c| c * x);
        match m.try_inverse() {
            Some(inv) => (0..n).map(|i| (0..n).map(|j| inv[(i, j)].norm()).sum::<f64>()).fold(1.0, f64::max),
            None => 1e12,
        }
    }

    /// Chooses, for every shift, between the tail bound and the recursion, and the number
    /// of binomial terms, so that the propagated error at `s0` stays below the target.
    pub fn plan(&self, s0: &CBall<S>, order: usize) -> Result<Vec<Level>, DirichletError> {
        let s0f = s0.convert::<f64>(53);
        let (re0, im0) = s0f.to_f64_pair();
        let n0 = self.cfg.n0;
        let lq = (self.nd.q as f64).ln();
        let mut tau = vec![self.target()];
        let mut levels: Vec<Level> = Vec::new();
        let mut j = 0usize;
        while j < tau.len() {
            if j > self.cfg.max_shift {
                return Err(DirichletError::TruncationBudgetExceeded(self.cfg.max_shift));
            }
            if !tau[j].is_finite() {
                levels.push(Level::Unused);
                j += 1;
                continue;
            }
            let sj = s0f.add_ref(&CBall::from_i64(j as i64, 53));
            if j > 0 {
                if let Ok(err) = jet_tail(&self.nd, &sj, order, n0, self.w_norm) {
                    if err.iter().all(|&e| e <= tau[j]) {
                        levels.push(Level::Base { err });
                        j += 1;
                        continue;
                    }
                }
            }
            let tau_eff = if j == 0 { tau[0] } else { tau[j] / self.inv_norm_est(re0 + j as f64, im0) };
            let mut chosen = None;
            for k in 1..=self.cfg.k_max {
                if let Ok(err) = jet_trunc(&self.nd, &sj, k, order, n0, self.w_norm) {
                    if err.iter().all(|&e| e <= tau_eff / 2.0) {
                        chosen = Some((k, err));
                        break;
                    }
                }
            }
            let Some((k_cut, err)) = chosen else {
                return Err(DirichletError::TruncationBudgetExceeded(self.cfg.k_max));
            };
            // log of |b_k(s_j)| sum_r ||A_r|| (r/q)^k q^{-Re s_j}, loosened for the jet disc.
            let abs_s = (re0 + j as f64).hypot(im0) + 1.0 + order as f64;
            let mut log_b = 0.0;
            for k in 1..k_cut {
                log_b += (abs_s + (k - 1) as f64).ln() - (k as f64).ln();
                let w = self.nd.weight_f64(k);
                if w == 0.0 {
                    continue;
                }
                let log_amp = log_b + w.ln() - (re0 + j as f64) * lq + ((order + 1) as f64).ln();
                let child = j + k;
                if tau.len() <= child {
                    tau.resize(child + 1, f64::INFINITY);
                }
                let t = tau_eff / (2.0 * k_cut as f64) / log_amp.exp();
                if t < tau[child] {
                    tau[child] = t.max(f64::MIN_POSITIVE);
                }
            }
            levels.push(Level::Recurse { k_cut, err });
            j += 1;
        }
        log::debug!(
            "dirichlet plan at {:?}: {} shifts, k per shift {:?}",
            s0f.to_f64_pair(),
            levels.len(),
            levels.iter().map(|l| if let Level::Recurse { k_cut, .. } = l { *k_cut } else { 0 }).collect::<Vec<_>>()
        );
        Ok(levels)
    }

    fn npow_jets(&self, s0: &CBall<S>, order: usize, limit: usize) -> Result<Vec<Jet<S>>, DirichletError> {
        let pw = power_table(&s0.with_precision(self.wp), &self.spf, &self.ln_n, self.wp);
        Ok((0..limit).map(|n| n_jet(&pw[n], &self.ln_n[n], order)).collect())
    }

    fn head(&self, jets: &[Jet<S>], lo: usize, hi: usize, fac: &[RBall<S>], order: usize) -> JetMatrix<S> {
        let cells = self.rep.d * self.w.cols;
        let zero = CBall::zero(self.wp);
        let mut acc = vec![vec![zero; order + 1]; cells];
        for n in lo.max(1)..hi {
            if self.fw_sparse[n].is_empty() {
                continue;
            }
            let t: Vec<CBall<S>> = jets[n].coeffs.iter().map(|c| c.mul_real(&fac[n])).collect();
            for (idx, v) in &self.fw_sparse[n] {
                for (a, c) in acc[*idx].iter_mut().zip(&t) {
                    *a = a.add_ref(&c.mul_real(v));
                }
            }
        }
        Matrix::from_vec(self.rep.d, self.w.cols, acc.into_iter().map(|c| Jet::from_coeffs(c, order)).collect())
    }

    fn q_pow_jet(&self, sj: &CBall<S>, order: usize) -> Jet<S> {
        Jet::exp_linear(&sj.neg_ref().mul_real(&self.ln_q), &self.ln_q.neg_ref(), order)
    }

    fn g_level(
        &self,
        s0: &CBall<S>,
        j: usize,
        order: usize,
        k_cut: usize,
        err: &[f64],
        heads: &[Option<JetMatrix<S>>],
        child: &mut dyn FnMut(usize) -> Result<JetMatrix<S>, DirichletError>,
    ) -> Result<JetMatrix<S>, DirichletError> {
        let sj = s0.add_ref(&CBall::from_i64(j as i64, self.wp));
        let x = self.q_pow_jet(&sj, order);
        let ms = Jet::from_coeffs(vec![sj.neg_ref(), CBall::from_i64(-1, self.wp)], order);
        let mut b = Jet::constant(CBall::one(self.wp), order);
        let mut acc = jet_zeros::<S>(self.rep.d, self.w.cols, order, self.wp);
        for k in 1..k_cut {
            let f = ms.sub_ref(&Jet::constant(CBall::from_i64(k as i64 - 1, self.wp), order));
            b = b.mul_ref(&f).scale_real(&RBall::one(self.wp).div_i64(k as i64));
            if self.nd.weight_f64(k) == 0.0 {
                continue;
            }
            let fk = child(j + k)?;
            acc = acc.add_m(&scale_all(&self.p_mats[k].mul_m(&fk), &b));
        }
        let mut g = heads[j].clone().expect("head computed for every used level").add_m(&scale_all(&acc, &x));
        add_error_all(&mut g, err);
        Ok(g)
    }

    fn solve_level(&self, s: &CBall<S>, order: usize, g: &JetMatrix<S>) -> Result<JetMatrix<S>, DirichletError> {
        let x = self.q_pow_jet(s, order);
        let d = self.rep.d;
        let id = Matrix::<Jet<S>>::identity(d);
        let m = id.sub_m(&scale_all(&self.c_jets, &x)).map(|e| Jet::from_coeffs(e.coeffs.clone(), order));
        m.solve(g).map_err(|e| DirichletError::NearPole(e.0))
    }

    fn heads(&self, s0: &CBall<S>, order: usize, levels: &[Level]) -> Result<(Vec<Jet<S>>, Vec<Option<JetMatrix<S>>>), DirichletError> {
        let q = self.rep.q as usize;
        let n0 = self.cfg.n0 as usize;
        let jets = self.npow_jets(s0, order, q * n0)?;
        let inv: Vec<RBall<S>> = (0..q * n0)
            .map(|n| if n == 0 { RBall::one(self.wp) } else { RBall::one(self.wp).div_i64(n as i64) })
            .collect();
        let mut fac: Vec<RBall<S>> = vec![RBall::one(self.wp); q * n0];
        let mut heads = Vec::with_capacity(levels.len());
        for (j, l) in levels.iter().enumerate() {
            if j > 0 {
                for (f, i) in fac.iter_mut().zip(&inv).skip(n0) {
                    *f = f.mul_ref(i);
                }
            }
            heads.push(match l {
                Level::Recurse { .. } => Some(self.head(&jets, n0, q * n0, &fac, order)),
                _ => None,
            });
        }
        Ok((jets, heads))
    }

    fn value_at(
        &self,
        s0: &CBall<S>,
        order: usize,
        levels: &[Level],
        heads: &[Option<JetMatrix<S>>],
        j: usize,
    ) -> Result<JetMatrix<S>, DirichletError> {
        match &levels[j] {
            Level::Unused => unreachable!("unused shift requested"),
            Level::Base { err } => {
                let mut z = jet_zeros(self.rep.d, self.w.cols, order, self.wp);
                add_error_all(&mut z, err);
                Ok(z)
            }
            Level::Recurse { k_cut, err } => {
                let mut child = |i: usize| self.value_at(s0, order, levels, heads, i);
                let g = self.g_level(s0, j, order, *k_cut, err, heads, &mut child)?;
                let sj = s0.add_ref(&CBall::from_i64(j as i64, self.wp));
                self.solve_level(&sj, order, &g)
            }
        }
    }

    /// `G_{n0}(s0 + Z) W`.
    pub fn eval_g(&self, s0: &CBall<S>, order: usize) -> Result<JetMatrix<S>, DirichletError> {
        let levels = self.plan(s0, order)?;
        let (_, heads) = self.heads(s0, order, &levels)?;
        self.g_with(s0, order, &levels, &heads)
    }

    fn g_with(
        &self,
        s0: &CBall<S>,
        order: usize,
        levels: &[Level],
        heads: &[Option<JetMatrix<S>>],
    ) -> Result<JetMatrix<S>, DirichletError> {
        let Level::Recurse { k_cut, err } = &levels[0] else { unreachable!("shift 0 always recurses") };
        if self.cfg.use_cache {
            let mut cache: Vec<Option<JetMatrix<S>>> = vec![None; levels.len()];
            for j in (1..levels.len()).rev() {
                let v = match &levels[j] {
                    Level::Unused => continue,
                    Level::Base { err } => {
                        let mut z = jet_zeros(self.rep.d, self.w.cols, order, self.wp);
                        add_error_all(&mut z, err);
                        z
                    }
                    Level::Recurse { k_cut, err } => {
                        let mut child = |i: usize| Ok(cache[i].clone().expect("computed bottom-up"));
                        let g = self.g_level(s0, j, order, *k_cut, err, heads, &mut child)?;
                        let sj = s0.add_ref(&CBall::from_i64(j as i64, self.wp));
                        self.solve_level(&sj, order, &g)?
                    }
                };
                cache[j] = Some(v);
            }
            let mut child = |i: usize| Ok(cache[i].clone().expect("computed bottom-up"));
            self.g_level(s0, 0, order, *k_cut, err, heads, &mut child)
        } else {
            let mut child = |i: usize| self.value_at(s0, order, levels, heads, i);
            self.g_level(s0, 0, order, *k_cut, err, heads, &mut child)
        }
    }

    /// `F_{n0}(s0 + Z) W`; direct summation above `re_base`, the recursion otherwise.
    pub fn eval_f(&self, s0: &CBall<S>, order: usize) -> Result<JetMatrix<S>, DirichletError> {
        if s0.re.lower_f64() > self.cfg.re_base {
            return self.eval_f_direct(s0, order);
        }
        self.eval_f_recursive(s0, order)
    }

    pub fn eval_f_recursive(&self, s0: &CBall<S>, order: usize) -> Result<JetMatrix<S>, DirichletError> {
        let g = self.eval_g(s0, order)?;
        self.solve_level(&s0.with_precision(self.wp), order, &g)
    }

    /// Partial sum up to `n_cut` plus the tail bound.
    pub fn eval_f_direct(&self, s0: &CBall<S>, order: usize) -> Result<JetMatrix<S>, DirichletError> {
        let s0f = s0.convert::<f64>(53);
        let n_cut = self.cfg.n_cut.max(self.cfg.n0);
        let err = jet_tail(&self.nd, &s0f, order, n_cut, self.w_norm)?;
        let limit = n_cut as usize;
        let (spf, ln) = log_table::<S>(limit, self.wp)?;
        let pw = power_table(&s0.with_precision(self.wp), &spf, &ln, self.wp);
        let q = self.rep.q as usize;
        let n0 = self.cfg.n0 as usize;
        let mats: Vec<Matrix<RBall<S>>> = self.rep.matrices.iter().map(|a| a.to_balls(self.wp)).collect();
        let w = self.w.to_balls::<S>(self.wp);
        let mut acc: Vec<Jet<S>> = vec![Jet::zero(order, self.wp); self.rep.d * self.w.cols];
        // Depth-first over digit strings: f(qn + r) W = A_r f(n) W.
        let mut stack: Vec<(usize, Matrix<RBall<S>>)> = (1..q).map(|r| (r, mats[r].mul_m(&w))).collect();
        while let Some((n, fw)) = stack.pop() {
            if n >= limit {
                continue;
            }
            if n >= n0 {
                let t = n_jet(&pw[n], &ln[n], order);
                for (a, x) in acc.iter_mut().zip(&fw.data) {
                    if !(x.is_exact() && x.mid.is_zero()) {
                        *a = a.add_ref(&t.scale_real(x));
                    }
                }
            }
            for r in 0..q {
                let m = q * n + r;
                if m < limit {
                    stack.push((m, mats[r].mul_m(&fw)));
                }
            }
        }
        let mut out = Matrix::from_vec(self.rep.d, self.w.cols, acc);
        add_error_all(&mut out, &err);
        Ok(out)
    }

    /// `sum_{1 <= n < n0} n^{-s} f(n) W + F_{n0}(s) W`.
    pub fn eval_f1(&self, s0: &CBall<S>, order: usize) -> Result<JetMatrix<S>, DirichletError> {
        let f = self.eval_f(s0, order)?;
        let n0 = self.cfg.n0 as usize;
        let jets = self.npow_jets(s0, order, n0)?;
        let ones = vec![RBall::one(self.wp); n0];
        Ok(self.head(&jets, 1, n0, &ones, order).add_m(&f))
    }
}

fn column(v: &[Rational]) -> Matrix<Rational> {
    Matrix::from_vec(v.len(), 1, v.to_vec())
}

/// `F_{n0}(s0 + Z)` as a matrix of jets.
pub fn eval_f<S: MidScalar>(rep: &LinRep, s0: &CBall<S>, order: usize, cfg: &DirichletConfig) -> Result<JetMatrix<S>, DirichletError> {
    DirichletContext::new(rep, cfg, &Matrix::identity(rep.d))?.eval_f(s0, order)
}

pub fn eval_f_direct<S: MidScalar>(
    rep: &LinRep,
    s0: &CBall<S>,
    order: usize,
    cfg: &DirichletConfig,
) -> Result<JetMatrix<S>, DirichletError> {
    DirichletContext::new(rep, cfg, &Matrix::identity(rep.d))?.eval_f_direct(s0, order)
}

pub fn eval_g<S: MidScalar>(rep: &LinRep, s0: &CBall<S>, order: usize, cfg: &DirichletConfig) -> Result<JetMatrix<S>, DirichletError> {
    DirichletContext::new(rep, cfg, &Matrix::identity(rep.d))?.eval_g(s0, order)
}

/// The scalar Dirichlet series `sum_{n >= 1} x(n) n^{-s}` at `s0 + Z`.
pub fn eval_x<S: MidScalar>(rep: &LinRep, s0: &CBall<S>, order: usize, cfg: &DirichletConfig) -> Result<Jet<S>, DirichletError> {
    let ctx = DirichletContext::<S>::new(rep, cfg, &column(&rep.initial))?;
    let f1 = ctx.eval_f1(s0, order)?;
    let wp = ctx.working_precision();
    let mut acc = Jet::zero(order, wp);
    for (i, e) in rep.left.iter().enumerate() {
        if !e.is_zero() {
            acc = acc.add_ref(&f1.get(i, 0).scale_real(&RBall::from_rational(e, wp)));
        }
    }
    Ok(acc)
}

/// `(I - q^{-s} C) F - G` at `s0 + Z`, computing `F` by the route `eval_f` selects.
pub fn functional_residual<S: MidScalar>(
    ctx: &DirichletContext<S>,
    s0: &CBall<S>,
    order: usize,
) -> Result<JetMatrix<S>, DirichletError> {
    let f = ctx.eval_f(s0, order)?;
    let g = ctx.eval_g(s0, order)?;
    let x = ctx.q_pow_jet(&s0.with_precision(ctx.wp), order);
    let m = Matrix::<Jet<S>>::identity(ctx.rep.d).sub_m(&scale_all(&ctx.c_jets, &x));
    Ok(m.mul_m(&f).sub_m(&g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models;

    #[test]
    fn tail_bound_shape() {
        let rep = models::sum_of_digits(2);
        let a = tail_bound(&rep, 3.0, 1024).unwrap();
        let b = tail_bound(&rep, 4.0, 1024).unwrap();
        let c = tail_bound(&rep, 3.0, 2048).unwrap();
        assert!(a > 0.0 && a.is_finite());
        assert!(b < a && c < a);
        assert!(tail_bound(&rep, 1.5, 1024).is_err());
    }

    #[test]
    fn truncation_domain() {
        let rep = models::sum_of_digits(2);
        let s = CBall::<f64>::from_f64(-3.0, 0.0, 53);
        assert!(truncation_bound(&rep, &s, 2, 1024).is_err());
        assert!(truncation_bound(&rep, &s, 8, 1024).is_ok());
    }
}
