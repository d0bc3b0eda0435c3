//! Certified eigen-structure of `C` and joint-spectral-radius bounds.

use crate::ball::elementary::is_fixed;
use crate::ball::{CBall, CBallJson, RBall};
use crate::bigfloat::BigFloat;
use crate::error::SpectralError;
use crate::linalg::Matrix;
use crate::linrep::LinRep;
use crate::models::scc;
use crate::poly::{charpoly, in_rowspace, minpoly, QPoly};
use crate::scalar::MidScalar;
use crate::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;
use std::cmp::Ordering;

/// One distinct eigenvalue of `C`.
#[derive(Clone, Debug)]
pub struct EigenDatum<S> {
    pub lambda: CBall<S>,
    pub alg_mult: usize,
    /// Size of the largest Jordan block.
    pub jordan_m: usize,
    /// The ball is disjoint from every other eigenvalue's ball.
    pub is_unit_distance_certified: bool,
    /// Set for rational eigenvalues.
    pub exact: Option<Rational>,
    /// Imaginary part is exactly zero.
    pub is_real: bool,
    /// Square-free rational polynomial with `lambda` among its roots; all roots share
    /// `alg_mult` and `jordan_m`.
    pub class_poly: QPoly,
}

impl<S: MidScalar> EigenDatum<S> {
    pub fn abs_lower(&self) -> f64 {
        match &self.exact {
            Some(x) => rat_lower(&x.abs()),
            None => self.lambda.abs_lower(),
        }
    }

    pub fn abs_upper(&self) -> f64 {
        match &self.exact {
            Some(x) => rat_upper(&x.abs()),
            None => self.lambda.abs_upper(),
        }
    }

    /// Principal argument as an `f64` approximation (ordering only).
    pub fn arg_approx(&self) -> f64 {
        let (re, im) = self.lambda.to_f64_pair();
        im.atan2(re)
    }
}

pub(crate) fn rat_upper(x: &Rational) -> f64 {
    let mut y = x.to_f64().unwrap_or(f64::INFINITY);
    while y.is_finite() && Rational::from_float(y).is_some_and(|r| &r < x) {
        y = y.next_up();
    }
    y
}

pub(crate) fn rat_lower(x: &Rational) -> f64 {
    let mut y = x.to_f64().unwrap_or(f64::MAX);
    while Rational::from_float(y).is_some_and(|r| &r > x) {
        y = y.next_down();
    }
    y
}

fn mid_c<S: MidScalar>(z: &CBall<S>) -> CBall<S> {
    CBall::new(RBall::exact(z.re.mid.clone()), RBall::exact(z.im.mid.clone()))
}

fn horner_c<S: MidScalar>(c: &[CBall<S>], z: &CBall<S>) -> CBall<S> {
    let mut acc = CBall::zero(z.prec());
    for a in c.iter().rev() {
        acc = acc.mul_ref(z).add_ref(a);
    }
    acc
}

fn horner_r<S: MidScalar>(c: &[RBall<S>], x: &RBall<S>) -> RBall<S> {
    let mut acc = RBall::zero(x.prec());
    for a in c.iter().rev() {
        acc = acc.mul_ref(x).add_ref(a);
    }
    acc
}

fn pow2(e: i64) -> f64 {
    2f64.powi(e as i32)
}

/// Krawczyk certification of a simple complex root near `hint`; returns an enclosure.
fn certify_complex<S: MidScalar>(p: &QPoly, hint: (f64, f64), wp: u32) -> Option<CBall<S>> {
    let c: Vec<CBall<S>> = p.c.iter().map(|x| CBall::from_rational(x, wp)).collect();
    let dp = p.derivative();
    let d: Vec<CBall<S>> = dp.c.iter().map(|x| CBall::from_rational(x, wp)).collect();
    let eps = pow2(-(wp as i64));
    let scale = 1f64.max(hint.0.hypot(hint.1));
    let mut z: CBall<S> = CBall::from_f64(hint.0, hint.1, wp);
    let mut last = f64::INFINITY;
    for it in 0..100 {
        let fz = horner_c(&c, &z);
        let dz = horner_c(&d, &z);
        if dz.contains_zero() {
            return None;
        }
        let step = fz.div_ref(&dz);
        let s = step.abs_upper();
        if !s.is_finite() {
            return None;
        }
        if it > 8 && s >= last {
            break;
        }
        z = mid_c(&z.sub_ref(&step));
        last = s;
        if s <= eps * scale {
            break;
        }
    }
    let base = (8.0 * last.min(scale)).max(pow2(-(wp as i64) + 6) * scale);
    let y = mid_c(&horner_c(&d, &z).recip());
    let fz = horner_c(&c, &z);
    let one = CBall::one(wp);
    for t in 0..12 {
        let r = base * 16f64.powi(t);
        let zc = CBall::new(RBall::new(S::zero_prec(wp), r), RBall::new(S::zero_prec(wp), r));
        let big = z.add_ref(&zc);
        let dz = horner_c(&d, &big);
        let k = z.sub_ref(&y.mul_ref(&fz)).add_ref(&one.sub_ref(&y.mul_ref(&dz)).mul_ref(&zc));
        if big.contains(&k) {
            return Some(k);
        }
    }
    None
}

/// Real Krawczyk certification; the result has an exactly zero imaginary part.
fn certify_real<S: MidScalar>(p: &QPoly, hint: f64, wp: u32) -> Option<RBall<S>> {
    let c: Vec<RBall<S>> = p.c.iter().map(|x| RBall::from_rational(x, wp)).collect();
    let dp = p.derivative();
    let d: Vec<RBall<S>> = dp.c.iter().map(|x| RBall::from_rational(x, wp)).collect();
    let eps = pow2(-(wp as i64));
    let scale = 1f64.max(hint.abs());
    let mut x: RBall<S> = RBall::from_f64(hint, wp);
    let mut last = f64::INFINITY;
    for it in 0..100 {
        let fx = horner_r(&c, &x);
        let dx = horner_r(&d, &x);
        if dx.contains_zero() {
            return None;
        }
        let step = fx.div_ref(&dx);
        let s = step.abs_upper();
        if !s.is_finite() {
            return None;
        }
        if it > 8 && s >= last {
            break;
        }
        x = RBall::exact(x.sub_ref(&step).mid);
        last = s;
        if s <= eps * scale {
            break;
        }
    }
    let base = (8.0 * last.min(scale)).max(pow2(-(wp as i64) + 6) * scale);
    let y = RBall::exact(horner_r(&d, &x).recip().mid);
    let fx = horner_r(&c, &x);
    let one = RBall::one(wp);
    for t in 0..12 {
        let r = base * 16f64.powi(t);
        let xc = RBall::new(S::zero_prec(wp), r);
        let big = x.add_ref(&xc);
        let dx = horner_r(&d, &big);
        let k = x.sub_ref(&y.mul_ref(&fx)).add_ref(&one.sub_ref(&y.mul_ref(&dx)).mul_ref(&xc));
        if big.contains(&k) {
            return Some(k);
        }
    }
    None
}

/// Floating root approximations from the companion matrix.
fn root_hints(p: &QPoly) -> Vec<(f64, f64)> {
    let m = p.monic();
    let n = m.degree() as usize;
    if n == 1 {
        return vec![(-m.c[0].to_f64().unwrap_or(0.0), 0.0)];
    }
    let mut comp = nalgebra::DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -m.c[i].to_f64().unwrap_or(0.0);
    }
    comp.complex_eigenvalues().iter().map(|z| (z.re, z.im)).collect()
}

struct Root<S> {
    ball: CBall<S>,
    exact: Option<Rational>,
    real: bool,
}

/// All roots of a square-free polynomial, each in its own certified ball.
fn certify_roots<S: MidScalar>(p: &QPoly, prec: u32) -> Result<Vec<Root<S>>, SpectralError> {
    let mut out = Vec::new();
    let mut rest = p.monic();
    for r in p.rational_roots() {
        out.push(Root { ball: CBall::from_rational(&r, prec), exact: Some(r.clone()), real: true });
        rest = rest.divrem(&QPoly::linear(&r)).0;
    }
    if rest.degree() <= 0 {
        return Ok(out);
    }
    let deg = rest.degree() as usize;
    let wp = prec + if is_fixed::<S>() { 0 } else { 16 };
    let hints = root_hints(&rest);
    let mut found = 0usize;
    let mut uppers: Vec<(f64, f64)> = Vec::new();
    for &(re, im) in &hints {
        let near_real = im.abs() <= 1e-6 * 1f64.max(re.abs());
        if near_real {
            if let Some(x) = certify_real::<S>(&rest, re, wp) {
                out.push(Root { ball: CBall::from_real(x), exact: None, real: true });
                found += 1;
                continue;
            }
        }
        if im >= 0.0 {
            uppers.push((re, im.abs().max(1e-300)));
        }
    }
    for (re, im) in uppers {
        let z = certify_complex::<S>(&rest, (re, im), wp)
            .ok_or_else(|| SpectralError::ClusterUnresolved(format!("root near {re}+{im}i not certified")))?;
        if z.im.contains_zero() {
            return Err(SpectralError::ClusterUnresolved(format!("root near {re}+{im}i touches the real axis")));
        }
        out.push(Root { ball: z.conj(), exact: None, real: false });
        out.push(Root { ball: z, exact: None, real: false });
        found += 2;
    }
    if found != deg {
        return Err(SpectralError::ClusterUnresolved(format!("certified {found} of {deg} roots")));
    }
    Ok(out)
}

/// Certified eigenvalues of `c` with algebraic multiplicities and Jordan block sizes.
///
/// Multiplicities are read off exact square-free decompositions of the characteristic and
/// minimal polynomials; each root is isolated by a Krawczyk test. For arbitrary-precision
/// scalars the precision is doubled (up to 3 times) when roots cannot be separated.
pub fn eigen_certify<S: MidScalar>(c: &Matrix<Rational>, prec: u32) -> Result<Vec<EigenDatum<S>>, SpectralError> {
    let chi = charpoly(c);
    let mp = minpoly(c);
    let pa = chi.squarefree();
    let qj = mp.squarefree();
    let mut classes = Vec::new();
    for (p, a) in &pa {
        for (q, j) in &qj {
            let g = p.gcd(q);
            if g.degree() > 0 {
                classes.push((g, *a, *j));
            }
        }
    }
    let tries = if is_fixed::<S>() { 1 } else { 4 };
    let mut prec_try = prec;
    let mut last_err = None;
    for _ in 0..tries {
        match certify_classes::<S>(&classes, prec_try) {
            Ok(v) => return Ok(v),
            Err(e) => last_err = Some(e),
        }
        prec_try *= 2;
    }
    Err(last_err.unwrap())
}

fn certify_classes<S: MidScalar>(classes: &[(QPoly, usize, usize)], prec: u32) -> Result<Vec<EigenDatum<S>>, SpectralError> {
    let mut data: Vec<EigenDatum<S>> = Vec::new();
    for (g, a, j) in classes {
        for r in certify_roots::<S>(g, prec)? {
            data.push(EigenDatum {
                lambda: r.ball,
                alg_mult: *a,
                jordan_m: *j,
                is_unit_distance_certified: false,
                exact: r.exact,
                is_real: r.real,
                class_poly: g.clone(),
            });
        }
    }
    for i in 0..data.len() {
        for k in (i + 1)..data.len() {
            let both_exact = data[i].exact.is_some() && data[k].exact.is_some();
            if !both_exact && data[i].lambda.overlaps(&data[k].lambda) {
                return Err(SpectralError::ClusterUnresolved(format!(
                    "eigenvalue balls near {:?} and {:?} overlap",
                    data[i].lambda.to_f64_pair(),
                    data[k].lambda.to_f64_pair()
                )));
            }
        }
    }
    for d in &mut data {
        d.is_unit_distance_certified = true;
    }
    data.sort_by(|x, y| {
        let ax = x.lambda.abs_upper();
        let ay = y.lambda.abs_upper();
        ay.partial_cmp(&ax)
            .unwrap_or(Ordering::Equal)
            .then_with(|| {
                let (xr, xi) = x.lambda.to_f64_pair();
                let (yr, yi) = y.lambda.to_f64_pair();
                yr.partial_cmp(&xr).unwrap_or(Ordering::Equal).then(yi.partial_cmp(&xi).unwrap_or(Ordering::Equal))
            })
    });
    Ok(data)
}

/// Largest Jordan block size for the eigenvalue enclosed by `lambda`.
///
/// Rational eigenvalues use exact rank stabilisation of `(C - lambda I)^k`; otherwise the
/// square-free factor of the minimal polynomial vanishing on the ball decides.
pub fn jordan_block_size<S: MidScalar>(
    c: &Matrix<Rational>,
    lambda: &CBall<S>,
    alg_mult: usize,
) -> Result<usize, SpectralError> {
    let n = c.rows;
    let mp = minpoly(c);
    for r in mp.rational_roots() {
        if lambda.contains(&CBall::from_rational(&r, lambda.prec())) || lambda.overlaps(&CBall::from_rational(&r, lambda.prec())) {
            let shifted = c.sub_m(&Matrix::<Rational>::identity(n).scale(&r));
            let mut pw = Matrix::<Rational>::identity(n);
            let mut prev = n;
            for k in 1..=alg_mult.max(1) {
                pw = pw.mul_m(&shifted);
                let rk = pw.rank();
                if rk == prev {
                    return Ok(k - 1);
                }
                prev = rk;
            }
            return Ok(alg_mult.max(1));
        }
    }
    let hits: Vec<usize> = mp
        .squarefree()
        .into_iter()
        .filter(|(q, _)| q.eval_ball(lambda).contains_zero())
        .map(|(_, j)| j)
        .collect();
    match hits.as_slice() {
        [j] => Ok((*j).min(alg_mult)),
        _ => Err(SpectralError::RankAmbiguous(format!("{} candidate block sizes", hits.len()))),
    }
}

/// Minimal polynomial over the rationals of `data[idx].lambda`, found among products of
/// `(X - mu)` over subsets of the roots of its class polynomial.
pub fn rational_factor<S: MidScalar>(data: &[EigenDatum<S>], idx: usize) -> QPoly {
    let me = &data[idx];
    if let Some(x) = &me.exact {
        return QPoly::linear(x);
    }
    let mut rest = me.class_poly.clone();
    for r in rest.rational_roots() {
        rest = rest.divrem(&QPoly::linear(&r)).0;
    }
    let rest = rest.monic();
    let k = rest.degree() as usize;
    if k <= 2 || k > 16 {
        return rest;
    }
    let den = rest.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let denr = Rational::from_integer(den.clone());
    // S(Y) = den^k rest(Y / den) is monic with integer coefficients.
    let scaled = QPoly::new(
        rest.c.iter().enumerate().map(|(i, x)| x * num_traits::pow(denr.clone(), k - i)).collect(),
    );
    let others: Vec<usize> = (0..data.len())
        .filter(|&i| i != idx && data[i].exact.is_none() && data[i].class_poly == me.class_poly)
        .collect();
    let prec = me.lambda.prec().max(64);
    let dball = CBall::<S>::from_rational(&denr, prec);
    for size in 0..others.len() {
        for subset in combinations(others.len(), size) {
            let mut prod: Vec<CBall<S>> = vec![CBall::one(prec)];
            let members = std::iter::once(idx).chain(subset.iter().map(|&s| others[s]));
            for m in members {
                let root = data[m].lambda.mul_ref(&dball);
                let mut next = vec![CBall::zero(prec); prod.len() + 1];
                for (i, c) in prod.iter().enumerate() {
                    next[i + 1] = next[i + 1].add_ref(c);
                    next[i] = next[i].sub_ref(&c.mul_ref(&root));
                }
                prod = next;
            }
            let mut ints = Vec::with_capacity(prod.len());
            let mut ok = true;
            for c in &prod {
                if !c.im.contains_zero() || c.re.rad >= 0.25 {
                    ok = false;
                    break;
                }
                let v = c.re.mid.round_int();
                let vr = Rational::from_integer(v);
                if !c.re.contains_rational(&vr) {
                    ok = false;
                    break;
                }
                ints.push(vr);
            }
            if !ok {
                continue;
            }
            let cand = QPoly::new(ints);
            if cand.degree() < 1 || !scaled.divrem(&cand).1.is_zero() {
                continue;
            }
            let m = cand.degree() as usize;
            let back = QPoly::new(
                cand.c.iter().enumerate().map(|(i, x)| x * num_traits::pow(denr.clone(), i) / num_traits::pow(denr.clone(), m)).collect(),
            );
            return back.monic();
        }
    }
    rest
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut cur, &mut out);
    out
}

/// Exact test that the left functional annihilates the generalised eigenspaces of all
/// conjugates of `data[idx].lambda`, so their contribution to `X(N)` vanishes identically.
pub fn contribution_vanishes<S: MidScalar>(rep: &LinRep, data: &[EigenDatum<S>], idx: usize) -> bool {
    let p = rational_factor(data, idx);
    let c = rep.derived().c;
    let m = p.pow(data[idx].alg_mult).eval_matrix(&c);
    in_rowspace(&rep.left, &m)
}

/// Eigenvalues `zeta * lambda`, `zeta^p = 1`, certified to all lie in the spectrum.
#[derive(Clone, Debug)]
pub struct Family {
    pub p: usize,
    /// Index (into the eigen data) of the representative (smallest `|arg|`).
    pub representative: usize,
    /// `members[j]` is the eigenvalue `exp(2 pi i (j0 + j) / p) * representative`.
    pub members: Vec<usize>,
    pub j0: i64,
}

/// `j0 = floor(-p (pi + arg lambda) / (2 pi)) + 1`.
pub fn family_j0(p: usize, arg: f64) -> i64 {
    use std::f64::consts::PI;
    let v = -(p as f64) * (PI + arg) / (2.0 * PI);
    let f = v.floor();
    // Guard the floor against rounding when v is (nearly) an integer.
    let fi = if (v - v.round()).abs() < 1e-9 { v.round() } else { f };
    fi as i64 + 1
}

/// Largest certified rotation family containing `data[idx]` (period 1 if none).
pub fn find_family<S: MidScalar>(
    c: &Matrix<Rational>,
    data: &[EigenDatum<S>],
    idx: usize,
    prec: u32,
) -> Result<Family, SpectralError> {
    use std::f64::consts::PI;
    let me = &data[idx];
    let trivial = Family { p: 1, representative: idx, members: vec![idx], j0: 0 };
    if me.lambda.contains_zero() {
        return Ok(trivial);
    }
    let d = c.rows;
    for p in (2..=d.min(24)).rev() {
        let mut members = Vec::with_capacity(p);
        let wp = me.lambda.prec().max(64);
        let two_pi = RBall::<S>::pi(wp).mul_pow2(1);
        for j in 0..p {
            let ang = two_pi.mul_i64(j as i64).div_i64(p as i64);
            let (s, co) = ang.sin_cos();
            let zeta = CBall::new(co, s);
            let target = zeta.mul_ref(&me.lambda);
            let hits: Vec<usize> = (0..data.len()).filter(|&k| data[k].lambda.overlaps(&target)).collect();
            match hits.as_slice() {
                [k] if data[*k].alg_mult == me.alg_mult && data[*k].jordan_m == me.jordan_m => members.push(*k),
                _ => break,
            }
        }
        if members.len() != p {
            continue;
        }
        let mut uniq = members.clone();
        uniq.sort();
        uniq.dedup();
        if uniq.len() != p {
            continue;
        }
        certify_family_powers(c, data, &members, p, prec)?;
        let rep = *members
            .iter()
            .min_by(|&&a, &&b| {
                let (fa, fb) = (data[a].arg_approx(), data[b].arg_approx());
                fa.abs().partial_cmp(&fb.abs()).unwrap_or(Ordering::Equal).then(fb.partial_cmp(&fa).unwrap_or(Ordering::Equal))
            })
            .unwrap();
        let arg = data[rep].arg_approx();
        let j0 = family_j0(p, arg);
        let mut ordered = Vec::with_capacity(p);
        for j in 0..p as i64 {
            let want = arg + 2.0 * PI * (j0 + j) as f64 / p as f64;
            let k = *members
                .iter()
                .min_by(|&&a, &&b| {
                    let da = ang_dist(data[a].arg_approx(), want);
                    let db = ang_dist(data[b].arg_approx(), want);
                    da.partial_cmp(&db).unwrap_or(Ordering::Equal)
                })
                .unwrap();
            ordered.push(k);
        }
        return Ok(Family { p, representative: rep, members: ordered, j0 });
    }
    Ok(trivial)
}

fn ang_dist(a: f64, b: f64) -> f64 {
    use std::f64::consts::PI;
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

/// Every `mu^p` must be the same eigenvalue of `C^p`.
fn certify_family_powers<S: MidScalar>(
    c: &Matrix<Rational>,
    data: &[EigenDatum<S>],
    members: &[usize],
    p: usize,
    prec: u32,
) -> Result<(), SpectralError> {
    let cp = c.pow(p as u64);
    let pow_data = eigen_certify::<S>(&cp, prec)?;
    let powers: Vec<CBall<S>> = members
        .iter()
        .map(|&k| {
            let mut acc = CBall::one(data[k].lambda.prec());
            for _ in 0..p {
                acc = acc.mul_ref(&data[k].lambda);
            }
            acc
        })
        .collect();
    // The true value of each power is an eigenvalue of C^p; overlapping exactly one
    // isolated ball pins it down.
    let hosts: Vec<Option<usize>> = powers
        .iter()
        .map(|w| {
            let hit: Vec<usize> = (0..pow_data.len()).filter(|&k| pow_data[k].lambda.overlaps(w)).collect();
            (hit.len() == 1).then(|| hit[0])
        })
        .collect();
    if hosts.iter().any(|h| h.is_none() || *h != hosts[0]) {
        return Err(SpectralError::InconsistentFamily(format!(
            "{p}th powers of the family are not enclosed by a single eigenvalue of C^{p}"
        )));
    }
    Ok(())
}

/// `base^(1/ell)` with `base >= 0`, compared exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootVal {
    pub base: Rational,
    pub ell: usize,
}

impl RootVal {
    pub fn rational(x: Rational) -> Self {
        RootVal { base: x, ell: 1 }
    }

    pub fn cmp_exact(&self, o: &RootVal) -> Ordering {
        num_traits::pow(self.base.clone(), o.ell).cmp(&num_traits::pow(o.base.clone(), self.ell))
    }

    pub fn as_rational(&self) -> Option<Rational> {
        if self.ell == 1 || self.base.is_zero() || self.base.is_one() {
            Some(self.base.clone())
        } else {
            None
        }
    }

    pub fn upper_f64(&self) -> f64 {
        if self.ell == 1 {
            return rat_upper(&self.base);
        }
        let mut y = self.base.to_f64().unwrap_or(f64::MAX).powf(1.0 / self.ell as f64);
        while Rational::from_float(y).is_some_and(|r| num_traits::pow(r, self.ell) < self.base) {
            y = y.next_up();
        }
        y
    }

    pub fn lower_f64(&self) -> f64 {
        if self.ell == 1 {
            return rat_lower(&self.base);
        }
        let mut y = self.base.to_f64().unwrap_or(f64::MAX).powf(1.0 / self.ell as f64);
        while y > 0.0 && Rational::from_float(y).is_some_and(|r| num_traits::pow(r, self.ell) > self.base) {
            y = y.next_down();
        }
        y.max(0.0)
    }

    pub fn to_ball<S: MidScalar>(&self, prec: u32) -> RBall<S> {
        if let Some(r) = self.as_rational() {
            return RBall::from_rational(&r, prec);
        }
        let b = RBall::<S>::from_rational(&self.base, prec);
        b.ln().expect("positive base").div_i64(self.ell as i64).exp()
    }
}

/// An upper or lower surrogate for a modulus: exact when available, always with a ball.
#[derive(Clone, Debug)]
pub struct Modulus {
    pub exact: Option<RootVal>,
    pub lo: f64,
    pub hi: f64,
}

impl Modulus {
    fn from_root(r: RootVal) -> Self {
        Modulus { lo: r.lower_f64(), hi: r.upper_f64(), exact: Some(r) }
    }
}

#[derive(Clone, Debug)]
pub struct JsrConfig {
    pub ell_max: usize,
    /// Maximal number of matrix products formed.
    pub budget: usize,
    pub r_override: Option<Rational>,
    pub prec: u32,
}

impl Default for JsrConfig {
    fn default() -> Self {
        JsrConfig { ell_max: 8, budget: 1_000_000, r_override: None, prec: 128 }
    }
}

#[derive(Clone, Debug)]
pub struct JsrBounds {
    /// `(ell, rho_ell)` with `rho_ell` rounded upwards.
    pub rho_ell: Vec<(usize, f64)>,
    pub rho_ell_exact: Vec<RootVal>,
    pub rho_lower: Modulus,
    /// Product whose spectral radius gives `rho_lower`.
    pub rho_lower_word: Vec<u32>,
    /// Max over diagonal blocks of the best block-wise `rho_ell` (a rigorous JSR upper bound).
    pub jsr_upper: RootVal,
    /// The JSR equals `rho_lower` exactly.
    pub jsr_exact: bool,
    pub r: Modulus,
    pub r_ball: RBall<BigFloat>,
    /// Word with `rho_ell = rho_lower` over the whole family.
    pub finiteness_witness: Option<Vec<u32>>,
    /// Some `rho_ell` equals `R`, so all products are `O(R^ell)`.
    pub products_bounded: bool,
    /// Eigen datum whose modulus now defines `R` after gap widening.
    pub widened_by: Option<usize>,
    pub overridden: bool,
    pub blocks: Vec<Vec<usize>>,
    pub notes: Vec<String>,
}

fn block_norm(m: &Matrix<Rational>, b: &[usize]) -> Rational {
    b.iter()
        .map(|&i| b.iter().fold(Rational::zero(), |acc, &j| acc + m.get(i, j).abs()))
        .max()
        .unwrap_or_else(Rational::zero)
}

fn spectral_radius_f64(m: &Matrix<Rational>) -> f64 {
    let f = m.to_f64();
    f.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

struct Enum<'a> {
    mats: &'a [Matrix<Rational>],
    blocks: &'a [Vec<usize>],
    ell_max: usize,
    budget: usize,
    used: usize,
    max_norm: Vec<Option<(Rational, Vec<u32>)>>,
    block_max: Vec<Vec<Rational>>,
    /// `(rho(P)^(1/ell) approx, word)`.
    cands: Vec<(f64, Vec<u32>)>,
    reached: usize,
}

impl Enum<'_> {
    fn visit(&mut self, word: &mut Vec<u32>, prod: &Matrix<Rational>) {
        let l = word.len();
        self.reached = self.reached.max(l);
        let n = prod.norm_inf();
        let slot = &mut self.max_norm[l];
        if slot.as_ref().is_none_or(|(m, _)| &n > m) {
            *slot = Some((n.clone(), word.clone()));
        }
        for (bi, b) in self.blocks.iter().enumerate() {
            let bn = block_norm(prod, b);
            if bn > self.block_max[bi][l] {
                self.block_max[bi][l] = bn;
            }
        }
        let bound = n.to_f64().unwrap_or(f64::INFINITY).powf(1.0 / l as f64);
        let worst = if self.cands.len() < 4 { -1.0 } else { self.cands.iter().map(|c| c.0).fold(f64::INFINITY, f64::min) };
        if bound * (1.0 + 1e-9) > worst {
            let rho = spectral_radius_f64(prod).powf(1.0 / l as f64);
            if rho > worst {
                self.cands.push((rho, word.clone()));
                self.cands.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal).then(a.1.len().cmp(&b.1.len())));
                self.cands.truncate(4);
            }
        }
        if l == self.ell_max {
            return;
        }
        for (r, a) in self.mats.iter().enumerate() {
            if self.used >= self.budget {
                return;
            }
            self.used += 1;
            word.push(r as u32);
            let next = prod.mul_m(a);
            self.visit(word, &next);
            word.pop();
        }
    }
}

/// Lower and upper bounds for the joint spectral radius and the exponent base `R`.
///
/// Products are enumerated depth-first up to `ell_max` within the product budget; the
/// diagonal blocks of the common block-triangular form (strongly connected components of
/// the union support graph) give a sharper upper bound. `R` is then widened past any
/// eigenvalue of `C` with `rho_lower < |lambda| <= R`.
pub fn jsr_bounds<S: MidScalar>(rep: &LinRep, cfg: &JsrConfig, eigen: &[EigenDatum<S>]) -> Result<JsrBounds, SpectralError> {
    let d = rep.d;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); d];
    for a in &rep.matrices {
        for i in 0..d {
            for j in 0..d {
                if !a.get(i, j).is_zero() && !adj[i].contains(&j) {
                    adj[i].push(j);
                }
            }
        }
    }
    let comp = scc(&adj);
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let blocks: Vec<Vec<usize>> = (0..ncomp)
        .map(|c| (0..d).filter(|&i| comp[i] == c).collect::<Vec<_>>())
        .filter(|b| rep.matrices.iter().any(|a| b.iter().any(|&i| b.iter().any(|&j| !a.get(i, j).is_zero()))))
        .collect();
    let ell_max = cfg.ell_max.max(1);
    let mut en = Enum {
        mats: &rep.matrices,
        blocks: &blocks,
        ell_max,
        budget: cfg.budget,
        used: 0,
        max_norm: vec![None; ell_max + 1],
        block_max: vec![vec![Rational::zero(); ell_max + 1]; blocks.len()],
        cands: Vec::new(),
        reached: 0,
    };
    let mut word = Vec::new();
    for (r, a) in rep.matrices.iter().enumerate() {
        en.used += 1;
        word.push(r as u32);
        en.visit(&mut word, a);
        word.pop();
    }
    // Only lengths that were enumerated completely are valid bounds.
    let total = |l: usize| -> usize { (1..=l).map(|k| (rep.q as usize).pow(k as u32)).sum() };
    let complete: Vec<usize> = (1..=en.reached).filter(|&l| total(l) <= cfg.budget).collect();
    let mut notes = Vec::new();
    if complete.len() < ell_max {
        notes.push(format!("product budget limited the enumeration to length {}", complete.len()));
    }
    let rho_ell_exact: Vec<RootVal> = complete
        .iter()
        .map(|&l| RootVal { base: en.max_norm[l].as_ref().unwrap().0.clone(), ell: l })
        .collect();
    let rho_ell: Vec<(usize, f64)> = rho_ell_exact.iter().map(|r| (r.ell, r.upper_f64())).collect();

    // Certified lower bound from the best candidate products.
    let mut rho_lower = Modulus { exact: Some(RootVal::rational(Rational::zero())), lo: 0.0, hi: 0.0 };
    let mut rho_lower_word = Vec::new();
    for (_, w) in &en.cands {
        let mut prod = Matrix::<Rational>::identity(d);
        for &r in w {
            prod = prod.mul_m(&rep.matrices[r as usize]);
        }
        let eig = eigen_certify::<BigFloat>(&prod, cfg.prec)?;
        let Some(top) = eig.iter().max_by(|a, b| a.abs_lower().partial_cmp(&b.abs_lower()).unwrap_or(Ordering::Equal)) else {
            continue;
        };
        let l = w.len();
        let m = match &top.exact {
            Some(x) => Modulus::from_root(RootVal { base: x.abs(), ell: l }),
            None => {
                let lo = top.abs_lower();
                let hi = top.abs_upper();
                Modulus { exact: None, lo: root_down(lo, l), hi: root_up(hi, l) }
            }
        };
        let better = match (&m.exact, &rho_lower.exact) {
            (Some(a), Some(b)) => a.cmp_exact(b) == Ordering::Greater,
            _ => m.lo > rho_lower.lo,
        };
        if better {
            rho_lower = m;
            rho_lower_word = w.clone();
        }
    }

    // Block-wise upper bound.
    let mut jsr_upper = RootVal::rational(Rational::zero());
    for bi in 0..blocks.len() {
        let best = complete
            .iter()
            .map(|&l| RootVal { base: en.block_max[bi][l].clone(), ell: l })
            .min_by(|a, b| a.cmp_exact(b))
            .unwrap();
        if best.cmp_exact(&jsr_upper) == Ordering::Greater {
            jsr_upper = best;
        }
    }
    let jsr_exact = rho_lower.exact.as_ref().is_some_and(|lo| lo.cmp_exact(&jsr_upper) == Ordering::Equal);
    let finiteness_witness = rho_lower.exact.as_ref().and_then(|lo| {
        complete.iter().find_map(|&l| {
            let (n, w) = en.max_norm[l].as_ref().unwrap();
            (RootVal { base: n.clone(), ell: l }.cmp_exact(lo) == Ordering::Equal).then(|| w.clone())
        })
    });
    let mut r = if jsr_exact {
        rho_lower.clone()
    } else {
        notes.push("finiteness not detected; R is an upper bound for the joint spectral radius".into());
        Modulus::from_root(jsr_upper.clone())
    };
    let mut overridden = false;
    if let Some(o) = &cfg.r_override {
        let ov = Modulus::from_root(RootVal::rational(o.clone()));
        let below = match &rho_lower.exact {
            Some(lo) => ov.exact.as_ref().unwrap().cmp_exact(lo) == Ordering::Less,
            None => ov.hi < rho_lower.lo,
        };
        if below {
            return Err(SpectralError::GapUnresolvable(format!("override {o} is below the certified lower bound")));
        }
        if ov.exact.as_ref().unwrap().cmp_exact(&jsr_upper) == Ordering::Less {
            notes.push("R override is below the computed JSR upper bound; taken on trust".into());
        }
        r = ov;
        overridden = true;
    }
    let products_bounded_by = |r: &Modulus| match &r.exact {
        Some(rv) => rho_ell_exact.iter().any(|x| x.cmp_exact(rv) != Ordering::Greater),
        None => rho_ell.iter().any(|x| x.1 <= r.lo),
    };
    let mut widened_by = None;
    if !overridden {
        if let Some((k, m)) = widen(eigen, &rho_lower, &r)? {
            notes.push("R widened to the modulus of an eigenvalue of C to restore the gap condition".into());
            widened_by = Some(k);
            r = m;
        }
    } else if let Some((k, _)) = widen(eigen, &rho_lower, &r)? {
        return Err(SpectralError::GapUnresolvable(format!(
            "eigenvalue {:?} has modulus between rho_lower and the R override",
            eigen[k].lambda.to_f64_pair()
        )));
    }
    let products_bounded = products_bounded_by(&r);
    if !products_bounded && widened_by.is_none() {
        notes.push("products are not certified O(R^ell); the error exponent holds up to an arbitrary epsilon".into());
    }
    let r_ball = match (&r.exact, widened_by) {
        (Some(rv), _) => rv.to_ball::<BigFloat>(cfg.prec),
        (None, Some(k)) => eigen[k].lambda.convert::<BigFloat>(cfg.prec).abs(),
        (None, None) => {
            let mid = (r.lo + r.hi) / 2.0;
            RBall::new(BigFloat::from_f64(mid, 0).0, (r.hi - r.lo).next_up())
        }
    };
    Ok(JsrBounds {
        rho_ell,
        rho_ell_exact,
        rho_lower,
        rho_lower_word,
        jsr_upper,
        jsr_exact,
        r,
        r_ball,
        finiteness_witness,
        products_bounded,
        widened_by,
        overridden,
        blocks,
        notes,
    })
}

fn root_down(x: f64, l: usize) -> f64 {
    if l == 1 {
        return x;
    }
    let mut y = x.powf(1.0 / l as f64);
    for _ in 0..3 {
        y = y.next_down();
    }
    y.max(0.0)
}

fn root_up(x: f64, l: usize) -> f64 {
    if l == 1 {
        return x;
    }
    let mut y = x.powf(1.0 / l as f64);
    for _ in 0..3 {
        y = y.next_up();
    }
    y
}

/// Certified comparison of `|lambda|` with a modulus; `None` when undecided.
pub fn cmp_modulus<S: MidScalar>(e: &EigenDatum<S>, m: &Modulus) -> Option<Ordering> {
    if let (Some(x), Some(rv)) = (&e.exact, &m.exact) {
        return Some(RootVal::rational(x.abs()).cmp_exact(rv));
    }
    if e.abs_lower() > m.hi {
        Some(Ordering::Greater)
    } else if e.abs_upper() < m.lo {
        Some(Ordering::Less)
    } else {
        None
    }
}

/// If some eigenvalue has `rho_lower < |lambda| <= R`, returns the one of largest modulus.
fn widen<S: MidScalar>(eigen: &[EigenDatum<S>], lo: &Modulus, r: &Modulus) -> Result<Option<(usize, Modulus)>, SpectralError> {
    let mut inside = Vec::new();
    for (k, e) in eigen.iter().enumerate() {
        let above_lo = cmp_modulus(e, lo);
        let vs_r = cmp_modulus(e, r);
        match (above_lo, vs_r) {
            (Some(Ordering::Greater), Some(Ordering::Less | Ordering::Equal)) => inside.push(k),
            (Some(Ordering::Less | Ordering::Equal), _) | (_, Some(Ordering::Greater)) => {}
            _ => {
                return Err(SpectralError::GapUnresolvable(format!("{:?}", eigen[k].lambda.to_f64_pair())));
            }
        }
    }
    if inside.is_empty() {
        return Ok(None);
    }
    let top = *inside
        .iter()
        .max_by(|&&a, &&b| eigen[a].abs_upper().partial_cmp(&eigen[b].abs_upper()).unwrap_or(Ordering::Equal))
        .unwrap();
    let t = &eigen[top];
    let m = match &t.exact {
        Some(x) => Modulus::from_root(RootVal::rational(x.abs())),
        None => Modulus { exact: None, lo: t.abs_lower(), hi: t.abs_upper() },
    };
    for &k in &inside {
        if k == top {
            continue;
        }
        let e = &eigen[k];
        let same = e.lambda.conj().contains(&t.lambda) && t.lambda.conj().contains(&e.lambda);
        if !same && cmp_modulus(e, &m) != Some(Ordering::Less) && cmp_modulus(e, &m) != Some(Ordering::Equal) {
            return Err(SpectralError::GapUnresolvable(format!("{:?}", e.lambda.to_f64_pair())));
        }
    }
    Ok(Some((top, m)))
}

/// Position of an eigenvalue relative to `R`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `|lambda| > R`: contributes a main term.
    Above,
    /// `|lambda| = R`: absorbed by the error term with its Jordan size as log power.
    Tie,
    /// `|lambda| < R`.
    Below,
}

pub fn classify<S: MidScalar>(eigen: &[EigenDatum<S>], idx: usize, b: &JsrBounds) -> Result<Side, SpectralError> {
    if let Some(w) = b.widened_by {
        let (e, t) = (&eigen[idx], &eigen[w]);
        if idx == w || (e.lambda.conj().contains(&t.lambda) && t.lambda.conj().contains(&e.lambda)) {
            return Ok(Side::Tie);
        }
    }
    match cmp_modulus(&eigen[idx], &b.r) {
        Some(Ordering::Greater) => Ok(Side::Above),
        Some(Ordering::Equal) => Ok(Side::Tie),
        Some(Ordering::Less) => Ok(Side::Below),
        None => Err(SpectralError::GapUnresolvable(format!("{:?}", eigen[idx].lambda.to_f64_pair()))),
    }
}

/// Result of checking `|lambda| <= q * min rho_ell` for every eigenvalue.
#[derive(Clone, Debug)]
pub struct SanityReport {
    pub ok: bool,
    pub bound: f64,
    pub violations: Vec<String>,
}

pub fn sanity_eigen_vs_jsr<S: MidScalar>(q: u32, eigen: &[EigenDatum<S>], b: &JsrBounds) -> SanityReport {
    let min_rho = b.rho_ell.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
    let bound = (q as f64 * min_rho) * (1.0 + 1e-12);
    let violations: Vec<String> = eigen
        .iter()
        .filter(|e| e.abs_lower() > bound)
        .map(|e| format!("|{:?}| exceeds {bound}", e.lambda.to_f64_pair()))
        .collect();
    SanityReport { ok: violations.is_empty(), bound, violations }
}

/// Everything the expansion needs from the spectrum of `C` and the digit matrices.
#[derive(Clone, Debug)]
pub struct SpectralData<S> {
    pub eigen: Vec<EigenDatum<S>>,
    pub jsr: JsrBounds,
    pub sides: Vec<Side>,
    /// The eigenvalue's contribution is annihilated by the left vector.
    pub vanishing: Vec<bool>,
    pub sanity: SanityReport,
}

pub fn spectral_data<S: MidScalar>(rep: &LinRep, prec: u32, jsr_cfg: &JsrConfig) -> Result<SpectralData<S>, SpectralError> {
    let c = rep.derived().c;
    let eigen = eigen_certify::<S>(&c, prec)?;
    let jsr = jsr_bounds(rep, jsr_cfg, &eigen)?;
    let sides = (0..eigen.len()).map(|i| classify(&eigen, i, &jsr)).collect::<Result<Vec<_>, _>>()?;
    let vanishing = (0..eigen.len()).map(|i| contribution_vanishes(rep, &eigen, i)).collect();
    let sanity = sanity_eigen_vs_jsr(rep.q, &eigen, &jsr);
    Ok(SpectralData { eigen, jsr, sides, vanishing, sanity })
}

impl std::fmt::Display for RootVal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.as_rational() {
            Some(r) => write!(f, "{r}"),
            None => write!(f, "({})^(1/{})", self.base, self.ell),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusJson {
    pub exact: Option<String>,
    pub lo: f64,
    pub hi: f64,
}

impl Modulus {
    pub fn to_json(&self) -> ModulusJson {
        ModulusJson { exact: self.exact.as_ref().map(|r| r.to_string()), lo: self.lo, hi: self.hi }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RhoEllJson {
    pub ell: usize,
    pub value: f64,
    pub exact: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct JsrJson {
    pub rho_ell: Vec<RhoEllJson>,
    pub rho_lower: ModulusJson,
    #[serde(rename = "R")]
    pub r: ModulusJson,
    pub witness: Option<Vec<u32>>,
    pub jsr_upper: String,
    pub jsr_exact: bool,
    pub products_bounded: bool,
    pub notes: Vec<String>,
}

impl JsrBounds {
    pub fn to_json(&self) -> JsrJson {
        JsrJson {
            rho_ell: self
                .rho_ell
                .iter()
                .zip(&self.rho_ell_exact)
                .map(|((ell, v), e)| RhoEllJson { ell: *ell, value: *v, exact: e.to_string() })
                .collect(),
            rho_lower: self.rho_lower.to_json(),
            r: self.r.to_json(),
            witness: self.finiteness_witness.clone(),
            jsr_upper: self.jsr_upper.to_string(),
            jsr_exact: self.jsr_exact,
            products_bounded: self.products_bounded,
            notes: self.notes.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenJson {
    pub lambda: CBallJson,
    pub exact: Option<String>,
    pub alg_mult: usize,
    pub jordan_m: usize,
    pub side: Side,
    pub vanishing: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralJson {
    pub eigenvalues: Vec<EigenJson>,
    pub jsr: JsrJson,
    pub sanity_ok: bool,
    pub sanity_violations: Vec<String>,
}

impl<S: MidScalar> SpectralData<S> {
    pub fn to_json(&self) -> SpectralJson {
        SpectralJson {
            eigenvalues: self
                .eigen
                .iter()
                .enumerate()
                .map(|(i, e)| EigenJson {
                    lambda: e.lambda.to_json(),
                    exact: e.exact.as_ref().map(|r| r.to_string()),
                    alg_mult: e.alg_mult,
                    jordan_m: e.jordan_m,
                    side: self.sides[i],
                    vanishing: self.vanishing[i],
                })
                .collect(),
            jsr: self.jsr.to_json(),
            sanity_ok: self.sanity.ok,
            sanity_violations: self.sanity.violations.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn jordan_block_of_sum_of_digits() {
        let c = Matrix::from_rows(vec![vec![r(2), r(1)], vec![r(0), r(2)]]);
        let e = eigen_certify::<f64>(&c, 53).unwrap();
        assert_eq!(e.len(), 1);
        assert_eq!((e[0].alg_mult, e[0].jordan_m), (2, 2));
        assert_eq!(e[0].exact, Some(r(2)));
        assert_eq!(jordan_block_size(&c, &e[0].lambda, 2).unwrap(), 2);
    }

    #[test]
    fn quadratic_roots_certified() {
        // X^2 - X - 1
        let c = Matrix::from_rows(vec![vec![r(0), r(1)], vec![r(1), r(1)]]);
        let e = eigen_certify::<BigFloat>(&c, 128).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e[0].lambda.re.contains_f64(1.618033988749895) || e[0].lambda.re.overlaps(&RBall::new(BigFloat::from_f64(1.618033988749895, 0).0, 1e-15)));
        assert!(e[0].lambda.rad() < 1e-30);
        assert!(e.iter().all(|d| d.is_real));
    }

    #[test]
    fn complex_pair_is_conjugate() {
        let c = Matrix::from_rows(vec![vec![r(0), r(-2)], vec![r(1), r(0)]]);
        let e = eigen_certify::<f64>(&c, 53).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e[0].lambda.conj().contains(&e[1].lambda));
    }

    #[test]
    fn j0_window() {
        assert_eq!(family_j0(2, 0.0), 0);
        assert_eq!(family_j0(1, 0.5), 0);
    }
}
