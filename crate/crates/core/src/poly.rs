//! Univariate polynomials over the rationals.

use crate::ball::CBall;
use crate::linalg::Matrix;
use crate::scalar::MidScalar;
use crate::Rational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// `sum c[i] X^i`, trailing zeros trimmed (the zero polynomial has no coefficients).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QPoly {
    pub c: Vec<Rational>,
}

fn q(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

impl QPoly {
    pub fn new(mut c: Vec<Rational>) -> Self {
        while c.last().is_some_and(|x| x.is_zero()) {
            c.pop();
        }
        QPoly { c }
    }

    pub fn from_i64(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&x| q(x)).collect())
    }

    pub fn one() -> Self {
        QPoly { c: vec![q(1)] }
    }

    /// `X - a`.
    pub fn linear(a: &Rational) -> Self {
        QPoly { c: vec![-a.clone(), q(1)] }
    }

    pub fn is_zero(&self) -> bool {
        self.c.is_empty()
    }

    /// Degree (`-1` for zero).
    pub fn degree(&self) -> i64 {
        self.c.len() as i64 - 1
    }

    pub fn lead(&self) -> Rational {
        self.c.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let l = self.lead();
        QPoly::new(self.c.iter().map(|x| x / &l).collect())
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let z = Rational::zero();
        QPoly::new((0..n).map(|i| self.c.get(i).unwrap_or(&z) + o.c.get(i).unwrap_or(&z)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.c.len().max(o.c.len());
        let z = Rational::zero();
        QPoly::new((0..n).map(|i| self.c.get(i).unwrap_or(&z) - o.c.get(i).unwrap_or(&z)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return QPoly::new(vec![]);
        }
        let mut c = vec![Rational::zero(); self.c.len() + o.c.len() - 1];
        for (i, a) in self.c.iter().enumerate() {
            for (j, b) in o.c.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }

    pub fn pow(&self, k: usize) -> Self {
        let mut r = QPoly::one();
        for _ in 0..k {
            r = r.mul(self);
        }
        r
    }

    /// Euclidean division `(quotient, remainder)`.
    pub fn divrem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "polynomial division by zero");
        let mut r = self.c.clone();
        let dl = d.lead();
        let dd = d.c.len();
        if r.len() < dd {
            return (QPoly::new(vec![]), self.clone());
        }
        let mut quo = vec![Rational::zero(); r.len() - dd + 1];
        for k in (0..quo.len()).rev() {
            let f = &r[k + dd - 1] / &dl;
            if !f.is_zero() {
                for (j, dj) in d.c.iter().enumerate() {
                    r[k + j] -= &f * dj;
                }
            }
            quo[k] = f;
        }
        r.truncate(dd - 1);
        (QPoly::new(quo), QPoly::new(r))
    }

    pub fn gcd(&self, o: &Self) -> Self {
        let mut a = self.clone();
        let mut b = o.clone();
        while !b.is_zero() {
            let (_, r) = a.divrem(&b);
            a = b;
            b = r.monic();
        }
        a.monic()
    }

    pub fn derivative(&self) -> Self {
        QPoly::new(self.c.iter().enumerate().skip(1).map(|(i, x)| x * q(i as i64)).collect())
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for a in self.c.iter().rev() {
            acc = acc * x + a;
        }
        acc
    }

    pub fn eval_ball<S: MidScalar>(&self, z: &CBall<S>) -> CBall<S> {
        let p = z.prec();
        let mut acc = CBall::zero(p);
        for a in self.c.iter().rev() {
            acc = acc.mul_ref(z).add_ref(&CBall::from_rational(a, p));
        }
        acc
    }

    /// `p(M)` by Horner.
    pub fn eval_matrix(&self, m: &Matrix<Rational>) -> Matrix<Rational> {
        let n = m.rows;
        let mut acc = Matrix::<Rational>::zeros(n, n);
        for a in self.c.iter().rev() {
            acc = acc.mul_m(m).add_m(&Matrix::identity(n).scale(a));
        }
        acc
    }

    /// Square-free decomposition (Yun): `self = lead * prod P_i^i` with `(P_i, i)` listed
    /// for non-constant `P_i`.
    pub fn squarefree(&self) -> Vec<(QPoly, usize)> {
        let f = self.monic();
        if f.degree() <= 0 {
            return vec![];
        }
        let fp = f.derivative();
        let a = f.gcd(&fp);
        let mut b = f.divrem(&a).0;
        let mut c = fp.divrem(&a).0;
        let mut d = c.sub(&b.derivative());
        let mut out = Vec::new();
        let mut i = 1;
        while b.degree() > 0 {
            let ai = b.gcd(&d);
            b = b.divrem(&ai).0;
            c = d.divrem(&ai).0;
            d = c.sub(&b.derivative());
            if ai.degree() > 0 {
                out.push((ai.monic(), i));
            }
            i += 1;
        }
        out
    }

    /// Rational roots (exact), found via the rational root theorem on the
    /// primitive integer multiple.
    pub fn rational_roots(&self) -> Vec<Rational> {
        if self.degree() <= 0 {
            return vec![];
        }
        let mut roots = Vec::new();
        let mut p = self.monic();
        while p.c[0].is_zero() {
            roots.push(Rational::zero());
            p = QPoly::new(p.c[1..].to_vec());
        }
        if p.degree() <= 0 {
            return roots;
        }
        let den = p.c.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = p.c.iter().map(|x| (x * Rational::from_integer(den.clone())).to_integer()).collect();
        let a0 = ints[0].abs();
        let an = ints.last().unwrap().abs();
        let small = |n: &BigInt| n.bits() <= 40;
        if !small(&a0) || !small(&an) {
            return roots;
        }
        let divs = |n: &BigInt| -> Vec<i64> {
            let n: i64 = n.try_into().unwrap();
            let mut v = Vec::new();
            let mut k = 1i64;
            while k * k <= n {
                if n % k == 0 {
                    v.push(k);
                    v.push(n / k);
                }
                k += 1;
                if v.len() > 2000 {
                    break;
                }
            }
            v.sort();
            v.dedup();
            v
        };
        let pd = divs(&a0);
        let qd = divs(&an);
        let mut cand: Vec<Rational> = Vec::new();
        for &a in &pd {
            for &b in &qd {
                for s in [1i64, -1] {
                    cand.push(Rational::new((s * a).into(), b.into()));
                }
            }
        }
        cand.sort();
        cand.dedup();
        for r in cand {
            if p.eval(&r).is_zero() {
                roots.push(r);
            }
        }
        roots
    }
}

/// `det(X I - M)` by the Faddeev–LeVerrier recursion.
pub fn charpoly(m: &Matrix<Rational>) -> QPoly {
    let n = m.rows;
    let mut c = vec![Rational::zero(); n + 1];
    c[n] = q(1);
    let mut mk = Matrix::<Rational>::zeros(n, n);
    let id = Matrix::<Rational>::identity(n);
    for k in 1..=n {
        mk = m.mul_m(&mk).add_m(&id.scale(&c[n - k + 1]));
        let t = m.mul_m(&mk).trace();
        c[n - k] = -t / q(k as i64);
    }
    QPoly::new(c)
}

/// Monic minimal polynomial via the first linear dependency among `I, M, M^2, ...`.
pub fn minpoly(m: &Matrix<Rational>) -> QPoly {
    let n = m.rows;
    let mut powers: Vec<Vec<Rational>> = vec![Matrix::<Rational>::identity(n).data];
    let mut cur = Matrix::<Rational>::identity(n);
    for k in 1..=n {
        cur = cur.mul_m(m);
        powers.push(cur.data.clone());
        if let Some(null) = nullvector(&powers) {
            let lead = null[k].clone();
            if !lead.is_zero() {
                return QPoly::new(null.iter().map(|x| x / &lead).collect());
            }
        }
    }
    charpoly(m)
}

/// A non-trivial vector `a` with `sum a_i cols[i] = 0`, if the columns are dependent.
fn nullvector(cols: &[Vec<Rational>]) -> Option<Vec<Rational>> {
    let k = cols.len();
    let rows = cols[0].len();
    let a = Matrix::from_fn(rows, k, |i, j| cols[j][i].clone());
    let (r, pivots) = rref(&a);
    let free = (0..k).find(|j| !pivots.contains(j))?;
    let mut x = vec![Rational::zero(); k];
    x[free] = q(1);
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = -r.get(row, free).clone();
    }
    Some(x)
}

/// Reduced row echelon form and pivot columns.
pub fn rref(a: &Matrix<Rational>) -> (Matrix<Rational>, Vec<usize>) {
    let mut a = a.clone();
    let (n, m) = (a.rows, a.cols);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m {
        if row == n {
            break;
        }
        let Some(p) = (row..n).find(|&r| !a.get(r, col).is_zero()) else { continue };
        for j in 0..m {
            a.data.swap(row * m + j, p * m + j);
        }
        let inv = a.get(row, col).recip();
        for j in 0..m {
            let v = a.get(row, j) * &inv;
            a.set(row, j, v);
        }
        for r in 0..n {
            if r != row && !a.get(r, col).is_zero() {
                let f = a.get(r, col).clone();
                for j in 0..m {
                    let v = a.get(r, j) - &f * a.get(row, j);
                    a.set(r, j, v);
                }
            }
        }
        pivots.push(col);
        row += 1;
    }
    (a, pivots)
}

/// Whether the row vector `e` lies in the row space of `m`.
pub fn in_rowspace(e: &[Rational], m: &Matrix<Rational>) -> bool {
    let base = m.rank();
    let mut rows: Vec<Vec<Rational>> = (0..m.rows).map(|i| m.row(i).to_vec()).collect();
    rows.push(e.to_vec());
    Matrix::from_rows(rows).rank() == base
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn yun_decomposition() {
        let p = QPoly::from_i64(&[-2, 1]).pow(2).mul(&QPoly::from_i64(&[1, 1]));
        let sf = p.squarefree();
        assert_eq!(sf.len(), 2);
        assert_eq!(sf[0], (QPoly::from_i64(&[1, 1]), 1));
        assert_eq!(sf[1], (QPoly::from_i64(&[-2, 1]), 2));
    }

    #[test]
    fn charpoly_and_minpoly_of_jordan_block() {
        let m = Matrix::from_rows(vec![vec![q(2), q(1)], vec![q(0), q(2)]]);
        assert_eq!(charpoly(&m), QPoly::from_i64(&[4, -4, 1]));
        assert_eq!(minpoly(&m), QPoly::from_i64(&[4, -4, 1]));
        let id = Matrix::<Rational>::identity(3);
        assert_eq!(minpoly(&id), QPoly::from_i64(&[-1, 1]));
    }

    #[test]
    fn rational_roots_found() {
        let p = QPoly::from_i64(&[-2, 1]).mul(&QPoly::new(vec![Rational::new(1.into(), 3.into()), q(1)])).mul(&QPoly::from_i64(&[-1, 0, 1, 0, 0]));
        let mut r = p.rational_roots();
        r.sort();
        assert_eq!(r, vec![q(-1), Rational::new((-1).into(), 3.into()), q(1), q(2)]);
    }
}
