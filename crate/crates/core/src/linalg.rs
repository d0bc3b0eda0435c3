//! Dense matrices over a generic ring: exact rationals, balls, jets.

use crate::ball::{CBall, Jet, RBall};
use crate::scalar::MidScalar;
use crate::Rational;
use num_traits::{One, Signed, Zero};

pub trait Ring: Clone + Zero + One + Send + Sync {
    fn add_r(&self, o: &Self) -> Self;
    fn sub_r(&self, o: &Self) -> Self;
    fn mul_r(&self, o: &Self) -> Self;
    fn neg_r(&self) -> Self;
}

/// Rings in which elimination can decide (or certify) invertibility.
pub trait PivotRing: Ring {
    /// Inverse when certified to exist.
    fn try_recip(&self) -> Option<Self>;
    /// Pivot preference; larger is better.
    fn pivot_score(&self) -> f64;
}

impl Ring for Rational {
    fn add_r(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_r(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_r(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_r(&self) -> Self {
        -self
    }
}

impl PivotRing for Rational {
    fn try_recip(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn pivot_score(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
}

impl Ring for f64 {
    fn add_r(&self, o: &Self) -> Self {
        self + o
    }
    fn sub_r(&self, o: &Self) -> Self {
        self - o
    }
    fn mul_r(&self, o: &Self) -> Self {
        self * o
    }
    fn neg_r(&self) -> Self {
        -self
    }
}

impl<S: MidScalar> Ring for RBall<S> {
    fn add_r(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn sub_r(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
    fn mul_r(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn neg_r(&self) -> Self {
        self.neg_ref()
    }
}

impl<S: MidScalar> PivotRing for RBall<S> {
    fn try_recip(&self) -> Option<Self> {
        if self.contains_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
    fn pivot_score(&self) -> f64 {
        self.abs_lower()
    }
}

impl<S: MidScalar> Ring for CBall<S> {
    fn add_r(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn sub_r(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
    fn mul_r(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn neg_r(&self) -> Self {
        self.neg_ref()
    }
}

impl<S: MidScalar> PivotRing for CBall<S> {
    fn try_recip(&self) -> Option<Self> {
        if self.abs_lower() > 0.0 {
            Some(self.recip())
        } else {
            None
        }
    }
    fn pivot_score(&self) -> f64 {
        self.abs_lower()
    }
}

impl<S: MidScalar> Ring for Jet<S> {
    fn add_r(&self, o: &Self) -> Self {
        self.add_ref(o)
    }
    fn sub_r(&self, o: &Self) -> Self {
        self.sub_ref(o)
    }
    fn mul_r(&self, o: &Self) -> Self {
        self.mul_ref(o)
    }
    fn neg_r(&self) -> Self {
        self.neg_ref()
    }
}

impl<S: MidScalar> PivotRing for Jet<S> {
    fn try_recip(&self) -> Option<Self> {
        if self.coeffs[0].abs_lower() > 0.0 {
            let one = Jet::constant(CBall::one(self.prec()), self.order);
            one.div_ref(self).ok()
        } else {
            None
        }
    }
    fn pivot_score(&self) -> f64 {
        self.coeffs[0].abs_lower()
    }
}

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let data: Vec<T> = rows.into_iter().flatten().collect();
        Self::from_vec(r, c, data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

impl<T: Ring> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn add_m(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add_r(b)).collect(),
        }
    }

    pub fn sub_m(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub_r(b)).collect(),
        }
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|x| c.mul_r(x))
    }

    /// Matrix product; exact zeros are skipped.
    pub fn mul_m(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "matrix product shape");
        let mut out = Matrix::<T>::zeros(self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.data[idx] = out.data[idx].add_r(&a.mul_r(b));
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, b) in self.row(i).iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add_r(&a.mul_r(b));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn vec_mul(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![T::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                let a = self.get(i, j);
                if !a.is_zero() {
                    out[j] = out[j].add_r(&vi.mul_r(a));
                }
            }
        }
        out
    }

    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Matrix::identity(self.rows);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul_m(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul_m(&base);
            }
        }
        acc
    }

    /// Division-free determinant by Laplace expansion over column subsets,
    /// `O(n 2^n)` ring operations.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return T::one();
        }
        assert!(n <= 24, "subset determinant limited to dimension 24");
        let mut layer: Vec<Option<T>> = vec![None; 1 << n];
        layer[0] = Some(T::one());
        for r in 0..n {
            let mut next: Vec<Option<T>> = vec![None; 1 << n];
            for (mask, val) in layer.iter().enumerate() {
                let Some(val) = val else { continue };
                if mask.count_ones() as usize != r || val.is_zero() {
                    continue;
                }
                for c in 0..n {
                    if mask & (1 << c) != 0 {
                        continue;
                    }
                    let a = self.get(r, c);
                    if a.is_zero() {
                        continue;
                    }
                    let above = (mask >> (c + 1)).count_ones();
                    let t = val.mul_r(a);
                    let t = if above % 2 == 1 { t.neg_r() } else { t };
                    let nm = mask | (1 << c);
                    next[nm] = Some(match next[nm].take() {
                        None => t,
                        Some(x) => x.add_r(&t),
                    });
                }
            }
            layer = next;
        }
        layer[(1 << n) - 1].take().unwrap_or_else(T::zero)
    }

    pub fn trace(&self) -> T {
        let mut t = T::zero();
        for i in 0..self.rows.min(self.cols) {
            t = t.add_r(self.get(i, i));
        }
        t
    }
}

/// Failure of certified elimination: the pivot in this column could not be certified.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotFailure(pub usize);

impl<T: PivotRing> Matrix<T> {
    /// Solves `self * X = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &Matrix<T>) -> Result<Matrix<T>, PivotFailure> {
        assert!(self.is_square() && rhs.rows == self.rows);
        let n = self.rows;
        let m = rhs.cols;
        let mut a = self.clone();
        let mut b = rhs.clone();
        for col in 0..n {
            let (best, score) = (col..n)
                .map(|r| (r, a.get(r, col).pivot_score()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if score <= 0.0 {
                return Err(PivotFailure(col));
            }
            if best != col {
                for j in 0..n {
                    a.data.swap(col * n + j, best * n + j);
                }
                for j in 0..m {
                    b.data.swap(col * m + j, best * m + j);
                }
            }
            let inv = a.get(col, col).try_recip().ok_or(PivotFailure(col))?;
            for j in col..n {
                let v = a.get(col, j).mul_r(&inv);
                a.set(col, j, v);
            }
            for j in 0..m {
                let v = b.get(col, j).mul_r(&inv);
                b.set(col, j, v);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero() {
                    continue;
                }
                for j in col..n {
                    let v = a.get(r, j).sub_r(&f.mul_r(a.get(col, j)));
                    a.set(r, j, v);
                }
                for j in 0..m {
                    let v = b.get(r, j).sub_r(&f.mul_r(b.get(col, j)));
                    b.set(r, j, v);
                }
            }
        }
        Ok(b)
    }

    pub fn try_inv(&self) -> Result<Matrix<T>, PivotFailure> {
        self.solve(&Matrix::identity(self.rows))
    }
}

impl Matrix<Rational> {
    /// Exact rank by fraction-carrying elimination.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let (n, m) = (a.rows, a.cols);
        let mut rank = 0;
        for col in 0..m {
            let Some(p) = (rank..n).find(|&r| !a.get(r, col).is_zero()) else { continue };
            for j in 0..m {
                a.data.swap(rank * m + j, p * m + j);
            }
            let inv = a.get(rank, col).recip();
            for r in rank + 1..n {
                let f = a.get(r, col) * &inv;
                if f.is_zero() {
                    continue;
                }
                for j in col..m {
                    let v = a.get(r, j) - &f * a.get(rank, j);
                    a.set(r, j, v);
                }
            }
            rank += 1;
        }
        rank
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> Rational {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|x| x.abs()).fold(Rational::zero(), |a, b| a + b))
            .max()
            .unwrap_or_else(Rational::zero)
    }

    pub fn to_balls<S: MidScalar>(&self, prec: u32) -> Matrix<RBall<S>> {
        self.map(|x| RBall::from_rational(x, prec))
    }

    pub fn to_cballs<S: MidScalar>(&self, prec: u32) -> Matrix<CBall<S>> {
        self.map(|x| CBall::from_rational(x, prec))
    }

    pub fn to_f64(&self) -> nalgebra::DMatrix<f64> {
        use num_traits::ToPrimitive;
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN))
    }
}

/// Upper bound on the row-sum norm of a ball matrix.
pub fn norm_inf_upper<S: MidScalar>(m: &Matrix<CBall<S>>) -> f64 {
    (0..m.rows)
        .map(|i| m.row(i).iter().fold(0.0, |a, x| crate::ball::up_add(a, x.abs_upper())))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    #[test]
    fn det_and_inverse_exact() {
        let m = Matrix::from_rows(vec![vec![q(2), q(1), q(0)], vec![q(1), q(3), q(1)], vec![q(0), q(1), q(4)]]);
        assert_eq!(m.det(), q(18));
        let inv = m.try_inv().unwrap();
        assert_eq!(m.mul_m(&inv), Matrix::identity(3));
    }

    #[test]
    fn rank_exact() {
        let m = Matrix::from_rows(vec![vec![q(1), q(2)], vec![q(2), q(4)]]);
        assert_eq!(m.rank(), 1);
    }
}
