//! q-linear representations: `v(qn + r) = A_r v(n)`, `x(n) = e f(n) v0`.

use crate::error::LinRepError;
use crate::linalg::Matrix;
use crate::Rational;
use num_bigint::BigInt;
use num_traits::Zero;
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// `v0` is fixed by `A_0` so the recursion also holds at `n = 0`.
    Sequence,
    /// Plain matrix products; no condition on `v0`.
    MatrixProduct,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinRep {
    pub q: u32,
    pub d: usize,
    pub matrices: Vec<Matrix<Rational>>,
    pub left: Vec<Rational>,
    pub initial: Vec<Rational>,
    pub mode: Mode,
}

/// `B_r = A_0 + ... + A_{r-1}` and `C = A_0 + ... + A_{q-1}`.
#[derive(Clone, Debug)]
pub struct DerivedMatrices {
    pub b: Vec<Matrix<Rational>>,
    pub c: Matrix<Rational>,
}

/// Base-`q` digits of `n`, least significant first; zero has no digits.
pub fn digits(n: &BigInt, q: u32) -> Vec<u32> {
    let mut out = Vec::new();
    let mut n = n.clone();
    let qb = BigInt::from(q);
    while !n.is_zero() {
        let r: u32 = (&n % &qb).try_into().unwrap();
        out.push(r);
        n /= &qb;
    }
    out
}

pub fn digits_u64(mut n: u64, q: u32) -> Vec<u32> {
    let mut out = Vec::new();
    while n > 0 {
        out.push((n % q as u64) as u32);
        n /= q as u64;
    }
    out
}

fn ratvec_mat(v: &[Rational], m: &Matrix<Rational>) -> Vec<Rational> {
    m.vec_mul(v)
}

impl LinRep {
    /// Builds and validates a representation.
    pub fn new(
        q: u32,
        matrices: Vec<Matrix<Rational>>,
        left: Vec<Rational>,
        initial: Vec<Rational>,
        mode: Mode,
    ) -> Result<Self, LinRepError> {
        let d = left.len();
        let rep = LinRep { q, d, matrices, left, initial, mode };
        rep.validate()?;
        Ok(rep)
    }

    pub fn validate(&self) -> Result<(), LinRepError> {
        let dm = |path: String, msg: String| LinRepError::DimensionMismatch { path, msg };
        if self.q < 2 {
            return Err(LinRepError::Schema { path: "q".into(), msg: "q must be at least 2".into() });
        }
        if self.d == 0 {
            return Err(LinRepError::Schema { path: "dimension".into(), msg: "dimension must be at least 1".into() });
        }
        if self.matrices.len() != self.q as usize {
            return Err(dm("matrices".into(), format!("expected {} matrices, got {}", self.q, self.matrices.len())));
        }
        for (r, m) in self.matrices.iter().enumerate() {
            if m.rows != self.d || m.cols != self.d {
                return Err(dm(format!("matrices[{r}]"), format!("expected {0}x{0}, got {1}x{2}", self.d, m.rows, m.cols)));
            }
        }
        if self.left.len() != self.d {
            return Err(dm("left".into(), format!("expected length {}, got {}", self.d, self.left.len())));
        }
        if self.initial.len() != self.d {
            return Err(dm("initial".into(), format!("expected length {}, got {}", self.d, self.initial.len())));
        }
        if self.mode == Mode::Sequence && self.matrices[0].mul_vec(&self.initial) != self.initial {
            return Err(LinRepError::ModeViolation("A_0 v0 != v0 in sequence mode".into()));
        }
        Ok(())
    }

    pub fn derived(&self) -> DerivedMatrices {
        let mut b = Vec::with_capacity(self.q as usize);
        let mut acc = Matrix::<Rational>::zeros(self.d, self.d);
        for m in &self.matrices {
            b.push(acc.clone());
            acc = acc.add_m(m);
        }
        DerivedMatrices { b, c: acc }
    }

    /// Largest row-sum norm of the digit matrices.
    pub fn max_norm(&self) -> Rational {
        self.matrices.iter().map(|m| m.norm_inf()).max().unwrap_or_else(Rational::zero)
    }

    /// `f(n) = A_{r_0} ... A_{r_{l-1}}`.
    pub fn matrix_f(&self, n: &BigInt) -> Matrix<Rational> {
        let mut f = Matrix::<Rational>::identity(self.d);
        for r in digits(n, self.q).into_iter().rev() {
            f = self.matrices[r as usize].mul_m(&f);
        }
        f
    }

    /// `f(0), ..., f(n_max - 1)` via `f(qn + r) = A_r f(n)`.
    pub fn f_table(&self, n_max: usize) -> Vec<Matrix<Rational>> {
        let q = self.q as usize;
        let mut t: Vec<Matrix<Rational>> = Vec::with_capacity(n_max);
        for n in 0..n_max {
            if n == 0 {
                t.push(Matrix::identity(self.d));
            } else {
                let v = self.matrices[n % q].mul_m(&t[n / q]);
                t.push(v);
            }
        }
        t
    }

    pub fn term(&self, n: &BigInt) -> Rational {
        let mut v = self.left.clone();
        for r in digits(n, self.q) {
            v = ratvec_mat(&v, &self.matrices[r as usize]);
        }
        dot(&v, &self.initial)
    }

    pub fn term_u64(&self, n: u64) -> Rational {
        self.term(&BigInt::from(n))
    }

    /// `X(N) = x(0) + ... + x(N-1)` by direct summation.
    pub fn summatory_direct(&self, n: u64) -> Rational {
        (0..n).map(|k| self.term_u64(k)).fold(Rational::zero(), |a, b| a + b)
    }

    /// `F(N) = f(0) + ... + f(N-1)` and `X(N) = e F(N) v0` in `O(log N)` matrix operations.
    pub fn summatory_fast(&self, n: &BigInt) -> (Matrix<Rational>, Rational) {
        let f = self.summatory_matrix(n);
        let x = dot(&f.vec_mul(&self.left), &self.initial);
        (f, x)
    }

    pub fn summatory_matrix(&self, n: &BigInt) -> Matrix<Rational> {
        let dm = self.derived();
        let id = Matrix::<Rational>::identity(self.d);
        let corr = id.sub_m(&self.matrices[0]);
        let mut big_f = Matrix::<Rational>::zeros(self.d, self.d);
        let mut f = id;
        for r in digits(n, self.q).into_iter().rev() {
            let r = r as usize;
            big_f = dm.c.mul_m(&big_f).add_m(&dm.b[r].mul_m(&f)).add_m(&corr);
            f = self.matrices[r].mul_m(&f);
        }
        big_f
    }

    /// Scalar `X(N)` only, propagating `F(N) v0` and `f(N) v0`.
    pub fn summatory(&self, n: &BigInt) -> Rational {
        let dm = self.derived();
        let corr: Vec<Rational> = {
            let a0v = self.matrices[0].mul_vec(&self.initial);
            self.initial.iter().zip(&a0v).map(|(a, b)| a - b).collect()
        };
        let mut fv = vec![Rational::zero(); self.d];
        let mut v = self.initial.clone();
        for r in digits(n, self.q).into_iter().rev() {
            let r = r as usize;
            let a = dm.c.mul_vec(&fv);
            let b = dm.b[r].mul_vec(&v);
            fv = a.iter().zip(&b).zip(&corr).map(|((x, y), z)| x + y + z).collect();
            v = self.matrices[r].mul_vec(&v);
        }
        dot(&self.left, &fv)
    }

    pub fn to_json(&self) -> Value {
        let rat = |x: &Rational| -> Value {
            if x.is_integer() {
                match i64::try_from(x.to_integer()) {
                    Ok(v) => json!(v),
                    Err(_) => json!(x.to_integer().to_string()),
                }
            } else {
                json!(format!("{}/{}", x.numer(), x.denom()))
            }
        };
        let mats: Vec<Value> = self
            .matrices
            .iter()
            .map(|m| Value::Array((0..m.rows).map(|i| Value::Array(m.row(i).iter().map(rat).collect())).collect()))
            .collect();
        let mut obj = serde_json::Map::new();
        obj.insert("q".into(), json!(self.q));
        obj.insert("dimension".into(), json!(self.d));
        obj.insert("mode".into(), json!(if self.mode == Mode::Sequence { "sequence" } else { "matrix" }));
        obj.insert("matrices".into(), Value::Array(mats));
        obj.insert("left".into(), Value::Array(self.left.iter().map(rat).collect()));
        obj.insert("initial".into(), Value::Array(self.initial.iter().map(rat).collect()));
        Value::Object(obj)
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

fn schema(path: &str, msg: impl Into<String>) -> LinRepError {
    LinRepError::Schema { path: path.to_string(), msg: msg.into() }
}

fn parse_rational(v: &Value, path: &str) -> Result<Rational, LinRepError> {
    match v {
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                Ok(Rational::from_integer(i.into()))
            } else if let Some(u) = n.as_u64() {
                Ok(Rational::from_integer(u.into()))
            } else {
                Err(schema(path, "expected an integer or a string \"p/q\""))
            }
        }
        Value::String(s) => parse_rational_str(s).ok_or_else(|| schema(path, format!("invalid rational {s:?}"))),
        _ => Err(schema(path, "expected an integer or a string \"p/q\"")),
    }
}

pub fn parse_rational_str(s: &str) -> Option<Rational> {
    let s = s.trim();
    let (p, q) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s, "1"),
    };
    let p: BigInt = p.parse().ok()?;
    let q: BigInt = q.parse().ok()?;
    if q.is_zero() {
        return None;
    }
    Some(Rational::new(p, q))
}

fn parse_vec(v: &Value, path: &str, d: usize) -> Result<Vec<Rational>, LinRepError> {
    let a = v.as_array().ok_or_else(|| schema(path, "expected an array"))?;
    if a.len() != d {
        return Err(LinRepError::DimensionMismatch { path: path.into(), msg: format!("expected length {d}, got {}", a.len()) });
    }
    a.iter().enumerate().map(|(i, x)| parse_rational(x, &format!("{path}[{i}]"))).collect()
}

/// Parses the JSON representation format.
pub fn parse_linrep(text: &str) -> Result<LinRep, LinRepError> {
    let v: Value = serde_json::from_str(text).map_err(|e| schema("$", e.to_string()))?;
    let obj = v.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    const KNOWN: [&str; 6] = ["q", "dimension", "mode", "matrices", "left", "initial"];
    for k in obj.keys() {
        if !KNOWN.contains(&k.as_str()) {
            return Err(schema(k, "unknown field"));
        }
    }
    let get = |k: &str| obj.get(k).ok_or_else(|| schema(k, "missing field"));
    let q = get("q")?.as_u64().filter(|&q| (2..=u32::MAX as u64).contains(&q)).ok_or_else(|| schema("q", "expected an integer >= 2"))? as u32;
    let d = get("dimension")?.as_u64().filter(|&d| d >= 1).ok_or_else(|| schema("dimension", "expected an integer >= 1"))? as usize;
    let mode = match get("mode")?.as_str() {
        Some("sequence") => Mode::Sequence,
        Some("matrix") => Mode::MatrixProduct,
        _ => return Err(schema("mode", "expected \"sequence\" or \"matrix\"")),
    };
    let ms = get("matrices")?.as_array().ok_or_else(|| schema("matrices", "expected an array"))?;
    if ms.len() != q as usize {
        return Err(LinRepError::DimensionMismatch { path: "matrices".into(), msg: format!("expected {q} matrices, got {}", ms.len()) });
    }
    let mut matrices = Vec::with_capacity(ms.len());
    for (r, m) in ms.iter().enumerate() {
        let path = format!("matrices[{r}]");
        let rows = m.as_array().ok_or_else(|| schema(&path, "expected an array of rows"))?;
        if rows.len() != d {
            return Err(LinRepError::DimensionMismatch { path, msg: format!("expected {d} rows, got {}", rows.len()) });
        }
        let rows: Vec<Vec<Rational>> = rows
            .iter()
            .enumerate()
            .map(|(i, row)| parse_vec(row, &format!("{path}[{i}]"), d))
            .collect::<Result<_, _>>()?;
        matrices.push(Matrix::from_rows(rows));
    }
    let left = parse_vec(get("left")?, "left", d)?;
    let initial = parse_vec(get("initial")?, "initial", d)?;
    LinRep::new(q, matrices, left, initial, mode)
}

pub fn serialize_linrep(rep: &LinRep) -> String {
    serde_json::to_string_pretty(&rep.to_json()).expect("serializable")
}

impl LinRep {
    /// `x(0) = e v0`.
    pub fn x0(&self) -> Rational {
        dot(&self.left, &self.initial)
    }

    pub fn is_one_eigenvalue_of_c(&self) -> bool {
        let c = self.derived().c;
        let n = self.d;
        c.sub_m(&Matrix::identity(n)).rank() < n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> Rational {
        Rational::from_integer(n.into())
    }

    fn sod() -> LinRep {
        let a0 = Matrix::from_rows(vec![vec![r(1), r(0)], vec![r(0), r(1)]]);
        let a1 = Matrix::from_rows(vec![vec![r(1), r(1)], vec![r(0), r(1)]]);
        LinRep::new(2, vec![a0, a1], vec![r(1), r(0)], vec![r(0), r(1)], Mode::Sequence).unwrap()
    }

    #[test]
    fn digits_examples() {
        assert!(digits(&BigInt::from(0), 2).is_empty());
        assert_eq!(digits(&BigInt::from(6), 2), vec![0, 1, 1]);
    }

    #[test]
    fn summatory_small() {
        let rep = sod();
        assert_eq!(rep.summatory_fast(&BigInt::from(4)).1, r(4));
        assert_eq!(rep.summatory(&BigInt::from(4)), r(4));
        assert_eq!(rep.summatory_direct(0), r(0));
    }

    #[test]
    fn json_round_trip() {
        let rep = sod();
        let s = serialize_linrep(&rep);
        assert_eq!(parse_linrep(&s).unwrap(), rep);
    }
}
