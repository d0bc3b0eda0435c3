//! Built-in representations and compilers from transducers and shift rules.

use crate::error::ModelError;
use crate::linalg::Matrix;
use crate::linrep::{digits_u64, parse_rational_str, LinRep, Mode};
use crate::Rational;
use num_integer::Integer;
use num_traits::Zero;
use std::collections::BTreeMap;

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_rows(rows.iter().map(|row| row.iter().map(|&x| r(x)).collect()).collect())
}

/// Sum of base-`q` digits: `A_r = [[1, r], [0, 1]]`, `v0 = (0, 1)`.
pub fn sum_of_digits(q: u32) -> LinRep {
    let ms = (0..q as i64).map(|d| mat(&[&[1, d], &[0, 1]])).collect();
    LinRep::new(q, ms, vec![r(1), r(0)], vec![r(0), r(1)], Mode::Sequence).expect("valid")
}

/// Indicator of `q`-esthetic numbers (adjacent digits differ by exactly one).
///
/// States `0..q-1` are "last digit read", state `q` is the initial state.
pub fn esthetic(q: u32) -> LinRep {
    let n = q as usize + 1;
    let ms = (0..q as usize)
        .map(|d| {
            Matrix::from_fn(n, n, |i, j| {
                let hit = j == d && (i + 1 == d || i == d + 1 || i == q as usize);
                r(hit as i64)
            })
        })
        .collect();
    let mut left = vec![r(0); n];
    left[n - 1] = r(1);
    let mut initial = vec![r(1); n];
    initial[0] = r(0);
    LinRep::new(q, ms, left, initial, Mode::MatrixProduct).expect("valid")
}

/// Odd entries of Pascal's rhombus: `v(n) = (x(n), x(n+1), y(n+1), z(n), z(n+1))`.
pub fn pascal_rhombus() -> LinRep {
    let a0 = mat(&[
        &[1, 0, 0, 1, 0],
        &[0, 0, 1, 0, 0],
        &[0, 1, 0, 1, 0],
        &[2, 0, 0, 0, 0],
        &[0, 0, 2, 0, 0],
    ]);
    let a1 = mat(&[
        &[0, 0, 1, 0, 0],
        &[0, 1, 0, 0, 1],
        &[1, 0, 0, 0, 1],
        &[0, 0, 2, 0, 0],
        &[0, 2, 0, 0, 0],
    ]);
    let left = vec![r(1), r(0), r(0), r(0), r(0)];
    let initial = vec![r(0), r(1), r(1), r(0), r(2)];
    LinRep::new(2, vec![a0, a1], left, initial, Mode::Sequence).expect("valid")
}

/// Stern's diatomic sequence: `v(n) = (x(n), x(n+1), x(n+2))`.
pub fn stern_brocot() -> LinRep {
    let a0 = mat(&[&[1, 0, 0], &[1, 1, 0], &[0, 1, 0]]);
    let a1 = mat(&[&[1, 1, 0], &[0, 1, 0], &[0, 1, 1]]);
    LinRep::new(2, vec![a0, a1], vec![r(1), r(0), r(0)], vec![r(0), r(1), r(1)], Mode::Sequence).expect("valid")
}

/// Resolves the CLI shorthand `sum-of-digits[:q]`, `esthetic:<q>`, `pascal`, `stern-brocot`.
pub fn by_name(name: &str) -> Result<LinRep, ModelError> {
    let (base, arg) = match name.split_once(':') {
        Some((b, a)) => (b, Some(a)),
        None => (name, None),
    };
    let parse_q = |a: Option<&str>, default: Option<u32>| -> Result<u32, ModelError> {
        match a {
            Some(s) => s
                .parse::<u32>()
                .ok()
                .filter(|&q| q >= 2)
                .ok_or_else(|| ModelError::InvalidModel(format!("invalid base {s:?}"))),
            None => default.ok_or_else(|| ModelError::InvalidModel(format!("{base} needs a base, e.g. {base}:4"))),
        }
    };
    match base {
        "sum-of-digits" => Ok(sum_of_digits(parse_q(arg, Some(2))?)),
        "esthetic" => Ok(esthetic(parse_q(arg, None)?)),
        "pascal" if arg.is_none() => Ok(pascal_rhombus()),
        "stern-brocot" if arg.is_none() => Ok(stern_brocot()),
        _ => Err(ModelError::InvalidModel(format!("unknown model {name:?}"))),
    }
}

/// Complete deterministic subsequential transducer reading digits least significant first.
/// States are `0..d` internally (state `0` is initial).
#[derive(Clone, Debug, PartialEq)]
pub struct Transducer {
    pub q: u32,
    pub states: usize,
    /// `(state, digit) -> (target, output)`.
    pub transitions: BTreeMap<(usize, u32), (usize, Rational)>,
    pub final_output: Vec<Rational>,
}

impl Transducer {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.q < 2 || self.states == 0 {
            return Err(ModelError::IncompleteTransducer("need q >= 2 and at least one state".into()));
        }
        for j in 0..self.states {
            for d in 0..self.q {
                match self.transitions.get(&(j, d)) {
                    None => {
                        return Err(ModelError::IncompleteTransducer(format!(
                            "no transition from state {} on digit {d}",
                            j + 1
                        )))
                    }
                    Some(&(t, _)) if t >= self.states => {
                        return Err(ModelError::IncompleteTransducer(format!("target state {} out of range", t + 1)))
                    }
                    _ => {}
                }
            }
        }
        if self.final_output.len() != self.states {
            return Err(ModelError::IncompleteTransducer("final outputs missing".into()));
        }
        Ok(())
    }

    /// `T_j(n)`: run from state `j` on the digits of `n`, then add the final output.
    pub fn run(&self, start: usize, n: u64) -> Rational {
        let mut s = start;
        let mut acc = Rational::zero();
        for d in digits_u64(n, self.q) {
            let (t, o) = &self.transitions[&(s, d)];
            acc += o;
            s = *t;
        }
        acc + &self.final_output[s]
    }

    /// Adjacency matrix of the underlying digraph (with multiplicities).
    pub fn adjacency(&self) -> Matrix<Rational> {
        let mut m = Matrix::<Rational>::zeros(self.states, self.states);
        for (&(j, _), (t, _)) in &self.transitions {
            let v = m.get(j, *t) + r(1);
            m.set(j, *t, v);
        }
        m
    }
}

/// Parses the line format:
///
/// ```text
/// q 2
/// states 1
/// 1 --0/0--> 1
/// 1 --1/1--> 1
/// final 1 0
/// ```
///
/// States are numbered from 1; outputs are rationals (`p` or `p/q`); `#` starts a comment.
/// Missing final outputs default to 0.
pub fn parse_transducer(text: &str) -> Result<Transducer, ModelError> {
    let mut q: Option<u32> = None;
    let mut states: Option<usize> = None;
    let mut transitions = BTreeMap::new();
    let mut finals: BTreeMap<usize, Rational> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |msg: String| ModelError::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let state = |s: &str| -> Result<usize, ModelError> {
            let k: usize = s.parse().map_err(|_| err(format!("invalid state {s:?}")))?;
            match states {
                Some(d) if k >= 1 && k <= d => Ok(k - 1),
                Some(_) => Err(err(format!("state {k} out of range"))),
                None => Err(err("`states` must precede transitions".into())),
            }
        };
        match words[0] {
            "q" if words.len() == 2 => {
                q = Some(words[1].parse().ok().filter(|&x: &u32| x >= 2).ok_or_else(|| err("invalid q".into()))?);
            }
            "states" if words.len() == 2 => {
                states = Some(words[1].parse().ok().filter(|&x: &usize| x >= 1).ok_or_else(|| err("invalid state count".into()))?);
            }
            "final" if words.len() == 3 => {
                let j = state(words[1])?;
                let o = parse_rational_str(words[2]).ok_or_else(|| err(format!("invalid output {:?}", words[2])))?;
                finals.insert(j, o);
            }
            _ => {
                // j --r/o--> k
                let (lhs, rest) = line.split_once("--").ok_or_else(|| err(format!("unrecognised line {line:?}")))?;
                let (label, target) = rest.split_once("-->").ok_or_else(|| err("expected `-->`".into()))?;
                let (digit, out) = label.split_once('/').ok_or_else(|| err("expected `digit/output`".into()))?;
                let j = state(lhs.trim())?;
                let k = state(target.trim())?;
                let d: u32 = digit.trim().parse().map_err(|_| err(format!("invalid digit {digit:?}")))?;
                let qq = q.ok_or_else(|| err("`q` must precede transitions".into()))?;
                if d >= qq {
                    return Err(err(format!("digit {d} not below q = {qq}")));
                }
                let o = parse_rational_str(out).ok_or_else(|| err(format!("invalid output {out:?}")))?;
                if transitions.insert((j, d), (k, o)).is_some() {
                    return Err(err(format!("duplicate transition from state {} on digit {d}", j + 1)));
                }
            }
        }
    }
    let q = q.ok_or(ModelError::Parse { line: 0, msg: "missing `q` line".into() })?;
    let states = states.ok_or(ModelError::Parse { line: 0, msg: "missing `states` line".into() })?;
    let final_output = (0..states).map(|j| finals.get(&j).cloned().unwrap_or_else(Rational::zero)).collect();
    let t = Transducer { q, states, transitions, final_output };
    t.validate()?;
    Ok(t)
}

/// Sequence-mode representation of `n -> T_1(n)` on `(T_1(n), ..., T_d(n), 1, [n = 0])`.
pub fn transducer_to_linrep(t: &Transducer) -> Result<LinRep, ModelError> {
    t.validate()?;
    let d = t.states;
    let n = d + 2;
    let ms = (0..t.q)
        .map(|digit| {
            let mut a = Matrix::<Rational>::zeros(n, n);
            for j in 0..d {
                let (tj, o) = &t.transitions[&(j, digit)];
                a.set(j, *tj, r(1));
                a.set(j, d, o.clone());
                if digit == 0 {
                    let v = &t.final_output[j] - &t.final_output[*tj] - o;
                    a.set(j, d + 1, v);
                }
            }
            a.set(d, d, r(1));
            if digit == 0 {
                a.set(d + 1, d + 1, r(1));
            }
            a
        })
        .collect();
    let mut left = vec![r(0); n];
    left[0] = r(1);
    let mut initial: Vec<Rational> = t.final_output.clone();
    initial.push(r(1));
    initial.push(r(1));
    Ok(LinRep::new(t.q, ms, left, initial, Mode::Sequence)?)
}

/// Final period of the transducer's digraph: lcm over sink components of the gcd of cycle lengths.
pub fn transducer_period(t: &Transducer) -> usize {
    let n = t.states;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (&(j, _), (k, _)) in &t.transitions {
        adj[j].push(*k);
    }
    digraph_final_period(&adj)
}

/// Final period of a digraph given by adjacency lists.
pub fn digraph_final_period(adj: &[Vec<usize>]) -> usize {
    let comp = scc(adj);
    let ncomp = comp.iter().copied().max().map_or(0, |m| m + 1);
    let mut is_final = vec![true; ncomp];
    for (u, outs) in adj.iter().enumerate() {
        for &v in outs {
            if comp[u] != comp[v] {
                is_final[comp[u]] = false;
            }
        }
    }
    let mut period = 1usize;
    for c in 0..ncomp {
        if !is_final[c] {
            continue;
        }
        let members: Vec<usize> = (0..adj.len()).filter(|&u| comp[u] == c).collect();
        let mut level = vec![usize::MAX; adj.len()];
        level[members[0]] = 0;
        let mut queue = std::collections::VecDeque::from([members[0]]);
        let mut g = 0usize;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if comp[v] != c {
                    continue;
                }
                if level[v] == usize::MAX {
                    level[v] = level[u] + 1;
                    queue.push_back(v);
                } else {
                    g = g.gcd(&(level[u] + 1).abs_diff(level[v]));
                }
            }
        }
        if g > 0 {
            period = period.lcm(&g);
        }
    }
    period
}

/// Tarjan's strongly connected components; returns a component index per vertex.
pub fn scc(adj: &[Vec<usize>]) -> Vec<usize> {
    struct St<'a> {
        adj: &'a [Vec<usize>],
        index: Vec<usize>,
        low: Vec<usize>,
        on: Vec<bool>,
        stack: Vec<usize>,
        comp: Vec<usize>,
        next: usize,
        ncomp: usize,
    }
    fn visit(s: &mut St, u: usize) {
        s.index[u] = s.next;
        s.low[u] = s.next;
        s.next += 1;
        s.stack.push(u);
        s.on[u] = true;
        for i in 0..s.adj[u].len() {
            let v = s.adj[u][i];
            if s.index[v] == usize::MAX {
                visit(s, v);
                s.low[u] = s.low[u].min(s.low[v]);
            } else if s.on[v] {
                s.low[u] = s.low[u].min(s.index[v]);
            }
        }
        if s.low[u] == s.index[u] {
            loop {
                let w = s.stack.pop().unwrap();
                s.on[w] = false;
                s.comp[w] = s.ncomp;
                if w == u {
                    break;
                }
            }
            s.ncomp += 1;
        }
    }
    let n = adj.len();
    let mut s = St {
        adj,
        index: vec![usize::MAX; n],
        low: vec![0; n],
        on: vec![false; n],
        stack: Vec::new(),
        comp: vec![0; n],
        next: 0,
        ncomp: 0,
    };
    for u in 0..n {
        if s.index[u] == usize::MAX {
            visit(&mut s, u);
        }
    }
    s.comp
}

/// Recurrence `x(qn + r) = sum_{l <= k <= u} c[r][k - l] x(n + k)` for `n >= 0`.
#[derive(Clone, Debug)]
pub struct ShiftRule {
    pub q: u32,
    pub lo: i64,
    pub hi: i64,
    /// `coeffs[r][k - lo]`.
    pub coeffs: Vec<Vec<Rational>>,
    /// `x(0), x(1), ...`; values not determined by the recurrence must be given here.
    pub seeds: Vec<Rational>,
}

impl ShiftRule {
    /// `x(m)` for `0 <= m < n`, with `x(m) = 0` for `m < 0`.
    pub fn values(&self, n: usize) -> Result<Vec<Rational>, ModelError> {
        let q = self.q as i64;
        let mut x: Vec<Rational> = Vec::with_capacity(n);
        for m in 0..n as i64 {
            if let Some(s) = self.seeds.get(m as usize) {
                x.push(s.clone());
                continue;
            }
            let (nn, rr) = (m.div_euclid(q), m.rem_euclid(q));
            let mut acc = Rational::zero();
            for k in self.lo..=self.hi {
                let c = &self.coeffs[rr as usize][(k - self.lo) as usize];
                let idx = nn + k;
                if c.is_zero() || idx < 0 {
                    continue;
                }
                if idx >= m {
                    return Err(ModelError::WindowInsufficient(format!("x({m}) needs a seed value")));
                }
                acc += c * &x[idx as usize];
            }
            x.push(acc);
        }
        Ok(x)
    }
}

/// Compiles a shift rule into a representation on the window `x(n + l'), ..., x(n + u')`
/// with `l' = floor(q l / (q-1))`, `u' = ceil(q u / (q-1))`, ordered so that `x(n)` comes first.
pub fn shift_rule_to_linrep(rule: &ShiftRule) -> Result<LinRep, ModelError> {
    let q = rule.q as i64;
    if q < 2 || rule.lo > 0 || rule.hi < 0 || rule.coeffs.len() != q as usize {
        return Err(ModelError::InvalidModel("need q >= 2, l <= 0 <= u and q coefficient rows".into()));
    }
    let width = (rule.hi - rule.lo + 1) as usize;
    if rule.coeffs.iter().any(|c| c.len() != width) {
        return Err(ModelError::InvalidModel(format!("each rule needs {width} coefficients")));
    }
    let lp = (q * rule.lo).div_euclid(q - 1);
    let up = -((-q * rule.hi).div_euclid(q - 1));
    // Component order: offsets 0..=u', then l'..-1.
    let offsets: Vec<i64> = (0..=up).chain(lp..0).collect();
    let pos = |off: i64| offsets.iter().position(|&o| o == off);
    let d = offsets.len();
    let mut ms = Vec::with_capacity(q as usize);
    for digit in 0..q {
        let mut a = Matrix::<Rational>::zeros(d, d);
        for (row, &i) in offsets.iter().enumerate() {
            let (shift, b) = ((digit + i).div_euclid(q), (digit + i).rem_euclid(q));
            for k in rule.lo..=rule.hi {
                let c = &rule.coeffs[b as usize][(k - rule.lo) as usize];
                if c.is_zero() {
                    continue;
                }
                let col = pos(shift + k).ok_or_else(|| {
                    ModelError::WindowInsufficient(format!("offset {} outside the window {lp}..={up}", shift + k))
                })?;
                let v = a.get(row, col) + c;
                a.set(row, col, v);
            }
        }
        ms.push(a);
    }
    let probe = 64 * q as usize + 2 * (up as usize) + 2;
    let x = rule.values(probe + up as usize + 1)?;
    let at = |m: i64| if m < 0 { Rational::zero() } else { x[m as usize].clone() };
    let v = |n: i64| -> Vec<Rational> { offsets.iter().map(|&o| at(n + o)).collect() };
    for n in 0..(probe as i64 / q) {
        for digit in 0..q {
            if ms[digit as usize].mul_vec(&v(n)) != v(q * n + digit) {
                return Err(ModelError::WindowInsufficient(format!(
                    "v({}) != A_{digit} v({n}) on the compiled window",
                    q * n + digit
                )));
            }
        }
    }
    let mut left = vec![r(0); d];
    left[0] = r(1);
    Ok(LinRep::new(rule.q, ms, left, v(0), Mode::Sequence)?)
}

/// Direct digit test for esthetic numbers.
pub fn is_esthetic(n: u64, q: u32) -> bool {
    let ds = digits_u64(n, q);
    ds.windows(2).all(|w| w[0].abs_diff(w[1]) == 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn esthetic_matrices_q4() {
        let rep = esthetic(4);
        assert_eq!(
            rep.matrices[1],
            mat(&[&[0, 1, 0, 0, 0], &[0, 0, 0, 0, 0], &[0, 1, 0, 0, 0], &[0, 0, 0, 0, 0], &[0, 1, 0, 0, 0]])
        );
    }

    #[test]
    fn stern_brocot_from_shift_rule() {
        let rule = ShiftRule {
            q: 2,
            lo: 0,
            hi: 1,
            coeffs: vec![vec![r(1), r(0)], vec![r(1), r(1)]],
            seeds: vec![r(0), r(1)],
        };
        assert_eq!(shift_rule_to_linrep(&rule).unwrap(), stern_brocot());
    }

    #[test]
    fn swap_automaton_has_period_two() {
        assert_eq!(digraph_final_period(&[vec![1], vec![0]]), 2);
        assert_eq!(digraph_final_period(&[vec![0, 0]]), 1);
    }
}
