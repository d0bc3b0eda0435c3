mod common;

use common::{random_rep, MODELS};
use proptest::prelude::*;
use regseq_core::bigfloat::BigFloat;
use regseq_core::linalg::Matrix;
use regseq_core::models;
use regseq_core::poly::charpoly;
use regseq_core::spectral::{eigen_certify, jordan_block_size, jsr_bounds, spectral_data, JsrConfig, Side};
use regseq_core::Rational;

fn r(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

fn mat(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_rows(rows.iter().map(|row| row.iter().map(|&x| r(x)).collect()).collect())
}

fn cfg(ell_max: usize) -> JsrConfig {
    JsrConfig { ell_max, ..JsrConfig::default() }
}

#[test]
fn sum_of_digits_jordan_block() {
    let c = models::sum_of_digits(2).derived().c;
    assert_eq!(c, mat(&[&[2, 1], &[0, 2]]));
    let e = eigen_certify::<BigFloat>(&c, 128).unwrap();
    assert_eq!(e.len(), 1);
    assert_eq!(e[0].exact, Some(r(2)));
    assert_eq!((e[0].alg_mult, e[0].jordan_m), (2, 2));
}

#[test]
fn pascal_spectrum() {
    let c = models::pascal_rhombus().derived().c;
    let e = eigen_certify::<BigFloat>(&c, 128).unwrap();
    assert_eq!(e.len(), 5);
    assert!(e.iter().all(|x| x.alg_mult == 1 && x.jordan_m == 1));
    let s17 = 17f64.sqrt();
    for want in [(3.0 + s17) / 2.0, (3.0 - s17) / 2.0, 2.0, -2.0, -1.0] {
        let hit = e.iter().filter(|x| (x.lambda.re.to_f64() - want).abs() < 1e-12 && x.lambda.im.contains_f64(0.0)).count();
        assert_eq!(hit, 1, "eigenvalue {want}");
    }
    let top = e.iter().find(|x| x.lambda.re.to_f64() > 3.0).unwrap();
    assert!(common::matches_decimal(&top.lambda.re, "3.5615528128088"));
    assert!(top.lambda.rad() < 1e-30);
}

#[test]
fn esthetic_spectra() {
    use std::f64::consts::PI;
    for q in 2..=6u32 {
        let c = models::esthetic(q).derived().c;
        let e = eigen_certify::<f64>(&c, 53).unwrap();
        assert_eq!(e.iter().map(|x| x.alg_mult).sum::<usize>(), q as usize + 1);
        let mut want: Vec<f64> = (1..=q).map(|k| 2.0 * (k as f64 * PI / (q + 1) as f64).cos()).collect();
        want.push(0.0);
        for w in &want {
            assert!(e.iter().any(|x| (x.lambda.re.to_f64() - w).abs() < 1e-9 && x.lambda.im.contains_f64(0.0)), "q = {q}, {w}");
        }
        let zero = e.iter().find(|x| x.exact == Some(r(0))).unwrap();
        // 2 cos(k pi / (q + 1)) vanishes for k = (q + 1) / 2 when q is odd.
        assert_eq!(zero.alg_mult, 1 + (q % 2) as usize, "q = {q}");
        if q % 4 == 1 {
            assert_eq!(zero.jordan_m, 2, "q = {q}");
        }
        let geometric = c.rows - c.rank();
        assert_eq!(zero.jordan_m, zero.alg_mult - geometric + 1, "q = {q}");
    }
}

#[test]
fn jordan_sizes() {
    let id = Matrix::<Rational>::identity(3);
    let one = regseq_core::ball::CBall::<f64>::one(53);
    assert_eq!(jordan_block_size(&id, &one, 3).unwrap(), 1);
    let j = mat(&[&[2, 1], &[0, 2]]);
    assert_eq!(jordan_block_size(&j, &regseq_core::ball::CBall::<f64>::from_i64(2, 53), 2).unwrap(), 2);
}

/// Block-diagonal Jordan matrix with blocks `(eigenvalue, size)`.
fn jordan(blocks: &[(i64, usize)]) -> Matrix<Rational> {
    let n: usize = blocks.iter().map(|b| b.1).sum();
    let mut m = Matrix::<Rational>::zeros(n, n);
    let mut at = 0;
    for &(l, s) in blocks {
        for i in 0..s {
            m.set(at + i, at + i, r(l));
            if i + 1 < s {
                m.set(at + i, at + i + 1, r(1));
            }
        }
        at += s;
    }
    m
}

/// Unimodular matrix: lower unitriangular times upper unitriangular with small entries.
fn unimodular(n: usize, seed: u64) -> Matrix<Rational> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut lo = Matrix::<Rational>::identity(n);
    let mut up = Matrix::<Rational>::identity(n);
    for i in 0..n {
        for j in 0..i {
            lo.set(i, j, r(rng.gen_range(-2..=2)));
            up.set(j, i, r(rng.gen_range(-2..=2)));
        }
    }
    lo.mul_m(&up)
}

#[test]
fn complex_pair_and_charpoly() {
    // Rotation-like matrix with eigenvalues 1 +- 2i, plus a real eigenvalue 3.
    let c = mat(&[&[1, -2, 0], &[2, 1, 0], &[0, 0, 3]]);
    let e = eigen_certify::<BigFloat>(&c, 96).unwrap();
    let p = charpoly(&c);
    for x in &e {
        assert!(p.eval_ball(&x.lambda).contains_zero());
    }
    assert!(e.iter().any(|x| x.lambda.contains_f64(1.0, 2.0)));
    assert!(e.iter().any(|x| x.lambda.contains_f64(1.0, -2.0)));
}

#[test]
fn jsr_of_models() {
    let pas = spectral_data::<f64>(&models::pascal_rhombus(), 53, &cfg(6)).unwrap();
    assert_eq!((pas.jsr.rho_ell[0].1, pas.jsr.r.lo, pas.jsr.r.hi), (2.0, 2.0, 2.0));
    assert_eq!(pas.jsr.finiteness_witness.as_ref().map(|w| w.len()), Some(1));
    assert!(pas.sanity.ok);
    for q in 2..=5 {
        let s = spectral_data::<f64>(&models::esthetic(q), 53, &cfg(6)).unwrap();
        assert_eq!((s.jsr.r.lo, s.jsr.r.hi), (1.0, 1.0), "q = {q}");
        assert!(s.sanity.ok);
    }
    let sod = spectral_data::<f64>(&models::sum_of_digits(2), 53, &cfg(6)).unwrap();
    assert_eq!((sod.jsr.rho_lower.lo, sod.jsr.r.lo, sod.jsr.r.hi), (1.0, 1.0, 1.0));
    assert!(!sod.jsr.products_bounded);
    assert!(sod.jsr.finiteness_witness.is_none());
    // (1 + l)^(1/l) upper bounds over the full (not block-wise) products.
    for &(l, v) in &sod.jsr.rho_ell {
        assert!((v - (1.0 + l as f64).powf(1.0 / l as f64)).abs() < 1e-12, "l = {l}");
    }
    assert_eq!(sod.sides, vec![Side::Above]);
}

#[test]
fn json_report_is_deterministic() {
    let a = spectral_data::<BigFloat>(&models::pascal_rhombus(), 128, &cfg(4)).unwrap();
    let b = spectral_data::<BigFloat>(&models::pascal_rhombus(), 128, &cfg(4)).unwrap();
    assert_eq!(serde_json::to_string(&a.to_json()).unwrap(), serde_json::to_string(&b.to_json()).unwrap());
    let j = serde_json::to_value(a.jsr.to_json()).unwrap();
    for key in ["rho_ell", "rho_lower", "R", "witness"] {
        assert!(j.get(key).is_some(), "{key}");
    }
}

#[test]
fn model_invariants() {
    for name in MODELS {
        let rep = models::by_name(name).unwrap();
        let sd = spectral_data::<f64>(&rep, 53, &cfg(6)).unwrap();
        check_invariants(&rep.derived().c, &sd);
    }
}

fn check_invariants(c: &Matrix<Rational>, sd: &regseq_core::spectral::SpectralData<f64>) {
    let d = c.rows;
    assert_eq!(sd.eigen.iter().map(|x| x.alg_mult).sum::<usize>(), d);
    let p = charpoly(c);
    for x in &sd.eigen {
        assert!(p.eval_ball(&x.lambda).contains_zero());
        assert!(x.jordan_m >= 1 && x.jordan_m <= x.alg_mult);
    }
    let rho = &sd.jsr.rho_ell;
    for &(l, v) in rho {
        if let Some(&(_, v2)) = rho.iter().find(|x| x.0 == 2 * l) {
            assert!(v2 <= v * (1.0 + 1e-12), "rho_{} > rho_{l}", 2 * l);
        }
    }
    for (x, side) in sd.eigen.iter().zip(&sd.sides) {
        // No eigenvalue strictly between rho_lower and R.
        let strictly_inside = x.abs_lower() > sd.jsr.rho_lower.hi && x.abs_upper() < sd.jsr.r.lo;
        assert!(!strictly_inside);
        match side {
            Side::Above => assert!(x.abs_lower() >= sd.jsr.r.lo),
            Side::Below => assert!(x.abs_upper() <= sd.jsr.r.hi),
            Side::Tie => {}
        }
    }
    assert!(sd.sanity.ok, "{:?}", sd.sanity.violations);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn planted_jordan_forms(seed in any::<u64>(), s1 in 1usize..4, s2 in 1usize..3, s3 in 1usize..3) {
        let blocks = [(2i64, s1), (-1, s2), (2, s3)];
        let j = jordan(&blocks);
        let u = unimodular(j.rows, seed);
        let c = u.mul_m(&j).mul_m(&u.try_inv().unwrap());
        let e = eigen_certify::<f64>(&c, 53).unwrap();
        let two = e.iter().find(|x| x.exact == Some(r(2))).unwrap();
        let m1 = e.iter().find(|x| x.exact == Some(r(-1))).unwrap();
        prop_assert_eq!((two.alg_mult, two.jordan_m), (s1 + s3, s1.max(s3)));
        prop_assert_eq!((m1.alg_mult, m1.jordan_m), (s2, s2));
    }

    #[test]
    fn random_rep_invariants(seed in any::<u64>(), sequence in any::<bool>()) {
        let rep = random_rep(seed, sequence);
        let c = rep.derived().c;
        let eigen = eigen_certify::<f64>(&c, 53);
        prop_assume!(eigen.is_ok());
        let eigen = eigen.unwrap();
        let b = jsr_bounds(&rep, &cfg(4), &eigen);
        prop_assume!(b.is_ok());
        let b = b.unwrap();
        let min_rho = b.rho_ell.iter().map(|x| x.1).fold(f64::INFINITY, f64::min);
        for x in &eigen {
            prop_assert!(x.abs_lower() <= rep.q as f64 * min_rho * (1.0 + 1e-9));
        }
        if let Ok(sd) = spectral_data::<f64>(&rep, 53, &cfg(4)) {
            check_invariants(&c, &sd);
        }
    }
}
