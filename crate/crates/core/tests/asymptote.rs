mod common;

use common::matches_complex;
use num_bigint::BigInt;
use regseq_core::asymptote::{dual_route, empirical_sample, expansion, max_period, q_power_point, AsymptoticExpansion, ExpansionConfig};
use regseq_core::bigfloat::BigFloat;
use regseq_core::fourier::{fourier_eval_f64, FourierConfig};
use regseq_core::linalg::Matrix;
use regseq_core::linrep::{LinRep, Mode};
use regseq_core::models;
use regseq_core::scalar::MidScalar;
use regseq_core::spectral::{spectral_data, JsrConfig};
use regseq_core::Rational;

fn expand<S: MidScalar>(rep: &LinRep, prec: u32, ell_max: usize) -> AsymptoticExpansion<S> {
    let sd = spectral_data::<S>(rep, prec, &JsrConfig { ell_max: 6, ..JsrConfig::default() }).unwrap();
    let cfg = ExpansionConfig { fourier: FourierConfig { prec, ell_max, ..FourierConfig::default() } };
    expansion(rep, &sd, &cfg).unwrap()
}

#[test]
fn sum_of_digits_terms() {
    let e = expand::<BigFloat>(&models::sum_of_digits(2), 128, 4);
    assert_eq!(e.terms.iter().map(|t| t.k).collect::<Vec<_>>(), vec![1, 0]);
    for t in &e.terms {
        assert!(t.exponent.contains_f64(1.0, 0.0));
        assert!(t.holder.as_ref().unwrap().contains_f64(1.0));
    }
    assert!(e.terms[0].constant_hint);
    assert!(!e.terms[1].constant_hint);
    assert!(e.error_omitted);
    assert!(e.error_exponent.as_ref().unwrap().contains_f64(0.0));
    assert!(e.constants.is_none());
}

#[test]
fn pascal_single_term() {
    let rep = models::pascal_rhombus();
    let e = expand::<BigFloat>(&rep, 128, 2);
    assert_eq!(e.terms.len(), 1);
    let t = &e.terms[0];
    assert_eq!(t.k, 0);
    let gamma = ((3.0 + 17f64.sqrt()) / 2.0).log2();
    assert!((t.exponent.re.to_f64() - gamma).abs() < 1e-14 && t.exponent.rad() < 1e-12);
    assert!((t.holder.as_ref().unwrap().to_f64() - (gamma - 1.0)).abs() < 1e-14);
    assert!(e.error_exponent.as_ref().unwrap().contains_f64(1.0));
    assert_eq!(e.error_log_power, 1);
    assert!(!e.error_omitted);
    assert_eq!(e.in_error.len(), 4);
    let sd = spectral_data::<f64>(&rep, 53, &JsrConfig::default()).unwrap();
    assert_eq!(max_period(&rep, &sd, 53).unwrap(), 1);
}

#[test]
fn esthetic_two_periodic() {
    let e = expand::<BigFloat>(&models::esthetic(4), 128, 2);
    assert_eq!(e.terms.len(), 1);
    let t = &e.terms[0];
    let want = (1.0 + 5f64.sqrt()).log(4.0) - 0.5;
    assert!((t.exponent.re.to_f64() - want).abs() < 1e-14);
    assert_eq!(t.fluctuation.period, 2);
    assert!(t.fluctuation.one_periodic);
    assert!(matches_complex(t.fluctuation.coeff(0).unwrap(), "4.886821584515", "0"));
    // Odd multiples of pi i / ln 4 do not occur.
    assert!(t.fluctuation.coeff(1).unwrap().contains_f64(0.0, 0.0));
    let eff = t.fluctuation.effective();
    assert_eq!(eff.period, 1);
    assert!(matches_complex(eff.coeff(1).unwrap(), "0.036565359077", "-0.012421753685"));
}

#[test]
fn constant_sequence_rescales_to_one() {
    let one = Matrix::from_rows(vec![vec![Rational::from_integer(1.into())]]);
    let r1 = Rational::from_integer(1.into());
    let rep = LinRep::new(3, vec![one.clone(), one.clone(), one], vec![r1.clone()], vec![r1], Mode::Sequence).unwrap();
    let e = expand::<f64>(&rep, 53, 3);
    let rows = dual_route(&rep, &e, 0, 16, 8, 3);
    for row in rows {
        assert!((row.empirical_re - 1.0).abs() < 1e-12 && row.empirical_im.abs() < 1e-12);
        assert!(row.abs_diff < 1e-9, "u = {}", row.u);
    }
}

#[test]
fn sum_of_digits_fluctuation_at_power_of_two() {
    let rep = models::sum_of_digits(2);
    let e = expand::<f64>(&rep, 53, 500);
    let s = &empirical_sample(&rep, &e, 1, &[0.0], 20, 500)[0];
    assert_eq!(s.n, BigInt::from(1u64 << 20));
    // X(2^j) = j 2^(j-1): the empirical value is exactly zero.
    let direct = (s.x.to_string().parse::<f64>().unwrap() - 0.5 * 20.0 * (1u64 << 20) as f64) / (1u64 << 20) as f64;
    assert!(direct.abs() < 1e-12 && s.value.0.abs() < 1e-9);
    let (re, im) = fourier_eval_f64(&e.terms[1].fluctuation, 0.0, 500);
    assert!((re - s.value.0).abs() < 1e-3 && im.abs() < 1e-9, "{re}");
}

#[test]
fn power_points() {
    assert_eq!(q_power_point(2, 20.0), BigInt::from(1u64 << 20));
    assert_eq!(q_power_point(10, 30.0), BigInt::from(10u32).pow(30));
    assert_eq!(q_power_point(2, 0.5), BigInt::from(1));
    assert_eq!(q_power_point(3, 80.0), BigInt::from(3u32).pow(80));
}
