//! End-to-end checks with one PASS/FAIL line per criterion.

mod common;

use common::{matches_complex, MODELS};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use regseq_core::asymptote::{dual_route, expansion, max_period, AsymptoticExpansion, ExpansionConfig};
use regseq_core::ball::{CBall, RBall};
use regseq_core::bigfloat::BigFloat;
use regseq_core::dirichlet::{functional_residual, DirichletConfig, DirichletContext};
use regseq_core::error::DirichletError;
use regseq_core::fourier::{log_q, FourierConfig, FourierTable};
use regseq_core::linalg::Matrix;
use regseq_core::linrep::LinRep;
use regseq_core::models;
use regseq_core::scalar::MidScalar;
use regseq_core::spectral::{spectral_data, JsrConfig};
use regseq_core::Rational;
use std::io::Write;
use std::time::{Duration, Instant};

const PASCAL: [(&str, &str); 11] = [
    ("0.6911615112341912755021246", "0"),
    ("-0.01079216311240407872950510", "-0.0023421761940286789685827"),
    ("0.00279378637350495172116712", "-0.00066736128659728911347756"),
    ("-0.00020078258323645842522640", "-0.0031973663977645462669373"),
    ("0.00024944678921746747281338", "-0.0005912995467076061497650"),
    ("-0.0003886698612765803447578", "0.00006723866319930148568431"),
    ("-0.0006223575988893574655258", "0.00043217220614939859781542"),
    ("0.00023034317364181383130476", "-0.00058663168772856091427688"),
    ("0.0005339060804798716172593", "-0.0002119380802590974909465"),
    ("0.0000678898389770175928529", "-0.00038307823285486235280185"),
    ("-0.00019981745997355255061991", "-0.00031394569060142799808175"),
];

const ESTHETIC: [(&str, &str); 11] = [
    ("4.886821584515", "0"),
    ("0.036565359077", "-0.012421753685"),
    ("0.0131103199420", "-0.017152133508"),
    ("-0.0023895069366", "-0.0506880727105"),
    ("-0.017328669452", "0.025036392542"),
    ("0.011186380630", "-0.0066357472861"),
    ("0.0086354015002", "0.018593736873"),
    ("-0.014899262928", "0.0297436287202"),
    ("-0.003867454968", "0.0064534688733"),
    ("0.0033747695643", "0.006159612843"),
    ("-0.002149675882", "0.006474570022"),
];

fn report(id: &str, ok: bool, elapsed: Duration, limit: Duration, detail: &str) -> bool {
    let pass = ok && elapsed <= limit;
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "{} criterion {id}: {detail} [{:.2} s, limit {} s]",
        if pass { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    )
    .unwrap();
    pass
}

fn jsr6() -> JsrConfig {
    JsrConfig { ell_max: 6, ..JsrConfig::default() }
}

fn expand<S: MidScalar>(rep: &LinRep, prec: u32, ell_max: usize) -> AsymptoticExpansion<S> {
    let sd = spectral_data::<S>(rep, prec, &jsr6()).unwrap();
    expansion(rep, &sd, &ExpansionConfig { fourier: FourierConfig { prec, ell_max, ..FourierConfig::default() } }).unwrap()
}

fn pascal_exponent() -> bool {
    let t = Instant::now();
    let rep = models::pascal_rhombus();
    let sd = spectral_data::<BigFloat>(&rep, 128, &jsr6()).unwrap();
    let i = (0..sd.eigen.len()).max_by(|&a, &b| sd.eigen[a].abs_upper().partial_cmp(&sd.eigen[b].abs_upper()).unwrap()).unwrap();
    let e = log_q(&sd.eigen[i], 2, 128).unwrap();
    let ok = matches_complex(&e, "1.83250638358045", "0") && e.rad() < 1e-12;
    report("1", ok, t.elapsed(), Duration::from_secs(1), &format!("exponent rad {:.1e}", e.rad()))
}

fn table_matches<S: MidScalar>(t: &FourierTable<S>, want: &[(&str, &str)]) -> (bool, f64) {
    let mut ok = true;
    let mut rad: f64 = 0.0;
    for (l, (re, im)) in want.iter().enumerate() {
        let c = t.coeff(l as i64).unwrap();
        ok &= matches_complex(c, re, im);
        rad = rad.max(c.rad());
    }
    (ok, rad)
}

fn pascal_table(tables: &mut Vec<FourierTable<BigFloat>>) -> bool {
    let t = Instant::now();
    let e = expand::<BigFloat>(&models::pascal_rhombus(), 160, 10);
    let fl = &e.terms[0].fluctuation;
    let (ok, rad) = table_matches(fl, &PASCAL);
    tables.push(fl.clone());
    report("2", ok && rad < 1e-20, t.elapsed(), Duration::from_secs(120), &format!("pascal l = 0..10 at 160 bits, max rad {rad:.1e}"))
}

fn esthetic_table(tables: &mut Vec<FourierTable<BigFloat>>) -> bool {
    let t = Instant::now();
    let e = expand::<BigFloat>(&models::esthetic(4), 128, 20);
    let fl = &e.terms[0].fluctuation;
    let eff = fl.effective();
    let (ok, rad) = table_matches(&eff, &ESTHETIC);
    tables.push(fl.clone());
    let shape = fl.period == 2 && fl.one_periodic;
    report(
        "3",
        ok && rad < 1e-10 && shape,
        t.elapsed(),
        Duration::from_secs(120),
        &format!("esthetic:4 l = 0..10, max rad {rad:.1e}, period {}, 1-periodic {}", fl.period, fl.one_periodic),
    )
}

fn delange(tables: &mut Vec<FourierTable<BigFloat>>) -> bool {
    let t = Instant::now();
    let e = expand::<BigFloat>(&models::sum_of_digits(2), 128, 10);
    let fl = &e.terms.iter().find(|t| t.k == 1).unwrap().fluctuation;
    let phi0 = fl.coeff(0).unwrap();
    let ln2 = RBall::<BigFloat>::ln2(256);
    let target = RBall::<BigFloat>::one(256).div_ref(&ln2).div_i64(2);
    let mut ok = phi0.re.with_precision(256).overlaps(&target) && phi0.im.contains_zero() && phi0.rad() < 1e-25;
    for l in 1..=10i64 {
        ok &= fl.coeff(l).unwrap().contains_zero() && fl.coeff(-l).unwrap().contains_zero();
    }
    for t in &e.terms {
        tables.push(t.fluctuation.clone());
    }
    report("4", ok, t.elapsed(), Duration::from_secs(30), &format!("sum-of-digits phi_0 rad {:.1e}", phi0.rad()))
}

fn jsr_suite() -> bool {
    let mut all = true;
    let cases: Vec<(&str, f64, bool)> =
        vec![("pascal", 2.0, true), ("esthetic:2", 1.0, false), ("esthetic:3", 1.0, false), ("esthetic:4", 1.0, false), ("esthetic:5", 1.0, false), ("sum-of-digits", 1.0, false)];
    let mut slowest = Duration::ZERO;
    let mut detail = Vec::new();
    for (name, r, witness) in cases {
        let s = Instant::now();
        let sd = spectral_data::<f64>(&models::by_name(name).unwrap(), 53, &jsr6()).unwrap();
        slowest = slowest.max(s.elapsed());
        let mut ok = sd.jsr.r.lo == r && sd.jsr.r.hi == r;
        if witness {
            ok &= sd.jsr.finiteness_witness.as_ref().map(|w| w.len()) == Some(1);
        }
        all &= ok;
        detail.push(format!("{name} R = [{}, {}]", sd.jsr.r.lo, sd.jsr.r.hi));
    }
    report("5", all, slowest, Duration::from_secs(10), &format!("{}; time of the slowest model", detail.join(", ")))
}

fn summatory_routes() -> bool {
    for name in MODELS {
        let rep = models::by_name(name).unwrap();
        let mut running = Rational::from_integer(0.into());
        for n in 0..=10_000u64 {
            if rep.summatory_fast(&BigInt::from(n)).1 != running {
                return false;
            }
            running += rep.term_u64(n);
        }
        if rep.summatory_direct(10_000) != rep.summatory_fast(&BigInt::from(10_000)).1 {
            return false;
        }
    }
    true
}

fn residual_points() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for name in MODELS {
        let rep = models::by_name(name).unwrap();
        let cfg = DirichletConfig { prec: 53, ..DirichletConfig::for_rep(&rep) };
        let ctx = DirichletContext::<f64>::new(&rep, &cfg, &Matrix::identity(rep.d)).unwrap();
        let mut done = 0;
        let mut draws = 0;
        while done < 20 {
            draws += 1;
            if draws > 40 {
                return false;
            }
            let s = CBall::from_f64(rng.gen_range(-1.0..4.0), rng.gen_range(-8.0..8.0), 53);
            match functional_residual(&ctx, &s, 2) {
                Ok(r) => {
                    if !r.data.iter().all(|j| j.coeffs.iter().all(|c| c.contains_zero())) {
                        return false;
                    }
                    done += 1;
                }
                // A random point landed within a ball radius of a pole line.
                Err(DirichletError::NearPole(_)) => {}
                Err(_) => return false,
            }
        }
    }
    true
}

fn ball_fuzz() -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let rat = |p: i64, q: i64| Rational::new(p.into(), q.into());
    for _ in 0..10_000 {
        let x = rat(rng.gen_range(-10_000..10_000), rng.gen_range(1..1000));
        let y = rat(rng.gen_range(-10_000..10_000), rng.gen_range(1..1000));
        let prec = [53u32, 64, 128, 200][rng.gen_range(0..4)];
        let bx = RBall::<BigFloat>::from_rational(&x, prec);
        let by = RBall::<BigFloat>::from_rational(&y, prec);
        let fx = RBall::<f64>::from_rational(&x, 53);
        let fy = RBall::<f64>::from_rational(&y, 53);
        let mut ok = bx.add_ref(&by).contains_rational(&(&x + &y))
            && bx.sub_ref(&by).contains_rational(&(&x - &y))
            && bx.mul_ref(&by).contains_rational(&(&x * &y))
            && fx.mul_ref(&fy).contains_rational(&(&x * &y))
            && fx.sub_ref(&fy).contains_rational(&(&x - &y));
        if y != rat(0, 1) {
            ok &= bx.div_ref(&by).contains_rational(&(&x / &y)) && fx.div_ref(&fy).contains_rational(&(&x / &y));
        }
        let z = CBall::new(bx.clone(), by.clone());
        let sq = z.mul_ref(&z);
        ok &= sq.re.contains_rational(&(&x * &x - &y * &y)) && sq.im.contains_rational(&(rat(2, 1) * &x * &y));
        if !ok {
            return false;
        }
    }
    true
}

fn refinement() -> bool {
    let rep = models::pascal_rhombus();
    let lo = expand::<BigFloat>(&rep, 64, 3);
    let hi = expand::<BigFloat>(&rep, 128, 3);
    let (a, b) = (&lo.terms[0].fluctuation, &hi.terms[0].fluctuation);
    a.iter().zip(b.iter()).all(|((_, x), (_, y))| x.overlaps(y) && y.rad() <= x.rad())
        && lo.terms[0].exponent.overlaps(&hi.terms[0].exponent)
}

fn property_suite(tables: &[FourierTable<BigFloat>]) -> bool {
    let t = Instant::now();
    let a = summatory_routes();
    let b = residual_points();
    let c = ball_fuzz();
    let d = tables.iter().all(|t| t.conjugate_symmetric());
    let e = refinement();
    report(
        "6",
        a && b && c && d && e,
        t.elapsed(),
        Duration::from_secs(300),
        &format!("summatory {a}, residuals {b}, ball fuzz {c}, conjugate symmetry {d} ({} tables), refinement {e}", tables.len()),
    )
}

fn dual_routes() -> bool {
    let t = Instant::now();
    let degree = 1999;
    let mut ok = true;
    let mut detail = Vec::new();
    for name in ["pascal", "esthetic:4"] {
        let rep = models::by_name(name).unwrap();
        let sd = spectral_data::<f64>(&rep, 53, &jsr6()).unwrap();
        let p = max_period(&rep, &sd, 53).unwrap();
        let cfg = ExpansionConfig { fourier: FourierConfig { prec: 53, ell_max: degree * p, ..FourierConfig::default() } };
        let e = expansion(&rep, &sd, &cfg).unwrap();
        let rows = dual_route(&rep, &e, 0, 256, 20, degree);
        let worst = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
        ok &= rows.len() == 256 && worst <= 0.01;
        detail.push(format!("{name} max diff {worst:.2e}"));
    }
    report("7", ok, t.elapsed(), Duration::from_secs(600), &detail.join(", "))
}

#[test]
fn acceptance() {
    let mut tables = Vec::new();
    let results = [
        pascal_exponent(),
        pascal_table(&mut tables),
        esthetic_table(&mut tables),
        delange(&mut tables),
        jsr_suite(),
        property_suite(&tables),
        dual_routes(),
    ];
    let failed: Vec<usize> = results.iter().enumerate().filter(|(_, &ok)| !ok).map(|(i, _)| i + 1).collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
