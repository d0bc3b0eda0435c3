//! `regseq`: asymptotics of summatory functions of q-regular sequences.
//!
//! Data goes to stdout (or `--output`), diagnostics to stderr. Exit codes:
//! 0 success, 1 validation failure, 2 numeric certification failure,
//! 3 bad input, 4 unsupported request.

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use regseq_core::asymptote::{dual_route, expansion, max_period, ExpansionConfig, SampleRow};
use regseq_core::ball::CBall;
use regseq_core::bigfloat::BigFloat;
use regseq_core::dirichlet::{functional_residual, DirichletConfig, DirichletContext};
use regseq_core::fourier::FourierConfig;
use regseq_core::linalg::Matrix;
use regseq_core::linrep::{parse_linrep, LinRep};
use regseq_core::models;
use regseq_core::scalar::MidScalar;
use regseq_core::spectral::{spectral_data, JsrConfig};
use regseq_core::error::LinRepError;
use regseq_core::{Error, Rational};
use serde::Serialize;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const DEGREE_CAP: u64 = 100_000;
const VALIDATE_N: u64 = 10_000;

#[derive(Parser, Debug)]
#[command(name = "regseq", version, about = "Asymptotic analysis of summatory functions of q-regular sequences")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Spectral data, JSR bounds and the full asymptotic expansion.
    Analyze(RunConfig),
    /// Fourier coefficient tables of every fluctuation.
    Fourier(RunConfig),
    /// Empirical against truncated-series values of one fluctuation, for plotting.
    Sample(RunConfig),
    /// Run the invariant suite on the input.
    Validate(RunConfig),
    /// Joint spectral radius report.
    Jsr(RunConfig),
}

#[derive(Args, Debug, Clone)]
#[group(id = "source", required = true, multiple = false)]
struct Source {
    /// Built-in model: sum-of-digits[:q], esthetic:<q>, pascal, stern-brocot.
    #[arg(long, group = "source")]
    model: Option<String>,
    /// Linear representation in JSON.
    #[arg(long, group = "source")]
    input: Option<PathBuf>,
    /// Transducer in the line format.
    #[arg(long, group = "source")]
    transducer: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct RunConfig {
    #[command(flatten)]
    source: Source,
    /// Working precision in bits; 53 or less selects double-precision midpoints.
    #[arg(long, default_value_t = 128, value_parser = clap::value_parser!(u32).range(2..))]
    prec: u32,
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(2..))]
    n0: u64,
    /// Fourier coefficients are computed for |l| <= ell-max.
    #[arg(long, default_value_t = 10)]
    ell_max: usize,
    /// Degree of the truncated series in `sample`.
    #[arg(long, default_value_t = 1999, value_parser = clap::value_parser!(u64).range(1..=DEGREE_CAP))]
    degree: u64,
    #[arg(long, default_value_t = 256, value_parser = clap::value_parser!(u64).range(1..))]
    u_points: u64,
    /// Sample at N = q^(j + u).
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u32).range(1..))]
    j_scale: u32,
    /// Index of the term sampled by `sample`.
    #[arg(long, default_value_t = 0)]
    term: usize,
    /// Maximal product length of the JSR enumeration.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    jsr_ell_max: u64,
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
}

/// An invariant of `validate` that does not hold.
#[derive(Debug)]
struct Violation(String);

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invariant violated: {}", self.0)
    }
}

impl std::error::Error for Violation {}

#[derive(Debug)]
struct Unsupported(String);

impl std::fmt::Display for Unsupported {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Unsupported {}

/// Input problems that are not core errors (files, formats).
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn input_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<Violation>().is_some() {
        return 1;
    }
    if e.downcast_ref::<InputError>().is_some() || e.downcast_ref::<std::io::Error>().is_some() {
        return 3;
    }
    if e.downcast_ref::<Unsupported>().is_some() {
        return 4;
    }
    match e.downcast_ref::<Error>() {
        Some(err) => err.exit_code() as u8,
        None => 2,
    }
}

fn is_mode_violation(e: &anyhow::Error) -> bool {
    matches!(e.downcast_ref::<Error>(), Some(Error::LinRep(LinRepError::ModeViolation(_))))
}

fn core<E: Into<Error>>(e: E) -> anyhow::Error {
    anyhow::Error::new(e.into())
}

fn load(src: &Source) -> anyhow::Result<(String, LinRep)> {
    if let Some(m) = &src.model {
        return Ok((m.clone(), models::by_name(m).map_err(core)?));
    }
    if let Some(p) = &src.input {
        let text = std::fs::read_to_string(p).map_err(|e| input_err(format!("{}: {e}", p.display())))?;
        let rep = parse_linrep(&text).map_err(core).with_context(|| format!("in {}", p.display()))?;
        return Ok((p.display().to_string(), rep));
    }
    if let Some(p) = &src.transducer {
        let text = std::fs::read_to_string(p).map_err(|e| input_err(format!("{}: {e}", p.display())))?;
        let t = models::parse_transducer(&text).map_err(core).with_context(|| format!("in {}", p.display()))?;
        let rep = models::transducer_to_linrep(&t).map_err(core)?;
        return Ok((p.display().to_string(), rep));
    }
    Err(input_err("one of --model, --input, --transducer is required"))
}

fn jsr_config(cfg: &RunConfig) -> JsrConfig {
    JsrConfig { ell_max: cfg.jsr_ell_max as usize, prec: cfg.prec.max(64), ..JsrConfig::default() }
}

fn fourier_config(cfg: &RunConfig, ell_max: usize) -> FourierConfig {
    FourierConfig { prec: cfg.prec, n0: cfg.n0, ell_max, ..FourierConfig::default() }
}

struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    fn open(path: &Option<PathBuf>) -> anyhow::Result<Self> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(std::io::BufWriter::new(
                std::fs::File::create(p).map_err(|e| input_err(format!("{}: {e}", p.display())))?,
            )),
            None => Box::new(std::io::stdout().lock()),
        };
        Ok(Sink { out })
    }

    fn json<T: Serialize>(&mut self, v: &T) -> anyhow::Result<()> {
        serde_json::to_writer_pretty(&mut self.out, v)?;
        writeln!(self.out)?;
        self.out.flush()?;
        Ok(())
    }
}

fn no_csv(cfg: &RunConfig, cmd: &str) -> anyhow::Result<()> {
    if cfg.format == Some(Format::Csv) {
        return Err(input_err(format!("{cmd} only writes JSON")));
    }
    Ok(())
}

#[derive(Serialize)]
struct Header {
    source: String,
    q: u32,
    d: usize,
    mode: String,
    prec: u32,
    n0: u64,
    ell_max: usize,
}

fn header(name: &str, rep: &LinRep, cfg: &RunConfig) -> Header {
    Header {
        source: name.to_string(),
        q: rep.q,
        d: rep.d,
        mode: format!("{:?}", rep.mode),
        prec: cfg.prec,
        n0: cfg.n0,
        ell_max: cfg.ell_max,
    }
}

fn analyze<S: MidScalar>(name: &str, rep: &LinRep, cfg: &RunConfig, tables_only: bool) -> anyhow::Result<()> {
    let sd = spectral_data::<S>(rep, cfg.prec, &jsr_config(cfg)).map_err(core)?;
    for v in &sd.sanity.violations {
        log::warn!("{v}");
    }
    let ex = expansion(rep, &sd, &ExpansionConfig { fourier: fourier_config(cfg, cfg.ell_max) }).map_err(core)?;
    for n in &ex.notes {
        log::info!("{n}");
    }
    let mut sink = Sink::open(&cfg.output)?;
    if tables_only {
        #[derive(Serialize)]
        struct Report {
            input: Header,
            tables: Vec<regseq_core::fourier::FourierTableJson>,
        }
        return sink.json(&Report {
            input: header(name, rep, cfg),
            tables: ex.terms.iter().map(|t| t.fluctuation.to_json()).collect(),
        });
    }
    #[derive(Serialize)]
    struct Report {
        input: Header,
        spectral: regseq_core::spectral::SpectralJson,
        expansion: regseq_core::asymptote::ExpansionJson,
    }
    sink.json(&Report { input: header(name, rep, cfg), spectral: sd.to_json(), expansion: ex.to_json() })
}

fn sample(rep: &LinRep, cfg: &RunConfig) -> anyhow::Result<()> {
    // The series is evaluated in double precision anyway.
    let prec = cfg.prec.min(53);
    let sd = spectral_data::<f64>(rep, prec, &jsr_config(cfg)).map_err(core)?;
    let p = max_period(rep, &sd, prec).map_err(core)?;
    let degree = cfg.degree as usize;
    let fc = FourierConfig { prec, n0: cfg.n0, ell_max: degree * p, ..FourierConfig::default() };
    let ex = expansion(rep, &sd, &ExpansionConfig { fourier: fc }).map_err(core)?;
    if ex.terms.is_empty() {
        return Err(Unsupported("the expansion has no main term to sample".into()).into());
    }
    if cfg.term >= ex.terms.len() {
        return Err(input_err(format!("--term {} but the expansion has {} terms", cfg.term, ex.terms.len())));
    }
    let rows = dual_route(rep, &ex, cfg.term, cfg.u_points as usize, cfg.j_scale, degree);
    let max = rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
    log::info!("max |empirical - series| = {max:e}");
    let mut sink = Sink::open(&cfg.output)?;
    match cfg.format.unwrap_or(Format::Csv) {
        Format::Json => sink.json(&rows),
        Format::Csv => write_csv(&mut sink.out, &rows),
    }
}

fn write_csv(out: &mut dyn Write, rows: &[SampleRow]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ValidationReport {
    input: Header,
    checks: Vec<String>,
}

fn validate(name: &str, rep: &LinRep, cfg: &RunConfig) -> anyhow::Result<()> {
    let mut checks = Vec::new();
    rep.validate().map_err(|e| Violation(format!("mode gate: {e}")))?;
    checks.push(format!("mode gate ({:?})", rep.mode));

    let f = rep.f_table(VALIDATE_N as usize);
    for n in 1..(VALIDATE_N as usize) {
        if f[n] != rep.matrix_f(&BigInt::from(n)) {
            return Err(Violation(format!("recursion f(qn + r) = A_r f(n) at n = {n}")).into());
        }
    }
    let mut running = Rational::from_integer(0.into());
    for n in 0..=VALIDATE_N {
        let big = BigInt::from(n);
        let direct = running.clone();
        if rep.summatory(&big) != direct {
            return Err(Violation(format!("summatory at N = {n}")).into());
        }
        if (n % 97 == 0 || n == VALIDATE_N) && rep.summatory_fast(&big).1 != direct {
            return Err(Violation(format!("summatory_fast at N = {n}")).into());
        }
        if n < VALIDATE_N {
            let x = rep.left.iter().zip(f[n as usize].mul_vec(&rep.initial)).map(|(a, b)| a * b).sum::<Rational>();
            if x != rep.term_u64(n) {
                return Err(Violation(format!("term at n = {n}")).into());
            }
            running += x;
        }
    }
    checks.push(format!("recursion identities up to N = {VALIDATE_N}"));

    let prec = cfg.prec.min(53);
    let dc = DirichletConfig { prec, n0: cfg.n0, ..DirichletConfig::for_rep(rep) };
    let ctx = DirichletContext::<f64>::new(rep, &dc, &Matrix::identity(rep.d)).map_err(core)?;
    for (re, im) in [(3.5, 1.0), (2.2, 0.0), (1.3, 7.0), (0.4, -2.0), (-0.7, 0.3)] {
        let s = CBall::<f64>::from_f64(re, im, prec);
        let r = functional_residual(&ctx, &s, 2).map_err(core)?;
        if !r.data.iter().all(|j| j.coeffs.iter().all(|c| c.contains_zero())) {
            return Err(Violation(format!("functional equation residual at s = {re} + {im}i")).into());
        }
    }
    checks.push("functional equation residuals contain 0".into());
    Sink::open(&cfg.output)?.json(&ValidationReport { input: header(name, rep, cfg), checks })
}

fn jsr(rep: &LinRep, cfg: &RunConfig) -> anyhow::Result<()> {
    let sd = spectral_data::<f64>(rep, 53, &jsr_config(cfg)).map_err(core)?;
    Sink::open(&cfg.output)?.json(&sd.jsr.to_json())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (cmd, cfg) = match &cli.cmd {
        Command::Analyze(c) => ("analyze", c),
        Command::Fourier(c) => ("fourier", c),
        Command::Sample(c) => ("sample", c),
        Command::Validate(c) => ("validate", c),
        Command::Jsr(c) => ("jsr", c),
    };
    let (name, rep) = match load(&cfg.source) {
        Err(e) if cmd == "validate" && is_mode_violation(&e) => return Err(Violation(format!("mode gate: {e:#}")).into()),
        r => r?,
    };
    log::info!("{cmd}: {name} (q = {}, d = {})", rep.q, rep.d);
    let big = cfg.prec > 53;
    match cmd {
        "analyze" | "fourier" => {
            no_csv(cfg, cmd)?;
            let tables = cmd == "fourier";
            if big {
                analyze::<BigFloat>(&name, &rep, cfg, tables)
            } else {
                analyze::<f64>(&name, &rep, cfg, tables)
            }
        }
        "sample" => sample(&rep, cfg),
        "validate" => {
            no_csv(cfg, cmd)?;
            validate(&name, &rep, cfg)
        }
        "jsr" => {
            no_csv(cfg, cmd)?;
            jsr(&rep, cfg)
        }
        _ => Err(anyhow!("unknown command {cmd}")),
    }
}

fn init_threads() {
    let n = match std::env::var("REGSEQ_THREADS") {
        Ok(v) => match v.parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => {
                log::warn!("ignoring REGSEQ_THREADS={v:?}");
                return;
            }
        },
        Err(_) => return,
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
        log::warn!("thread pool: {e}");
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    init_threads();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
