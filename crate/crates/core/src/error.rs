use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum BallError {
    #[error("divisor contains zero")]
    DivisorContainsZero,
    #[error("leading jet coefficient contains zero")]
    LeadingCoefficientContainsZero,
    #[error("ball meets the branch cut (-inf, 0]")]
    BranchCut,
    #[error("argument outside the domain: {0}")]
    Domain(String),
    #[error("valuation not certified: coefficient {0} of the denominator contains zero")]
    ValuationNotCertified(usize),
    #[error("denominator coefficient {0} is certified non-zero below the declared valuation")]
    ValuationTooHigh(usize),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum LinRepError {
    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("dimension mismatch at {path}: {msg}")]
    DimensionMismatch { path: String, msg: String },
    #[error("mode violation: {0}")]
    ModeViolation(String),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ModelError {
    #[error("incomplete transducer: {0}")]
    IncompleteTransducer(String),
    #[error("transducer parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("window insufficient: {0}")]
    WindowInsufficient(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    LinRep(#[from] LinRepError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum SpectralError {
    #[error("eigenvalue cluster unresolved: {0}")]
    ClusterUnresolved(String),
    #[error("rank ambiguous: {0}")]
    RankAmbiguous(String),
    #[error("gap unresolvable: eigenvalue modulus {0} straddles R")]
    GapUnresolvable(String),
    #[error("inconsistent eigenvalue family: {0}")]
    InconsistentFamily(String),
    #[error(transparent)]
    Ball(#[from] BallError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum DirichletError {
    #[error("outside the domain of the bound: {0}")]
    Domain(String),
    #[error("truncation budget exceeded: k_max = {0}")]
    TruncationBudgetExceeded(usize),
    #[error("too close to a pole: pivot in column {0} not certified non-zero")]
    NearPole(usize),
    #[error(transparent)]
    Ball(#[from] BallError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum FourierError {
    #[error("pole order exceeded: coefficient of Z^{0} not certified zero")]
    PoleOrderExceeded(i64),
    #[error("pole site coincides with s = 0")]
    ZeroPoleSite,
    #[error("log-power index {k} outside 0..{m}")]
    InvalidLogPower { k: usize, m: usize },
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Ball(#[from] BallError),
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AsymptoteError {
    #[error("constants K and theta are unsupported when 1 is an eigenvalue of C and R < 1")]
    UnsupportedConstants,
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

/// Crate-wide error with the exit-code classification used by the CLI.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Ball(#[from] BallError),
    #[error(transparent)]
    LinRep(#[from] LinRepError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Fourier(#[from] FourierError),
    #[error(transparent)]
    Asymptote(#[from] AsymptoteError),
}

impl Error {
    /// 2 = numeric certification, 3 = input, 4 = unsupported.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::LinRep(_) | Error::Model(_) => 3,
            Error::Asymptote(AsymptoteError::UnsupportedConstants) => 4,
            Error::Fourier(FourierError::ZeroPoleSite) => 4,
            _ => 2,
        }
    }
}
