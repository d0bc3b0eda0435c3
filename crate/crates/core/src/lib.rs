//! Rigorous asymptotics of summatory functions of q-regular sequences.
//!
//! The numeric core is generic over the midpoint scalar of its balls
//! ([`scalar::MidScalar`]): `f64` for fast low-precision work and
//! [`bigfloat::BigFloat`] for arbitrary precision. Sequence-level data is exact
//! rational.

pub mod asymptote;
pub mod ball;
pub mod bigfloat;
pub mod dirichlet;
pub mod error;
pub mod fourier;
pub mod linalg;
pub mod linrep;
pub mod models;
pub mod poly;
pub mod scalar;
pub mod spectral;

pub use error::Error;

/// Exact rationals used for all sequence-level arithmetic.
pub type Rational = num_rational::BigRational;
/// Arbitrary-precision real ball.
pub type Real = ball::RBall<bigfloat::BigFloat>;
/// Arbitrary-precision complex ball.
pub type Complex = ball::CBall<bigfloat::BigFloat>;
/// Arbitrary-precision jet.
pub type ComplexJet = ball::Jet<bigfloat::BigFloat>;
/// Double-precision real ball.
pub type Real64 = ball::RBall<f64>;
/// Double-precision complex ball.
pub type Complex64 = ball::CBall<f64>;
