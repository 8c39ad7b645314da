//! Complex polynomial arithmetic, root finding, Cauchy differentiation and
//! the structured least-squares fits used by the reconstruction pipeline.
//!
//! Everything here works in double precision. Tolerances are explicit
//! parameters; [`ARITHMETIC_TOL`] and [`FITTING_TOL`] are the defaults used
//! by the higher-level modules.

mod cauchy;
mod hankel;
mod interpolate;
pub(crate) mod linalg;
mod multipoly;
mod quadrature;
mod roots;
mod unipoly;

pub use cauchy::{cauchy_derivative, ring_derivative, ring_laurent, ring_points};
pub use hankel::{fit_recurrence, hankel_fit, DegreeChoice, HankelFit, HankelOptions};
pub use interpolate::{poly_interpolate, PolyFit};
pub use multipoly::{MultiPoly, ParsePolyError};
pub use quadrature::gauss_legendre;
pub use roots::{poly_roots, poly_roots_with, Root, RootOptions};
pub use unipoly::UniPoly;

pub use num_complex::Complex64 as C64;

/// Default tolerance for arithmetic checks (root residuals, fiber equations).
pub const ARITHMETIC_TOL: f64 = 1e-10;
/// Default tolerance for least-squares fits (recurrences, interpolation).
pub const FITTING_TOL: f64 = 1e-8;

/// Errors raised by the numeric layer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NumericError {
    #[error("polynomial is identically zero")]
    ZeroPolynomial,
    #[error("root iteration did not converge (worst residual {worst_residual:e})")]
    NonConvergence { worst_residual: f64 },
    #[error("non-finite value encountered in {context}")]
    NonFinite { context: &'static str },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no recurrence degree up to {max_degree} fits the data (zero data: {zero_data})")]
    DegreeUndetectable { max_degree: usize, zero_data: bool },
    #[error("system is ill-conditioned (condition {condition:e} exceeds cap {cap:e})")]
    IllConditioned { condition: f64, cap: f64 },
    #[error("data does not fit the model (relative residual {residual:e} > {tol:e})")]
    OverdeterminedMismatch { residual: f64, tol: f64 },
    #[error("not enough data: {0}")]
    InsufficientData(String),
}

/// True when both components are finite.
pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

pub(crate) fn ensure_finite(values: &[C64], context: &'static str) -> Result<(), NumericError> {
    if values.iter().all(|z| is_finite(*z)) {
        Ok(())
    } else {
        Err(NumericError::NonFinite { context })
    }
}
