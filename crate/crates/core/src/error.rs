use thiserror::Error;

use crate::gfunction::GEvaluation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The spectral parameter sits on (or within the guard distance of) a
    /// pole of the coefficient functions. Such points belong to the
    /// exceptional machinery, not the regular series.
    #[error("x = {x} lies within {guard:e} of the pole at {pole}")]
    PoleAtInteger { x: f64, pole: u64, guard: f64 },

    #[error("series did not converge within {max_order} terms (last weighted term {last_term:e})")]
    NoConvergence { max_order: usize, last_term: f64 },

    /// The sign of a G-function value could not be certified even at the
    /// highest working precision. The evaluation is carried along so the
    /// caller may still inspect it.
    #[error("sign of G({}) is indeterminate: |{}| <= 3 * {:e}", .0.x, .0.value, .0.truncation_error)]
    IndeterminateSign(Box<GEvaluation>),

    #[error("bracket [{a}, {b}] lost its sign change (f(a) = {fa:e}, f(b) = {fb:e})")]
    LostBracket { a: f64, b: f64, fa: f64, fb: f64 },

    #[error("point z = {z} lies outside the convergence disks of both expansions")]
    OutsideDomain { z: num_complex::Complex64 },

    #[error("eigenvalue iteration failed to converge: {0}")]
    ConvergenceFailure(String),

    #[error("cutoff exceeded the configured maximum of {max_cutoff} without certifying {k} levels")]
    CutoffExplosion { max_cutoff: usize, k: usize },

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
}
