//! Exact spectra of the quantum Rabi model and small asymmetric Dicke
//! models.
//!
//! The regular spectrum of the Rabi model is obtained from the zeros of the
//! G-functions `G_+-(x)`, the exceptional spectrum from the Judd condition
//! and the exceptional G-functions `G^(m)_+-`. Every result can be
//! cross-checked against truncated Fock-space diagonalization ([`oracle`])
//! and, for the Rabi model, against the continued-fraction condition
//! ([`contfrac`]).
//!
//! Internally the mode frequency is fixed to one; see
//! [`RabiParams::rescaled`].

pub mod contfrac;
pub mod dicke;
pub mod error;
pub mod gfunction;
pub mod oracle;
pub mod params;
pub mod precision;
pub mod recurrence;
pub mod rootfind;
pub mod spectrum;

pub use error::{Error, Result};
pub use gfunction::{g_exceptional_nd, g_regular, judd_condition, pole_set, GEvaluation};
pub use params::{Dicke2Params, Dicke3Params, Parity, RabiParams, SpectralParameter};
pub use recurrence::{
    exceptional_d_series, exceptional_nd_series, f_coefficient, judd_coefficient, regular_series, wavefunction,
    CoefficientSeries, SeriesConfig, SeriesVariant,
};
