use thiserror::Error;

use crate::ode::OdeError;
use crate::roots::RootError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{field}`: {reason}")]
    InvalidArgument { field: &'static str, reason: String },

    #[error("invalid profile at z = {z:e}: {reason}")]
    InvalidProfile { z: f64, reason: String },

    #[error("z = {z:e} is outside the support [0, {z_plus:e})")]
    OutOfSupport { z: f64, z_plus: f64 },

    #[error("{what} = {value:e} is outside [{lo:e}, {hi:e}]")]
    Domain {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("the potential is singular at the vacuum end; use the series data")]
    SingularPoint,

    #[error("4K + 1 = {0:e} <= 0: oscillatory singularity not supported")]
    OscillatorySingularity(f64),

    #[error("recurrence denominator vanishes at order {0}")]
    Resonance(usize),

    #[error("seed offset {delta:e} too large for certified accuracy; try {suggested:e}")]
    SeedStep { delta: f64, suggested: f64 },

    #[error("integration failed at x = {x:e}: {source}")]
    Integration { x: f64, source: OdeError },

    #[error("mode {n} not bracketed below the search cap {cap:e}")]
    SearchWindow { n: usize, cap: f64 },

    #[error("mode {n} has {zero_count} interior zeros")]
    ModeIdentification { n: usize, zero_count: usize },

    #[error("amplitude too large: {0}")]
    Amplitude(String),

    #[error("threshold root-solve failed at x = {x:e}: {source}")]
    Threshold { x: f64, source: RootError },

    #[error(transparent)]
    Root(#[from] RootError),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        field,
        reason: reason.into(),
    }
}
