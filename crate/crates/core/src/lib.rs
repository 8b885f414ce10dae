//! Slow non-adiabatic quench dynamics of topological band models.
//!
//! A band Hamiltonian `H(k) = h(k)·γ` is driven by a time-dependent term on one
//! field component (`g/t` or `βt`) and then left to precess. The long-time
//! average of `⟨γ_i⟩` at every momentum forms a spin texture whose zeros split
//! into band-inversion surfaces (BIS), fixed by the post-quench Hamiltonian,
//! and spin-inversion surfaces (SIS), where the Landau–Zener transition
//! probability equals 1/2. The texture on the BIS gives the winding or Chern
//! number of the post-quench bands.
//!
//! * [`lz`]: closed-form Landau–Zener solution for the `g/t` protocol.
//! * [`tdse`]: adaptive Runge–Kutta reference solver and time averaging.
//! * [`models`]: 1D, 2D and 3D band models and Brillouin-zone grids.
//! * [`scan`]: texture maps over the Brillouin zone.
//! * [`topo`]: zero-set extraction and invariants.
//! * [`io`], [`pipeline`], [`validate`]: configuration, files and workflows.
//!
//! The numerical core is generic over `f32`/`f64` through [`real::Real`].

pub mod io;
pub mod lz;
pub mod models;
pub mod pipeline;
pub mod real;
pub mod scan;
pub mod special;
pub mod tdse;
pub mod topo;
pub mod validate;

use thiserror::Error;

pub use lz::{averaged_spin, transition_probability, Axis, LzError};
pub use models::{ModelError, ModelKind};
pub use scan::{Method, ScanError};
pub use tdse::TdseError;
pub use topo::TopoError;

pub type LzParams64 = lz::LzParams<f64>;
pub type LzParams32 = lz::LzParams<f32>;
pub type ModelParams64 = models::ModelParams<f64>;
pub type ModelParams32 = models::ModelParams<f32>;
pub type BandField64 = models::BandField<f64>;
pub type BandField32 = models::BandField<f32>;
pub type QuenchProtocol64 = tdse::QuenchProtocol<f64>;
pub type QuenchProtocol32 = tdse::QuenchProtocol<f32>;
pub type PointField64 = tdse::PointField<f64>;
pub type PointField32 = tdse::PointField<f32>;
pub type SpinTextureMap64 = scan::SpinTextureMap<f64>;
pub type SpinTextureMap32 = scan::SpinTextureMap<f32>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Lz(#[from] LzError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tdse(#[from] TdseError),
    #[error(transparent)]
    Scan(#[from] ScanError),
    #[error(transparent)]
    Topo(#[from] TopoError),
    #[error("ambiguous zero-set classification: {0}")]
    Ambiguous(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("malformed file: {0}")]
    Format(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<models::GridError> for Error {
    fn from(e: models::GridError) -> Self {
        Error::Config(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            Error::Io(e.to_string())
        } else {
            Error::Format(e.to_string())
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl Error {
    /// Process exit status: 2 for configuration or input problems, 3 for
    /// numerical failures, 4 for ambiguous or ill-conditioned topology.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Lz(_) | Error::Model(_) | Error::Io(_) | Error::Format(_) => 2,
            Error::Tdse(e) => tdse_code(e),
            Error::Scan(e) => match e {
                ScanError::TooManyFailures { .. } | ScanError::ThreadPool(_) => 3,
                ScanError::Tdse(t) => tdse_code(t),
                _ => 2,
            },
            Error::Topo(e) => match e {
                TopoError::IncompleteMap(_) => 3,
                TopoError::IllConditioned { .. } | TopoError::OpenSet(_) => 4,
                _ => 2,
            },
            Error::Validation(_) => 3,
            Error::Ambiguous(_) => 4,
        }
    }
}

fn tdse_code(e: &TdseError) -> i32 {
    match e {
        TdseError::Ode(_) => 3,
        _ => 2,
    }
}
