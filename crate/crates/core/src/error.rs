use thiserror::Error;

use crate::bounds::BoundError;
use crate::document::DocumentError;
use crate::ensemble::EnsembleError;
use crate::levy::LevyError;
use crate::metrics::MetricsError;
use crate::reference_laws::ReferenceError;
use crate::spectra::SpectraError;

/// Any error raised by the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Levy(#[from] LevyError),
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Spectra(#[from] SpectraError),
    #[error(transparent)]
    Bound(#[from] BoundError),
    #[error(transparent)]
    Reference(#[from] ReferenceError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Document(#[from] DocumentError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

impl Error {
    /// Stable short code for diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Levy(_) => "E_MODEL",
            Error::Ensemble(_) => "E_ENSEMBLE",
            Error::Spectra(_) => "E_SPECTRA",
            Error::Bound(_) => "E_BOUND",
            Error::Reference(_) => "E_LAW",
            Error::Metrics(_) => "E_METRICS",
            Error::Document(_) => "E_DOCUMENT",
            Error::Config(_) => "E_CONFIG",
        }
    }
}
