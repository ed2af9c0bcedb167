use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument was NaN or infinite, or outside the mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A frequency-domain denominator came too close to zero.
    #[error("singular denominator at omega = {omega}")]
    Singularity { omega: f64 },

    /// Grid shapes are inconsistent or too small for the operation.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// A configuration value is out of range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The requested wavelet name is not bundled.
    #[error("unknown wavelet `{0}`")]
    UnknownWavelet(String),

    /// A constructed filter bank did not pass the perfect-reconstruction screen.
    #[error("filter bank failed biorthogonality screen (max deviation {deviation:.6e})")]
    Biorthogonality { deviation: f64 },

    /// Iterative reconstruction hit its iteration cap.
    #[error("reconstruction did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    /// An error tagged with the pipeline stage that produced it.
    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at(self, stage: &'static str) -> Error {
        Error::Stage { stage, source: Box::new(self) }
    }

    /// Stage name if this error was raised inside the detection pipeline.
    pub fn stage(&self) -> Option<&'static str> {
        match self {
            Error::Stage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
