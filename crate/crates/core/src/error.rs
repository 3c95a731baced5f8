use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {}", .0.join("; "))]
    InvalidGeometry(Vec<String>),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Fresnel quadrature would alias: the input spacing exceeds what the
    /// quadratic phase allows.
    #[error("undersampled Fresnel quadrature: input spacing {actual_m:e} m exceeds required {required_m:e} m")]
    Undersampled { required_m: f64, actual_m: f64 },

    #[error("density is not normalized (integral = {integral})")]
    Unnormalized { integral: f64 },

    #[error("window carries mass {available} < requested {requested}")]
    InsufficientMass { available: f64, requested: f64 },

    #[error("sample set is empty")]
    EmptySamples,

    #[error("invalid sweep config: {0}")]
    InvalidConfig(String),

    #[error("engine {engine} failed at l = {l_m:e} m: {source}")]
    Engine {
        l_m: f64,
        engine: String,
        #[source]
        source: Box<Error>,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Short stable identifier, used for machine-readable error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidGeometry(_) => "invalid_geometry",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Undersampled { .. } => "undersampled",
            Error::Unnormalized { .. } => "unnormalized",
            Error::InsufficientMass { .. } => "insufficient_mass",
            Error::EmptySamples => "empty_samples",
            Error::InvalidConfig(_) => "invalid_config",
            Error::Engine { .. } => "engine",
            Error::Io { .. } => "io",
            Error::Csv { .. } => "csv",
            Error::Json(_) => "json",
        }
    }
}
