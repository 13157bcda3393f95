use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("fugacity {phi} outside the domain [0, {radius}) of the partition function")]
    FugacityDomain { phi: f64, radius: f64 },

    #[error("series diverges at fugacity {phi}: term ratio does not settle below 1 after {terms} terms")]
    Divergence { phi: f64, terms: usize },

    #[error("negative density {0}")]
    NegativeDensity(f64),

    #[error("variance {variance} is not positive at fugacity {phi}")]
    NonPositiveVariance { phi: f64, variance: f64 },

    #[error("density {rho} not reachable below the radius of convergence {radius}")]
    DensityOutOfRange { rho: f64, radius: f64 },

    #[error("invalid jump rate: {0}")]
    InvalidRate(String),

    #[error("inadmissible parameters: max fugacity bound {bound} is not below phi* = {radius}")]
    Inadmissible { bound: f64, radius: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("test function does not belong to the {regime} regime: {reason}")]
    RegimeMismatch { regime: String, reason: String },

    #[error("eigenvalue {index} not resolved: Richardson estimate {estimate:.3e} exceeds {limit:.3e}")]
    Accuracy { index: usize, estimate: f64, limit: f64 },

    #[error("hydrodynamic solve produced negative density at step {step}")]
    NegativeSolution { step: usize },

    #[error("statistic must be positive for a log-log fit, got {0}")]
    NonPositiveStatistic(f64),

    #[error("slope fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),

    #[error("unknown experiment `{0}`")]
    UnknownExperiment(String),

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
