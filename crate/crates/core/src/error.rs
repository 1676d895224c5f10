use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no root of theta*lambda'(theta) - lambda(theta) on (1, {theta_max}]")]
    NoThetaStar { theta_max: f64 },

    #[error("slope {a} is not attained by -lambda' on the profile domain")]
    SlopeOutOfRange { a: f64 },

    #[error("lattice environment: {0} requires a nonlattice environment")]
    Lattice(&'static str),

    #[error("memory budget exceeded: about {estimated_boxes:.3e} boxes requested, budget allows {budget_boxes}")]
    MemoryBudget {
        estimated_boxes: f64,
        budget_boxes: usize,
    },

    #[error("refused: {0}")]
    Refused(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
}
