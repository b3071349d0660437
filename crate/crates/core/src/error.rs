use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid intensity: {0}")]
    InvalidIntensity(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// The cumulative hazard stays bounded and no full atom terminates it.
    #[error("intensity is defective: cumulative hazard stays bounded ({0})")]
    Defective(String),

    #[error("hazard of piece [{start}, {end}) is not representable by a piecewise cubic hazard with terminal poles")]
    NotRepresentable { start: f64, end: f64 },

    #[error("integral diverges: {0}")]
    Divergent(String),

    #[error("grid step mismatch: {0} vs {1}")]
    StepMismatch(f64, f64),

    #[error("horizon {horizon} truncates tail mass {tail_mass:e} (limit 1e-6)")]
    TailTruncated { horizon: f64, tail_mass: f64 },

    #[error("horizon exceeded: {requested} > {horizon}")]
    HorizonExceeded { requested: f64, horizon: f64 },

    #[error("renewal series does not converge: {0}")]
    NonConvergent(String),

    #[error("path exceeded {cap} renewal events before time {time}")]
    EventCap { cap: u64, time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
