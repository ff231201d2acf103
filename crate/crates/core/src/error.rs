use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("the positive equilibrium does not exist for these parameters")]
    MissingPositiveEquilibrium,

    #[error("expected the positive equilibrium E*, got {0}")]
    NotPositiveEquilibrium(&'static str),

    #[error("history spans {available} time units but at least {required} are required")]
    InsufficientHistory { required: f64, available: f64 },

    #[error("z = {z} is not a root of G (residual {residual:e})")]
    NotARoot { z: f64, residual: f64 },

    #[error("(i*{omega}, s = {delay}) is not a critical pair: relative residual {residual:e}")]
    NotCriticalPair { omega: f64, delay: f64, residual: f64 },

    #[error("left eigenvector normalization is degenerate (|d (I + s As e^(-iws)) c| = {0:e})")]
    DegenerateNormalization(f64),

    #[error("second-order system for `{vector}` is singular to {conditioning:e} (resonance or zero root)")]
    Resonance { vector: &'static str, conditioning: f64 },

    #[error("direction of the bifurcation is degenerate (chi1 * chi2 ~ 0)")]
    DegenerateDirection,

    #[error("solution diverged at t = {time}")]
    Diverged { time: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
