use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("infeasible bridge: |b - a| = {gap} exceeds c(s - r) = {reach}")]
    InfeasibleSpec { gap: f64, reach: f64 },

    #[error("value {value} outside admissible interval [{lo}, {hi}]")]
    ValueOutsideInterval { value: f64, lo: f64, hi: f64 },

    #[error("noise value {0} outside [0, 1]")]
    NoiseOutOfRange(f64),

    #[error("depth mismatch: expected {expected}, got {actual}")]
    DepthMismatch { expected: u32, actual: u32 },

    #[error("depth {0} exceeds the maximum of {max}", max = crate::grid::MAX_DEPTH)]
    DepthOverflow(u32),

    #[error("path violates the Lipschitz bound at t = {t}: value {value} outside [{lo}, {hi}]")]
    PathViolatesLipschitz { t: f64, value: f64, lo: f64, hi: f64 },

    #[error("segment {segment} starts at {found}, previous segment ends at {expected}")]
    JunctionMismatch {
        segment: usize,
        expected: f64,
        found: f64,
    },

    #[error("invalid horizon: {0}")]
    InvalidHorizon(String),

    #[error("time {t} is not on the depth-{depth} grid")]
    TimeNotOnGrid { t: f64, depth: u32 },

    #[error("time {t} outside the path domain [{lo}, {hi}]")]
    TimeOutOfRange { t: f64, lo: f64, hi: f64 },

    #[error("measure of this domain is not a probability; use the Lebesgue window estimator")]
    NonProbabilityMeasure,

    #[error("initial-value constraint must be a finite interval (the measure is infinite otherwise)")]
    UnboundedInitialConstraint,

    #[error("quadrature dimension {dim} with {points} points per axis is too large")]
    DimensionTooLarge { dim: usize, points: usize },

    #[error("admissible interval at the node is degenerate")]
    DegenerateInterval,

    #[error("invalid event: {0}")]
    InvalidEvent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
