use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("params.{field} must be {requirement} (got {value})")]
    InvalidParam {
        field: &'static str,
        requirement: &'static str,
        value: f64,
    },
    #[error("state component {component} is not finite ({value})")]
    NonFiniteState { component: &'static str, value: f64 },
    #[error("no free-walking solution for r = {r} (requires r > 1)")]
    NoFreeWalking { r: f64 },
    #[error("invalid integrator config: {0}")]
    InvalidIntegratorConfig(String),
    #[error("invalid classifier config: {0}")]
    InvalidClassifierConfig(String),
    #[error("invalid sweep spec: {0}")]
    InvalidSweep(String),
    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64 },
    #[error("non-finite state encountered at t = {t}")]
    NonFiniteIntegration { t: f64 },
    #[error("memory history is empty")]
    EmptyHistory,
    #[error("trajectory too short: {0}")]
    TrajectoryTooShort(String),
    #[error("not oscillatory: {crossings} zero crossings in window")]
    NotOscillatory { crossings: usize },
    #[error("rule not applicable: {0}")]
    RuleNotApplicable(&'static str),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
