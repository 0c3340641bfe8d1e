use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("system is not strictly hyperbolic at {state:?}: {reason}")]
    NonHyperbolic { state: Vec<f64>, reason: String },

    #[error("state {state:?} lies outside the domain box")]
    OutOfDomain { state: Vec<f64> },

    #[error("wave curve of family {family} left the domain after parameter {reached}")]
    CurveLeftDomain { family: usize, reached: f64 },

    #[error("Newton iteration diverged in {context} (residual {residual:e} after {iterations} iterations)")]
    NewtonDiverged {
        context: &'static str,
        residual: f64,
        iterations: usize,
    },

    #[error("inverse flux map did not converge at {state:?} (residual {residual:e})")]
    InverseDiverged { state: Vec<f64>, residual: f64 },

    #[error("event cap of {cap} exceeded at t = {time}")]
    EventCapExceeded { cap: usize, time: f64 },

    #[error("{count} consecutive events closer than the time-step floor at t = {time}")]
    TimeStepFloor { count: usize, time: f64 },

    #[error("state escaped the domain at t = {time}, x = {position}: {state:?}")]
    DomainEscape {
        time: f64,
        position: f64,
        state: Vec<f64>,
    },

    #[error("CFL number {cfl} exceeds 0.5")]
    CflViolation { cfl: f64 },

    #[error("characteristic left the computed region at t = {time}")]
    LeftDomain { time: f64 },

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("refinement sweep needs at least two entries, got {0}")]
    SweepTooShort(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
