use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("singular input: y = 1/2 lies on the invariant line")]
    SingularLine,
    #[error("z = 0 is a puncture of the chart")]
    Puncture,
    #[error("h = {0} is a critical value")]
    CriticalValue(String),
    #[error("{what} = {value} outside the admissible range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: &'static str,
    },
    #[error("invalid form index {0}, expected 1..=5")]
    InvalidIndex(usize),
    #[error("pole at {0} lies on the integration path")]
    PoleOnPath(String),
    #[error("{what} did not converge after {nodes} nodes (last error estimate {estimate:e})")]
    NonConvergence {
        what: &'static str,
        nodes: usize,
        estimate: f64,
    },
    #[error("connector passes within {distance:e} of a puncture")]
    ConnectorTooClose { distance: f64 },
    #[error("loops do not share a basepoint")]
    BasepointMismatch,
    #[error("orbit escaped the disc of radius {radius} at t = {t}")]
    Escape { radius: f64, t: f64 },
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("no return to the section before t = {t_max}")]
    OpenOrbit { t_max: f64 },
    #[error("function vanishes at the interval endpoint {0}")]
    EndpointZero(f64),
    #[error("arc is identically zero")]
    ZeroArc,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("component tag mismatch: case analysis gives {case}, limit point satisfies {equations}")]
    ComponentMismatch { case: String, equations: String },
    #[error("point within {0:e} of the invariant line")]
    InvariantLine(f64),
    #[error("parameters do not satisfy {0}")]
    NotOnBranch(&'static str),
}

impl Error {
    /// True for failures of a numerical method, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence { .. }
                | Error::Escape { .. }
                | Error::StepUnderflow { .. }
                | Error::OpenOrbit { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
