use thiserror::Error;

use crate::model::Violation;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid engine parameters: {}", format_violations(.0))]
    InvalidParams(Vec<Violation>),

    /// ω₂ = ω₁ with no drive: the mixing angle is 0/0.
    #[error("degenerate parameters: omega1 == omega2 with lambda == 0")]
    Degenerate,

    #[error("numerical spectrum disagrees with closed form (relative deviation {0:.3e})")]
    SpectrumMismatch(f64),

    #[error("invalid coupling scheme: {0}")]
    InvalidScheme(String),

    /// Both rate entries feeding g₁ (or g₂) vanish.
    #[error("dissipator channel {0} has zero total rate")]
    ZeroChannel(&'static str),

    #[error("singular stationary system: {0}")]
    Singular(&'static str),

    #[error("closed-form stationary state deviates from the linear solve by {0:.3e} (relative)")]
    OracleMismatch(f64),

    #[error("not a heat engine: {0}")]
    NotAnEngine(String),

    #[error("engine-domain boundary: {0}")]
    Boundary(&'static str),

    #[error("power vanishes; quantity is undefined")]
    ZeroPower,

    #[error("step size {dt} exceeds the stability limit {limit}")]
    StepTooLarge { dt: f64, limit: f64 },

    #[error("invalid initial state: {0}")]
    InvalidInitialState(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.name()).collect::<Vec<_>>().join(", ")
}

pub type Result<T> = std::result::Result<T, Error>;
