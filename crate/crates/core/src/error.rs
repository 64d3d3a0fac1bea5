use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch for {what}: expected {expected}, got {got}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("joint {joint}: axis must be a unit vector (norm {norm})")]
    NonUnitAxis { joint: usize, norm: f64 },

    #[error("mass matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NonSymmetricInertia { asymmetry: f64 },

    #[error("body {body}: {reason}")]
    InvalidBody { body: usize, reason: String },

    #[error("joint {joint}: {reason}")]
    InvalidJoint { joint: usize, reason: String },

    #[error("model schema: {0}")]
    Schema(String),

    #[error("model parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(
        "inverse kinematics needs a square Jacobian (6 joints), model has {joints}; \
         redundant chains require a joint-space decomposition which is not provided"
    )]
    UnsupportedConfiguration { joints: usize },

    #[error("Jacobian is singular (reciprocal condition {rcond:e})")]
    Singular { rcond: f64 },

    #[error(
        "gravity mode {mode} is inconsistent with kinematics computed with gravity trick {trick}"
    )]
    GravityModeMismatch { mode: &'static str, trick: bool },

    #[error("invalid finite-difference setup: {0}")]
    FiniteDifference(String),

    #[error("invalid actuator parameters: {0}")]
    InvalidActuator(String),
}
