use std::path::PathBuf;

/// Errors produced by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("network validation failed: {0}")]
    Validation(String),

    #[error("unsupported kernel size {0} (supported: 1, 3, 5, 7)")]
    KernelSize(usize),

    #[error("wavelength capacity exceeded: {active} active slots, {channels} channels")]
    WavelengthCapacity { active: usize, channels: usize },

    #[error("invalid quantizer range: v_min {v_min} must be strictly below v_max {v_max}")]
    QuantizerRange { v_min: f64, v_max: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(&'static str),

    #[error("arm length {len} exceeds {max} MR slots")]
    ArmLength { len: usize, max: usize },

    #[error("length mismatch: {left} weights vs {right} activations")]
    LengthMismatch { left: usize, right: usize },

    #[error("{what} {value} outside the {bits}-bit code range")]
    CodeRange {
        what: &'static str,
        value: i64,
        bits: u32,
    },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid calibration: {0}")]
    Calibration(String),

    #[error("calibration fit infeasible: {0}")]
    InfeasibleFit(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("zero vector has no direction")]
    ZeroVector,

    #[error("degenerate task: {0}")]
    DegenerateTask(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
