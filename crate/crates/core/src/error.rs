use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: parse error at line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("point cloud has no points")]
    EmptyCloud,

    #[error("non-finite value at line {line}")]
    NonFiniteValue { line: usize },

    #[error("need at least {k} points for normal estimation, got {n}")]
    TooFewPoints { n: usize, k: usize },

    #[error("point cloud has no surface normals")]
    MissingNormals,

    #[error("spherical harmonic order |m| = {m} exceeds degree {l}")]
    Domain { l: usize, m: i64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coefficients do not describe a real signal (imaginary residue {residue:e})")]
    SymmetryViolation { residue: f64 },

    #[error("bandwidth mismatch: {0} vs {1}")]
    BandwidthMismatch(usize, usize),

    #[error("signal norm {0:e} is too small to normalize")]
    ZeroSignal(f64),

    #[error("contact points coincide")]
    CoincidentContacts,

    #[error("patch has {found} points, need at least {required}")]
    InsufficientPatch { found: usize, required: usize },

    #[error("invalid gripper model: {0}")]
    InvalidGripper(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}
