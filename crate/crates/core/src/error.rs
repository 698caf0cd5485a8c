use std::path::PathBuf;

use crate::network::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{what} needs N = {n}, above the configured cap of {cap}")]
    DimensionCap { what: &'static str, n: usize, cap: usize },

    #[error("invalid network: {}", format_violations(.0))]
    InvalidNetwork(Vec<Violation>),

    #[error("invalid quadratic spec: {0}")]
    InvalidQuadraticSpec(String),

    #[error("{operation} requires model `{expected}`")]
    WrongModel { operation: &'static str, expected: &'static str },

    #[error("failed to parse {}: {message}", .path.display())]
    Parse { path: PathBuf, message: String },

    #[error("I/O error on {}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("gateway node {0} is not a node of the network")]
    GatewayOutOfRange(usize),

    #[error("gateway is empty")]
    EmptyGateway,

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("refused: {0}")]
    Refused(#[from] Refusal),

    #[error("generator ladder broken: zero coupling c_{0}")]
    LadderBroken(usize),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

/// Reasons a reconstruction or spectral estimate declines to produce a result.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Refusal {
    #[error("degenerate spectrum: levels {levels:?} closer than {tolerance:e} (lift the degeneracy first)")]
    DegenerateSpectrum { levels: Vec<(usize, usize)>, tolerance: f64 },

    #[error("gateway does not infect the network")]
    NotInfecting,

    #[error("coupling {a}-{b} vanishes (|c| = {magnitude:e}); declared edge effectively absent")]
    VanishingCoupling { a: usize, b: usize, magnitude: f64 },

    #[error("recursion step {step} ({parameter}) has vanishing normalization {magnitude:e}")]
    VanishingParameter { step: usize, parameter: String, magnitude: f64 },

    #[error("unresolved peaks: found {found} of {expected} levels (resolution {resolution:e})")]
    UnresolvedPeaks { found: usize, expected: usize, resolution: f64 },

    #[error("peak amplitude {amplitude:e} below noise floor {floor:e}")]
    BelowNoiseFloor { amplitude: f64, floor: f64 },

    #[error("field equations are singular (condition estimate {condition:e})")]
    SingularFieldSystem { condition: f64 },

    #[error("eigenstate {level} has no overlap with the gateway")]
    DarkState { level: usize },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
