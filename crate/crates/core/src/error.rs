use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("density {rho} outside the equation-of-state domain [{lo}, {hi}]")]
    Domain { rho: f64, lo: f64, hi: f64 },

    /// χ† = α+β maps outside the density domain (vacuum approach or over-compression).
    #[error("chi_dagger {chi_dagger} outside the admissible range [{lo}, {hi}]")]
    Range { chi_dagger: f64, lo: f64, hi: f64 },

    #[error("non-positive radius {r} at parameter {param}")]
    NonPositiveRadius { r: f64, param: f64 },

    #[error("invalid equation of state: {0}")]
    InvalidEos(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("l must exceed 1, got {0}")]
    InvalidL(f64),

    #[error("Picard iteration did not converge in {max_iter} iterations (last norm {last_norm:e})")]
    NoConvergence {
        max_iter: usize,
        last_norm: f64,
        /// Successive-difference norms, one per iteration.
        history: Vec<f64>,
    },

    #[error("no valid node in the solved grid")]
    EmptyDomain,

    #[error("need at least 3 recorded iterations, got {0}")]
    InsufficientIterations(usize),

    #[error("at grid node ({i}, {j}): {source}")]
    AtNode {
        i: usize,
        j: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("on {side} at parameter {param}: {source}")]
    AtParam {
        side: &'static str,
        param: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("in strip segment {segment}: {source}")]
    InSegment {
        segment: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn at_node(self, i: usize, j: usize) -> Error {
        match self {
            e @ Error::AtNode { .. } => e,
            e => Error::AtNode {
                i,
                j,
                source: Box::new(e),
            },
        }
    }

    pub fn at_param(self, side: &'static str, param: f64) -> Error {
        match self {
            e @ Error::AtParam { .. } => e,
            e => Error::AtParam {
                side,
                param,
                source: Box::new(e),
            },
        }
    }

    pub fn in_segment(self, segment: usize) -> Error {
        Error::InSegment {
            segment,
            source: Box::new(self),
        }
    }

    /// The innermost error, with node and segment wrappers removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtNode { source, .. }
            | Error::AtParam { source, .. }
            | Error::InSegment { source, .. } => source.root(),
            e => e,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Error {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
