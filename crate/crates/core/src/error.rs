use std::path::PathBuf;

use crate::rbp::QuantizeResult;

/// Errors produced anywhere in the codec, the design calculator or the simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("graph construction failed: {0}")]
    Construction(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error("quantizer diverged after {restarts} restarts (distortion {:.5})", best.distortion)]
    Divergence {
        restarts: usize,
        best: Box<QuantizeResult>,
    },

    #[error(
        "infeasible design: decoder threshold {sigma2_n_eps} does not exceed stage-2 distortion {d2_eps}"
    )]
    InfeasibleDesign { sigma2_n_eps: f64, d2_eps: f64 },

    #[error("threshold bisection could not bracket target BER {target_ber}; probes: {probes:?}")]
    Bracket {
        target_ber: f64,
        /// (noise variance, measured BER) pairs visited before giving up.
        probes: Vec<(f64, f64)>,
    },

    #[error("practical modulo search exhausted at A = {a_max} without a decodable probe")]
    ModuloSearch { a_max: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
