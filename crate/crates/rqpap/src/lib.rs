//! Command-line workbench for reversible quantum process terms: `.rqp` file
//! driving, term generators, property sweeps and the E91 protocol model.

pub mod axioms;
pub mod e91;
pub mod gen;
pub mod sweep;

use std::path::PathBuf;

use rqpap_core::bisim::BisimError;
use rqpap_core::parser::ParseError;
use rqpap_core::rewrite::RewriteError;
use rqpap_core::sos::SosError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{file}:{error}")]
    Parse { file: String, error: ParseError },
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Sos(#[from] SosError),
    #[error(transparent)]
    Bisim(#[from] BisimError),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

impl Error {
    /// 2 for usage and input errors, 3 for exhausted limits.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Bisim(BisimError::Truncated) => 3,
            Error::Rewrite(RewriteError::FuelExhausted(_) | RewriteError::Cycle(_)) => 3,
            _ => 2,
        }
    }
}
