use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Domain(#[from] spinlab::Error),
    /// Flag combinations clap cannot express; reported like a usage error.
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Input(String),
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.kind(),
            CliError::Usage(_) => "usage",
            CliError::Input(_) => "input",
            CliError::Io { .. } => "io",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

macro_rules! domain_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Domain(e.into())
            }
        }
    )*};
}

domain_from!(
    spinlab::pauli::PauliError,
    spinlab::basis::BasisError,
    spinlab::eigen::EigenError,
    spinlab::chain::ChainError,
    spinlab::bethe::BetheError,
    spinlab::toric::ToricError,
    spinlab::continuum::ContinuumError
);
