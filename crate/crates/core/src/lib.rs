//! Exact diagonalization and algebraic tooling for spin-1/2 lattice models:
//! the ferromagnetic Heisenberg (XXX) chain with its Bethe-ansatz solutions,
//! the toric code with its line operators and degeneracy certificates, and a
//! couple of continuum-side companions (the lattice wave equation and the
//! Landau free energy).
//!
//! Data-parallel inner loops (matrix assembly, matrix-vector products,
//! independent root solves, commutation sweeps) run on rayon when the
//! `parallel` feature is enabled (the default). Every such routine also takes
//! an [`Execution`] so callers can force the sequential path; without the
//! feature both variants run sequentially.

pub mod basis;
pub mod bethe;
pub mod chain;
pub mod continuum;
pub mod eigen;
pub mod gf2;
pub mod numfmt;
pub mod pauli;
pub mod toric;

use thiserror::Error;

pub use num_complex::Complex64;

/// Crate version; results computed by different versions are not interchangeable.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// How data-parallel loops are scheduled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    #[default]
    Parallel,
    Sequential,
}

impl Execution {
    /// `Parallel` only when the crate was built with the `parallel` feature.
    pub fn effective(self) -> Execution {
        if cfg!(feature = "parallel") {
            self
        } else {
            Execution::Sequential
        }
    }
}

/// Maps `f` over `0..n`, preserving index order in the output.
pub(crate) fn map_indices<R, F>(exec: Execution, n: usize, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(usize) -> R + Sync + Send,
{
    match exec.effective() {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            (0..n).into_par_iter().map(f).collect()
        }
        _ => (0..n).map(f).collect(),
    }
}

/// Crate-level error used by callers that mix modules.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Pauli(#[from] pauli::PauliError),
    #[error(transparent)]
    Basis(#[from] basis::BasisError),
    #[error(transparent)]
    Eigen(#[from] eigen::EigenError),
    #[error(transparent)]
    Chain(#[from] chain::ChainError),
    #[error(transparent)]
    Bethe(#[from] bethe::BetheError),
    #[error(transparent)]
    Toric(#[from] toric::ToricError),
    #[error(transparent)]
    Continuum(#[from] continuum::ContinuumError),
}

impl Error {
    /// Short machine-readable category, used in structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Pauli(_) => "pauli",
            Error::Basis(_) => "state_space",
            Error::Eigen(_) => "eigensolver",
            Error::Chain(_) => "heisenberg_chain",
            Error::Bethe(_) => "bethe",
            Error::Toric(_) => "toric_code",
            Error::Continuum(_) => "continuum",
        }
    }
}
