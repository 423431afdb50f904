//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An input parameter is outside the range an operation accepts.
    #[error("domain error: {0}")]
    Domain(String),

    /// A point too close to one of the two map corners, where the
    /// conformal derivative degenerates.
    #[error("corner singularity: |z| or |z - pi| below exclusion radius ({0:.3e})")]
    CornerSingularity(f64),

    /// An iteration (Newton inversion, Lanczos, CG) ran out of steps.
    #[error("no convergence: {0}")]
    NonConvergence(String),

    /// The corner operator has no null direction at the requested energy.
    #[error("no null space: smallest singular value {smallest:.3e} exceeds threshold {threshold:.3e}")]
    NoNullSpace { smallest: f64, threshold: f64 },

    /// Every real root of the quantization cubic violates the branch condition.
    #[error("no admissible root of the quantization cubic for q={q}, n={n}")]
    NoAdmissibleRoot { q: f64, n: usize },

    /// A constant-sign radicand: the classical orbit never turns around.
    #[error("unbound orbit: radicand stays positive over the sampled range")]
    UnboundOrbit,

    /// Doubling the grid moved an eigenvalue more than the stability bound.
    #[error("grid too coarse: refinement moved eigenvalue by {0:.3e}")]
    GridTooCoarse(f64),

    /// Finite-difference lattice came out empty or unusable.
    #[error("empty or degenerate grid: {0}")]
    EmptyGrid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
