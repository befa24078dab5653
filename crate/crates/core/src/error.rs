use thiserror::Error;

/// Failure classes for the whole pipeline. Variants are grouped so callers
/// (in particular the command-line frontend) can map them onto coarse exit
/// categories: configuration problems, geometry/mesh problems, and numerical
/// solver problems.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid user-facing configuration: unknown surface names, bad
    /// parameter strings, out-of-range tolerances, impossible mode counts.
    #[error("config error: {0}")]
    Config(String),

    /// A point or parameter fell outside a chart's domain.
    #[error("surface error: {0}")]
    Surface(String),

    /// Mesh construction or validation failed (incompatible resolution,
    /// non-manifold connectivity, broken symmetry, unlabelable arcs).
    #[error("mesh error: {0}")]
    Mesh(String),

    /// Finite-element assembly failed, e.g. on a degenerate triangle.
    #[error("assembly error: {0}")]
    Assembly(String),

    /// A linear-algebra or eigenvalue computation failed or was handed
    /// numerically unusable data.
    #[error("solver error: {0}")]
    Solver(String),

    /// Nodal-set analysis could not proceed (identically vanishing input,
    /// inconsistent decomposition/domain pairing, invalid orbit pattern).
    #[error("nodal analysis error: {0}")]
    Nodal(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Coarse failure category: 1 = configuration, 2 = geometry/mesh,
    /// 3 = numerical analysis. Used for process exit codes.
    pub fn category(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Io(_) => 1,
            Error::Surface(_) | Error::Mesh(_) | Error::Assembly(_) => 2,
            Error::Solver(_) | Error::Nodal(_) => 3,
        }
    }
}
