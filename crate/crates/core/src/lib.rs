//! Computational workbench for the Steklov eigenvalue problem on free
//! boundary minimal surfaces in the unit ball.
//!
//! The pipeline builds triangle meshes that are exactly invariant under the
//! coordinate-plane reflections of the surface, assembles cotangent
//! stiffness and boundary mass matrices, condenses the interior with a
//! sparse Cholesky Schur complement to obtain the discrete
//! Dirichlet-to-Neumann operator, and solves the generalized eigenproblem
//! on the boundary. On top of the spectrum sit parity classification of
//! eigenmodes under the reflection group, nodal domain and nodal line
//! analysis (including restriction to a fundamental domain and the
//! reflected orbit count), a verification battery, and a family sweep of
//! catenoids inscribed in the unit sphere.

pub mod driver;
pub mod error;
pub mod fem;
pub mod io;
pub mod mesh;
pub mod nodal;
pub mod report;
pub mod steklov;
pub mod surfaces;
pub mod symmetry;

pub use driver::{
    run_spectrum, run_sweep, run_verify, RunConfig, SpectrumRun, SweepConfig, DEFAULT_TOL_EIGEN,
    DEFAULT_TOL_PARITY,
};
pub use error::{Error, Result};
pub use nodal::DEFAULT_NODAL_TAU;
