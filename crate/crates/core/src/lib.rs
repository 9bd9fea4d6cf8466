//! BDF-k time stepping for the phase field crystal (PFC) equation
//!
//! ```text
//! ∂Φ/∂t = Δμ,    μ = (1+Δ)²Φ + Φ³ − εΦ
//! ```
//!
//! on a doubly periodic rectangle, discretised by a Fourier pseudo-spectral
//! method in space and the backward differentiation formulas of order k in
//! time. Alongside the solver the crate carries the tools used to check the
//! discrete theory behind the scheme numerically:
//!
//! - [`kernels`]: BDF-k convolution kernels and their discrete orthogonal
//!   convolution (DOC) kernels.
//! - [`gradient_structure`]: sum-of-squares gradient structures of the
//!   BDF-3/4/5 quadratic forms.
//! - [`matrix_analysis`]: Toeplitz matrices built from both kernel families,
//!   a Jacobi eigensolver and Young-type convolution inequalities.
//! - [`spectral`]: periodic grids, fields and Fourier multipliers.
//! - [`solver`]: the implicit BDF-k scheme, start-up strategies and energies.
//! - [`harness`]: experiments, reproducible random fields, file formats and
//!   the aggregated verification report.

pub mod error;
pub mod gradient_structure;
pub mod harness;
pub mod kernels;
pub mod matrix_analysis;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use gradient_structure::GradientStructure;
pub use kernels::{BdfKernels, DocKernels, Rational};
pub use matrix_analysis::{BandedLowerToeplitz, EigReport, SymMatrix};

pub use solver::{
    ExactSolution, Forcing, Simulation, SolverConfig, SolverState, StartupStrategy, StepRecord,
};
pub use spectral::{Field2D, Grid2D, SpectralOps, Spectrum2D};
