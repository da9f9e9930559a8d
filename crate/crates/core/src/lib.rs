//! Graph signal processing on graphons.
//!
//! The crate covers the full path from a kernel model to a graph filter:
//!
//! * [`kernels`]: graphon kernels (built-ins, closures, empirical grids).
//! * [`sampling`]: kernel-based random graphs and the scaled adjacency shift `S = A / N`.
//! * [`step`]: the lifting map between node signals and step functions, and the
//!   step-basis operator matrix which reproduces `S` exactly.
//! * [`chebyshev`]: first-kind Chebyshev polynomials, the extrema quadrature rule,
//!   projection and resampling.
//! * [`galerkin`]: the Fourier-Galerkin shift operator built from a graphon.
//! * [`filter`]: polynomial graph / graphon filters and least-squares design.
//! * [`homomorphism`]: homomorphism counts and densities.
//! * [`experiments`]: the low-pass, consensus and filter-convergence studies.

pub mod chebyshev;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod galerkin;
pub mod homomorphism;
pub mod input;
pub mod kernels;
pub mod sampling;
pub mod step;

pub use error::{Error, Result};
pub use kernels::{BuiltinGraphon, Graphon};
pub use sampling::{Graph, Seed, ShiftOperator};
