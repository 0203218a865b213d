//! Numerical laboratory for degenerate cross-diffusion systems
//! `W_t = Div(a(W) DW) + F(W)`.
//!
//! The crate bundles a semi-implicit finite-volume solver with
//! ε-regularization, discrete harmonic-analysis primitives (BMO seminorm,
//! A_γ weight constant, centred maximal operator), an evaluator for the
//! weighted Gagliardo–Nirenberg–BMO integrals, regularity diagnostics, a
//! Grönwall-based uniqueness harness and the diagonalizing `P`-transform.
//!
//! See the `examples/` directory for one runnable program per capability.

pub mod cli;
pub mod diagonal;
pub mod error;
pub mod gn;
pub mod grid;
pub mod harmonic;
pub mod numerics;
pub mod regularity;
pub mod solver;
pub mod uniqueness;

pub use error::{Error, Result};
pub use grid::{BoundaryKind, Cube, Field, Grid, Region};
