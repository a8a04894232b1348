//! Energy-level structure of the Tavis–Cummings model through its `(j, k)`
//! subspace decomposition.
//!
//! The interaction Hamiltonian splits into a direct sum of hollow symmetric
//! tridiagonal blocks `L(j, k)`, one per total angular momentum `j` and total
//! excitation number `k`, each repeated `d_j` times. This crate builds those
//! blocks, diagonalizes them, and reduces their spectra to the statistics
//! used to reason about the full `2^N`-dimensional spin space:
//!
//! - [`subspace`]: index arithmetic and coupling matrices.
//! - [`degeneracy`]: `d_j`, `D_k`, the maximally degenerate `j*` and the
//!   strong-support window.
//! - [`tridiag`]: Sturm bisection, inverse iteration, determinants.
//! - [`stats`]: trace moments, closed-form variance, Perron–Frobenius
//!   bounds, RWA diagnostics and variance-slope regression.
//! - [`dos`]: degeneracy-weighted density of states.
//! - [`oracle`]: closed-form spectra for `N ≤ 3` and dense brute force.
//! - [`export`]: round-trip-safe number formatting and JSON/CSV writers.
//!
//! `j` is carried as the integer `2j` everywhere.

pub mod degeneracy;
pub mod dos;
mod error;
pub mod export;
pub mod oracle;
pub mod stats;
pub mod subspace;
pub mod tridiag;

pub use error::{Error, Result};
pub use subspace::{CouplingMatrix, PhysicalParams, SubspaceIndex};
