//! Hybrid quantum-classical CFD workbench.
//!
//! The crate solves the 2-D lid-driven cavity with SIMPLE ([`cfd`]), writes the
//! pressure-correction matrix as a linear combination of Pauli-string unitaries
//! ([`lcu`]) and solves it with a state-vector emulation of HHL ([`hhl`]).
//! [`hybrid`] ties the three together in one outer loop.

pub mod cfd;
pub mod config;
pub mod error;
pub mod hhl;
pub mod hybrid;
pub mod io;
pub mod lcu;
pub mod sparse;

pub use error::{Error, Result};
pub use sparse::{gauss_seidel, SparseMatrix};
