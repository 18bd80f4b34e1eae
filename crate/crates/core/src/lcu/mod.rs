//! Pauli-string linear combinations of unitaries for real symmetric matrices.

pub mod cluster;
pub mod decompose;
pub mod entrywise;
pub mod pauli;
pub mod template;

pub use cluster::{build_cluster, Cluster, SignMatrix};
pub use decompose::{
    decompose_hadamard, decompose_trace, find_clusters, qubits_for, symmetrize, unsymmetrize, TraceScan,
};
pub use entrywise::{decompose_entrywise, OneSparseLcu, OneSparseTerm};
pub use pauli::{Pauli, PauliString};
pub use template::{cluster_orthogonal, LcuTemplate, Pattern, SUMMARY_CSV_HEADER, ZERO_TOL};
