//! State-vector emulation of HHL on the symmetrized system.

pub mod precision;
pub mod qpe;
pub mod solve;
pub mod state;
pub mod trotter;

pub use precision::Precision;
pub use qpe::{apply_eigeninversion, apply_inverse_qpe, apply_qpe, clock_marginals, controlled_powers};
pub use solve::{error_norms, fidelity, hhl_solve, HhlConfig, HhlResult, DIAGNOSTICS_CSV_HEADER};
pub use state::{loader_angles, prepare_state, StateVector};
pub use trotter::{build_trotter_unitary, exact_unitary, matrix_power, spectral_norm, unitarity_error, CMatrix};
