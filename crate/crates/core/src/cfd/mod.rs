//! Classical SIMPLE solver for the 2-D lid-driven cavity on a staggered mesh.

pub mod assembly;
pub mod mesh;
pub mod simple;

pub use assembly::{assemble_momentum, assemble_pressure_correction, correct_fields, Component, LinearSystem};
pub use mesh::{build_mesh, CaseConfig, SimpleState, StaggeredMesh};
pub use simple::{
    run_classical, run_simple, ConvergenceHistory, DirectSolver, GaussSeidelSolver, IterationRecord, PcSolution,
    PressureSolver, SimpleRun,
};
