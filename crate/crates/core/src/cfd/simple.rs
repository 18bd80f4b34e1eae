//! The SIMPLE outer loop.

use std::fmt::Write as _;
use std::time::Instant;

use crate::cfd::assembly::{assemble_momentum, assemble_pressure_correction, correct_fields, Component, LinearSystem};
use crate::cfd::mesh::{build_mesh, CaseConfig, SimpleState};
use crate::error::{Error, Result};
use crate::sparse::{direct_solve, gauss_seidel, rms, SparseMatrix};

/// Above this RMS update an outer iteration is declared divergent.
pub const DIVERGENCE_LIMIT: f64 = 1e6;

/// Solution of one pressure-correction system.
#[derive(Debug, Clone, PartialEq)]
pub struct PcSolution {
    pub x: Vec<f64>,
    /// Inner iterations spent (zero for non-iterative solvers).
    pub iterations: usize,
}

/// Pluggable solver for the pressure-correction equation.
pub trait PressureSolver {
    fn solve(&mut self, system: &LinearSystem, outer_iteration: usize) -> Result<PcSolution>;
}

impl<F> PressureSolver for F
where
    F: FnMut(&LinearSystem, usize) -> Result<PcSolution>,
{
    fn solve(&mut self, system: &LinearSystem, outer_iteration: usize) -> Result<PcSolution> {
        self(system, outer_iteration)
    }
}

/// Gauss-Seidel from a zero initial guess; the classical pressure solver.
#[derive(Debug, Clone, Copy)]
pub struct GaussSeidelSolver {
    pub tol: f64,
    pub max_iter: usize,
}

impl GaussSeidelSolver {
    pub fn from_config(config: &CaseConfig) -> Self {
        Self {
            tol: config.gs_tol,
            max_iter: config.gs_max,
        }
    }
}

impl PressureSolver for GaussSeidelSolver {
    fn solve(&mut self, system: &LinearSystem, _outer: usize) -> Result<PcSolution> {
        let zero = vec![0.0; system.rhs.len()];
        let sol = gauss_seidel(&system.matrix, &system.rhs, &zero, self.tol, self.max_iter)?;
        if !sol.converged {
            log::warn!("pressure-correction Gauss-Seidel hit {} iterations", sol.iterations);
        }
        Ok(PcSolution {
            x: sol.x,
            iterations: sol.iterations,
        })
    }
}

/// Dense LU solve: the pressure correction solved to machine precision.
#[derive(Debug, Clone, Copy, Default)]
pub struct DirectSolver;

impl PressureSolver for DirectSolver {
    fn solve(&mut self, system: &LinearSystem, _outer: usize) -> Result<PcSolution> {
        Ok(PcSolution {
            x: direct_solve(&system.matrix, &system.rhs)?,
            iterations: 0,
        })
    }
}

/// One outer iteration's convergence record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub rms_du: f64,
    pub rms_dv: f64,
    pub rms_dp: f64,
    /// RMS continuity residual of the corrected velocities.
    pub rms_continuity: f64,
    pub gs_u: usize,
    pub gs_v: usize,
    pub gs_p: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConvergenceHistory {
    pub records: Vec<IterationRecord>,
}

pub const HISTORY_CSV_HEADER: &str = "iter,rms_du,rms_dv,rms_dp,rms_continuity,gs_u,gs_v,gs_p,seconds";

impl ConvergenceHistory {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    pub fn total_seconds(&self) -> f64 {
        self.records.iter().map(|r| r.seconds).sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(HISTORY_CSV_HEADER);
        s.push('\n');
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{},{},{},{:.6}",
                r.iteration, r.rms_du, r.rms_dv, r.rms_dp, r.rms_continuity, r.gs_u, r.gs_v, r.gs_p, r.seconds
            );
        }
        s
    }
}

/// Result of a SIMPLE run.
#[derive(Debug, Clone)]
pub struct SimpleRun {
    pub state: SimpleState,
    pub history: ConvergenceHistory,
    pub converged: bool,
}

fn solve_momentum(sys: &LinearSystem, guess: &[f64], config: &CaseConfig) -> Result<(Vec<f64>, usize)> {
    let sol = gauss_seidel(&sys.matrix, &sys.rhs, guess, config.gs_tol, config.gs_max)?;
    Ok((sol.x, sol.iterations))
}

/// Runs SIMPLE outer iterations with `pc_solver` handling the pressure correction.
pub fn run_simple<S: PressureSolver + ?Sized>(config: &CaseConfig, pc_solver: &mut S) -> Result<SimpleRun> {
    let mesh = build_mesh(config)?;
    let mut state = SimpleState::new(mesh, config.lid_velocity);
    let mut history = ConvergenceHistory::default();
    let mut pattern: Option<SparseMatrix> = None;

    for iteration in 1..=config.outer_max {
        let start = Instant::now();
        state.outer_iteration = iteration;

        let u_old = state.u_interior();
        let v_old = state.v_interior();
        let sys_u = assemble_momentum(&state, config, Component::U)?;
        let sys_v = assemble_momentum(&state, config, Component::V)?;
        let (u_star, gs_u) = solve_momentum(&sys_u, &u_old, config)?;
        let (v_star, gs_v) = solve_momentum(&sys_v, &v_old, config)?;
        let au = sys_u.matrix.diagonal();
        let av = sys_v.matrix.diagonal();
        state.set_u_interior(&u_star);
        state.set_v_interior(&v_star);

        let pc = assemble_pressure_correction(&state, config, &au, &av)?;
        match &pattern {
            None => pattern = Some(pc.matrix.clone()),
            Some(first) => debug_assert!(first.same_pattern(&pc.matrix)),
        }
        let dp = pc_solver.solve(&pc, iteration)?;
        if dp.x.len() != pc.rhs.len() {
            return Err(Error::Dimension("pressure solver returned wrong length".into()));
        }
        state = correct_fields(&state, config, &dp.x, &au, &av)?;
        state.outer_iteration = iteration;

        let du: Vec<f64> = state.u_interior().iter().zip(&u_old).map(|(a, b)| a - b).collect();
        let dv: Vec<f64> = state.v_interior().iter().zip(&v_old).map(|(a, b)| a - b).collect();
        let rec = IterationRecord {
            iteration,
            rms_du: rms(&du),
            rms_dv: rms(&dv),
            rms_dp: rms(&dp.x),
            rms_continuity: rms(&state.continuity_residual(config.density)),
            gs_u,
            gs_v,
            gs_p: dp.iterations,
            seconds: start.elapsed().as_secs_f64(),
        };
        history.records.push(rec);

        let worst = rec.rms_du.max(rec.rms_dv).max(rec.rms_dp);
        if !worst.is_finite() || worst > DIVERGENCE_LIMIT || !state.is_finite() {
            return Err(Error::Divergence {
                iteration,
                detail: format!("RMS update {worst:e}"),
            });
        }
        if rec.rms_du < config.outer_tol && rec.rms_dv < config.outer_tol && rec.rms_dp < config.outer_tol {
            return Ok(SimpleRun {
                state,
                history,
                converged: true,
            });
        }
    }
    Ok(SimpleRun {
        state,
        history,
        converged: false,
    })
}

/// Classical run with Gauss-Seidel on every equation.
pub fn run_classical(config: &CaseConfig) -> Result<SimpleRun> {
    run_simple(config, &mut GaussSeidelSolver::from_config(config))
}
