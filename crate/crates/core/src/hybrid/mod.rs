//! The hybrid outer loop: SIMPLE with the pressure correction solved by HHL
//! through a once-built, re-evaluated LCU template; plus sampling, overhead
//! measurement and run comparison.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::cfd::{
    run_simple, CaseConfig, ConvergenceHistory, GaussSeidelSolver, LinearSystem, PcSolution, PressureSolver,
};
use crate::error::{Error, Result};
use crate::hhl::{hhl_solve, HhlConfig, HhlResult};
use crate::io::{save_matrix, save_vector};
use crate::lcu::{decompose_hadamard, symmetrize, LcuTemplate, SUMMARY_CSV_HEADER};
use crate::sparse::{gauss_seidel, norm2};

/// Right-hand sides below this norm skip HHL and use a zero correction.
pub const RHS_SKIP_NORM: f64 = 1e-13;

/// Window and relative-improvement threshold of the stagnation flag.
pub const STAGNATION_WINDOW: usize = 50;
pub const STAGNATION_IMPROVEMENT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Classical,
    Hybrid,
    Sample,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HybridConfig {
    pub case: CaseConfig,
    pub hhl: HhlConfig,
    pub sample_iterations: Vec<usize>,
    pub mode: RunMode,
    /// Solve every PC system classically as well, for per-iteration fidelity.
    pub shadow_reference: bool,
}

impl HybridConfig {
    pub fn new(case: CaseConfig, hhl: HhlConfig) -> Self {
        Self {
            case,
            hhl,
            sample_iterations: vec![10, 100],
            mode: RunMode::Hybrid,
            shadow_reference: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.case.validate()?;
        self.hhl.validate()?;
        if self.sample_iterations.contains(&0) {
            return Err(Error::Config("sample iterations count from 1".into()));
        }
        Ok(())
    }
}

/// One HHL solve inside the outer loop.
#[derive(Debug, Clone, PartialEq)]
pub struct HhlDiagnostic {
    pub iteration: usize,
    pub result: HhlResult,
}

/// Time spent building and re-evaluating the LCU template.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LcuLedger {
    pub decompositions: usize,
    pub reevaluations: usize,
    pub decompose_seconds: f64,
    pub reevaluate_seconds: f64,
    pub clusters: usize,
    pub candidates: usize,
    pub nonzero: usize,
    pub active: usize,
}

impl LcuLedger {
    pub fn total_seconds(&self) -> f64 {
        self.decompose_seconds + self.reevaluate_seconds
    }

    pub fn mean_reevaluate_seconds(&self) -> f64 {
        if self.reevaluations == 0 {
            0.0
        } else {
            self.reevaluate_seconds / self.reevaluations as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub mode: RunMode,
    pub case: CaseConfig,
    pub history: ConvergenceHistory,
    pub converged: bool,
    pub hhl: Vec<HhlDiagnostic>,
    pub lcu: LcuLedger,
    /// Outer-loop time excluding LCU work.
    pub cfd_seconds: f64,
    /// Outer iterations where the rhs guard skipped HHL.
    pub skipped: usize,
}

impl RunReport {
    /// Accumulated LCU time over CFD time.
    pub fn overhead_ratio(&self) -> f64 {
        if self.cfd_seconds > 0.0 {
            self.lcu.total_seconds() / self.cfd_seconds
        } else {
            0.0
        }
    }

    pub fn last_fidelity(&self) -> Option<f64> {
        self.hhl.iter().rev().find_map(|d| d.result.fidelity)
    }

    pub fn hhl_csv(&self, config: &HhlConfig) -> String {
        let mut s = format!("iter,{}\n", crate::hhl::DIAGNOSTICS_CSV_HEADER);
        for d in &self.hhl {
            let _ = writeln!(s, "{},{}", d.iteration, d.result.csv_row(config));
        }
        s
    }

    /// Plain-text summary block.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        let last = self.history.last();
        let _ = writeln!(s, "mode               {:?}", self.mode);
        let _ = writeln!(s, "mesh               {0}x{0}", self.case.nodes_per_side);
        let _ = writeln!(s, "outer iterations   {}", self.history.len());
        let _ = writeln!(s, "converged          {}", self.converged);
        if let Some(r) = last {
            let _ = writeln!(
                s,
                "final rms du/dv/dp {:.3e} {:.3e} {:.3e}",
                r.rms_du, r.rms_dv, r.rms_dp
            );
            let _ = writeln!(s, "final continuity   {:.3e}", r.rms_continuity);
        }
        let _ = writeln!(s, "cfd seconds        {:.3}", self.cfd_seconds);
        if self.lcu.decompositions > 0 {
            let _ = writeln!(
                s,
                "lcu                {} clusters, {} candidates, {} nonzero, {} active",
                self.lcu.clusters, self.lcu.candidates, self.lcu.nonzero, self.lcu.active
            );
            let _ = writeln!(s, "decompose seconds  {:.6}", self.lcu.decompose_seconds);
            let _ = writeln!(
                s,
                "reevaluate seconds {:.6} ({} calls)",
                self.lcu.reevaluate_seconds, self.lcu.reevaluations
            );
            let _ = writeln!(s, "overhead ratio     {:.4}", self.overhead_ratio());
        }
        if !self.hhl.is_empty() {
            let _ = writeln!(s, "hhl solves         {} (skipped {})", self.hhl.len(), self.skipped);
            if let Some(f) = self.last_fidelity() {
                let _ = writeln!(s, "last fidelity      {f:.6}");
            }
        }
        s
    }
}

/// Maintains the template: decompose on first use, re-evaluate afterwards.
#[derive(Debug, Default)]
pub struct TemplateCache {
    pub template: Option<LcuTemplate>,
    pub ledger: LcuLedger,
    pub coefficient_limit: f64,
}

impl TemplateCache {
    pub fn new(coefficient_limit: f64) -> Self {
        Self {
            coefficient_limit,
            ..Self::default()
        }
    }

    /// Template with coefficients for `system`'s symmetrized matrix.
    pub fn update(&mut self, system: &LinearSystem) -> Result<&LcuTemplate> {
        let h = symmetrize(&system.matrix);
        let start = Instant::now();
        match &mut self.template {
            Some(t) => {
                t.reevaluate(&h)?;
                self.ledger.reevaluations += 1;
                self.ledger.reevaluate_seconds += start.elapsed().as_secs_f64();
            }
            None => {
                let mut t = decompose_hadamard(&h)?;
                t.set_filter(self.coefficient_limit)?;
                self.ledger.decompositions += 1;
                self.ledger.decompose_seconds += start.elapsed().as_secs_f64();
                self.ledger.clusters = t.clusters().len();
                self.ledger.candidates = t.candidate_count();
                self.template = Some(t);
            }
        }
        let t = self.template.as_ref().unwrap();
        self.ledger.nonzero = t.nonzero_count();
        self.ledger.active = t.active_count();
        Ok(t)
    }
}

/// Pressure solver delegating to HHL.
struct HhlPressureSolver<'a> {
    config: &'a HybridConfig,
    cache: TemplateCache,
    diagnostics: Vec<HhlDiagnostic>,
    skipped: usize,
}

impl PressureSolver for HhlPressureSolver<'_> {
    fn solve(&mut self, system: &LinearSystem, outer: usize) -> Result<PcSolution> {
        let template = self.cache.update(system)?;
        if norm2(&system.rhs) < RHS_SKIP_NORM {
            self.skipped += 1;
            return Ok(PcSolution {
                x: vec![0.0; system.rhs.len()],
                iterations: 0,
            });
        }
        let reference = if self.config.shadow_reference {
            let zero = vec![0.0; system.rhs.len()];
            let c = &self.config.case;
            Some(gauss_seidel(&system.matrix, &system.rhs, &zero, c.gs_tol, c.gs_max)?.x)
        } else {
            None
        };
        let result = hhl_solve(
            &system.matrix,
            &system.rhs,
            &self.config.hhl,
            template,
            reference.as_deref(),
        )?;
        let x = result.x.clone();
        self.diagnostics.push(HhlDiagnostic {
            iteration: outer,
            result,
        });
        Ok(PcSolution { x, iterations: 0 })
    }
}

/// SIMPLE with HHL pressure corrections.
pub fn run_hybrid(config: &HybridConfig) -> Result<RunReport> {
    config.validate()?;
    let mut solver = HhlPressureSolver {
        config,
        cache: TemplateCache::new(config.hhl.coefficient_limit),
        diagnostics: Vec::new(),
        skipped: 0,
    };
    let run = match run_simple(&config.case, &mut solver) {
        Ok(run) => run,
        Err(Error::Divergence { iteration, detail }) => {
            let last = solver.diagnostics.iter().rev().find_map(|d| d.result.fidelity);
            let fid = last.map_or("n/a".to_string(), |f| format!("{f:.6}"));
            return Err(Error::Divergence {
                iteration,
                detail: format!("{detail}; last HHL fidelity {fid}"),
            });
        }
        Err(e) => return Err(e),
    };
    let total = run.history.total_seconds();
    let lcu = solver.cache.ledger;
    Ok(RunReport {
        mode: RunMode::Hybrid,
        case: config.case.clone(),
        converged: run.converged,
        cfd_seconds: (total - lcu.total_seconds()).max(0.0),
        history: run.history,
        hhl: solver.diagnostics,
        lcu,
        skipped: solver.skipped,
    })
}

/// Classical run that also builds and re-evaluates the template every
/// iteration, so the LCU overhead can be set against the CFD time.
pub fn run_classical_with_lcu(case: &CaseConfig, coefficient_limit: f64) -> Result<RunReport> {
    let mut cache = TemplateCache::new(coefficient_limit);
    let mut gs = GaussSeidelSolver::from_config(case);
    let mut solver = |sys: &LinearSystem, it: usize| -> Result<PcSolution> {
        cache.update(sys)?;
        gs.solve(sys, it)
    };
    let run = run_simple(case, &mut solver)?;
    let total = run.history.total_seconds();
    let lcu = cache.ledger;
    Ok(RunReport {
        mode: RunMode::Classical,
        case: case.clone(),
        converged: run.converged,
        cfd_seconds: (total - lcu.total_seconds()).max(0.0),
        history: run.history,
        hhl: Vec::new(),
        lcu,
        skipped: 0,
    })
}

/// Plain classical run as a report.
pub fn run_classical_report(case: &CaseConfig) -> Result<RunReport> {
    let run = run_simple(case, &mut GaussSeidelSolver::from_config(case))?;
    Ok(RunReport {
        mode: RunMode::Classical,
        case: case.clone(),
        converged: run.converged,
        cfd_seconds: run.history.total_seconds(),
        history: run.history,
        hhl: Vec::new(),
        lcu: LcuLedger::default(),
        skipped: 0,
    })
}

/// Pressure-correction system of a classical run at outer `iteration`
/// (the last one solved if the run converges first), with its iteration.
pub fn pc_system_at(case: &CaseConfig, iteration: usize) -> Result<(usize, LinearSystem)> {
    let run_case = CaseConfig {
        outer_max: iteration.min(case.outer_max),
        ..case.clone()
    };
    let mut latest = None;
    let mut gs = GaussSeidelSolver::from_config(case);
    let mut solver = |sys: &LinearSystem, it: usize| -> Result<PcSolution> {
        latest = Some((it, sys.clone()));
        gs.solve(sys, it)
    };
    run_simple(&run_case, &mut solver)?;
    latest.ok_or_else(|| Error::Config("solver never ran".into()))
}

/// Files written for one sampled iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleFiles {
    pub iteration: usize,
    /// Iteration whose system was actually exported (earlier when the run converged first).
    pub exported_iteration: usize,
    pub matrix: PathBuf,
    pub rhs: PathBuf,
    pub solution: PathBuf,
    pub lcu_summary: PathBuf,
}

/// Runs the classical solver and exports the PC system, its GS solution
/// and the LCU summary at each sample iteration.
pub fn sample_and_export(case: &CaseConfig, iterations: &[usize], dir: &Path) -> Result<Vec<SampleFiles>> {
    if iterations.is_empty() {
        return Err(Error::Config("no sample iterations requested".into()));
    }
    std::fs::create_dir_all(dir)?;
    let last_wanted = *iterations.iter().max().unwrap();
    let mut run_case = case.clone();
    run_case.outer_max = run_case.outer_max.min(last_wanted);
    let mut captured: Vec<(usize, LinearSystem, Vec<f64>)> = Vec::new();
    let mut latest: Option<(usize, LinearSystem, Vec<f64>)> = None;
    let mut gs = GaussSeidelSolver::from_config(case);
    let mut solver = |sys: &LinearSystem, it: usize| -> Result<PcSolution> {
        let sol = gs.solve(sys, it)?;
        if iterations.contains(&it) {
            captured.push((it, sys.clone(), sol.x.clone()));
        }
        latest = Some((it, sys.clone(), sol.x.clone()));
        Ok(sol)
    };
    run_simple(&run_case, &mut solver)?;
    let latest = latest.ok_or_else(|| Error::Config("solver never ran".into()))?;

    let mut out = Vec::new();
    for &it in iterations {
        let (exported, sys, x) = match captured.iter().find(|c| c.0 == it) {
            Some(c) => (c.0, &c.1, &c.2),
            None => {
                log::warn!(
                    "run converged at iteration {} before sample iteration {it}; exporting the converged system",
                    latest.0
                );
                (latest.0, &latest.1, &latest.2)
            }
        };
        let stem = format!("mesh{}_iter{it}", case.nodes_per_side);
        let files = SampleFiles {
            iteration: it,
            exported_iteration: exported,
            matrix: dir.join(format!("{stem}_pc.mtx")),
            rhs: dir.join(format!("{stem}_rhs.vec")),
            solution: dir.join(format!("{stem}_solution.vec")),
            lcu_summary: dir.join(format!("{stem}_lcu.csv")),
        };
        let note = format!(
            "pressure correction, mesh {0}x{0}, outer iteration {exported}",
            case.nodes_per_side
        );
        save_matrix(&files.matrix, &sys.matrix, &note)?;
        save_vector(&files.rhs, &sys.rhs, &format!("rhs, {note}"))?;
        save_vector(&files.solution, x, &format!("Gauss-Seidel solution, {note}"))?;
        let start = Instant::now();
        let h = symmetrize(&sys.matrix);
        let mut t = decompose_hadamard(&h)?;
        let decomp = start.elapsed().as_secs_f64();
        let start = Instant::now();
        t.reevaluate(&h)?;
        let reeval = start.elapsed().as_secs_f64();
        let csv = format!(
            "{SUMMARY_CSV_HEADER}\n{}\n",
            t.summary_row(case.nodes_per_side, decomp, reeval)
        );
        std::fs::write(&files.lcu_summary, csv)?;
        out.push(files);
    }
    Ok(out)
}

/// One aligned iteration of two runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub iteration: usize,
    pub classical_dp: Option<f64>,
    pub hybrid_dp: Option<f64>,
    pub classical_continuity: Option<f64>,
    pub hybrid_continuity: Option<f64>,
    pub fidelity: Option<f64>,
}

impl ComparisonRow {
    /// `|hybrid - classical| / classical` of the pressure update.
    pub fn dp_relative_difference(&self) -> Option<f64> {
        match (self.classical_dp, self.hybrid_dp) {
            (Some(c), Some(h)) if c != 0.0 => Some((h - c).abs() / c),
            (Some(c), Some(h)) if c == h => Some(0.0),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
    pub classical_iterations: usize,
    pub hybrid_iterations: usize,
    pub classical_converged: bool,
    pub hybrid_converged: bool,
    pub hybrid_stagnated: bool,
}

pub const COMPARISON_CSV_HEADER: &str =
    "iter,classical_rms_dp,hybrid_rms_dp,classical_continuity,hybrid_continuity,fidelity";

impl Comparison {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let mut s = format!("{COMPARISON_CSV_HEADER}\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.iteration,
                opt(r.classical_dp),
                opt(r.hybrid_dp),
                opt(r.classical_continuity),
                opt(r.hybrid_continuity),
                opt(r.fidelity)
            );
        }
        s
    }

    /// Largest relative pressure-update difference from `from` onwards.
    pub fn max_dp_difference_after(&self, from: usize) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.iteration >= from)
            .filter_map(ComparisonRow::dp_relative_difference)
            .fold(0.0, f64::max)
    }
}

/// Residual measure of an iteration: the largest of the three RMS updates.
fn residual(r: &crate::cfd::IterationRecord) -> f64 {
    r.rms_du.max(r.rms_dv).max(r.rms_dp)
}

/// True when an unconverged history improved by less than 1% over its last 50 iterations.
pub fn stagnated(history: &ConvergenceHistory, converged: bool) -> bool {
    let n = history.len();
    if converged || n <= STAGNATION_WINDOW {
        return false;
    }
    let then = residual(&history.records[n - 1 - STAGNATION_WINDOW]);
    let now = residual(&history.records[n - 1]);
    then > 0.0 && 1.0 - now / then < STAGNATION_IMPROVEMENT
}

/// Aligns two runs of the same case iteration by iteration.
pub fn compare_runs(classical: &RunReport, hybrid: &RunReport) -> Result<Comparison> {
    if classical.case != hybrid.case {
        return Err(Error::Config("runs use different case configurations".into()));
    }
    let n = classical.history.len().max(hybrid.history.len());
    let rows = (0..n)
        .map(|i| {
            let c = classical.history.records.get(i);
            let h = hybrid.history.records.get(i);
            ComparisonRow {
                iteration: i + 1,
                classical_dp: c.map(|r| r.rms_dp),
                hybrid_dp: h.map(|r| r.rms_dp),
                classical_continuity: c.map(|r| r.rms_continuity),
                hybrid_continuity: h.map(|r| r.rms_continuity),
                fidelity: hybrid
                    .hhl
                    .iter()
                    .find(|d| d.iteration == i + 1)
                    .and_then(|d| d.result.fidelity),
            }
        })
        .collect();
    Ok(Comparison {
        rows,
        classical_iterations: classical.history.len(),
        hybrid_iterations: hybrid.history.len(),
        classical_converged: classical.converged,
        hybrid_converged: hybrid.converged,
        hybrid_stagnated: stagnated(&hybrid.history, hybrid.converged),
    })
}
