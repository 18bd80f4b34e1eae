//! `qcfd`: classical and hybrid cavity runs, LCU decomposition studies, HHL
//! parameter sweeps, system sampling and the overhead benchmark.

mod table;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcfd::cfd::CaseConfig;
use qcfd::config::{resolve, to_manifest};
use qcfd::hhl::{hhl_solve, HhlConfig, Precision, DIAGNOSTICS_CSV_HEADER};
use qcfd::hybrid::{
    compare_runs, pc_system_at, run_classical_report, run_classical_with_lcu, run_hybrid, sample_and_export,
    HybridConfig, RunMode,
};
use qcfd::io::{load_matrix, load_vector};
use qcfd::lcu::{decompose_hadamard, decompose_trace, symmetrize, LcuTemplate, TraceScan, SUMMARY_CSV_HEADER};
use qcfd::sparse::direct_solve;
use qcfd::{Error, Result};

const MESH_SIZES: [usize; 5] = [5, 9, 17, 33, 65];
const TIMING_NOTE: &str = "timing columns are indicative; compare ratios only";

#[derive(Parser)]
#[command(
    name = "qcfd",
    version,
    about = "Hybrid quantum-classical lid-driven cavity workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Configuration override, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Classical SIMPLE run with Gauss-Seidel pressure correction.
    Classical(Common),
    /// SIMPLE with HHL pressure correction, compared against the classical run.
    Hybrid {
        #[command(flatten)]
        common: Common,
        /// Skip the classical reference run.
        #[arg(long)]
        no_compare: bool,
    },
    /// LCU decomposition of the pressure-correction matrix at a given outer iteration.
    Decompose {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "hadamard,trace")]
        methods: Vec<Method>,
        #[arg(long, default_value_t = 10)]
        iteration: usize,
    },
    /// HHL sweep over precisions, prune limits and coefficient limits for one system.
    Hhl {
        #[command(flatten)]
        common: Common,
        /// Matrix Market file.
        #[arg(long)]
        matrix: PathBuf,
        /// Right-hand-side vector file.
        #[arg(long)]
        rhs: PathBuf,
        #[arg(long, value_delimiter = ',')]
        precisions: Vec<Precision>,
        #[arg(long, value_delimiter = ',')]
        prune: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        coeff: Vec<f64>,
    },
    /// Exports pressure-correction systems at the configured sample iterations.
    Sample {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        iterations: Vec<usize>,
    },
    /// LCU overhead against classical CFD time across meshes.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Hadamard,
    Trace,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 3,
        Error::Parse(_) => 4,
        Error::Io(_) => 5,
        Error::Dimension(_) => 6,
        Error::Pattern(_) => 7,
        Error::Contract(_) => 8,
        Error::Singular(_) => 9,
        Error::Assembly(_) => 10,
        Error::Normalization(_) => 11,
        Error::InvisibleSolution(_) => 12,
        Error::Divergence { .. } => 13,
    }
}

struct Session {
    cfg: HybridConfig,
    out: PathBuf,
}

impl Session {
    fn open(common: &Common, command: &str) -> Result<Self> {
        let text = match &common.config {
            Some(p) => Some(std::fs::read_to_string(p)?),
            None => None,
        };
        let cfg = resolve(text.as_deref(), &common.set)?;
        std::fs::create_dir_all(&common.out)?;
        let args: Vec<String> = std::env::args().skip(1).collect();
        let manifest = format!("# qcfd {command}\n# args: {}\n{}", args.join(" "), to_manifest(&cfg));
        std::fs::write(common.out.join("manifest.txt"), manifest)?;
        Ok(Self {
            cfg,
            out: common.out.clone(),
        })
    }

    fn write(&self, name: &str, contents: &str) -> Result<PathBuf> {
        let p = self.out.join(name);
        std::fs::write(&p, contents)?;
        Ok(p)
    }

    /// Writes `name` as CSV and prints its aligned render.
    fn table(&self, name: &str, csv: &str) -> Result<()> {
        self.write(name, csv)?;
        print!("{}", table::render(csv));
        Ok(())
    }
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::Config("empty mesh size list".into()));
    }
    if let Some(s) = sizes.iter().find(|s| !MESH_SIZES.contains(s)) {
        return Err(Error::Config(format!("mesh size {s} not in {MESH_SIZES:?}")));
    }
    Ok(())
}

fn classical(common: &Common) -> Result<()> {
    let mut s = Session::open(common, "classical")?;
    s.cfg.mode = RunMode::Classical;
    let report = run_classical_report(&s.cfg.case)?;
    s.write("history.csv", &report.history.to_csv())?;
    let summary = report.summary();
    s.write("summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}

fn hybrid(common: &Common, no_compare: bool) -> Result<()> {
    let mut s = Session::open(common, "hybrid")?;
    s.cfg.mode = RunMode::Hybrid;
    let report = run_hybrid(&s.cfg)?;
    s.write("history.csv", &report.history.to_csv())?;
    s.write("hhl.csv", &report.hhl_csv(&s.cfg.hhl))?;
    let mut summary = report.summary();
    if !no_compare {
        let classical = run_classical_report(&s.cfg.case)?;
        let cmp = compare_runs(&classical, &report)?;
        s.write("comparison.csv", &cmp.to_csv())?;
        let _ = writeln!(summary, "classical iters    {}", cmp.classical_iterations);
        let _ = writeln!(
            summary,
            "max dp difference  {:.4} (after iteration 20)",
            cmp.max_dp_difference_after(21)
        );
        let _ = writeln!(summary, "stagnated          {}", cmp.hybrid_stagnated);
    }
    s.write("summary.txt", &summary)?;
    print!("{summary}");
    Ok(())
}

fn timed<T>(f: impl FnOnce() -> Result<T>) -> Result<(T, f64)> {
    let start = Instant::now();
    let v = f()?;
    Ok((v, start.elapsed().as_secs_f64()))
}

/// Best of a few re-evaluations, to damp timer noise on tiny systems.
fn reeval_seconds(t: &mut LcuTemplate, h: &qcfd::SparseMatrix) -> Result<f64> {
    let mut best = f64::INFINITY;
    for _ in 0..5 {
        let (_, dt) = timed(|| t.reevaluate(h).map(|_| ()))?;
        best = best.min(dt);
    }
    Ok(best)
}

fn decompose(common: &Common, sizes: &[usize], methods: &[Method], iteration: usize) -> Result<()> {
    check_sizes(sizes)?;
    if methods.is_empty() {
        return Err(Error::Config("empty method list".into()));
    }
    if sizes.contains(&65) && methods.contains(&Method::Trace) {
        return Err(Error::Config(
            "the trace method at mesh 65 (rank 8192, 4^13 strings) is infeasible; use --methods hadamard".into(),
        ));
    }
    let s = Session::open(common, "decompose")?;
    let mut csv = format!("method,iteration,{SUMMARY_CSV_HEADER}\n");
    for &size in sizes {
        let case = CaseConfig {
            nodes_per_side: size,
            ..s.cfg.case.clone()
        };
        let (it, sys) = pc_system_at(&case, iteration)?;
        if it < iteration {
            log::warn!("mesh {size} converged at iteration {it}; decomposing that system");
        }
        let h = symmetrize(&sys.matrix);
        let mut counts = Vec::new();
        for &m in methods {
            let (mut t, secs) = match m {
                Method::Hadamard => timed(|| decompose_hadamard(&h))?,
                Method::Trace => timed(|| decompose_trace(&h, TraceScan::Auto))?,
            };
            let re = reeval_seconds(&mut t, &h)?;
            let name = if m == Method::Hadamard { "hadamard" } else { "trace" };
            let _ = writeln!(csv, "{name},{it},{}", t.summary_row(size, secs, re));
            counts.push(t.nonzero_count());
        }
        if counts.windows(2).any(|w| w[0] != w[1]) {
            log::warn!("mesh {size}: methods disagree on nonzero counts {counts:?}");
        }
    }
    s.table("lcu_summary.csv", &csv)?;
    println!("({TIMING_NOTE})");
    Ok(())
}

fn hhl(
    common: &Common,
    matrix: &Path,
    rhs: &Path,
    precisions: &[Precision],
    prune: &[f64],
    coeff: &[f64],
) -> Result<()> {
    let s = Session::open(common, "hhl")?;
    let a = load_matrix(matrix)?;
    let b = load_vector(rhs)?;
    if !a.rank().is_power_of_two() {
        return Err(Error::Dimension(format!(
            "matrix rank {} is not a power of two",
            a.rank()
        )));
    }
    let reference = direct_solve(&a, &b)?;
    let template = decompose_hadamard(&symmetrize(&a))?;
    let base = &s.cfg.hhl;
    let precisions = if precisions.is_empty() {
        vec![base.precision]
    } else {
        precisions.to_vec()
    };
    let prune = if prune.is_empty() {
        vec![base.prune_limit]
    } else {
        prune.to_vec()
    };
    let coeff = if coeff.is_empty() {
        vec![base.coefficient_limit]
    } else {
        coeff.to_vec()
    };
    let mut csv = format!("coefficient_limit,{DIAGNOSTICS_CSV_HEADER}\n");
    for &precision in &precisions {
        for &prune_limit in &prune {
            for &coefficient_limit in &coeff {
                let config = HhlConfig {
                    precision,
                    prune_limit,
                    coefficient_limit,
                    ..base.clone()
                };
                let r = hhl_solve(&a, &b, &config, &template, Some(&reference))?;
                let _ = writeln!(csv, "{coefficient_limit:e},{}", r.csv_row(&config));
            }
        }
    }
    s.table("hhl.csv", &csv)
}

fn sample(common: &Common, iterations: &[usize]) -> Result<()> {
    let mut s = Session::open(common, "sample")?;
    s.cfg.mode = RunMode::Sample;
    let its = if iterations.is_empty() {
        s.cfg.sample_iterations.clone()
    } else {
        iterations.to_vec()
    };
    let files = sample_and_export(&s.cfg.case, &its, &s.out)?;
    for f in files {
        println!(
            "iteration {} (system of iteration {}): {}, {}, {}, {}",
            f.iteration,
            f.exported_iteration,
            f.matrix.display(),
            f.rhs.display(),
            f.solution.display(),
            f.lcu_summary.display()
        );
    }
    Ok(())
}

fn bench(common: &Common, sizes: &[usize]) -> Result<()> {
    check_sizes(sizes)?;
    let s = Session::open(common, "bench")?;
    let mut csv = String::from(
        "mesh,clusters,nonzero,decomp_seconds,reeval_seconds_per_iter,iterations,cfd_seconds,overhead_ratio\n",
    );
    let mut ratios = Vec::new();
    for &size in sizes {
        let case = CaseConfig {
            nodes_per_side: size,
            ..s.cfg.case.clone()
        };
        let r = run_classical_with_lcu(&case, s.cfg.hhl.coefficient_limit)?;
        let _ = writeln!(
            csv,
            "{size},{},{},{:.3e},{:.3e},{},{:.3e},{:.4e}",
            r.lcu.clusters,
            r.lcu.nonzero,
            r.lcu.decompose_seconds,
            r.lcu.mean_reevaluate_seconds(),
            r.history.len(),
            r.cfd_seconds,
            r.overhead_ratio()
        );
        ratios.push(r.overhead_ratio());
    }
    s.table("bench.csv", &csv)?;
    if ratios.len() > 1 {
        let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
        println!("overhead ratio strictly increasing with mesh: {increasing}");
    }
    println!("({TIMING_NOTE})");
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Classical(c) => classical(c),
        Command::Hybrid { common, no_compare } => hybrid(common, *no_compare),
        Command::Decompose {
            common,
            sizes,
            methods,
            iteration,
        } => decompose(common, sizes, methods, *iteration),
        Command::Hhl {
            common,
            matrix,
            rhs,
            precisions,
            prune,
            coeff,
        } => hhl(common, matrix, rhs, precisions, prune, coeff),
        Command::Sample { common, iterations } => sample(common, iterations),
        Command::Bench { common, sizes } => bench(common, sizes),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.category());
            ExitCode::from(exit_code(&e))
        }
    }
}
