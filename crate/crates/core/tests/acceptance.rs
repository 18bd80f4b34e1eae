//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.
//!
//! Long runs (the 65-node mesh, the overhead trend) are `#[ignore]`d; run them
//! with `cargo test --release --test acceptance -- --ignored`.

use std::io::Write as _;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use qcfd::cfd::{CaseConfig, LinearSystem};
use qcfd::hhl::{
    apply_qpe, build_trotter_unitary, clock_marginals, exact_unitary, hhl_solve, spectral_norm, CMatrix, HhlConfig,
    Precision, StateVector,
};
use qcfd::hybrid::{
    compare_runs, pc_system_at, run_classical_report, run_classical_with_lcu, run_hybrid, HybridConfig, RunReport,
};
use qcfd::lcu::{
    build_cluster, cluster_orthogonal, decompose_entrywise, decompose_hadamard, decompose_trace, symmetrize, Pauli,
    PauliString, TraceScan,
};
use qcfd::sparse::direct_solve;
use qcfd::SparseMatrix;

/// Prints the verdict outside the test harness's capture, then asserts it.
fn verdict(criterion: u32, title: &str, pass: bool, detail: &str) {
    let line = format!(
        "criterion {criterion:>2} [{}] {title}: {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {criterion} failed: {detail}");
}

fn pc10(nodes: usize) -> LinearSystem {
    let (it, sys) = pc_system_at(&CaseConfig::with_nodes(nodes), 10).unwrap();
    assert_eq!(it, 10, "mesh {nodes} converged before iteration 10");
    sys
}

fn best_of<T>(reps: usize, mut f: impl FnMut() -> T) -> f64 {
    (0..reps)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(f());
            start.elapsed().as_secs_f64()
        })
        .fold(f64::INFINITY, f64::min)
}

fn lcu_counts(meshes: &[(usize, usize, usize)]) -> (bool, String) {
    let mut pass = true;
    let mut detail = Vec::new();
    for &(nodes, strings, clusters) in meshes {
        let t = decompose_hadamard(&symmetrize(&pc10(nodes).matrix)).unwrap();
        let ok = t.nonzero_count() == strings && t.clusters().len() == clusters;
        pass &= ok;
        detail.push(format!(
            "{nodes}: {}({}) vs {strings}({clusters})",
            t.nonzero_count(),
            t.clusters().len()
        ));
    }
    (pass, detail.join(", "))
}

#[test]
fn criterion_01_lcu_counts() {
    let (pass, detail) = lcu_counts(&[(5, 63, 5), (9, 319, 7), (17, 1535, 9), (33, 7167, 11)]);
    verdict(1, "LCU string and cluster counts (5-33)", pass, &detail);
}

#[test]
#[ignore = "65-node mesh: minutes in release, much longer unoptimized"]
fn criterion_01_lcu_counts_mesh_65() {
    let (pass, detail) = lcu_counts(&[(65, 32767, 13)]);
    verdict(1, "LCU string and cluster counts (65)", pass, &detail);
}

#[test]
fn criterion_02_reconstruction() {
    let mut worst: f64 = 0.0;
    let mut detail = Vec::new();
    for nodes in [5, 9, 17] {
        let h = symmetrize(&pc10(nodes).matrix);
        let entry = decompose_entrywise(&h).unwrap().reconstruct().max_abs_diff(&h);
        let trace = decompose_trace(&h, TraceScan::Auto)
            .unwrap()
            .reconstruction_error(&h, false);
        let hadamard = decompose_hadamard(&h).unwrap().reconstruction_error(&h, false);
        worst = worst.max(entry).max(trace).max(hadamard);
        detail.push(format!("{nodes}: {entry:.1e}/{trace:.1e}/{hadamard:.1e}"));
    }
    verdict(
        2,
        "reconstruction (entry-wise/trace/Hadamard) <= 1e-12",
        worst <= 1e-12,
        &detail.join(", "),
    );
}

#[test]
fn criterion_03_trace_matches_hadamard() {
    let mut worst: f64 = 0.0;
    let mut compared = 0;
    for nodes in [5, 9, 17] {
        let h = symmetrize(&pc10(nodes).matrix);
        let scan = if nodes <= 9 {
            TraceScan::Full
        } else {
            TraceScan::PatternMasks
        };
        let trace = decompose_trace(&h, scan).unwrap();
        let hadamard = decompose_hadamard(&h).unwrap();
        for (p, alpha, _) in hadamard.strings() {
            worst = worst.max((trace.coefficient_of(&p) - alpha).abs());
            compared += 1;
        }
        assert_eq!(trace.nonzero_count(), hadamard.nonzero_count());
    }
    verdict(
        3,
        "trace vs Hadamard coefficients <= 1e-12",
        worst <= 1e-12,
        &format!("{compared} strings, max difference {worst:.1e}"),
    );
}

#[test]
fn criterion_04_reevaluation_speedup() {
    let h = symmetrize(&pc10(9).matrix);
    assert_eq!(h.rank(), 128);
    let mut t = decompose_hadamard(&h).unwrap();
    let reeval = best_of(200, || t.reevaluate(&h).unwrap().len());
    let hadamard = best_of(20, || decompose_hadamard(&h).unwrap());
    let trace = best_of(3, || decompose_trace(&h, TraceScan::Full).unwrap());
    let (r1, r2) = (hadamard / reeval, trace / reeval);
    verdict(
        4,
        "re-evaluation speedup at 128x128 (>= 10x Hadamard, >= 100x trace)",
        r1 >= 10.0 && r2 >= 100.0,
        &format!("{r1:.1}x vs Hadamard, {r2:.0}x vs trace (re-evaluation {reeval:.2e} s)"),
    );
}

fn kronecker_dense(p: &PauliString) -> DMatrix<Complex64> {
    // Leftmost symbol acts on the most significant qubit.
    let mut m = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
    for q in (0..p.n).rev() {
        let s = p.symbol(q).matrix();
        let s = DMatrix::from_fn(2, 2, |r, c| s[r][c]);
        m = m.kronecker(&s);
    }
    m
}

/// Mask set of the symmetrized PC matrix of an `nc x nc` cell mesh, derived
/// from the 5-point stencil: the block bit plus row-neighbour and
/// column-neighbour index flips.
fn mesh_masks(nc: u64) -> (u32, Vec<u64>) {
    let k = nc.trailing_zeros();
    let n = 2 * k + 1;
    let top = 1u64 << (2 * k);
    let mut masks = vec![top];
    for i in 0..k {
        masks.push(top | ((2u64 << i) - 1));
        masks.push(top | (nc * ((2u64 << i) - 1)));
    }
    (n, masks)
}

#[test]
fn criterion_05_orthogonality() {
    // Grand sums of Hadamard products of the single-qubit matrices.
    let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    let expected = [
        [2.0, 0.0, 0.0, 0.0],
        [0.0, 2.0, 0.0, 0.0],
        [0.0, 0.0, -2.0, 0.0],
        [0.0, 0.0, 0.0, 2.0],
    ];
    let mut table_ok = true;
    for (a, pa) in paulis.iter().enumerate() {
        for (b, pb) in paulis.iter().enumerate() {
            let (ma, mb) = (pa.matrix(), pb.matrix());
            let g: Complex64 = (0..2)
                .flat_map(|r| (0..2).map(move |c| (r, c)))
                .map(|(r, c)| ma[r][c] * mb[r][c])
                .sum();
            table_ok &= (g - Complex64::new(expected[a][b], 0.0)).norm() == 0.0;
        }
    }

    // S S^T = 2^n I: every mask for n <= 6, then the mesh clusters up to n = 13.
    let mut clusters = 0;
    let mut orth_ok = true;
    for n in 1..=6u32 {
        for mask in 0..1u64 << n {
            orth_ok &= cluster_orthogonal(&build_cluster(mask, n));
            clusters += 1;
        }
    }
    let mut largest = 0;
    for nc in [4u64, 8, 16, 32, 64] {
        let (n, masks) = mesh_masks(nc);
        for m in masks {
            orth_ok &= cluster_orthogonal(&build_cluster(m, n));
            clusters += 1;
        }
        largest = n;
    }
    let pc17 = find_masks(&symmetrize(&pc10(17).matrix));
    assert_eq!(
        pc17,
        mesh_masks(16).1.into_iter().collect::<std::collections::BTreeSet<_>>()
    );

    // Sign entries against a dense Kronecker construction, every even-Y string, n <= 4.
    let mut kron_ok = true;
    let mut strings = 0;
    for n in 1..=4u32 {
        for x in 0..1u64 << n {
            for z in 0..1u64 << n {
                let p = PauliString::new(n, x, z);
                if !p.is_real() {
                    continue;
                }
                let dense = kronecker_dense(&p);
                let sm = p.string_matrix().unwrap();
                for r in 0..1usize << n {
                    for c in 0..1usize << n {
                        let want = if sm[r].0 == c as u64 { sm[r].1 } else { 0.0 };
                        kron_ok &= dense[(r, c)] == Complex64::new(want, 0.0);
                    }
                }
                strings += 1;
            }
        }
    }
    verdict(
        5,
        "orthogonality suite",
        table_ok && orth_ok && kron_ok,
        &format!(
            "grand-sum table {table_ok}; S S^T = 2^n I for {clusters} clusters up to n = {largest}: {orth_ok}; \
             Kronecker oracle over {strings} strings: {kron_ok}"
        ),
    );
}

fn find_masks(h: &SparseMatrix) -> std::collections::BTreeSet<u64> {
    h.entries().map(|(r, c, _)| (r ^ c) as u64).collect()
}

fn hhl_exact(a: &SparseMatrix, b: &[f64], prec: &str) -> f64 {
    let t = decompose_hadamard(&symmetrize(a)).unwrap();
    let reference = direct_solve(a, b).unwrap();
    hhl_solve(a, b, &HhlConfig::new(prec.parse().unwrap()), &t, Some(&reference))
        .unwrap()
        .fidelity
        .unwrap()
}

#[test]
fn criterion_06_hhl_oracles() {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let id = hhl_exact(&SparseMatrix::identity(4), &[0.1, 0.2, 0.3, 0.4], "1.2");
    let diag = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
    let d = hhl_exact(&diag, &[h, h], "2.2");

    // Phase estimation of an exactly representable eigenphase lands on one code.
    let p = Precision::new(2, 3).unwrap();
    assert_eq!(p.n_clock(), 6);
    let mut one_hot = true;
    for k in 0..p.codes() {
        let lambda = p.code_value(k);
        let mut u = CMatrix::identity(2, 2);
        u[(0, 0)] = Complex64::from_polar(1.0, lambda * p.evolution_time());
        let mut s = StateVector::with_input(&[1.0, 0.0], p.n_clock()).unwrap();
        apply_qpe(&mut s, &u).unwrap();
        one_hot &= (clock_marginals(&s)[k] - 1.0).abs() < 1e-12;
    }
    verdict(
        6,
        "HHL sanity oracles",
        id >= 1.0 - 1e-9 && d >= 1.0 - 1e-9 && one_hot,
        &format!("identity fidelity {id:.12}, diag(1,2) fidelity {d:.12}, one-hot QPE for 64 codes: {one_hot}"),
    );
}

#[test]
fn criterion_07_trotter_order() {
    let h = symmetrize(&pc10(5).matrix);
    assert_eq!(h.rank(), 32);
    let t = decompose_hadamard(&h).unwrap();
    let time = Precision::new(3, 4).unwrap().evolution_time();
    let exact = exact_unitary(&h, time).unwrap();
    let strings = t.active_strings();
    let errors: Vec<f64> = [1, 2, 4, 8, 16]
        .iter()
        .map(|&r| spectral_norm(&(build_trotter_unitary(&strings, t.n, time, r).unwrap() - &exact)))
        .collect();
    let rates: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let pass = rates.iter().all(|r| (0.8..=1.2).contains(r));
    verdict(
        7,
        "first-order Trotter convergence",
        pass,
        &format!(
            "errors {}, observed rates {rates:.3?}",
            errors.iter().map(|e| format!("{e:.3e}")).collect::<Vec<_>>().join(" ")
        ),
    );
}

#[test]
fn criterion_08_precision_and_pruning() {
    let sys = pc10(5);
    let t = decompose_hadamard(&symmetrize(&sys.matrix)).unwrap();
    let reference = direct_solve(&sys.matrix, &sys.rhs).unwrap();
    let solve = |prec: &str, prune: f64| {
        let cfg = HhlConfig {
            prune_limit: prune,
            ..HhlConfig::new(prec.parse().unwrap())
        };
        hhl_solve(&sys.matrix, &sys.rhs, &cfg, &t, Some(&reference)).unwrap()
    };
    let fid: Vec<f64> = ["3.3", "3.4", "3.5"]
        .iter()
        .map(|p| solve(p, 0.0).fidelity.unwrap())
        .collect();
    let full = solve("3.4", 0.0);
    let pruned = solve("3.4", 1e-4);
    let dfid = (full.fidelity.unwrap() - pruned.fidelity.unwrap()).abs();
    let cut = 1.0 - pruned.rotations_applied as f64 / full.rotations_applied as f64;
    let pass = fid[2] >= 0.999 && fid[0] <= fid[1] && fid[1] <= fid[2] && dfid <= 0.01 && cut >= 0.4;
    verdict(
        8,
        "fidelity vs precision and pruning",
        pass,
        &format!(
            "fidelity 3.3/3.4/3.5 = {:.5}/{:.5}/{:.5}; prune 1e-4: rotations {} -> {} ({:.0}% cut), |dF| {dfid:.1e}",
            fid[0],
            fid[1],
            fid[2],
            full.rotations_applied,
            pruned.rotations_applied,
            100.0 * cut
        ),
    );
}

fn hybrid_5(coefficient_limit: f64, outer_max: usize) -> RunReport {
    let case = CaseConfig {
        outer_max,
        ..CaseConfig::default()
    };
    let hhl = HhlConfig {
        coefficient_limit,
        ..HhlConfig::new(Precision::new(3, 4).unwrap())
    };
    let cfg = HybridConfig {
        shadow_reference: false,
        sample_iterations: Vec::new(),
        ..HybridConfig::new(case, hhl)
    };
    run_hybrid(&cfg).unwrap()
}

fn first_continuity_below(r: &RunReport, limit: f64) -> Option<usize> {
    r.history
        .records
        .iter()
        .find(|x| x.rms_continuity <= limit)
        .map(|x| x.iteration)
}

#[test]
fn criterion_09_hybrid_convergence() {
    let hybrid = hybrid_5(0.0, 300);
    let classical = run_classical_report(&CaseConfig {
        outer_max: 300,
        ..CaseConfig::default()
    })
    .unwrap();
    let cmp = compare_runs(&classical, &hybrid).unwrap();
    let reached = first_continuity_below(&hybrid, 1e-10);
    let overlap = classical.history.len().min(hybrid.history.len());
    let worst = cmp.max_dp_difference_after(21);
    verdict(
        9,
        "5-node hybrid at 3.4",
        reached.is_some() && worst <= 0.10 && overlap > 20,
        &format!(
            "continuity <= 1e-10 at iteration {reached:?}; max pressure-update deviation after iteration 20: {:.1}% over {} iterations",
            100.0 * worst,
            overlap - 20
        ),
    );
}

#[test]
fn criterion_10_coefficient_threshold() {
    let h = symmetrize(&pc10(5).matrix);
    let t = decompose_hadamard(&h).unwrap();
    let counts: Vec<usize> = [1e-2, 4e-2, 5e-2]
        .iter()
        .map(|&l| t.filter_by_coefficient(l).unwrap().active_count())
        .collect();
    let at = |l: f64| first_continuity_below(&hybrid_5(l, 300), 1e-10);
    let (full, loose, tight) = (at(0.0), at(1e-2), at(5e-2));
    let rank = |v: Option<usize>| v.unwrap_or(usize::MAX);
    let similar = match (full, loose) {
        (Some(a), Some(b)) => (b as f64 - a as f64).abs() <= 0.1 * a as f64,
        _ => false,
    };
    let pass = counts == [53, 33, 14] && similar && rank(tight) > rank(full);
    verdict(
        10,
        "coefficient-threshold study",
        pass,
        &format!(
            "active strings {counts:?}; iterations to continuity 1e-10: unfiltered {full:?}, 1e-2 {loose:?}, 5e-2 {tight:?}"
        ),
    );
}

#[test]
fn criterion_11_cfd_properties() {
    let mut worst_row: f64 = 0.0;
    for nodes in [5, 9, 17] {
        let a = pc10(nodes).matrix;
        // Row 0 is the pressure anchor.
        for r in 1..a.rank() {
            worst_row = worst_row.max(a.row(r).map(|(_, v)| v).sum::<f64>().abs());
        }
    }
    let run = run_classical_report(&CaseConfig::with_nodes(17)).unwrap();
    let last = *run.history.last().unwrap();
    let converged = run.converged && last.rms_du < 1e-12 && last.rms_dv < 1e-12 && last.rms_dp < 1e-12;
    let it10 = run.history.records[9];
    let ratio = it10.gs_p as f64 / it10.gs_u.max(it10.gs_v) as f64;
    verdict(
        11,
        "CFD properties",
        worst_row <= 1e-13 && converged && ratio >= 50.0,
        &format!(
            "max non-anchor PC row sum {worst_row:.1e}; 17-node run converged in {} iterations \
             (final {:.1e}/{:.1e}/{:.1e}); GS iterations at outer 10: PC {} vs momentum {} (ratio {ratio:.0})",
            run.history.len(),
            last.rms_du,
            last.rms_dv,
            last.rms_dp,
            it10.gs_p,
            it10.gs_u.max(it10.gs_v)
        ),
    );
}

#[test]
#[ignore = "tens of minutes: full classical runs up to the 33-node mesh"]
fn criterion_12_overhead_trend() {
    let ratios: Vec<(usize, f64)> = [5, 9, 17, 33]
        .iter()
        .map(|&n| {
            (
                n,
                run_classical_with_lcu(&CaseConfig::with_nodes(n), 0.0)
                    .unwrap()
                    .overhead_ratio(),
            )
        })
        .collect();
    let increasing = ratios.windows(2).all(|w| w[1].1 > w[0].1);
    verdict(
        12,
        "LCU overhead ratio strictly increasing over 5/9/17/33",
        increasing,
        &format!("{ratios:.4?}"),
    );
}
