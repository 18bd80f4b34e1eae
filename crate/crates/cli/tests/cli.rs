use std::path::Path;
use std::process::{Command, Output};

fn qcfd(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcfd"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn csv_rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn decompose_methods_agree_on_counts() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcfd(&["decompose", "--sizes", "5,9"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("lcu_summary.csv"));
    assert_eq!(rows.len(), 4);
    // method,iteration,mesh,N,clusters,candidates,nonzero,...
    assert_eq!((rows[0][6].as_str(), rows[1][6].as_str()), ("63", "63"));
    assert_eq!((rows[2][6].as_str(), rows[3][6].as_str()), ("319", "319"));
    assert!(dir.path().join("manifest.txt").exists());
}

#[test]
fn trace_at_mesh_65_refused() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcfd(&["decompose", "--sizes", "65", "--methods", "trace"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn usage_and_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcfd(&["decompose", "--sizes", ""], dir.path());
    assert!(!o.status.success());
    let o = qcfd(&["decompose", "--sizes", "7"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = qcfd(&["classical", "--set", "nodes=5"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    let o = qcfd(&["classical", "--set", "nodes_per_side=4"], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn identity_system_has_unit_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("eye.mtx");
    let v = dir.path().join("b.vec");
    std::fs::write(
        &m,
        "%%MatrixMarket matrix coordinate real general\n4 4 4\n1 1 1\n2 2 1\n3 3 1\n4 4 1\n",
    )
    .unwrap();
    std::fs::write(&v, "4 rhs\n1 2 3 4\n").unwrap();
    let o = qcfd(
        &[
            "hhl",
            "--matrix",
            m.to_str().unwrap(),
            "--rhs",
            v.to_str().unwrap(),
            "--precisions",
            "1.1,2.2,3.3",
        ],
        &dir.path().join("out"),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&dir.path().join("out/hhl.csv"));
    assert_eq!(rows.len(), 3);
    for r in rows {
        // coefficient_limit,precision,n_clock,trotter_r,C,prune_limit,rotations,E,fidelity,...
        let f: f64 = r[8].parse().unwrap();
        assert!((f - 1.0).abs() < 1e-9, "{f}");
    }
}

#[test]
fn sampled_system_feeds_hhl_and_pruning_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcfd(&["sample", "--iterations", "10"], dir.path());
    assert!(o.status.success());
    let m = dir.path().join("mesh5_iter10_pc.mtx");
    let v = dir.path().join("mesh5_iter10_rhs.vec");
    let out = dir.path().join("h");
    let o = qcfd(
        &[
            "hhl",
            "--matrix",
            m.to_str().unwrap(),
            "--rhs",
            v.to_str().unwrap(),
            "--prune",
            "1e-6,1e-5,1e-4,1e-3",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rotations: Vec<usize> = csv_rows(&out.join("hhl.csv"))
        .iter()
        .map(|r| r[6].parse().unwrap())
        .collect();
    assert!(rotations.windows(2).all(|w| w[1] < w[0]), "{rotations:?}");
}

#[test]
fn bench_single_mesh_is_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let o = qcfd(&["bench", "--sizes", "5"], dir.path());
    assert!(o.status.success());
    assert_eq!(csv_rows(&dir.path().join("bench.csv")).len(), 1);
}

#[test]
fn manifest_rerun_reproduces_history() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(qcfd(&["classical", "--set", "relax_pressure=0.3"], &a).status.success());
    let manifest = a.join("manifest.txt");
    assert!(qcfd(&["classical", "--config", manifest.to_str().unwrap()], &b)
        .status
        .success());
    let strip = |p: &Path| -> Vec<Vec<String>> {
        csv_rows(p)
            .into_iter()
            .map(|mut r| {
                r.pop(); // seconds
                r
            })
            .collect()
    };
    assert_eq!(strip(&a.join("history.csv")), strip(&b.join("history.csv")));
}
