//! Python bindings: sparse matrices, Pauli strings, LCU templates, HHL solves
//! and classical or hybrid cavity runs.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::{PyBool, PyDict};

use qcfd::cfd::{CaseConfig, ConvergenceHistory};
use qcfd::config::resolve;
use qcfd::hhl::{hhl_solve, HhlConfig, HhlResult};
use qcfd::hybrid::{pc_system_at, run_classical_report, run_hybrid, RunReport};
use qcfd::lcu::{decompose_hadamard, decompose_trace, symmetrize, LcuTemplate, PauliString, TraceScan};
use qcfd::SparseMatrix;

create_exception!(
    qcfd,
    QcfdError,
    PyException,
    "Error raised by the qcfd core; the message starts with its category."
);

fn err(e: qcfd::Error) -> PyErr {
    QcfdError::new_err(format!("[{}] {e}", e.category()))
}

/// Converts keyword arguments into `key=value` config overrides.
fn overrides(kwargs: Option<&Bound<'_, PyDict>>) -> PyResult<Vec<String>> {
    let mut out = Vec::new();
    if let Some(kw) = kwargs {
        for (k, v) in kw.iter() {
            let value = if v.is_instance_of::<PyBool>() {
                v.extract::<bool>()?.to_string()
            } else {
                v.str()?.to_string()
            };
            out.push(format!("{}={value}", k.str()?));
        }
    }
    Ok(out)
}

#[pyclass(name = "SparseMatrix", module = "qcfd", from_py_object)]
#[derive(Clone)]
struct PySparseMatrix {
    inner: SparseMatrix,
}

#[pymethods]
impl PySparseMatrix {
    /// Builds a square matrix of rank `n` from `(row, col, value)` triplets.
    #[new]
    fn new(n: usize, triplets: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        Ok(Self {
            inner: SparseMatrix::from_triplets(n, &triplets).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self {
            inner: SparseMatrix::identity(n),
        }
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(Self {
            inner: qcfd::io::load_matrix(&path).map_err(err)?,
        })
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        qcfd::io::save_matrix(&path, &self.inner, "written from Python").map_err(err)
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    fn get(&self, row: usize, col: usize) -> f64 {
        self.inner.get(row, col)
    }

    fn triplets(&self) -> Vec<(usize, usize, f64)> {
        self.inner.entries().collect()
    }

    fn matvec(&self, x: Vec<f64>) -> PyResult<Vec<f64>> {
        if x.len() != self.inner.rank() {
            return Err(err(qcfd::Error::Dimension(format!(
                "vector length {} for rank {}",
                x.len(),
                self.inner.rank()
            ))));
        }
        Ok(self.inner.mul_vec(&x))
    }

    fn to_dense(&self) -> Vec<Vec<f64>> {
        let d = self.inner.to_dense();
        (0..d.nrows()).map(|r| d.row(r).iter().copied().collect()).collect()
    }

    /// `[[0, A], [A^T, 0]]`.
    fn symmetrize(&self) -> Self {
        Self {
            inner: symmetrize(&self.inner),
        }
    }

    fn __repr__(&self) -> String {
        format!("SparseMatrix(rank={}, nnz={})", self.inner.rank(), self.inner.nnz())
    }
}

#[pyclass(name = "PauliString", module = "qcfd", from_py_object)]
#[derive(Clone)]
struct PyPauliString {
    inner: PauliString,
}

#[pymethods]
impl PyPauliString {
    /// Parses a big-endian label such as `"XZY"`.
    #[new]
    fn new(label: &str) -> PyResult<Self> {
        Ok(Self {
            inner: label.parse().map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> u32 {
        self.inner.n
    }

    #[getter]
    fn x_mask(&self) -> u64 {
        self.inner.x_mask
    }

    #[getter]
    fn z_mask(&self) -> u64 {
        self.inner.z_mask
    }

    /// Column of the single nonzero in `row`.
    fn column(&self, row: u64) -> u64 {
        self.inner.column(row)
    }

    /// Entry at `(row, column(row))` as a complex number.
    fn entry(&self, row: u64) -> (f64, f64) {
        let z = self.inner.entry(row);
        (z.re, z.im)
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("PauliString('{}')", self.inner)
    }
}

#[pyclass(name = "LcuTemplate", module = "qcfd")]
struct PyLcuTemplate {
    inner: LcuTemplate,
}

#[pymethods]
impl PyLcuTemplate {
    #[getter]
    fn qubits(&self) -> u32 {
        self.inner.n
    }

    #[getter]
    fn clusters(&self) -> usize {
        self.inner.clusters().len()
    }

    #[getter]
    fn candidates(&self) -> usize {
        self.inner.candidate_count()
    }

    #[getter]
    fn nonzero(&self) -> usize {
        self.inner.nonzero_count()
    }

    #[getter]
    fn active(&self) -> usize {
        self.inner.active_count()
    }

    /// Active strings and coefficients as `(label, alpha)` pairs.
    fn strings(&self) -> Vec<(String, f64)> {
        self.inner
            .active_strings()
            .into_iter()
            .map(|(p, a)| (p.to_string(), a))
            .collect()
    }

    fn coefficient(&self, label: &str) -> PyResult<f64> {
        let p: PauliString = label.parse().map_err(err)?;
        Ok(self.inner.coefficient_of(&p))
    }

    /// Deactivates strings with `|alpha|` below `limit`.
    fn set_filter(&mut self, limit: f64) -> PyResult<()> {
        self.inner.set_filter(limit).map_err(err)
    }

    /// Recomputes coefficients for a matrix with the template's pattern.
    fn reevaluate(&mut self, h: &PySparseMatrix) -> PyResult<()> {
        self.inner.reevaluate(&h.inner).map(|_| ()).map_err(err)
    }

    #[pyo3(signature = (active_only = false))]
    fn reconstruct(&self, active_only: bool) -> PySparseMatrix {
        PySparseMatrix {
            inner: self.inner.reconstruct(active_only),
        }
    }

    #[pyo3(signature = (h, active_only = false))]
    fn reconstruction_error(&self, h: &PySparseMatrix, active_only: bool) -> f64 {
        self.inner.reconstruction_error(&h.inner, active_only)
    }

    fn __repr__(&self) -> String {
        format!(
            "LcuTemplate(qubits={}, clusters={}, nonzero={}, active={})",
            self.inner.n,
            self.inner.clusters().len(),
            self.inner.nonzero_count(),
            self.inner.active_count()
        )
    }
}

/// Pauli decomposition of a symmetric matrix; `method` is `"hadamard"` or `"trace"`.
#[pyfunction]
#[pyo3(signature = (h, method = "hadamard"))]
fn decompose(h: &PySparseMatrix, method: &str) -> PyResult<PyLcuTemplate> {
    let inner = match method {
        "hadamard" => decompose_hadamard(&h.inner),
        "trace" => decompose_trace(&h.inner, TraceScan::Auto),
        other => return Err(err(qcfd::Error::Config(format!("unknown method {other:?}")))),
    }
    .map_err(err)?;
    Ok(PyLcuTemplate { inner })
}

/// Pressure-correction matrix and rhs of a classical run at outer `iteration`.
#[pyfunction]
#[pyo3(signature = (nodes_per_side = 5, iteration = 10, **kwargs))]
fn pressure_system(
    nodes_per_side: usize,
    iteration: usize,
    kwargs: Option<&Bound<'_, PyDict>>,
) -> PyResult<(PySparseMatrix, Vec<f64>)> {
    let cfg = resolve(None, &overrides(kwargs)?).map_err(err)?;
    let case = CaseConfig {
        nodes_per_side,
        ..cfg.case
    };
    let (_, sys) = pc_system_at(&case, iteration).map_err(err)?;
    Ok((PySparseMatrix { inner: sys.matrix }, sys.rhs))
}

fn hhl_dict<'py>(py: Python<'py>, r: &HhlResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("x", r.x.clone())?;
    d.set_item("x_hat", r.x_hat.clone())?;
    d.set_item("success_probability", r.e)?;
    d.set_item("rotations", r.rotations_applied)?;
    d.set_item("fidelity", r.fidelity)?;
    d.set_item("l2", r.l2)?;
    d.set_item("rms", r.rms)?;
    d.set_item("seconds", r.seconds)?;
    Ok(d)
}

/// Emulated HHL solve of `A x = b`, with fidelity against a dense reference.
#[pyfunction]
#[pyo3(signature = (a, b, precision = "3.4", prune_limit = 0.0, coefficient_limit = 0.0, trotter_steps = 64))]
fn hhl<'py>(
    py: Python<'py>,
    a: &PySparseMatrix,
    b: Vec<f64>,
    precision: &str,
    prune_limit: f64,
    coefficient_limit: f64,
    trotter_steps: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let config = HhlConfig {
        prune_limit,
        coefficient_limit,
        trotter_steps,
        ..HhlConfig::new(precision.parse().map_err(err)?)
    };
    let template = decompose_hadamard(&symmetrize(&a.inner)).map_err(err)?;
    let reference = qcfd::sparse::direct_solve(&a.inner, &b).map_err(err)?;
    let r = hhl_solve(&a.inner, &b, &config, &template, Some(&reference)).map_err(err)?;
    hhl_dict(py, &r)
}

fn history_dict<'py>(py: Python<'py>, h: &ConvergenceHistory) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("rms_du", h.records.iter().map(|r| r.rms_du).collect::<Vec<_>>())?;
    d.set_item("rms_dv", h.records.iter().map(|r| r.rms_dv).collect::<Vec<_>>())?;
    d.set_item("rms_dp", h.records.iter().map(|r| r.rms_dp).collect::<Vec<_>>())?;
    d.set_item(
        "rms_continuity",
        h.records.iter().map(|r| r.rms_continuity).collect::<Vec<_>>(),
    )?;
    d.set_item("gs_p", h.records.iter().map(|r| r.gs_p).collect::<Vec<_>>())?;
    Ok(d)
}

fn report_dict<'py>(py: Python<'py>, r: &RunReport) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("iterations", r.history.len())?;
    d.set_item("converged", r.converged)?;
    d.set_item("history", history_dict(py, &r.history)?)?;
    d.set_item("cfd_seconds", r.cfd_seconds)?;
    d.set_item("fidelity", r.hhl.iter().map(|h| h.result.fidelity).collect::<Vec<_>>())?;
    d.set_item("summary", r.summary())?;
    Ok(d)
}

/// Classical SIMPLE run; keyword arguments are configuration keys.
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn run_classical<'py>(py: Python<'py>, kwargs: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = resolve(None, &overrides(kwargs)?).map_err(err)?;
    let r = run_classical_report(&cfg.case).map_err(err)?;
    report_dict(py, &r)
}

/// Hybrid run with HHL pressure corrections; keyword arguments are configuration keys.
#[pyfunction]
#[pyo3(signature = (**kwargs))]
fn run_hybrid_case<'py>(py: Python<'py>, kwargs: Option<&Bound<'py, PyDict>>) -> PyResult<Bound<'py, PyDict>> {
    let cfg = resolve(None, &overrides(kwargs)?).map_err(err)?;
    let r = run_hybrid(&cfg).map_err(err)?;
    report_dict(py, &r)
}

#[pymodule]
#[pyo3(name = "qcfd")]
fn qcfd_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("QcfdError", m.py().get_type::<QcfdError>())?;
    m.add_class::<PySparseMatrix>()?;
    m.add_class::<PyPauliString>()?;
    m.add_class::<PyLcuTemplate>()?;
    m.add_function(wrap_pyfunction!(decompose, m)?)?;
    m.add_function(wrap_pyfunction!(pressure_system, m)?)?;
    m.add_function(wrap_pyfunction!(hhl, m)?)?;
    m.add_function(wrap_pyfunction!(run_classical, m)?)?;
    m.add("run_hybrid", wrap_pyfunction!(run_hybrid_case, m)?)?;
    Ok(())
}
