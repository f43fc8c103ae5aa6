//! Python bindings: matrices, format conversion, SpMV, features, benchmarking
//! and model-driven format selection.

use std::path::PathBuf;

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use spformat_core::bench::{run_bench, BenchConfig, BenchRecord, ConstantClock, WallClock};
use spformat_core::features::{extract_features, FeatureVector, FEATURE_NAMES};
use spformat_core::kernels::{spmv_into, Executor};
use spformat_core::matrix::{read_matrix_market_file, write_matrix_market};
use spformat_core::model::DecisionTreeModel;
use spformat_core::{self as core, FormatParams, FormatTag};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn parse_tag(tag: &str) -> PyResult<FormatTag> {
    tag.parse().map_err(value_err)
}

/// Sparse matrix in canonical coordinate form.
#[pyclass(name = "CooMatrix", module = "spformat_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCoo {
    inner: core::CooMatrix,
}

#[pymethods]
impl PyCoo {
    /// Sums duplicate entries and drops explicit zeros.
    #[new]
    fn new(n_rows: usize, n_cols: usize, rows: Vec<usize>, cols: Vec<usize>, data: Vec<f64>) -> PyResult<Self> {
        if rows.len() != cols.len() || rows.len() != data.len() {
            return Err(PyValueError::new_err("rows, cols and data must have equal length"));
        }
        let entries = rows.into_iter().zip(cols).zip(data).map(|((r, c), v)| (r, c, v));
        core::CooMatrix::from_triplets(n_rows, n_cols, entries)
            .map(|inner| PyCoo { inner })
            .map_err(value_err)
    }

    #[staticmethod]
    fn read_mtx(path: PathBuf) -> PyResult<Self> {
        read_matrix_market_file(&path)
            .map(|inner| PyCoo { inner })
            .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))
    }

    fn write_mtx(&self, path: PathBuf) -> PyResult<()> {
        let file = std::fs::File::create(&path).map_err(|e| PyIOError::new_err(e.to_string()))?;
        write_matrix_market(&self.inner, std::io::BufWriter::new(file)).map_err(|e| PyIOError::new_err(e.to_string()))
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    /// `(rows, cols, data)` in row-major order.
    fn triplets(&self) -> (Vec<u32>, Vec<u32>, Vec<f64>) {
        (self.inner.rows().to_vec(), self.inner.cols().to_vec(), self.inner.data().to_vec())
    }

    #[pyo3(signature = (format, omega=4, sigma=16, sell_c=8, sell_sigma=0))]
    fn convert(&self, format: &str, omega: usize, sigma: usize, sell_c: usize, sell_sigma: usize) -> PyResult<PyFormatMatrix> {
        let params = FormatParams {
            csr5_omega: omega,
            csr5_sigma: sigma,
            sell_c,
            sell_sigma,
        };
        core::convert(&self.inner, parse_tag(format)?, &params)
            .map(|inner| PyFormatMatrix { inner })
            .map_err(value_err)
    }

    fn features<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        features_dict(py, &extract_features(&self.inner).map_err(value_err)?)
    }

    fn __eq__(&self, other: &Self) -> bool {
        self.inner == other.inner
    }

    fn __repr__(&self) -> String {
        format!("CooMatrix({}x{}, nnz={})", self.inner.n_rows(), self.inner.n_cols(), self.inner.nnz())
    }
}

/// A matrix stored in one of the benchmarked formats.
#[pyclass(name = "FormatMatrix", module = "spformat_py", frozen)]
struct PyFormatMatrix {
    inner: core::FormatMatrix,
}

#[pymethods]
impl PyFormatMatrix {
    #[getter]
    fn format(&self) -> &'static str {
        self.inner.tag().name()
    }

    #[getter]
    fn n_rows(&self) -> usize {
        self.inner.n_rows()
    }

    #[getter]
    fn n_cols(&self) -> usize {
        self.inner.n_cols()
    }

    #[getter]
    fn nnz(&self) -> usize {
        self.inner.nnz()
    }

    #[pyo3(signature = (x, workers=1))]
    fn spmv(&self, py: Python<'_>, x: Vec<f64>, workers: usize) -> PyResult<Vec<f64>> {
        let m = &self.inner;
        py.detach(|| {
            let exec = Executor::with_workers(workers)?;
            let mut y = vec![0.0; m.n_rows()];
            spmv_into(m, &x, &mut y, &exec).map(|_| y)
        })
        .map_err(value_err)
    }

    fn to_coo(&self) -> PyCoo {
        PyCoo {
            inner: self.inner.to_coo(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "FormatMatrix({}, {}x{}, nnz={})",
            self.inner.tag(),
            self.inner.n_rows(),
            self.inner.n_cols(),
            self.inner.nnz()
        )
    }
}

/// A trained format selector.
#[pyclass(name = "Model", module = "spformat_py", frozen)]
struct PyModel {
    inner: DecisionTreeModel,
}

#[pymethods]
impl PyModel {
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        DecisionTreeModel::load(&path)
            .map(|inner| PyModel { inner })
            .map_err(|e| PyIOError::new_err(format!("{}: {e}", path.display())))
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        DecisionTreeModel::from_text(text).map(|inner| PyModel { inner }).map_err(value_err)
    }

    /// A model that always picks `format`.
    #[staticmethod]
    fn constant(format: &str) -> PyResult<Self> {
        Ok(PyModel {
            inner: DecisionTreeModel::constant(parse_tag(format)?),
        })
    }

    fn to_text(&self) -> String {
        self.inner.to_text()
    }

    fn predict(&self, a: &PyCoo) -> PyResult<&'static str> {
        let f = extract_features(&a.inner).map_err(value_err)?;
        Ok(core::model::predict(&self.inner, &f).name())
    }

    /// Predicts a format and converts `a` to it.
    fn select(&self, a: &PyCoo) -> PyResult<PyFormatMatrix> {
        core::model::select_format(&a.inner, &self.inner, &FormatParams::default())
            .map(|(_, inner)| PyFormatMatrix { inner })
            .map_err(value_err)
    }
}

fn features_dict<'py>(py: Python<'py>, f: &FeatureVector) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    for (name, v) in FEATURE_NAMES.iter().zip(f.to_array()) {
        d.set_item(name, v)?;
    }
    Ok(d)
}

fn record_dict<'py>(py: Python<'py>, r: &BenchRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("matrix_id", &r.matrix_id)?;
    d.set_item("format", r.format.name())?;
    d.set_item("reps", r.reps)?;
    d.set_item("mean_time_s", r.mean_time)?;
    d.set_item("ci_low_s", r.ci_low)?;
    d.set_item("ci_high_s", r.ci_high)?;
    d.set_item("gflops", r.gflops)?;
    d.set_item("bandwidth_bps", r.bandwidth)?;
    d.set_item("converted_ok", r.converted_ok)?;
    Ok(d)
}

/// The 4x4 example matrix with 8 nonzeros used throughout the tests.
#[pyfunction]
fn example_matrix() -> PyCoo {
    PyCoo {
        inner: core::matrix::example_matrix(),
    }
}

#[pyfunction]
fn formats() -> Vec<&'static str> {
    FormatTag::ALL.iter().map(|t| t.name()).collect()
}

/// Benchmarks one format. `fake_seconds` replaces the wall clock with a
/// constant for reproducible runs.
#[pyfunction]
#[pyo3(name = "bench", signature = (a, format, matrix_id="matrix", workers=1, fixed_reps=None, fake_seconds=None))]
fn bench_format<'py>(
    py: Python<'py>,
    a: &PyCoo,
    format: &str,
    matrix_id: &str,
    workers: usize,
    fixed_reps: Option<usize>,
    fake_seconds: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let tag = parse_tag(format)?;
    let cfg = BenchConfig {
        workers,
        fixed_reps,
        ..BenchConfig::default()
    };
    let record = py
        .detach(|| match fake_seconds {
            Some(seconds) => run_bench(matrix_id, &a.inner, tag, &cfg, &mut ConstantClock { seconds }),
            None => run_bench(matrix_id, &a.inner, tag, &cfg, &mut WallClock::new()),
        })
        .map_err(value_err)?;
    record_dict(py, &record)
}

#[pymodule]
fn spformat_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyCoo>()?;
    m.add_class::<PyFormatMatrix>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(example_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(formats, m)?)?;
    m.add_function(wrap_pyfunction!(bench_format, m)?)?;
    Ok(())
}
