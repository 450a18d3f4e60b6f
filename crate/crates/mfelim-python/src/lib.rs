//! Python bindings: datasets, SVM training, the exact 1-d solver, single
//! elimination traces, and the full experiment runner.

use std::path::PathBuf;
use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use mfelim::elim::Method;
use mfelim::experiment::{emit_outputs, run_experiment_on, ExperimentConfig};
use mfelim::oned::ProjectedData;
use mfelim::svm::{self, SmoSettings};
use mfelim::{make_trial, KernelConfig, KernelKind, PairStats, TrialSplit};

fn value_err(e: mfelim::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: mfelim::Error) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn kernel_config(
    kernel: &str,
    n_features: usize,
    gamma: Option<f64>,
    coef0: f64,
    degree: u32,
) -> PyResult<KernelConfig> {
    let kind: KernelKind = kernel.parse().map_err(value_err)?;
    let mut cfg = KernelConfig::default_for(kind, n_features);
    if let Some(g) = gamma {
        cfg.gamma = g;
    }
    if kind == KernelKind::Polynomial {
        cfg.coef0 = coef0;
        cfg.degree = degree;
    }
    cfg.validate().map_err(value_err)?;
    Ok(cfg)
}

/// Dense two-class dataset with labels in {+1, -1}.
#[pyclass(frozen, name = "Dataset")]
struct PyDataset {
    inner: Arc<mfelim::Dataset>,
}

#[pymethods]
impl PyDataset {
    /// Parses LIBSVM sparse text (`<label> <index>:<value> ...`).
    #[staticmethod]
    #[pyo3(signature = (text, n_features=None))]
    fn from_libsvm(text: &str, n_features: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(mfelim::Dataset::parse_libsvm(text, n_features).map_err(value_err)?),
        })
    }

    /// Reads a LIBSVM file.
    #[staticmethod]
    #[pyo3(signature = (path, n_features=None))]
    fn load(path: PathBuf, n_features: Option<usize>) -> PyResult<Self> {
        Ok(Self {
            inner: Arc::new(mfelim::Dataset::load_libsvm(&path, n_features).map_err(runtime_err)?),
        })
    }

    #[getter]
    fn n_samples(&self) -> usize {
        self.inner.n_samples()
    }

    #[getter]
    fn n_features(&self) -> usize {
        self.inner.n_features()
    }

    fn labels(&self) -> Vec<f64> {
        self.inner.labels().to_vec()
    }

    fn row(&self, n: usize) -> PyResult<Vec<f64>> {
        if n >= self.inner.n_samples() {
            return Err(PyValueError::new_err(format!("sample {n} out of range")));
        }
        Ok((0..self.inner.n_features())
            .map(|m| self.inner.value(n, m))
            .collect())
    }

    fn to_libsvm(&self) -> String {
        self.inner.to_libsvm_string()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} samples, {} features)",
            self.inner.n_samples(),
            self.inner.n_features()
        )
    }
}

/// Trained SVM bound to the pairwise statistics it was trained on.
#[pyclass(frozen, name = "Model")]
struct PyModel {
    model: mfelim::SvmModel,
    ds: Arc<mfelim::Dataset>,
    ps: PairStats,
}

#[pymethods]
impl PyModel {
    #[getter]
    fn sv_indices(&self) -> Vec<usize> {
        self.model.sv_indices.clone()
    }

    #[getter]
    fn multipliers(&self) -> Vec<f64> {
        self.model.multipliers.clone()
    }

    #[getter]
    fn intercept(&self) -> f64 {
        self.model.intercept
    }

    #[getter]
    fn c(&self) -> f64 {
        self.model.c_param
    }

    #[getter]
    fn w_norm_sq(&self) -> f64 {
        self.model.w_norm_sq
    }

    #[getter]
    fn objective(&self) -> f64 {
        self.model.objective
    }

    /// Discriminant value of sample `n`.
    fn decision_value(&self, n: usize) -> PyResult<f64> {
        if n >= self.ds.n_samples() {
            return Err(PyValueError::new_err(format!("sample {n} out of range")));
        }
        Ok(svm::discriminant(&self.model, &self.ps, n))
    }

    /// `(separable, margin)` over a sample subset (all samples by default).
    #[pyo3(signature = (subset=None))]
    fn margin_info(&self, subset: Option<Vec<usize>>) -> (bool, Option<f64>) {
        let subset = subset.unwrap_or_else(|| (0..self.ds.n_samples()).collect());
        let mv = svm::margins(&self.model, &self.ds, &self.ps, &subset);
        (mv.separable, mv.margin)
    }

    /// Fraction of `test_indices` on the wrong side of the boundary.
    fn test_error(&self, test_indices: Vec<usize>) -> PyResult<f64> {
        svm::test_error(&self.model, None, &self.ds, &self.ps, &test_indices).map_err(value_err)
    }

    /// Plain-text model snapshot.
    fn snapshot(&self) -> String {
        svm::to_snapshot_string(&self.model)
    }

    fn __repr__(&self) -> String {
        format!(
            "Model({} support vectors, objective {:.6})",
            self.model.sv_indices.len(),
            self.model.objective
        )
    }
}

/// Trains a soft-margin SVM on `subset` (all samples by default).
#[pyfunction]
#[pyo3(signature = (dataset, kernel="linear", c=1.0, gamma=None, coef0=1.0, degree=3, subset=None))]
#[allow(clippy::too_many_arguments)]
fn train_svm(
    dataset: &PyDataset,
    kernel: &str,
    c: f64,
    gamma: Option<f64>,
    coef0: f64,
    degree: u32,
    subset: Option<Vec<usize>>,
) -> PyResult<PyModel> {
    let ds = dataset.inner.clone();
    let cfg = kernel_config(kernel, ds.n_features(), gamma, coef0, degree)?;
    let subset = subset.unwrap_or_else(|| (0..ds.n_samples()).collect());
    let ps = PairStats::new(ds.clone());
    let model =
        svm::train(&ds, &subset, &cfg, &ps, c, &SmoSettings::default()).map_err(value_err)?;
    Ok(PyModel { model, ds, ps })
}

/// Exact 1-d soft-margin solution as `(w, b, objective, xi)`.
#[pyfunction]
fn solve_1d(z: Vec<f64>, labels: Vec<f64>, c: f64) -> PyResult<(f64, f64, f64, Vec<f64>)> {
    let pd = ProjectedData::new(z, labels, 1.0).map_err(value_err)?;
    let sol = mfelim::solve_1d(&pd, c).map_err(value_err)?;
    Ok((sol.w, sol.b, sol.objective, sol.xi))
}

/// Hard-margin rescale `(a, w0, post_margin)` of a fixed direction, or
/// `None` when the projections overlap.
#[pyfunction]
fn solve_lo(z: Vec<f64>, labels: Vec<f64>, w_norm: f64) -> Option<(f64, f64, f64)> {
    mfelim::solve_lo(&z, &labels, w_norm)
        .feasible()
        .map(|sol| (sol.a_scale, sol.intercept, sol.post_margin))
}

/// One elimination run on one train/test split.
#[pyclass(frozen, name = "Trace")]
struct PyTrace {
    inner: mfelim::EliminationTrace,
}

#[pymethods]
impl PyTrace {
    #[getter]
    fn method(&self) -> String {
        self.inner.method.name()
    }

    #[getter]
    fn termination(&self) -> Option<String> {
        self.inner.termination.clone()
    }

    /// Step rows as `(step, eliminated_feature, retained_count, separable,
    /// train_objective, criterion_value, test_error)`. Features are 0-based.
    fn steps(&self) -> Vec<(usize, usize, usize, bool, f64, f64, f64)> {
        self.inner
            .steps
            .iter()
            .map(|s| {
                (
                    s.step,
                    s.eliminated,
                    s.retained_count,
                    s.separable,
                    s.train_objective,
                    s.criterion_value,
                    s.test_error,
                )
            })
            .collect()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    fn __len__(&self) -> usize {
        self.inner.steps.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trace({}, {} steps)",
            self.inner.method.name(),
            self.inner.steps.len()
        )
    }
}

/// Runs one elimination method from a freshly trained initial model.
///
/// Without explicit `train`/`test` index lists, the samples are split 50-50
/// by `seed`.
#[pyfunction]
#[pyo3(signature = (dataset, method, kernel="linear", c=1.0, gamma=None, coef0=1.0, degree=3,
                    seed=0, train=None, test=None, stop_at=1, diagnostics=false))]
#[allow(clippy::too_many_arguments)]
fn eliminate(
    dataset: &PyDataset,
    method: &str,
    kernel: &str,
    c: f64,
    gamma: Option<f64>,
    coef0: f64,
    degree: u32,
    seed: u64,
    train: Option<Vec<usize>>,
    test: Option<Vec<usize>>,
    stop_at: usize,
    diagnostics: bool,
) -> PyResult<PyTrace> {
    let ds = dataset.inner.clone();
    let method = Method::parse(method).map_err(value_err)?;
    let cfg = kernel_config(kernel, ds.n_features(), gamma, coef0, degree)?;
    let trial = match (train, test) {
        (Some(train), Some(test)) => TrialSplit {
            trial_id: 0,
            seed,
            train,
            test,
        },
        (None, None) => make_trial(&ds, 0, seed).map_err(value_err)?,
        _ => {
            return Err(PyValueError::new_err(
                "pass both train and test index lists, or neither",
            ))
        }
    };
    let ps = PairStats::new(ds.clone());
    let settings = SmoSettings::default();
    let initial = svm::train(&ds, &trial.train, &cfg, &ps, c, &settings).map_err(value_err)?;
    let trace = mfelim::run_elimination(
        &ds,
        &trial,
        method,
        initial,
        ps,
        stop_at,
        diagnostics,
        &settings,
    )
    .map_err(runtime_err)?;
    Ok(PyTrace { inner: trace })
}

/// Curve row: `(method, retained, mean_test_error, std_test_error, trials)`.
type CurveRow = (String, usize, f64, f64, usize);

/// Full experiment: seeded trials, cross-validated hyperparameters, one
/// curve per method, outputs written to `out`. Returns the curve rows as
/// `(method, retained, mean_test_error, std_test_error, trials)`.
#[pyfunction]
#[pyo3(signature = (data, kernel, methods, trials, seed, out, stop_at=1, scale=false,
                    all_trials=false, diagnostics=false, features=None))]
#[allow(clippy::too_many_arguments)]
fn run_experiment(
    data: PathBuf,
    kernel: &str,
    methods: Vec<String>,
    trials: usize,
    seed: u64,
    out: PathBuf,
    stop_at: usize,
    scale: bool,
    all_trials: bool,
    diagnostics: bool,
    features: Option<usize>,
) -> PyResult<Vec<CurveRow>> {
    let kind: KernelKind = kernel.parse().map_err(value_err)?;
    let methods = methods
        .iter()
        .map(|m| Method::parse(m))
        .collect::<Result<Vec<_>, _>>()
        .map_err(value_err)?;
    let mut cfg = ExperimentConfig::new(data, kind, methods, out);
    cfg.n_trials = trials;
    cfg.base_seed = seed;
    cfg.stop_at = stop_at;
    cfg.scale = scale;
    cfg.keep_only_separable = !all_trials;
    cfg.diagnostics = diagnostics;
    cfg.n_features_hint = features;
    cfg.validate().map_err(value_err)?;
    let ds = Arc::new(
        mfelim::Dataset::load_libsvm(&cfg.data_path, cfg.n_features_hint).map_err(runtime_err)?,
    );
    let output = run_experiment_on(&cfg, ds).map_err(runtime_err)?;
    emit_outputs(&output, &cfg).map_err(runtime_err)?;
    Ok(output
        .curves
        .rows
        .iter()
        .map(|r| {
            (
                r.method.clone(),
                r.retained,
                r.mean_error,
                r.std_error,
                r.trials,
            )
        })
        .collect())
}

#[pymodule]
fn mfelim_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_class::<PyTrace>()?;
    m.add_function(wrap_pyfunction!(train_svm, m)?)?;
    m.add_function(wrap_pyfunction!(solve_1d, m)?)?;
    m.add_function(wrap_pyfunction!(solve_lo, m)?)?;
    m.add_function(wrap_pyfunction!(eliminate, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
