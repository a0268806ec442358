//! Python bindings. Solves release the GIL.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use rwseg_core::graph::{DEFAULT_BETA, DEFAULT_WEIGHT_FLOOR};
use rwseg_core::imageio;
use rwseg_core::strokes::stamp;
use rwseg_core::{
    compute_weights, Algorithm, Error, FeedbackParams, IterationRecord, Label, Provenance,
    RunContext, SolveOptions, StopReason, Stroke, StrokeKind, Weighting,
};

create_exception!(rwseg, ConvexityError, PyValueError, "lambda exceeds the smallest edge weight.");
create_exception!(rwseg, SolverError, PyRuntimeError, "the linear solver failed.");

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e {
        Error::ConvexityViolation { lambda, min_weight } => ConvexityError::new_err((msg, lambda, min_weight)),
        Error::SolverFailure { .. } | Error::NotPositiveDefinite | Error::SingularSystem => SolverError::new_err(msg),
        Error::Io(_) => PyIOError::new_err(msg),
        _ => PyValueError::new_err(msg),
    }
}

/// A grayscale (or RGB, reduced to luma) image with intensities in [0, 1].
#[pyclass(name = "Image", module = "rwseg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyImage(rwseg_core::ImageGrid);

#[pymethods]
impl PyImage {
    #[new]
    fn new(width: usize, height: usize, intensities: Vec<f64>) -> PyResult<Self> {
        rwseg_core::ImageGrid::new(width, height, intensities).map(PyImage).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        imageio::load_image(path).map(PyImage).map_err(to_py)
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        imageio::save_image(&self.0, path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    fn intensities(&self) -> Vec<f64> {
        self.0.intensity().to_vec()
    }

    /// Smallest edge weight, which is also the largest admissible lambda.
    #[pyo3(signature = (beta = DEFAULT_BETA, weight_floor = DEFAULT_WEIGHT_FLOOR))]
    fn min_weight(&self, beta: f64, weight_floor: f64) -> PyResult<f64> {
        let w = compute_weights(&self.0, Weighting { beta, floor: weight_floor }).map_err(to_py)?;
        Ok(w.min_weight())
    }

    fn __repr__(&self) -> String {
        format!("Image({}x{})", self.0.width(), self.0.height())
    }
}

/// User seeds, indexed row-major.
#[pyclass(name = "Seeds", module = "rwseg", skip_from_py_object)]
#[derive(Clone)]
struct PySeeds(rwseg_core::SeedState);

#[pymethods]
impl PySeeds {
    #[new]
    #[pyo3(signature = (width, height, foreground = Vec::new(), background = Vec::new()))]
    fn new(width: usize, height: usize, foreground: Vec<usize>, background: Vec<usize>) -> PyResult<Self> {
        rwseg_core::SeedState::from_sets(width, height, foreground, background).map(PySeeds).map_err(to_py)
    }

    /// Reads a seed mask PNG (0 none, 1 background, 2 foreground).
    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        Ok(PySeeds(imageio::load_seed_mask(path, None).map_err(to_py)?.to_seed_state()))
    }

    fn save(&self, path: PathBuf) -> PyResult<()> {
        imageio::save_seed_mask(&imageio::SeedMask::from_seed_state(&self.0), path).map_err(to_py)
    }

    fn add(&mut self, index: usize, foreground: bool) -> PyResult<bool> {
        let label = if foreground { Label::Foreground } else { Label::Background };
        self.0.add_seed(index, label, Provenance::User).map_err(to_py)
    }

    /// Paints a round-brush polyline; `kind` is "foreground", "background"
    /// or "erase". Replaces the seeds by the repainted mask.
    fn paint(&mut self, kind: &str, radius: f64, points: Vec<(f64, f64)>) -> PyResult<()> {
        let kind = match kind {
            "foreground" => StrokeKind::Foreground,
            "background" => StrokeKind::Background,
            "erase" => StrokeKind::Erase,
            other => return Err(PyValueError::new_err(format!("unknown stroke kind {other:?}"))),
        };
        let stroke = Stroke::new(kind, radius, points.into_iter().map(|(x, y)| [x, y]).collect());
        let (w, h) = (self.0.width(), self.0.height());
        stroke.validate(w, h).map_err(to_py)?;
        let mut mask = imageio::SeedMask::from_seed_state(&self.0);
        stamp(&mut mask, &stroke);
        self.0 = mask.to_seed_state();
        Ok(())
    }

    #[getter]
    fn foreground_count(&self) -> usize {
        self.0.foreground_count()
    }

    #[getter]
    fn background_count(&self) -> usize {
        self.0.background_count()
    }

    fn foreground(&self) -> Vec<usize> {
        self.0.foreground().collect()
    }

    fn background(&self) -> Vec<usize> {
        self.0.background().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Seeds({}x{}, foreground={}, background={})",
            self.0.width(),
            self.0.height(),
            self.0.foreground_count(),
            self.0.background_count()
        )
    }
}

/// Ground truth: 0 background, 128 unclassified, 255 foreground.
#[pyclass(name = "Trimap", module = "rwseg", frozen)]
struct PyTrimap(imageio::Trimap);

#[pymethods]
impl PyTrimap {
    #[new]
    fn new(width: usize, height: usize, codes: Vec<u8>) -> PyResult<Self> {
        imageio::Trimap::new(width, height, codes).map(PyTrimap).map_err(to_py)
    }

    #[staticmethod]
    fn load(path: PathBuf) -> PyResult<Self> {
        imageio::load_trimap(path, None).map(PyTrimap).map_err(to_py)
    }

    fn codes(&self) -> Vec<u8> {
        self.0.codes().to_vec()
    }
}

#[pyclass(name = "ProbabilityMap", module = "rwseg", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyMap(rwseg_core::ProbabilityMap);

#[pymethods]
impl PyMap {
    #[staticmethod]
    fn load_raster(path: PathBuf) -> PyResult<Self> {
        imageio::load_probability_raster(path).map(PyMap).map_err(to_py)
    }

    fn save_raster(&self, path: PathBuf) -> PyResult<()> {
        imageio::save_probability_raster(&self.0, path).map_err(to_py)
    }

    fn save_png(&self, path: PathBuf) -> PyResult<()> {
        imageio::save_probability_png(&self.0, path).map_err(to_py)
    }

    fn save_labels(&self, path: PathBuf) -> PyResult<()> {
        imageio::save_labels(self.0.labels(), self.0.width(), self.0.height(), path).map_err(to_py)
    }

    #[getter]
    fn width(&self) -> usize {
        self.0.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.0.height()
    }

    /// Raw foreground probabilities, row-major.
    fn values(&self) -> Vec<f64> {
        self.0.raw().to_vec()
    }

    /// `p > 0.5` per pixel.
    fn labels(&self) -> Vec<bool> {
        self.0.labels().to_vec()
    }

    /// Error rate against a trimap as (misclassified, denominator, rate).
    fn error_rate(&self, trimap: &PyTrimap) -> PyResult<(usize, usize, f64)> {
        let e = rwseg_core::error_rate(self.0.labels(), (self.0.width(), self.0.height()), &trimap.0).map_err(to_py)?;
        Ok((e.misclassified, e.denominator, e.rate))
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

/// What `segment` returns.
#[pyclass(name = "Outcome", module = "rwseg", frozen)]
struct PyOutcome {
    #[pyo3(get)]
    algorithm: String,
    #[pyo3(get)]
    map: PyMap,
    #[pyo3(get)]
    stop: String,
    #[pyo3(get)]
    degraded: Option<String>,
    #[pyo3(get)]
    min_weight: f64,
    #[pyo3(get)]
    xi: f64,
    /// User seeds plus promoted semi-seeds behind the final map.
    #[pyo3(get)]
    seeds: PySeeds,
    records: Vec<IterationRecord>,
}

#[pymethods]
impl PyOutcome {
    #[getter]
    fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    #[getter]
    fn potentials(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.potential).collect()
    }

    /// One dict per solve.
    fn trace<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.records
            .iter()
            .map(|r| {
                let d = PyDict::new(py);
                d.set_item("iteration", r.iteration)?;
                d.set_item("potential", r.potential)?;
                d.set_item("boundary_count", r.boundary_count)?;
                d.set_item("added_foreground", r.added_foreground)?;
                d.set_item("added_background", r.added_background)?;
                d.set_item("foreground_seeds", r.foreground_seeds)?;
                d.set_item("background_seeds", r.background_seeds)?;
                d.set_item("label_digest", &r.label_digest)?;
                d.set_item("error_count", r.error_count)?;
                Ok(d)
            })
            .collect()
    }

    fn __repr__(&self) -> String {
        format!("Outcome({}, {} iterations, {})", self.algorithm, self.iterations(), self.stop)
    }
}

fn stop_name(stop: StopReason) -> &'static str {
    match stop {
        StopReason::SinglePass => "single_pass",
        StopReason::MaxIterations => "max_iterations",
        StopReason::PotentialConverged => "potential_converged",
        StopReason::FixedPoint => "fixed_point",
        StopReason::SolverFailure => "solver_failure",
    }
}

/// Runs rw, brw, irw or ibrw. Keyword arguments default to the library
/// defaults; `xi=None` means 1e-3 of the initial potential.
#[pyfunction]
#[pyo3(signature = (
    image, seeds, algorithm = "ibrw", *, epsilon = 0.1, delta = 0.1, lambda_ = 0.005, xi = None,
    max_iter = 10, sample_fraction = 1.0, rng_seed = 0, beta = DEFAULT_BETA,
    weight_floor = DEFAULT_WEIGHT_FLOOR, tolerance = 1e-8, trimap = None,
))]
#[allow(clippy::too_many_arguments)]
fn segment(
    py: Python<'_>,
    image: &PyImage,
    seeds: &PySeeds,
    algorithm: &str,
    epsilon: f64,
    delta: f64,
    lambda_: f64,
    xi: Option<f64>,
    max_iter: usize,
    sample_fraction: f64,
    rng_seed: u64,
    beta: f64,
    weight_floor: f64,
    tolerance: f64,
    trimap: Option<&PyTrimap>,
) -> PyResult<PyOutcome> {
    let algorithm: Algorithm = algorithm.parse().map_err(to_py)?;
    let params = FeedbackParams {
        epsilon_seed: epsilon,
        delta,
        lambda: lambda_,
        xi,
        max_outer_iterations: max_iter,
        sample_fraction,
        rng_seed,
    };
    let ctx = RunContext {
        weighting: Weighting { beta, floor: weight_floor },
        solve: SolveOptions { tolerance, ..Default::default() },
        ground_truth: trimap.map(|t| &t.0),
        keep_maps: false,
    };
    let (img, user) = (&image.0, &seeds.0);
    let out = py
        .detach(|| rwseg_core::run_algorithm(algorithm, img, user, &params, &ctx))
        .map_err(to_py)?;
    let mut final_seeds = out.seeds.clone();
    final_seeds.clear_boundary();
    Ok(PyOutcome {
        algorithm: algorithm.name().to_string(),
        stop: stop_name(out.stop).to_string(),
        degraded: out.degraded.clone(),
        min_weight: out.min_weight,
        xi: out.xi,
        seeds: PySeeds(final_seeds),
        records: out.trace.records,
        map: PyMap(out.map),
    })
}

#[pymodule]
fn rwseg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyImage>()?;
    m.add_class::<PySeeds>()?;
    m.add_class::<PyTrimap>()?;
    m.add_class::<PyMap>()?;
    m.add_class::<PyOutcome>()?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add("ConvexityError", m.py().get_type::<ConvexityError>())?;
    m.add("SolverError", m.py().get_type::<SolverError>())?;
    Ok(())
}
