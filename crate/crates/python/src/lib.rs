//! Python bindings: vectorization, synthetic plans, scoring and the guidance
//! arithmetic. Images cross the boundary as raw `bytes` in row-major order.

use planvec_core::error::{FitError, PipelineError};
use planvec_core::guidance::{self, PixelMask, Tensor};
use planvec_core::pipeline::PipelineConfig;
use planvec_core::raster::RasterImage;
use planvec_core::synth::{self, NoiseConfig, PlanConfig};
use planvec_core::{corners, io, svg, VectorPlan};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyBytes;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn pipeline_err(e: PipelineError) -> PyErr {
    match e {
        PipelineError::Fit(f @ FitError::TooDense { .. }) => PyRuntimeError::new_err(f.to_string()),
        other => value_err(other),
    }
}

#[pyclass(name = "WallRect", frozen, eq, hash, from_py_object)]
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
struct PyWallRect {
    #[pyo3(get)]
    x0: u32,
    #[pyo3(get)]
    y0: u32,
    #[pyo3(get)]
    x1: u32,
    #[pyo3(get)]
    y1: u32,
}

#[pymethods]
impl PyWallRect {
    #[new]
    fn new(x0: u32, y0: u32, x1: u32, y1: u32) -> PyResult<Self> {
        if x0 >= x1 || y0 >= y1 {
            return Err(PyValueError::new_err("need x0 < x1 and y0 < y1"));
        }
        Ok(Self { x0, y0, x1, y1 })
    }

    fn area(&self) -> u64 {
        (self.x1 - self.x0) as u64 * (self.y1 - self.y0) as u64
    }

    fn __repr__(&self) -> String {
        format!("WallRect({}, {}, {}, {})", self.x0, self.y0, self.x1, self.y1)
    }
}

impl From<&planvec_core::WallRect> for PyWallRect {
    fn from(r: &planvec_core::WallRect) -> Self {
        Self { x0: r.x0, y0: r.y0, x1: r.x1, y1: r.y1 }
    }
}

impl From<&PyWallRect> for planvec_core::WallRect {
    fn from(r: &PyWallRect) -> Self {
        planvec_core::WallRect::new(r.x0, r.y0, r.x1, r.y1)
    }
}

#[pyclass(name = "VectorPlan", frozen)]
struct PyVectorPlan {
    inner: VectorPlan,
}

#[pymethods]
impl PyVectorPlan {
    #[new]
    fn new(width: u32, height: u32, walls: Vec<PyWallRect>) -> Self {
        Self { inner: VectorPlan::new(width, height, walls.iter().map(Into::into).collect()) }
    }

    #[getter]
    fn width(&self) -> u32 {
        self.inner.canvas_width
    }

    #[getter]
    fn height(&self) -> u32 {
        self.inner.canvas_height
    }

    #[getter]
    fn walls(&self) -> Vec<PyWallRect> {
        self.inner.walls.iter().map(Into::into).collect()
    }

    fn to_svg(&self) -> String {
        svg::to_svg(&self.inner).text
    }

    /// Ink mask as `bytes`, 0 for wall pixels and 255 elsewhere.
    fn rasterize<'py>(&self, py: Python<'py>) -> Bound<'py, PyBytes> {
        let plan = synth::GroundTruthPlan {
            canvas_width: self.inner.canvas_width,
            canvas_height: self.inner.canvas_height,
            walls: self.inner.walls.clone(),
            seed: 0,
        };
        PyBytes::new(py, synth::rasterize(&plan).to_gray().data())
    }

    fn __len__(&self) -> usize {
        self.inner.walls.len()
    }

    fn __repr__(&self) -> String {
        format!("VectorPlan({}x{}, {} walls)", self.inner.canvas_width, self.inner.canvas_height, self.inner.walls.len())
    }
}

fn config_for(width: usize, threshold: Option<u8>, snap_tol: Option<f64>, postprocess: bool) -> PipelineConfig {
    let mut cfg = PipelineConfig::scaled(width);
    if let Some(t) = threshold {
        cfg.threshold = t;
    }
    if let Some(tol) = snap_tol {
        cfg.snap_tol = tol;
    }
    cfg.postprocess = postprocess;
    cfg
}

/// Vectorizes a raster given as `bytes` with 1 (gray) or 3 (RGB) channels.
#[pyfunction]
#[pyo3(signature = (pixels, width, height, channels = 1, threshold = None, snap_tol = None, postprocess = true))]
#[allow(clippy::too_many_arguments)]
fn vectorize(
    py: Python<'_>,
    pixels: &[u8],
    width: usize,
    height: usize,
    channels: usize,
    threshold: Option<u8>,
    snap_tol: Option<f64>,
    postprocess: bool,
) -> PyResult<PyVectorPlan> {
    let img = RasterImage::new(width, height, channels, pixels.to_vec()).map_err(value_err)?;
    let cfg = config_for(width, threshold, snap_tol, postprocess);
    let out = py.detach(|| planvec_core::vectorize(&img, &cfg)).map_err(pipeline_err)?;
    Ok(PyVectorPlan { inner: out.plan })
}

/// Vectorizes a PNG, PGM or PPM file.
#[pyfunction]
#[pyo3(signature = (path, threshold = None, snap_tol = None, postprocess = true))]
fn vectorize_file(
    py: Python<'_>,
    path: std::path::PathBuf,
    threshold: Option<u8>,
    snap_tol: Option<f64>,
    postprocess: bool,
) -> PyResult<PyVectorPlan> {
    let img = io::load_image(&path).map_err(value_err)?;
    let cfg = config_for(img.width(), threshold, snap_tol, postprocess);
    let out = py.detach(|| planvec_core::vectorize(&img, &cfg)).map_err(pipeline_err)?;
    Ok(PyVectorPlan { inner: out.plan })
}

#[pyfunction]
fn parse_svg(text: String) -> PyResult<PyVectorPlan> {
    let plan = svg::parse_svg(&svg::SvgDocument { text }).map_err(value_err)?;
    Ok(PyVectorPlan { inner: plan })
}

/// Synthetic ground-truth plan for `seed`.
#[pyfunction]
#[pyo3(signature = (seed, size = 512, thickness = 8, door_width = 24, min_partitions = 3, max_partitions = 5, min_room = 96))]
fn generate_plan(
    seed: u64,
    size: u32,
    thickness: u32,
    door_width: u32,
    min_partitions: u32,
    max_partitions: u32,
    min_room: u32,
) -> PyResult<PyVectorPlan> {
    let cfg = PlanConfig {
        canvas_width: size,
        canvas_height: size,
        thickness,
        door_width,
        min_partitions,
        max_partitions,
        min_room,
    };
    let plan = synth::generate_plan(seed, &cfg).map_err(value_err)?;
    Ok(PyVectorPlan { inner: VectorPlan::new(plan.canvas_width, plan.canvas_height, plan.walls) })
}

/// Rasterizes `plan` and applies speckles, edge jitter and a gray background.
#[pyfunction]
#[pyo3(signature = (plan, seed, speckle_rate = 0.0005, edge_jitter = 1, gray_level = 245))]
fn noisy_raster<'py>(
    py: Python<'py>,
    plan: &PyVectorPlan,
    seed: u64,
    speckle_rate: f64,
    edge_jitter: u32,
    gray_level: u8,
) -> PyResult<Bound<'py, PyBytes>> {
    let truth = synth::GroundTruthPlan {
        canvas_width: plan.inner.canvas_width,
        canvas_height: plan.inner.canvas_height,
        walls: plan.inner.walls.clone(),
        seed,
    };
    let cfg = NoiseConfig { speckle_rate, edge_jitter, gray_level };
    let img = synth::add_noise(&synth::rasterize(&truth), seed, &cfg).map_err(value_err)?;
    Ok(PyBytes::new(py, img.data()))
}

/// Greedy IoU matching; returns precision, recall, f1 and both path counts.
#[pyfunction]
#[pyo3(signature = (pred, truth, iou_threshold = 0.7))]
fn match_walls(pred: &PyVectorPlan, truth: &PyVectorPlan, iou_threshold: f64) -> PyResult<(f64, f64, f64, usize, usize)> {
    if !(iou_threshold > 0.0 && iou_threshold <= 1.0) {
        return Err(PyValueError::new_err("iou_threshold must be in (0, 1]"));
    }
    let r = synth::match_walls(&pred.inner.walls, &truth.inner.walls, iou_threshold);
    Ok((r.precision, r.recall, r.f1, r.path_count_pred, r.path_count_truth))
}

#[pyfunction]
fn shi_tomasi_response(a: f64, b: f64, c: f64) -> f64 {
    corners::shi_tomasi_response(a, b, c)
}

fn mask_from(mask: Vec<bool>, width: usize, height: usize) -> PyResult<PixelMask> {
    PixelMask::new(width, height, mask).map_err(value_err)
}

/// `s * sum((x - 1)^2)` over masked pixels of a (channels, height, width) image.
#[pyfunction]
#[pyo3(signature = (decoded, mask, width, height, s = 1.0))]
fn white_loss(decoded: Vec<f64>, mask: Vec<bool>, width: usize, height: usize, s: f64) -> PyResult<f64> {
    let plane = width * height;
    if plane == 0 || decoded.len() % plane != 0 {
        return Err(PyValueError::new_err("decoded length must be a multiple of width * height"));
    }
    let img = Tensor::new(vec![decoded.len() / plane, height, width], decoded).map_err(value_err)?;
    guidance::white_loss(&img, &mask_from(mask, width, height)?, s).map_err(value_err)
}

/// Masked-region mean before and after each of `steps` guided updates.
#[pyfunction]
#[pyo3(signature = (initial, mask, width, height, s, alpha_bar, steps, t = 0))]
#[allow(clippy::too_many_arguments)]
fn guided_descent_demo(
    initial: Vec<f64>,
    mask: Vec<bool>,
    width: usize,
    height: usize,
    s: f64,
    alpha_bar: Vec<f64>,
    steps: usize,
    t: usize,
) -> PyResult<Vec<f64>> {
    let x = Tensor::new(vec![1, height, width], initial).map_err(value_err)?;
    guidance::guided_descent_demo(&x, &mask_from(mask, width, height)?, s, &alpha_bar, t, steps).map_err(value_err)
}

#[pymodule]
fn planvec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyWallRect>()?;
    m.add_class::<PyVectorPlan>()?;
    m.add_function(wrap_pyfunction!(vectorize, m)?)?;
    m.add_function(wrap_pyfunction!(vectorize_file, m)?)?;
    m.add_function(wrap_pyfunction!(parse_svg, m)?)?;
    m.add_function(wrap_pyfunction!(generate_plan, m)?)?;
    m.add_function(wrap_pyfunction!(noisy_raster, m)?)?;
    m.add_function(wrap_pyfunction!(match_walls, m)?)?;
    m.add_function(wrap_pyfunction!(shi_tomasi_response, m)?)?;
    m.add_function(wrap_pyfunction!(white_loss, m)?)?;
    m.add_function(wrap_pyfunction!(guided_descent_demo, m)?)?;
    Ok(())
}
