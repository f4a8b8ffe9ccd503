//! Python bindings: frames, dual frames and frame decompositions of the
//! shipped model operators.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use framedec::constructors::{from_svd, svd_of_dense};
use framedec::decomposition::FrameDecomposition;
use framedec::frame::{DualFrame, DualMethod, Frame};
use framedec::hilbert::{ComponentSpace, ProductVector, C64};
use framedec::models::{ConvolutionOperator, ConvolutionSpec, RadonProblem, RadonSpec, TomographyProblem, TomographySpec};
use framedec::operator::{DenseOperator, LinearOperator};
use framedec::regularization::{filtered_reconstruct, FilterKind, FilterSpec, NoisyData};

fn err(e: framedec::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn vector(v: Vec<C64>) -> DVector<C64> {
    DVector::from_vec(v)
}

fn product(blocks: Vec<Vec<C64>>) -> ProductVector {
    ProductVector::new(blocks.into_iter().map(vector).collect())
}

fn blocks(x: &ProductVector) -> Vec<Vec<C64>> {
    x.blocks.iter().map(|b| b.iter().copied().collect()).collect()
}

fn space(dim: usize, weights: Option<Vec<f64>>) -> PyResult<ComponentSpace> {
    match weights {
        Some(w) if w.len() != dim => Err(PyValueError::new_err(format!("expected {dim} weights, got {}", w.len()))),
        Some(w) => ComponentSpace::new(w).map_err(err),
        None => Ok(ComponentSpace::euclidean(dim)),
    }
}

/// A finite frame `{e_k}` of a weighted coordinate space.
#[pyclass(name = "Frame", frozen)]
struct PyFrame {
    inner: Arc<Frame>,
}

#[pymethods]
impl PyFrame {
    /// `vectors` lists the frame elements; `weights` defines the inner product.
    #[new]
    #[pyo3(signature = (vectors, weights=None))]
    fn new(vectors: Vec<Vec<C64>>, weights: Option<Vec<f64>>) -> PyResult<Self> {
        let dim = vectors.first().map_or(0, Vec::len);
        if vectors.iter().any(|v| v.len() != dim) {
            return Err(PyValueError::new_err("frame vectors must share one length"));
        }
        let cols: Vec<DVector<C64>> = vectors.into_iter().map(vector).collect();
        let frame = Frame::from_vectors(space(dim, weights)?, &cols).map_err(err)?;
        Ok(Self { inner: Arc::new(frame) })
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.space().dim()
    }

    /// Certified frame bounds `(B1, B2)`.
    fn bounds(&self) -> (f64, f64) {
        self.inner.bounds()
    }

    #[getter]
    fn is_tight(&self) -> bool {
        self.inner.is_tight()
    }

    fn analyze(&self, x: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(self.inner.analyze(&vector(x)).map_err(err)?.iter().copied().collect())
    }

    fn synthesize(&self, coeffs: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(self.inner.synthesize(&vector(coeffs)).map_err(err)?.iter().copied().collect())
    }

    fn dual_exact(&self) -> PyDualFrame {
        PyDualFrame { inner: self.inner.dual_exact() }
    }

    /// Neumann-series dual with certified relative error at most `eps`.
    fn dual_neumann(&self, eps: f64) -> PyResult<PyDualFrame> {
        Ok(PyDualFrame { inner: self.inner.dual_neumann(eps).map_err(err)? })
    }

    fn __repr__(&self) -> String {
        let (b1, b2) = self.inner.bounds();
        format!("Frame(len={}, dim={}, bounds=({b1}, {b2}))", self.inner.len(), self.inner.space().dim())
    }
}

#[pyclass(name = "DualFrame", frozen)]
struct PyDualFrame {
    inner: DualFrame,
}

#[pymethods]
impl PyDualFrame {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn method(&self) -> &'static str {
        match self.inner.method() {
            DualMethod::ExactSolve => "exact",
            DualMethod::Neumann { .. } => "neumann",
        }
    }

    #[getter]
    fn iterations(&self) -> Option<usize> {
        match self.inner.method() {
            DualMethod::ExactSolve => None,
            DualMethod::Neumann { iterations } => Some(iterations),
        }
    }

    #[getter]
    fn certified_error(&self) -> f64 {
        self.inner.certified_error()
    }

    fn bounds(&self) -> (f64, f64) {
        self.inner.bounds()
    }

    fn synthesize(&self, coeffs: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(self.inner.synthesize(&vector(coeffs)).map_err(err)?.iter().copied().collect())
    }

    fn analyze(&self, x: Vec<C64>) -> PyResult<Vec<C64>> {
        Ok(self.inner.analyze(&vector(x)).map_err(err)?.iter().copied().collect())
    }
}

/// A frame decomposition together with the operator it decomposes.
/// Vectors are passed as lists of blocks, one list of complex values per
/// component space.
#[pyclass(name = "Decomposition")]
struct PyDecomposition {
    op: Arc<dyn LinearOperator>,
    dec: FrameDecomposition,
}

#[pymethods]
impl PyDecomposition {
    /// Singular-system decomposition of a dense matrix given by rows.
    #[staticmethod]
    fn from_matrix(rows: Vec<Vec<C64>>) -> PyResult<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(PyValueError::new_err("matrix rows must be nonempty and of equal length"));
        }
        let m = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
        let op = DenseOperator::euclidean(m);
        let dec = from_svd(&svd_of_dense(&op).map_err(err)?).map_err(err)?;
        Ok(Self { op: Arc::new(op), dec })
    }

    /// Periodic convolution with symbol `(1 + ξ²)^{-order/2}`, `ξ = 2πj/length`.
    #[staticmethod]
    #[pyo3(signature = (n, length=1.0, order=2.0))]
    fn convolution(n: usize, length: f64, order: f64) -> PyResult<Self> {
        let spec = ConvolutionSpec::from_fn(n, length, |j| {
            let xi = 2.0 * std::f64::consts::PI * j as f64 / length;
            C64::new((1.0 + xi * xi).powf(-order / 2.0), 0.0)
        })
        .map_err(err)?;
        let dec = spec.decomposition().map_err(err)?;
        Ok(Self { op: Arc::new(ConvolutionOperator::new(spec)), dec })
    }

    /// Parallel-beam Radon transform with the wavelet-exponential frame system.
    #[staticmethod]
    #[pyo3(signature = (pixels=16, angles=24, detectors=32, order=0.0))]
    fn radon(pixels: usize, angles: usize, detectors: usize, order: f64) -> PyResult<Self> {
        let mut spec = RadonSpec::new(pixels, angles, detectors);
        spec.order = order;
        let rp = RadonProblem::new(spec).map_err(err)?;
        let (dec, _) = rp.frame_system().map_err(err)?;
        Ok(Self { op: Arc::new(rp.operator().clone()), dec })
    }

    /// Periodic atmospheric tomography; `directions` holds `(α_x, α_y)` pairs.
    #[staticmethod]
    #[pyo3(signature = (grid, half_width, heights, directions, aperture, cutoff))]
    fn tomography(
        grid: usize,
        half_width: f64,
        heights: Vec<f64>,
        directions: Vec<(f64, f64)>,
        aperture: f64,
        cutoff: usize,
    ) -> PyResult<Self> {
        let spec = TomographySpec {
            grid,
            half_width,
            heights,
            directions: directions.into_iter().map(|(a, b)| [a, b]).collect(),
            aperture,
            cutoff,
        };
        let tp = TomographyProblem::new(spec).map_err(err)?;
        Ok(Self { op: Arc::new(tp.operator.clone()), dec: tp.decomposition })
    }

    #[getter]
    fn truncation(&self) -> usize {
        self.dec.truncation()
    }

    #[setter]
    fn set_truncation(&mut self, k: usize) -> PyResult<()> {
        self.dec = self.dec.clone().with_truncation(k).map_err(err)?;
        Ok(())
    }

    fn x_bounds(&self) -> (f64, f64) {
        self.dec.x_bounds()
    }

    fn y_bounds(&self) -> (f64, f64) {
        self.dec.y_bounds()
    }

    /// Domain and codomain component dimensions.
    fn shapes(&self) -> (Vec<usize>, Vec<usize>) {
        let dims = |s: &framedec::ProductSpaceSpec| s.components().iter().map(|c| c.dim()).collect();
        (dims(self.dec.domain()), dims(self.dec.codomain()))
    }

    /// Largest relation residual over random probes.
    #[pyo3(signature = (probes=3, seed=0))]
    fn verify(&self, probes: usize, seed: u64) -> PyResult<f64> {
        Ok(framedec::decomposition::verify_assumption(self.op.as_ref(), &self.dec, probes, seed)
            .map_err(err)?
            .max_relation_residual)
    }

    /// Applies the operator itself.
    fn apply(&self, x: Vec<Vec<C64>>) -> PyResult<Vec<Vec<C64>>> {
        Ok(blocks(&self.op.apply(&product(x)).map_err(err)?))
    }

    fn apply_adjoint(&self, y: Vec<Vec<C64>>) -> PyResult<Vec<Vec<C64>>> {
        Ok(blocks(&self.op.apply_adjoint(&product(y)).map_err(err)?))
    }

    /// Frame-based reconstruction; returns a dict with `solution`,
    /// `picard_sum`, `picard_divergent`, `residual_bounds` and `truncation`.
    fn reconstruct<'py>(&self, py: Python<'py>, y: Vec<Vec<C64>>) -> PyResult<Bound<'py, pyo3::types::PyDict>> {
        let r = self.dec.reconstruct(&product(y)).map_err(err)?;
        let d = pyo3::types::PyDict::new(py);
        d.set_item("solution", blocks(&r.solution))?;
        d.set_item("picard_sum", r.picard_sum)?;
        d.set_item("picard_divergent", r.picard_divergent)?;
        d.set_item("residual_bounds", r.residual_bounds)?;
        d.set_item("truncation", r.truncation)?;
        Ok(d)
    }

    /// Filtered reconstruction with `kind` in {"tikhonov", "truncated", "landweber"}.
    fn filtered(&self, y: Vec<Vec<C64>>, kind: &str, alpha: f64) -> PyResult<Vec<Vec<C64>>> {
        let filter = FilterSpec::new(FilterKind::parse(kind).map_err(err)?, alpha).map_err(err)?;
        let data = NoisyData::new(product(y), 0.0).map_err(err)?;
        Ok(blocks(&filtered_reconstruct(&self.dec, &data, &filter).map_err(err)?.solution))
    }

    /// Cumulative Picard sums and the verdict string.
    fn picard(&self, y: Vec<Vec<C64>>) -> PyResult<(Vec<f64>, &'static str)> {
        let r = self.dec.picard_diagnostic(&product(y)).map_err(err)?;
        Ok((r.partial_sums, r.verdict.as_str()))
    }
}

#[pymodule]
fn pyframedec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFrame>()?;
    m.add_class::<PyDualFrame>()?;
    m.add_class::<PyDecomposition>()?;
    Ok(())
}
