//! Finite frames over a component space: analysis, synthesis, the frame
//! operator, certified frame bounds, and dual frames.
//!
//! Frame bounds are certified as the extreme eigenvalues of the frame
//! operator `S = F*F`, i.e. the optimal bounds of the finite family.

use std::borrow::Cow;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::hilbert::{ComponentSpace, C64};
use crate::linalg::hermitian_extremes;

/// Relative spread `|B2 - B1| / B2` below which a frame counts as tight.
pub const TIGHT_TOLERANCE: f64 = 1e-10;
/// `B1 / B2` at or below this ratio means the family does not span.
const RANK_TOLERANCE: f64 = 1e-12;
/// Condition number of `S` above which exact duals carry a warning.
const CONDITION_WARNING: f64 = 1e12;

#[derive(Debug, Clone)]
enum Elements {
    /// Columns are the frame elements.
    Dense(DMatrix<C64>),
    /// `e_k = δ_k / sqrt(w_k)`: the orthonormal coordinate basis of the space.
    Canonical,
}

impl Elements {
    fn len(&self, space: &ComponentSpace) -> usize {
        match self {
            Elements::Dense(m) => m.ncols(),
            Elements::Canonical => space.dim(),
        }
    }

    fn element(&self, space: &ComponentSpace, k: usize) -> DVector<C64> {
        match self {
            Elements::Dense(m) => m.column(k).into_owned(),
            Elements::Canonical => {
                let mut v = space.zeros();
                v[k] = C64::new(1.0 / space.weights()[k].sqrt(), 0.0);
                v
            }
        }
    }

    fn matrix(&self, space: &ComponentSpace) -> Cow<'_, DMatrix<C64>> {
        match self {
            Elements::Dense(m) => Cow::Borrowed(m),
            Elements::Canonical => Cow::Owned(DMatrix::from_diagonal(&DVector::from_iterator(
                space.dim(),
                space.weights().iter().map(|w| C64::new(1.0 / w.sqrt(), 0.0)),
            ))),
        }
    }

    /// `(⟨x, e_k⟩)_k`
    fn analyze(&self, space: &ComponentSpace, x: &DVector<C64>) -> DVector<C64> {
        match self {
            Elements::Dense(m) => {
                let wx = weighted(space, x);
                m.ad_mul(&wx)
            }
            Elements::Canonical => DVector::from_iterator(
                x.len(),
                x.iter().zip(space.weights()).map(|(v, w)| v * w.sqrt()),
            ),
        }
    }

    /// `Σ_k a_k e_k`
    fn synthesize(&self, space: &ComponentSpace, a: &DVector<C64>) -> DVector<C64> {
        match self {
            Elements::Dense(m) => m * a,
            Elements::Canonical => DVector::from_iterator(
                a.len(),
                a.iter().zip(space.weights()).map(|(v, w)| v / w.sqrt()),
            ),
        }
    }
}

fn weighted(space: &ComponentSpace, x: &DVector<C64>) -> DVector<C64> {
    DVector::from_iterator(x.len(), x.iter().zip(space.weights()).map(|(v, w)| v * *w))
}

/// `D E` with `D = diag(sqrt(w))`, the elements in unweighted coordinates.
fn sqrt_weighted(space: &ComponentSpace, e: &DMatrix<C64>) -> DMatrix<C64> {
    let mut out = e.clone();
    for (i, w) in space.weights().iter().enumerate() {
        let s = w.sqrt();
        out.row_mut(i).iter_mut().for_each(|z| *z *= s);
    }
    out
}

/// Optimal frame bounds of `elements` (columns) over `space`: the extreme
/// eigenvalues of the frame operator.
pub fn certify_bounds(elements: &DMatrix<C64>, space: &ComponentSpace) -> Result<(f64, f64)> {
    if elements.nrows() != space.dim() {
        return Err(Error::DimensionMismatch {
            context: "frame elements",
            block: 0,
            expected: space.dim(),
            found: elements.nrows(),
        });
    }
    if elements.ncols() < space.dim() {
        return Err(Error::NotAFrame { smallest_eigenvalue: 0.0 });
    }
    let de = sqrt_weighted(space, elements);
    let h = &de * de.adjoint();
    let (lo, hi) = hermitian_extremes(h);
    if !(hi > 0.0) || lo <= RANK_TOLERANCE * hi {
        return Err(Error::NotAFrame { smallest_eigenvalue: lo.max(0.0) });
    }
    Ok((lo, hi))
}

#[derive(Debug, Clone)]
pub struct Frame {
    space: ComponentSpace,
    elements: Elements,
    bounds: (f64, f64),
    tight: bool,
    exact: bool,
    truncation: Option<usize>,
}

impl Frame {
    /// Certifies the columns of `elements` as a frame over `space`.
    pub fn new(space: ComponentSpace, elements: DMatrix<C64>) -> Result<Self> {
        let bounds = certify_bounds(&elements, &space)?;
        let exact = elements.ncols() == space.dim();
        Ok(Self {
            space,
            elements: Elements::Dense(elements),
            bounds,
            tight: is_tight(bounds),
            exact,
            truncation: None,
        })
    }

    pub fn from_vectors(space: ComponentSpace, vectors: &[DVector<C64>]) -> Result<Self> {
        let dim = space.dim();
        for (k, v) in vectors.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "frame element",
                    block: k,
                    expected: dim,
                    found: v.len(),
                });
            }
        }
        let m = DMatrix::from_fn(dim, vectors.len(), |i, k| vectors[k][i]);
        Self::new(space, m)
    }

    /// Frame from real element coordinates, one element per inner slice.
    pub fn from_real(space: ComponentSpace, vectors: &[Vec<f64>]) -> Result<Self> {
        let cv: Vec<DVector<C64>> = vectors
            .iter()
            .map(|v| DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0))))
            .collect();
        Self::from_vectors(space, &cv)
    }

    /// The orthonormal coordinate basis `δ_k / sqrt(w_k)`; tight with bound 1.
    pub fn orthonormal_basis(space: ComponentSpace) -> Self {
        Self {
            space,
            elements: Elements::Canonical,
            bounds: (1.0, 1.0),
            tight: true,
            exact: true,
            truncation: None,
        }
    }

    /// First `count` elements of an infinite family given by `generator`;
    /// the truncation index is recorded on the frame.
    pub fn truncated<F>(space: ComponentSpace, count: usize, mut generator: F) -> Result<Self>
    where
        F: FnMut(usize) -> DVector<C64>,
    {
        let vectors: Vec<_> = (0..count).map(&mut generator).collect();
        let mut frame = Self::from_vectors(space, &vectors)?;
        frame.truncation = Some(count);
        Ok(frame)
    }

    pub fn space(&self) -> &ComponentSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.elements.len(&self.space)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn bounds(&self) -> (f64, f64) {
        self.bounds
    }

    pub fn is_tight(&self) -> bool {
        self.tight
    }

    /// Exact frames (no element can be deleted) are the bases: `K = dim`.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn truncation(&self) -> Option<usize> {
        self.truncation
    }

    pub fn element(&self, k: usize) -> DVector<C64> {
        self.elements.element(&self.space, k)
    }

    /// Element matrix, one column per element.
    pub fn matrix(&self) -> Cow<'_, DMatrix<C64>> {
        self.elements.matrix(&self.space)
    }

    pub fn analyze(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        self.space.check("frame analysis", 0, x)?;
        Ok(self.elements.analyze(&self.space, x))
    }

    pub fn synthesize(&self, coeffs: &DVector<C64>) -> Result<DVector<C64>> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "frame synthesis",
                block: 0,
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        Ok(self.elements.synthesize(&self.space, coeffs))
    }

    /// `S x = Σ_k ⟨x, e_k⟩ e_k`.
    pub fn frame_operator_apply(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        let c = self.analyze(x)?;
        Ok(self.elements.synthesize(&self.space, &c))
    }

    /// Coordinate matrix of `S` (`E E^H W`).
    pub fn frame_operator_matrix(&self) -> DMatrix<C64> {
        let e = self.matrix();
        let mut ew = e.adjoint();
        for (i, w) in self.space.weights().iter().enumerate() {
            ew.column_mut(i).iter_mut().for_each(|z| *z *= *w);
        }
        e.as_ref() * ew
    }

    /// Dual frame `ẽ_k = S^{-1} e_k`, computed with a Hermitian positive
    /// definite solve.
    pub fn dual_exact(&self) -> DualFrame {
        let mut warnings = Vec::new();
        let (b1, b2) = self.bounds;
        if b2 / b1 > CONDITION_WARNING {
            warnings.push(format!(
                "frame operator is ill-conditioned (condition number {:e})",
                b2 / b1
            ));
        }
        let elements = match &self.elements {
            Elements::Canonical => Elements::Canonical,
            // S = B·I up to the tightness tolerance
            Elements::Dense(e) if self.tight => Elements::Dense(e * C64::new(2.0 / (b1 + b2), 0.0)),
            Elements::Dense(e) => {
                let de = sqrt_weighted(&self.space, e);
                let h = crate::linalg::hermitize(&de * de.adjoint());
                let chol = Cholesky::new(h).expect("certified frame operator is positive definite");
                let mut sol = chol.solve(&de);
                for (i, w) in self.space.weights().iter().enumerate() {
                    let s = 1.0 / w.sqrt();
                    sol.row_mut(i).iter_mut().for_each(|z| *z *= s);
                }
                Elements::Dense(sol)
            }
        };
        DualFrame {
            space: self.space.clone(),
            base_bounds: self.bounds,
            elements,
            method: DualMethod::ExactSolve,
            certified_error: 0.0,
            warnings,
        }
    }

    /// Contraction rate `(B2 - B1) / (B2 + B1)` of the Neumann iteration.
    pub fn neumann_rate(&self) -> f64 {
        let (b1, b2) = self.bounds;
        if self.tight {
            0.0
        } else {
            (b2 - b1) / (b2 + b1)
        }
    }

    /// Smallest `N` whose certified Neumann error `rate^(N+1)` is at most `target_eps`.
    pub fn neumann_iterations_for(&self, target_eps: f64) -> Result<usize> {
        if !(target_eps > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "target_eps must be positive, got {target_eps}"
            )));
        }
        let rate = self.neumann_rate();
        if rate <= target_eps {
            return Ok(0);
        }
        let mut n = ((target_eps.ln() / rate.ln()).ceil() as i64 - 1).max(0) as usize;
        while n > 0 && rate.powi(n as i32) <= target_eps {
            n -= 1;
        }
        while rate.powi(n as i32 + 1) > target_eps {
            n += 1;
        }
        Ok(n)
    }

    /// Neumann-series dual with the minimal `N` meeting `target_eps`.
    pub fn dual_neumann(&self, target_eps: f64) -> Result<DualFrame> {
        let n = self.neumann_iterations_for(target_eps)?;
        Ok(self.dual_neumann_iterations(n))
    }

    /// Neumann-series dual after exactly `iterations` steps of
    /// `ẽ^N = c e + R ẽ^{N-1}`, `R = I - c S`, `c = 2 / (B1 + B2)`.
    pub fn dual_neumann_iterations(&self, iterations: usize) -> DualFrame {
        let (b1, b2) = self.bounds;
        let c = 2.0 / (b1 + b2);
        let rate = self.neumann_rate();
        let elements = match &self.elements {
            Elements::Canonical => Elements::Canonical,
            Elements::Dense(e) => {
                let ce = e * C64::new(c, 0.0);
                let dim = self.space.dim();
                let r = DMatrix::<C64>::identity(dim, dim) - self.frame_operator_matrix() * C64::new(c, 0.0);
                let mut approx = ce.clone();
                for _ in 0..iterations {
                    approx = &ce + &r * approx;
                }
                Elements::Dense(approx)
            }
        };
        DualFrame {
            space: self.space.clone(),
            base_bounds: self.bounds,
            elements,
            method: DualMethod::Neumann { iterations },
            certified_error: rate.powi(iterations as i32 + 1),
            warnings: Vec::new(),
        }
    }
}

fn is_tight((b1, b2): (f64, f64)) -> bool {
    (b2 - b1).abs() / b2 <= TIGHT_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DualMethod {
    ExactSolve,
    Neumann { iterations: usize },
}

#[derive(Debug, Clone)]
pub struct DualFrame {
    space: ComponentSpace,
    base_bounds: (f64, f64),
    elements: Elements,
    method: DualMethod,
    certified_error: f64,
    warnings: Vec<String>,
}

impl DualFrame {
    /// Rebuilds a dual frame from stored elements (see [`crate::cache`]).
    pub fn from_parts(
        space: ComponentSpace,
        base_bounds: (f64, f64),
        elements: DMatrix<C64>,
        method: DualMethod,
        certified_error: f64,
    ) -> Result<Self> {
        if elements.nrows() != space.dim() {
            return Err(Error::DimensionMismatch {
                context: "dual frame elements",
                block: 0,
                expected: space.dim(),
                found: elements.nrows(),
            });
        }
        Ok(Self {
            space,
            base_bounds,
            elements: Elements::Dense(elements),
            method,
            certified_error,
            warnings: Vec::new(),
        })
    }

    pub fn space(&self) -> &ComponentSpace {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.elements.len(&self.space)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn method(&self) -> DualMethod {
        self.method
    }

    /// Bounds `(B1, B2)` of the frame this dual belongs to.
    pub fn base_bounds(&self) -> (f64, f64) {
        self.base_bounds
    }

    /// The dual of a frame with bounds `(B1, B2)` has bounds `(1/B2, 1/B1)`.
    pub fn bounds(&self) -> (f64, f64) {
        (1.0 / self.base_bounds.1, 1.0 / self.base_bounds.0)
    }

    /// Guaranteed relative reconstruction error; zero for exact duals.
    pub fn certified_error(&self) -> f64 {
        self.certified_error
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn element(&self, k: usize) -> DVector<C64> {
        self.elements.element(&self.space, k)
    }

    pub fn matrix(&self) -> Cow<'_, DMatrix<C64>> {
        self.elements.matrix(&self.space)
    }

    /// `(⟨x, ẽ_k⟩)_k`
    pub fn analyze(&self, x: &DVector<C64>) -> Result<DVector<C64>> {
        self.space.check("dual analysis", 0, x)?;
        Ok(self.elements.analyze(&self.space, x))
    }

    /// `Σ_k a_k ẽ_k`
    pub fn synthesize(&self, coeffs: &DVector<C64>) -> Result<DVector<C64>> {
        if coeffs.len() != self.len() {
            return Err(Error::DimensionMismatch {
                context: "dual synthesis",
                block: 0,
                expected: self.len(),
                found: coeffs.len(),
            });
        }
        Ok(self.elements.synthesize(&self.space, coeffs))
    }
}
