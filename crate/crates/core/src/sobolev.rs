//! Periodic Sobolev scales realized as Fourier multipliers
//! `(1 + |ξ|²)^{s/2}` on uniform periodic grids.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::fourier::{fft_axes, signed_frequency};
use crate::hilbert::{ComponentSpace, ProductSpaceSpec, ProductVector, C64};
use crate::operator::LinearOperator;

/// Multiplier values above this count as overflow.
const MULTIPLIER_LIMIT: f64 = 1e150;

/// Uniform periodic grid, row-major, with the axes the scale acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicGrid {
    pub shape: Vec<usize>,
    pub lengths: Vec<f64>,
    pub active: Vec<bool>,
}

impl PeriodicGrid {
    pub fn new(shape: Vec<usize>, lengths: Vec<f64>, active: Vec<bool>) -> Result<Self> {
        if shape.is_empty() || shape.len() != lengths.len() || shape.len() != active.len() {
            return Err(Error::InvalidParameter("grid shape, lengths and active axes must agree".into()));
        }
        if shape.contains(&0) || lengths.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
            return Err(Error::InvalidParameter("grid needs positive sizes and lengths".into()));
        }
        Ok(Self { shape, lengths, active })
    }

    /// One axis of `n` points on an interval of length `length`.
    pub fn line(n: usize, length: f64) -> Result<Self> {
        Self::new(vec![n], vec![length], vec![true])
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature space of the grid: every point weighs the cell volume.
    pub fn space(&self) -> ComponentSpace {
        let cell: f64 = self.shape.iter().zip(&self.lengths).map(|(&n, l)| l / n as f64).product();
        ComponentSpace::uniform(self.len(), cell).expect("positive cell volume")
    }

    fn active_axes(&self) -> Vec<usize> {
        (0..self.shape.len()).filter(|&a| self.active[a]).collect()
    }

    /// `|ξ|²` per grid point in FFT order, with `ξ = 2π j / length` on active axes.
    pub fn frequency_sq(&self) -> Vec<f64> {
        let n = self.len();
        let mut out = vec![0.0; n];
        let dims = self.shape.len();
        for (flat, v) in out.iter_mut().enumerate() {
            let mut rem = flat;
            let mut acc = 0.0;
            for axis in (0..dims).rev() {
                let size = self.shape[axis];
                let j = rem % size;
                rem /= size;
                if self.active[axis] {
                    let xi = 2.0 * std::f64::consts::PI * signed_frequency(j, size) as f64 / self.lengths[axis];
                    acc += xi * xi;
                }
            }
            *v = acc;
        }
        out
    }
}

/// The scale `H^s` over a periodic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SobolevScaleSpec {
    pub order: f64,
    pub grid: PeriodicGrid,
}

impl SobolevScaleSpec {
    pub fn new(order: f64, grid: PeriodicGrid) -> Result<Self> {
        if !order.is_finite() {
            return Err(Error::InvalidParameter(format!("Sobolev order must be finite, got {order}")));
        }
        Ok(Self { order, grid })
    }

    /// `(1 + |ξ|²)^{exponent/2}` per frequency.
    pub fn multiplier(&self, exponent: f64) -> Result<Vec<f64>> {
        let m: Vec<f64> = self
            .grid
            .frequency_sq()
            .iter()
            .map(|x2| (1.0 + x2).powf(exponent / 2.0))
            .collect();
        if m.iter().any(|v| !v.is_finite() || *v > MULTIPLIER_LIMIT || *v < 1.0 / MULTIPLIER_LIMIT) {
            return Err(Error::MultiplierOverflow { order: exponent });
        }
        Ok(m)
    }

    /// Applies `(1 + |ξ|²)^{exponent/2}` to a grid function.
    pub fn apply_power(&self, v: &DVector<C64>, exponent: f64) -> Result<DVector<C64>> {
        if v.len() != self.grid.len() {
            return Err(Error::DimensionMismatch {
                context: "Sobolev multiplier",
                block: 0,
                expected: self.grid.len(),
                found: v.len(),
            });
        }
        let m = self.multiplier(exponent)?;
        let axes = self.grid.active_axes();
        let mut data: Vec<C64> = v.iter().copied().collect();
        fft_axes(&mut data, &self.grid.shape, &axes, false);
        for (d, w) in data.iter_mut().zip(&m) {
            *d *= *w;
        }
        fft_axes(&mut data, &self.grid.shape, &axes, true);
        Ok(DVector::from_vec(data))
    }

    /// `L y`, with `‖L y‖_Y = ‖y‖_Z`.
    pub fn apply_l(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        self.apply_power(v, self.order)
    }

    /// `L^{-1} y`
    pub fn apply_l_inverse(&self, v: &DVector<C64>) -> Result<DVector<C64>> {
        self.apply_power(v, -self.order)
    }

    /// Coordinate matrix of `L`.
    pub fn l_matrix(&self) -> Result<DMatrix<C64>> {
        let n = self.grid.len();
        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = C64::new(1.0, 0.0);
            cols.push(self.apply_l(&e)?);
        }
        Ok(DMatrix::from_columns(&cols))
    }

    /// Gram matrix of the `Z`-norm in grid coordinates: `L^H W L`.
    pub fn gram(&self) -> Result<DMatrix<C64>> {
        let l = self.l_matrix()?;
        let w = self.grid.space().weights()[0];
        Ok(l.adjoint() * &l * C64::new(w, 0.0))
    }

    /// `‖y‖_Z = ‖L y‖_Y`.
    pub fn z_norm(&self, v: &DVector<C64>) -> Result<f64> {
        self.grid.space().norm(&self.apply_l(v)?)
    }
}

/// `L` as an operator on the grid's quadrature space.
#[derive(Debug, Clone)]
pub struct SobolevMultiplier {
    spec: SobolevScaleSpec,
    space: ProductSpaceSpec,
}

impl SobolevMultiplier {
    pub fn new(spec: SobolevScaleSpec) -> Result<Self> {
        spec.multiplier(spec.order)?;
        let space = ProductSpaceSpec::single(spec.grid.space());
        Ok(Self { spec, space })
    }

    pub fn spec(&self) -> &SobolevScaleSpec {
        &self.spec
    }
}

impl LinearOperator for SobolevMultiplier {
    fn domain(&self) -> &ProductSpaceSpec {
        &self.space
    }

    fn codomain(&self) -> &ProductSpaceSpec {
        &self.space
    }

    fn forward(&self, x: &ProductVector) -> ProductVector {
        ProductVector::single(self.spec.apply_l(x.block(0)).expect("validated multiplier"))
    }

    // real multiplier on a uniform grid: self-adjoint
    fn adjoint(&self, y: &ProductVector) -> ProductVector {
        self.forward(y)
    }
}
