//! Periodic convolution on a uniform grid, diagonal in the Fourier basis.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::decomposition::FrameDecomposition;
use crate::error::{Error, Result};
use crate::fourier::{fft_axes, signed_frequency};
use crate::frame::Frame;
use crate::hilbert::{ComponentSpace, ProductSpaceSpec, ProductVector, C64};
use crate::lambda::LambdaFamily;
use crate::operator::LinearOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvolutionSpec {
    pub n: usize,
    /// Length of the periodic interval.
    pub length: f64,
    /// `â(ξ)` in FFT order, `ξ` the signed integer frequency of each bin.
    pub symbol: Vec<C64>,
}

impl ConvolutionSpec {
    pub fn new(n: usize, length: f64, symbol: Vec<C64>) -> Result<Self> {
        if n == 0 || symbol.len() != n {
            return Err(Error::InvalidParameter(format!(
                "symbol needs one value per grid point ({n}), got {}",
                symbol.len()
            )));
        }
        if !(length > 0.0) {
            return Err(Error::InvalidParameter("interval length must be positive".into()));
        }
        Ok(Self { n, length, symbol })
    }

    pub fn from_fn<F: Fn(i64) -> C64>(n: usize, length: f64, f: F) -> Result<Self> {
        Self::new(n, length, (0..n).map(|j| f(signed_frequency(j, n))).collect())
    }

    pub fn frequencies(&self) -> Vec<i64> {
        (0..self.n).map(|j| signed_frequency(j, self.n)).collect()
    }

    pub fn space(&self) -> ComponentSpace {
        ComponentSpace::quadrature(self.n, self.length).expect("validated grid")
    }

    /// FFT bins ordered by `|ξ|`, negative before positive: `0, -1, 1, -2, 2, …`.
    pub fn ordered_bins(&self) -> Vec<usize> {
        let mut bins: Vec<usize> = (0..self.n).collect();
        bins.sort_by_key(|&j| {
            let xi = signed_frequency(j, self.n);
            (xi.abs(), xi)
        });
        bins
    }

    /// Orthonormal exponentials `exp(2πi ξ p / n) / sqrt(ℓ)` in [`ordered_bins`](Self::ordered_bins) order.
    pub fn fourier_frame(&self) -> Result<Frame> {
        let n = self.n;
        let s = 1.0 / self.length.sqrt();
        let bins = self.ordered_bins();
        let m = DMatrix::from_fn(n, n, |p, c| {
            let xi = signed_frequency(bins[c], n) as f64;
            C64::from_polar(s, 2.0 * std::f64::consts::PI * xi * p as f64 / n as f64)
        });
        Frame::new(self.space(), m)
    }
}

#[derive(Debug, Clone)]
pub struct ConvolutionOperator {
    spec: ConvolutionSpec,
    space: ProductSpaceSpec,
}

impl ConvolutionOperator {
    pub fn new(spec: ConvolutionSpec) -> Self {
        let space = ProductSpaceSpec::single(spec.space());
        Self { spec, space }
    }

    pub fn spec(&self) -> &ConvolutionSpec {
        &self.spec
    }

    fn multiply(&self, v: &DVector<C64>, conjugate: bool) -> DVector<C64> {
        let mut data: Vec<C64> = v.iter().copied().collect();
        fft_axes(&mut data, &[self.spec.n], &[0], false);
        for (d, s) in data.iter_mut().zip(&self.spec.symbol) {
            *d *= if conjugate { s.conj() } else { *s };
        }
        fft_axes(&mut data, &[self.spec.n], &[0], true);
        DVector::from_vec(data)
    }

    /// Exact inverse by Fourier division; requires a nonvanishing symbol.
    pub fn divide(&self, y: &DVector<C64>) -> Result<DVector<C64>> {
        if let Some(j) = self.spec.symbol.iter().position(|s| s.norm() == 0.0) {
            return Err(Error::InvalidParameter(format!("symbol vanishes at bin {j}")));
        }
        let mut data: Vec<C64> = y.iter().copied().collect();
        fft_axes(&mut data, &[self.spec.n], &[0], false);
        for (d, s) in data.iter_mut().zip(&self.spec.symbol) {
            *d /= *s;
        }
        fft_axes(&mut data, &[self.spec.n], &[0], true);
        Ok(DVector::from_vec(data))
    }
}

impl LinearOperator for ConvolutionOperator {
    fn domain(&self) -> &ProductSpaceSpec {
        &self.space
    }

    fn codomain(&self) -> &ProductSpaceSpec {
        &self.space
    }

    fn forward(&self, x: &ProductVector) -> ProductVector {
        ProductVector::single(self.multiply(x.block(0), false))
    }

    fn adjoint(&self, y: &ProductVector) -> ProductVector {
        ProductVector::single(self.multiply(y.block(0), true))
    }
}

impl ConvolutionSpec {
    /// Fourier frames on both sides and `Λ_ξ = â(ξ)`, groups ordered by `|ξ|`.
    pub fn decomposition(&self) -> Result<FrameDecomposition> {
        let frame = Arc::new(self.fourier_frame()?);
        let symbol: Vec<C64> = self.ordered_bins().iter().map(|&j| self.symbol[j]).collect();
        FrameDecomposition::new(vec![frame.clone()], vec![frame], LambdaFamily::scalar(&symbol))
    }
}

/// Fourier frames on both sides and `Λ_ξ = â(ξ)`, verified on random probes.
pub fn convolution_decomposition(spec: &ConvolutionSpec) -> Result<(FrameDecomposition, ConvolutionOperator)> {
    let op = ConvolutionOperator::new(spec.clone());
    let dec = spec.decomposition()?.verified(&op, 4, 0xc0)?;
    Ok((dec, op))
}
