//! Parallel-beam Radon transform of images on the unit disk, with the
//! wavelet × exponential sinogram frame and its stability construction.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::constructors::{stability_construct, StabilityCertificate};
use crate::decomposition::FrameDecomposition;
use crate::error::{Error, Result};
use crate::fourier::signed_frequency;
use crate::frame::Frame;
use crate::hilbert::{ComponentSpace, ProductSpaceSpec, ProductVector, C64};
use crate::models::wavelet::{daubechies4, WaveletSpec};
use crate::operator::{DenseOperator, LinearOperator};
use crate::sobolev::{PeriodicGrid, SobolevScaleSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct RadonSpec {
    /// Image is `pixels × pixels` on `[-1, 1]²`, masked to the unit disk.
    pub pixels: usize,
    /// Uniform angles `2π p / angles`.
    pub angles: usize,
    /// Uniform detector cells on `[-1, 1]`.
    pub detectors: usize,
    /// Smoothness order of the solution space.
    pub order: f64,
    pub wavelet_levels: usize,
    /// Number of angular exponentials; must equal `angles`.
    pub angular_size: usize,
    pub taps: Vec<f64>,
}

impl RadonSpec {
    pub fn new(pixels: usize, angles: usize, detectors: usize) -> Self {
        Self {
            pixels,
            angles,
            detectors,
            order: 0.0,
            wavelet_levels: 3,
            angular_size: angles,
            taps: daubechies4(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.pixels < 2 || self.angles == 0 || self.detectors < 2 {
            return Err(Error::InvalidParameter("Radon grid sizes too small".into()));
        }
        if !self.detectors.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "detector count {} must be a power of two for the wavelet frame",
                self.detectors
            )));
        }
        if self.angular_size != self.angles {
            return Err(Error::InvalidParameter(format!(
                "angular basis size {} must equal the number of angles {}",
                self.angular_size, self.angles
            )));
        }
        if !(self.order >= 0.0) {
            return Err(Error::InvalidParameter("smoothness order must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Discretized Radon transform with its masked image grid.
#[derive(Debug, Clone)]
pub struct RadonProblem {
    spec: RadonSpec,
    /// Flat `row * pixels + col` positions of the unknowns.
    mask: Vec<usize>,
    op: DenseOperator,
}

impl RadonProblem {
    pub fn new(spec: RadonSpec) -> Result<Self> {
        spec.validate()?;
        let p = spec.pixels;
        let h = 2.0 / p as f64;
        let center = |i: usize| -1.0 + (i as f64 + 0.5) * h;
        let mask: Vec<usize> = (0..p * p)
            .filter(|&idx| {
                let (r, c) = (idx / p, idx % p);
                center(c).powi(2) + center(r).powi(2) <= 1.0
            })
            .collect();
        let mut index_of = vec![usize::MAX; p * p];
        for (k, &idx) in mask.iter().enumerate() {
            index_of[idx] = k;
        }
        let (q, d) = (spec.angles, spec.detectors);
        let ds = 2.0 / d as f64;
        let mut a = DMatrix::<C64>::zeros(q * d, mask.len());
        for ang in 0..q {
            let phi = 2.0 * std::f64::consts::PI * ang as f64 / q as f64;
            let (sn, cs) = phi.sin_cos();
            for det in 0..d {
                let s = -1.0 + (det as f64 + 0.5) * ds;
                let row = ang * d + det;
                for m in 0..p {
                    let t = -1.0 + (m as f64 + 0.5) * h;
                    let (x, y) = (s * cs - t * sn, s * sn + t * cs);
                    // bilinear weights around the pixel centers
                    let u = (x + 1.0) / h - 0.5;
                    let v = (y + 1.0) / h - 0.5;
                    let (c0, r0) = (u.floor(), v.floor());
                    let (fu, fv) = (u - c0, v - r0);
                    for (dr, wr) in [(0, 1.0 - fv), (1, fv)] {
                        for (dc, wc) in [(0, 1.0 - fu), (1, fu)] {
                            let (rr, cc) = (r0 as i64 + dr, c0 as i64 + dc);
                            if rr < 0 || cc < 0 || rr >= p as i64 || cc >= p as i64 {
                                continue;
                            }
                            let k = index_of[rr as usize * p + cc as usize];
                            let w = wr * wc * h;
                            if k != usize::MAX && w != 0.0 {
                                a[(row, k)] += C64::new(w, 0.0);
                            }
                        }
                    }
                }
            }
        }
        let x_space = ComponentSpace::uniform(mask.len(), h * h)?;
        let y_space = Self::sinogram_grid(&spec).space();
        let op = DenseOperator::new(ProductSpaceSpec::single(x_space), ProductSpaceSpec::single(y_space), a)?;
        Ok(Self { spec, mask, op })
    }

    fn sinogram_grid(spec: &RadonSpec) -> PeriodicGrid {
        PeriodicGrid::new(
            vec![spec.angles, spec.detectors],
            vec![2.0 * std::f64::consts::PI, 2.0],
            vec![false, true],
        )
        .expect("validated sizes")
    }

    pub fn spec(&self) -> &RadonSpec {
        &self.spec
    }

    pub fn operator(&self) -> &DenseOperator {
        &self.op
    }

    pub fn unknowns(&self) -> usize {
        self.mask.len()
    }

    pub fn pixel_width(&self) -> f64 {
        2.0 / self.spec.pixels as f64
    }

    pub fn detector_centers(&self) -> Vec<f64> {
        let ds = 2.0 / self.spec.detectors as f64;
        (0..self.spec.detectors).map(|i| -1.0 + (i as f64 + 0.5) * ds).collect()
    }

    /// Masked unknowns from a full `pixels²` image; returns the number of
    /// nonzero pixels dropped outside the disk.
    pub fn image_from_grid(&self, grid: &[f64]) -> Result<(ProductVector, usize)> {
        let p = self.spec.pixels;
        if grid.len() != p * p {
            return Err(Error::DimensionMismatch { context: "image grid", block: 0, expected: p * p, found: grid.len() });
        }
        let mut inside = vec![false; p * p];
        for &i in &self.mask {
            inside[i] = true;
        }
        let dropped = grid.iter().zip(&inside).filter(|(v, ins)| **v != 0.0 && !**ins).count();
        let x = DVector::from_iterator(self.mask.len(), self.mask.iter().map(|&i| C64::new(grid[i], 0.0)));
        Ok((ProductVector::single(x), dropped))
    }

    /// Real parts on the full grid, zero outside the disk.
    pub fn image_to_grid(&self, x: &ProductVector) -> Vec<f64> {
        let p = self.spec.pixels;
        let mut out = vec![0.0; p * p];
        for (v, &i) in x.block(0).iter().zip(&self.mask) {
            out[i] = v.re;
        }
        out
    }

    fn phantom_from<F: Fn(f64, f64) -> f64>(&self, f: F) -> ProductVector {
        let p = self.spec.pixels;
        let h = self.pixel_width();
        let grid: Vec<f64> = (0..p * p)
            .map(|idx| {
                let (r, c) = (idx / p, idx % p);
                f(-1.0 + (c as f64 + 0.5) * h, -1.0 + (r as f64 + 0.5) * h)
            })
            .collect();
        self.image_from_grid(&grid).expect("grid size").0
    }

    /// Indicator of the centered disk of radius `r`.
    pub fn disk_phantom(&self, r: f64) -> ProductVector {
        self.phantom_from(|x, y| if x * x + y * y <= r * r { 1.0 } else { 0.0 })
    }

    /// Sum of ellipse indicators in the style of the Shepp–Logan head phantom.
    pub fn shepp_logan(&self) -> ProductVector {
        const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
            (0.0, 0.0, 0.69, 0.92, 0.0, 1.0),
            (0.0, -0.0184, 0.6624, 0.874, 0.0, -0.8),
            (0.22, 0.0, 0.11, 0.31, -18.0, -0.2),
            (-0.22, 0.0, 0.16, 0.41, 18.0, -0.2),
            (0.0, 0.35, 0.21, 0.25, 0.0, 0.1),
            (0.0, 0.1, 0.046, 0.046, 0.0, 0.1),
            (0.0, -0.1, 0.046, 0.046, 0.0, 0.1),
            (-0.08, -0.605, 0.046, 0.023, 0.0, 0.1),
            (0.0, -0.605, 0.023, 0.023, 0.0, 0.1),
            (0.06, -0.605, 0.023, 0.046, 0.0, 0.1),
        ];
        self.phantom_from(|x, y| {
            ELLIPSES
                .iter()
                .filter(|(x0, y0, a, b, deg, _)| {
                    let (sn, cs) = deg.to_radians().sin_cos();
                    let (dx, dy) = (x - x0, y - y0);
                    let (u, v) = (dx * cs + dy * sn, -dx * sn + dy * cs);
                    (u / a).powi(2) + (v / b).powi(2) <= 1.0
                })
                .map(|e| e.5)
                .sum()
        })
    }

    pub fn forward(&self, x: &ProductVector) -> Result<ProductVector> {
        self.op.apply(x)
    }

    pub fn adjoint(&self, y: &ProductVector) -> Result<ProductVector> {
        self.op.apply_adjoint(y)
    }

    /// `Z = H^{order + 1/2}` in the detector variable.
    pub fn scale(&self) -> SobolevScaleSpec {
        SobolevScaleSpec::new(self.spec.order + 0.5, Self::sinogram_grid(&self.spec)).expect("finite order")
    }

    fn wavelet(&self) -> WaveletSpec {
        WaveletSpec { taps: self.spec.taps.clone(), levels: self.spec.wavelet_levels }
    }

    /// Frame index order: coarse wavelet scales first, then `|l|`.
    fn index_order(&self) -> Result<Vec<(usize, usize)>> {
        let (q, d) = (self.spec.angles, self.spec.detectors);
        let j = self.wavelet().scale_indices(d)?;
        let mut idx: Vec<(usize, usize)> = (0..q).flat_map(|l| (0..d).map(move |c| (l, c))).collect();
        idx.sort_by_key(|&(l, c)| {
            let sl = signed_frequency(l, q);
            (j[c], sl.abs(), sl, c)
        });
        Ok(idx)
    }

    /// Orthonormal sinogram frame `ψ_c(s) w_l(φ)` in [`index_order`](Self::index_order).
    pub fn y_frame(&self) -> Result<Frame> {
        let (q, d) = (self.spec.angles, self.spec.detectors);
        let psi = self.wavelet().analysis_matrix(d)?;
        let order = self.index_order()?;
        let ds = 2.0 / d as f64;
        let dphi = 2.0 * std::f64::consts::PI / q as f64;
        let norm = 1.0 / (ds * dphi * q as f64).sqrt();
        let m = DMatrix::from_fn(q * d, q * d, |row, k| {
            let (ang, det) = (row / d, row % d);
            let (l, c) = order[k];
            let w = C64::from_polar(norm, 2.0 * std::f64::consts::PI * (l * ang) as f64 / q as f64);
            w * psi[(c, det)]
        });
        Frame::new(Self::sinogram_grid(&self.spec).space(), m)
    }

    /// `α = 1 + 2^{-2j(order + 1/2)}` per frame index.
    pub fn alphas(&self) -> Result<Vec<f64>> {
        let j = self.wavelet().scale_indices(self.spec.detectors)?;
        let e = self.spec.order + 0.5;
        Ok(self
            .index_order()?
            .iter()
            .map(|&(_, c)| 1.0 + 2f64.powf(-2.0 * j[c] as f64 * e))
            .collect())
    }

    /// Stability construction `e = α A* f` on the sinogram frame.
    pub fn frame_system(&self) -> Result<(FrameDecomposition, StabilityCertificate)> {
        let f = Arc::new(self.y_frame()?);
        stability_construct(&self.op, f, &self.scale(), &self.alphas()?, None)
    }
}
