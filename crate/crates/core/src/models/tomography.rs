//! Periodic atmospheric tomography: layers on a torus `[-T, T]²` seen by
//! guide stars through shifts `α_g h_l`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decomposition::FrameDecomposition;
use crate::error::{Error, Result};
use crate::fourier::{fft_axes, signed_frequency};
use crate::frame::Frame;
use crate::hilbert::{ComponentSpace, ProductSpaceSpec, ProductVector, C64};
use crate::lambda::{BlockPartition, LambdaFamily};
use crate::linalg::random_complex_vector;
use crate::operator::LinearOperator;

#[derive(Debug, Clone, PartialEq)]
pub struct TomographySpec {
    /// Grid points per axis of every layer and every measurement.
    pub grid: usize,
    /// Torus half-width `T` in meters.
    pub half_width: f64,
    /// Layer heights `h_l` in meters.
    pub heights: Vec<f64>,
    /// Guide-star directions `α_g` in radians.
    pub directions: Vec<[f64; 2]>,
    /// Telescope aperture diameter in meters.
    pub aperture: f64,
    /// Frequencies `|j|, |k| ≤ J` are kept.
    pub cutoff: usize,
}

impl TomographySpec {
    pub fn layers(&self) -> usize {
        self.heights.len()
    }

    pub fn stars(&self) -> usize {
        self.directions.len()
    }

    /// Shift `α_g h_l` of layer `l` seen from star `g`.
    pub fn shift(&self, g: usize, l: usize) -> [f64; 2] {
        let [ax, ay] = self.directions[g];
        [ax * self.heights[l], ay * self.heights[l]]
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid < 2 || self.heights.is_empty() || self.directions.is_empty() {
            return Err(Error::InvalidParameter("tomography needs a grid, layers and guide stars".into()));
        }
        if !(self.half_width > 0.0) || !(self.aperture >= 0.0) {
            return Err(Error::InvalidParameter("half-width and aperture must be positive".into()));
        }
        if 2 * self.cutoff + 1 > self.grid {
            return Err(Error::InvalidParameter(format!(
                "cutoff {} needs at least {} grid points per axis",
                self.cutoff,
                2 * self.cutoff + 1
            )));
        }
        let mut max_shift: f64 = 0.0;
        for g in 0..self.stars() {
            for l in 0..self.layers() {
                let [sx, sy] = self.shift(g, l);
                max_shift = max_shift.max(sx.abs()).max(sy.abs());
            }
        }
        let required = self.aperture / 2.0 + max_shift;
        if self.half_width <= required {
            return Err(Error::ApertureEscapesTorus { required, half_width: self.half_width });
        }
        Ok(())
    }

    pub fn space(&self) -> ComponentSpace {
        let cell = 2.0 * self.half_width / self.grid as f64;
        ComponentSpace::uniform(self.grid * self.grid, cell * cell).expect("positive cell")
    }

    /// Signed frequencies `(j, k)` ordered by shell `max(|j|, |k|)`, then `j`, then `k`.
    pub fn frequencies(&self) -> Vec<(i64, i64)> {
        let n = self.grid;
        let mut f: Vec<(i64, i64)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (signed_frequency(a, n), signed_frequency(b, n))))
            .collect();
        f.sort_by_key(|&(j, k)| (j.abs().max(k.abs()), j, k));
        f
    }

    /// `w_jk(x, y) = exp(iπ(j x + k y) / T) / (2T)`.
    pub fn w(&self, j: i64, k: i64, x: f64, y: f64) -> C64 {
        let t = self.half_width;
        C64::from_polar(1.0 / (2.0 * t), std::f64::consts::PI * (j as f64 * x + k as f64 * y) / t)
    }

    /// Number of groups with `|j|, |k| ≤ J`.
    pub fn truncation(&self) -> usize {
        (2 * self.cutoff + 1).pow(2)
    }
}

/// `(Ãφ)_g(r) = Σ_l φ_l(r + α_g h_l)`, realized by exact Fourier phase shifts.
#[derive(Debug, Clone)]
pub struct TomographyOperator {
    spec: TomographySpec,
    domain: ProductSpaceSpec,
    codomain: ProductSpaceSpec,
    /// Phase factors per `(g, l)` in FFT layout.
    phases: Vec<Vec<C64>>,
}

impl TomographyOperator {
    pub fn new(spec: TomographySpec) -> Result<Self> {
        spec.validate()?;
        let n = spec.grid;
        let t = spec.half_width;
        let mut phases = Vec::with_capacity(spec.stars() * spec.layers());
        for g in 0..spec.stars() {
            for l in 0..spec.layers() {
                let [sx, sy] = spec.shift(g, l);
                // layer index is row (y) * n + column (x)
                phases.push(
                    (0..n * n)
                        .map(|idx| {
                            let k = signed_frequency(idx / n, n) as f64;
                            let j = signed_frequency(idx % n, n) as f64;
                            C64::from_polar(1.0, std::f64::consts::PI * (j * sx + k * sy) / t)
                        })
                        .collect(),
                );
            }
        }
        let space = spec.space();
        let domain = ProductSpaceSpec::repeated(space.clone(), spec.layers())?;
        let codomain = ProductSpaceSpec::repeated(space, spec.stars())?;
        Ok(Self { spec, domain, codomain, phases })
    }

    pub fn spec(&self) -> &TomographySpec {
        &self.spec
    }

    fn transform(&self, v: &DVector<C64>, inverse: bool) -> Vec<C64> {
        let n = self.spec.grid;
        let mut data: Vec<C64> = v.iter().copied().collect();
        fft_axes(&mut data, &[n, n], &[0, 1], inverse);
        data
    }

    fn back(&self, mut data: Vec<C64>) -> DVector<C64> {
        let n = self.spec.grid;
        fft_axes(&mut data, &[n, n], &[0, 1], true);
        DVector::from_vec(data)
    }
}

impl LinearOperator for TomographyOperator {
    fn domain(&self) -> &ProductSpaceSpec {
        &self.domain
    }

    fn codomain(&self) -> &ProductSpaceSpec {
        &self.codomain
    }

    fn forward(&self, x: &ProductVector) -> ProductVector {
        let hats: Vec<Vec<C64>> = x.blocks.par_iter().map(|b| self.transform(b, false)).collect();
        let layers = self.spec.layers();
        ProductVector::new(
            (0..self.spec.stars())
                .into_par_iter()
                .map(|g| {
                    let mut acc = vec![C64::new(0.0, 0.0); hats[0].len()];
                    for (l, hat) in hats.iter().enumerate() {
                        for ((a, h), p) in acc.iter_mut().zip(hat).zip(&self.phases[g * layers + l]) {
                            *a += h * p;
                        }
                    }
                    self.back(acc)
                })
                .collect(),
        )
    }

    fn adjoint(&self, y: &ProductVector) -> ProductVector {
        let hats: Vec<Vec<C64>> = y.blocks.par_iter().map(|b| self.transform(b, false)).collect();
        let layers = self.spec.layers();
        ProductVector::new(
            (0..layers)
                .into_par_iter()
                .map(|l| {
                    let mut acc = vec![C64::new(0.0, 0.0); hats[0].len()];
                    for (g, hat) in hats.iter().enumerate() {
                        for ((a, h), p) in acc.iter_mut().zip(hat).zip(&self.phases[g * layers + l]) {
                            *a += h * p.conj();
                        }
                    }
                    self.back(acc)
                })
                .collect(),
        )
    }
}

/// The per-frequency `G×L` blocks with their index bookkeeping.
#[derive(Debug, Clone)]
pub struct TomographyBlocks {
    pub partition: BlockPartition,
    pub lambdas: LambdaFamily,
    /// `(j, k)` of every group, in group order.
    pub frequencies: Vec<(i64, i64)>,
    pub ranks: Vec<usize>,
}

/// `Λ_jk[g, l] = w_jk(α_g^x h_l, α_g^y h_l)` for every frequency on the grid.
pub fn tomography_blocks(spec: &TomographySpec) -> Result<TomographyBlocks> {
    spec.validate()?;
    let frequencies = spec.frequencies();
    let matrices: Vec<DMatrix<C64>> = frequencies
        .par_iter()
        .map(|&(j, k)| {
            DMatrix::from_fn(spec.stars(), spec.layers(), |g, l| {
                let [sx, sy] = spec.shift(g, l);
                spec.w(j, k, sx, sy)
            })
        })
        .collect();
    let lambdas = LambdaFamily::new(matrices);
    let ranks = (0..lambdas.len()).map(|k| lambdas.rank(k)).collect();
    Ok(TomographyBlocks {
        partition: BlockPartition::singletons(frequencies.len()),
        lambdas,
        frequencies,
        ranks,
    })
}

/// Tomography operator, frames and block decomposition.
#[derive(Debug, Clone)]
pub struct TomographyProblem {
    pub spec: TomographySpec,
    pub operator: TomographyOperator,
    pub blocks: TomographyBlocks,
    pub decomposition: FrameDecomposition,
}

impl TomographyProblem {
    pub fn new(spec: TomographySpec) -> Result<Self> {
        let (x, y) = Self::frames(&spec)?;
        Self::with_frames(spec, x, y)
    }

    /// Layer frame `{w_jk}` (orthonormal) and measurement frame
    /// `{w_jk / (2T)}` (tight, bound `1/(2T)²`), in shell order.
    pub fn frames(spec: &TomographySpec) -> Result<(Arc<Frame>, Arc<Frame>)> {
        spec.validate()?;
        let n = spec.grid;
        let t = spec.half_width;
        let step = 2.0 * t / n as f64;
        let freqs = spec.frequencies();
        let e = DMatrix::from_fn(n * n, freqs.len(), |idx, c| {
            let (j, k) = freqs[c];
            spec.w(j, k, -t + (idx % n) as f64 * step, -t + (idx / n) as f64 * step)
        });
        let f = &e * C64::new(1.0 / (2.0 * t), 0.0);
        Ok((Arc::new(Frame::new(spec.space(), e)?), Arc::new(Frame::new(spec.space(), f)?)))
    }

    /// Reuses frames built for the same grid and torus.
    pub fn with_frames(spec: TomographySpec, x_frame: Arc<Frame>, y_frame: Arc<Frame>) -> Result<Self> {
        let operator = TomographyOperator::new(spec.clone())?;
        if x_frame.space() != &spec.space() || y_frame.space() != &spec.space() {
            return Err(Error::InvalidParameter("frames belong to a different tomography grid".into()));
        }
        let blocks = tomography_blocks(&spec)?;
        let decomposition = FrameDecomposition::with_partition(
            vec![x_frame; spec.layers()],
            vec![y_frame; spec.stars()],
            blocks.lambdas.clone(),
            blocks.partition.clone(),
        )?
        .with_truncation(spec.truncation())?;
        Ok(Self { spec, operator, blocks, decomposition })
    }

    /// Random layers with coefficients on `0 < max(|j|, |k|) ≤ J` decaying
    /// like `(1 + j² + k²)^{-3/2}`; the piston term `(0, 0)` is left out.
    pub fn band_limited_layers(&self, seed: u64) -> ProductVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let kk = self.spec.truncation();
        let coeffs: Vec<DVector<C64>> = (0..kk)
            .map(|k| {
                if self.blocks.frequencies[k] == (0, 0) {
                    DVector::zeros(self.spec.layers())
                } else {
                    let (j, kk) = self.blocks.frequencies[k];
                    let decay = (1.0 + (j * j + kk * kk) as f64).powf(-1.5);
                    random_complex_vector(&mut rng, self.spec.layers()) * C64::new(decay, 0.0)
                }
            })
            .collect();
        self.decomposition.synthesize_x(&coeffs)
    }
}
