//! Builds operators, decompositions and reference solutions from a config.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ProblemKind, SymbolKind};
use crate::constructors::{from_svd, svd_of_dense};
use crate::decomposition::FrameDecomposition;
use crate::error::Result;
use crate::frame::Frame;
use crate::hilbert::{ComponentSpace, ProductSpaceSpec, ProductVector, C64};
use crate::lambda::LambdaFamily;
use crate::linalg::{random_complex_matrix, random_complex_vector, random_real_vector};
use crate::models::{
    ConvolutionOperator, ConvolutionSpec, RadonProblem, RadonSpec, TomographyProblem, TomographySpec,
};
use crate::operator::{DenseOperator, LinearOperator};

/// How solution vectors are drawn as images.
#[derive(Debug, Clone)]
pub enum Layout {
    Signal,
    Radon(Arc<RadonProblem>),
    /// Each block is an `n × n` image.
    Square(usize),
}

pub struct Problem {
    pub kind: ProblemKind,
    pub op: Arc<dyn LinearOperator>,
    pub dec: FrameDecomposition,
    /// Reference solution in `N(A)^⊥`, so it is also the minimum-norm solution.
    pub truth: ProductVector,
    pub layout: Layout,
    pub notes: Vec<String>,
}

fn symbol(kind: SymbolKind, order: f64, time: f64, xi: f64) -> C64 {
    let v = match kind {
        SymbolKind::Identity => 1.0,
        SymbolKind::Sobolev => (1.0 + xi * xi).powf(-order / 2.0),
        SymbolKind::Heat => (-time * xi * xi).exp(),
        SymbolKind::ZeroMean if xi == 0.0 => 0.0,
        SymbolKind::ZeroMean => (1.0 + xi * xi).powf(-order / 2.0),
    };
    C64::new(v, 0.0)
}

fn smooth_signal(n: usize) -> ProductVector {
    let tau = 2.0 * std::f64::consts::PI;
    ProductVector::single(DVector::from_fn(n, |i, _| {
        let t = i as f64 / n as f64;
        C64::new((tau * t).sin() + 0.5 * (3.0 * tau * t).cos(), 0.0)
    }))
}

pub fn build(cfg: &ExperimentConfig, seed: u64) -> Result<Problem> {
    let mut p = match cfg.problem {
        ProblemKind::Convolution => convolution(cfg)?,
        ProblemKind::Radon => radon(cfg)?,
        ProblemKind::Tomography => tomography(cfg, seed)?,
        ProblemKind::DenseSvd => dense_svd(cfg, seed)?,
        ProblemKind::Frame => frame(cfg, seed)?,
    };
    if let Some(k) = cfg.truncation {
        p.dec = p.dec.with_truncation(k)?;
    }
    Ok(p)
}

fn convolution(cfg: &ExperimentConfig) -> Result<Problem> {
    let c = cfg.convolution.clone().unwrap_or_default();
    let spec = ConvolutionSpec::from_fn(c.n, c.length, |j| {
        symbol(c.symbol, c.order, c.time, 2.0 * std::f64::consts::PI * j as f64 / c.length)
    })?;
    let dec = spec.decomposition()?;
    Ok(Problem {
        kind: cfg.problem,
        op: Arc::new(ConvolutionOperator::new(spec)),
        dec,
        truth: smooth_signal(c.n),
        layout: Layout::Signal,
        notes: Vec::new(),
    })
}

fn radon(cfg: &ExperimentConfig) -> Result<Problem> {
    let c = cfg.radon.clone().unwrap_or_default();
    let mut spec = RadonSpec::new(c.pixels, c.angles, c.detectors);
    spec.order = c.order;
    spec.wavelet_levels = c.wavelet_levels;
    spec.angular_size = c.angular_size.unwrap_or(c.angles);
    if let Some(t) = c.taps {
        spec.taps = t;
    }
    let rp = Arc::new(RadonProblem::new(spec)?);
    let (dec, cert) = rp.frame_system()?;
    let (p1, p2) = cert.predicted();
    let notes = vec![format!(
        "stability construction: measured frame bounds ({:e}, {:e}), predicted ({p1:e}, {p2:e})",
        cert.measured.0, cert.measured.1
    )];
    Ok(Problem {
        kind: cfg.problem,
        op: Arc::new(rp.operator().clone()),
        dec,
        truth: rp.shepp_logan(),
        layout: Layout::Radon(rp),
        notes,
    })
}

fn tomography(cfg: &ExperimentConfig, seed: u64) -> Result<Problem> {
    let c = cfg.tomography.clone().unwrap_or_default();
    let spec = TomographySpec {
        grid: c.grid,
        half_width: c.half_width,
        heights: c.heights,
        directions: c.directions,
        aperture: c.aperture,
        cutoff: c.cutoff,
    };
    let tp = TomographyProblem::new(spec)?;
    let truth = tp.band_limited_layers(seed);
    let deficient = tp.blocks.ranks[..tp.spec.truncation()]
        .iter()
        .filter(|&&r| r < tp.spec.layers())
        .count();
    let notes = if deficient > 0 {
        vec![format!("{deficient} frequency blocks are rank deficient; reconstruction is the minimum-coefficient solution")]
    } else {
        Vec::new()
    };
    Ok(Problem {
        kind: cfg.problem,
        op: Arc::new(tp.operator.clone()),
        dec: tp.decomposition.clone(),
        truth,
        layout: Layout::Square(tp.spec.grid),
        notes,
    })
}

fn dense_svd(cfg: &ExperimentConfig, seed: u64) -> Result<Problem> {
    let c = cfg.dense_svd.clone().unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let full = c.rows.min(c.cols);
    let a = match c.rank {
        Some(r) if r < full => random_complex_matrix(&mut rng, c.rows, r) * random_complex_matrix(&mut rng, r, c.cols),
        _ => random_complex_matrix(&mut rng, c.rows, c.cols),
    };
    let op = DenseOperator::euclidean(a);
    let dec = from_svd(&svd_of_dense(&op)?)?;
    let z = ProductVector::single(random_complex_vector(&mut rng, c.rows));
    let truth = op.apply_adjoint(&z)?;
    Ok(Problem { kind: cfg.problem, op: Arc::new(op), dec, truth, layout: Layout::Signal, notes: Vec::new() })
}

fn frame(cfg: &ExperimentConfig, seed: u64) -> Result<Problem> {
    let c = cfg.frame.clone().expect("validated");
    let dim = c.vectors.first().map_or(0, Vec::len);
    let space = match c.weights {
        Some(w) => ComponentSpace::new(w)?,
        None => ComponentSpace::euclidean(dim),
    };
    let f = Arc::new(Frame::from_real(space.clone(), &c.vectors)?);
    let k = f.len();
    let dec = FrameDecomposition::new(
        vec![f.clone()],
        vec![f],
        LambdaFamily::scalar(&vec![C64::new(1.0, 0.0); k]),
    )?;
    let spaces = ProductSpaceSpec::single(space);
    let op = DenseOperator::new(spaces.clone(), spaces, DMatrix::identity(dim, dim))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = ProductVector::single(random_real_vector(&mut rng, dim));
    Ok(Problem { kind: cfg.problem, op: Arc::new(op), dec, truth, layout: Layout::Signal, notes: Vec::new() })
}
