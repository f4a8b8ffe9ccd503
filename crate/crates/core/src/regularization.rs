//! Filtered reconstructions `x_α^δ` from noisy data, the continuity bound
//! as a runtime check, and a discrepancy rule for choosing `α`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::decomposition::{FrameDecomposition, ReconstructionResult};
use crate::error::{Error, Result};
use crate::hilbert::{norm, ProductVector, C64};
use crate::linalg::random_complex_vector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    Tikhonov,
    Truncated,
    Landweber,
}

impl FilterKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "tikhonov" => Ok(Self::Tikhonov),
            "truncated" => Ok(Self::Truncated),
            "landweber" => Ok(Self::Landweber),
            other => Err(Error::InvalidParameter(format!("unknown filter {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Tikhonov => "tikhonov",
            Self::Truncated => "truncated",
            Self::Landweber => "landweber",
        }
    }

    /// Whether a larger parameter means more smoothing.
    fn larger_smooths_more(self) -> bool {
        !matches!(self, Self::Landweber)
    }
}

/// A filter `g_α`; for Landweber `alpha` is the iteration count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterSpec {
    pub kind: FilterKind,
    pub alpha: f64,
}

impl FilterSpec {
    pub fn new(kind: FilterKind, alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("filter parameter must be finite and nonnegative, got {alpha}")));
        }
        Ok(Self { kind, alpha })
    }

    pub fn tikhonov(alpha: f64) -> Self {
        Self { kind: FilterKind::Tikhonov, alpha }
    }

    pub fn truncated(threshold: f64) -> Self {
        Self { kind: FilterKind::Truncated, alpha: threshold }
    }

    pub fn landweber(iterations: usize) -> Self {
        Self { kind: FilterKind::Landweber, alpha: iterations as f64 }
    }

    /// `g_α(s)`; `mu_max` fixes the Landweber step `ω = 1/μ_max²`.
    pub fn eval(&self, s: f64, mu_max: f64) -> f64 {
        match self.kind {
            FilterKind::Tikhonov => s / (s * s + self.alpha),
            FilterKind::Truncated => {
                if s >= self.alpha {
                    1.0 / s
                } else {
                    0.0
                }
            }
            FilterKind::Landweber => {
                // Σ_{i<N} (1 - ωs²)^i ωs = (1 - (1 - ωs²)^N) / s
                let q = (s / mu_max).powi(2).min(1.0);
                -(self.alpha.round() * (-q).ln_1p()).exp_m1() / s
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoisyData {
    pub y_delta: ProductVector,
    pub delta: f64,
}

impl NoisyData {
    pub fn new(y_delta: ProductVector, delta: f64) -> Result<Self> {
        if !(delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("noise level must be nonnegative, got {delta}")));
        }
        Ok(Self { y_delta, delta })
    }

    /// `y + η` with Gaussian `η` rescaled so that `‖η‖ = relative · ‖y‖` exactly.
    pub fn perturb(dec: &FrameDecomposition, y: &ProductVector, relative: f64, seed: u64) -> Result<Self> {
        let space = dec.codomain();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eta = ProductVector::new(
            space.components().iter().map(|c| random_complex_vector(&mut rng, c.dim())).collect(),
        );
        let delta = relative * norm(space, y)?;
        let en = norm(space, &eta)?;
        let eta = eta.scale(C64::new(if en > 0.0 { delta / en } else { 0.0 }, 0.0));
        Self::new(y.add(&eta), delta)
    }
}

fn mu_max(dec: &FrameDecomposition) -> f64 {
    dec.lambdas().max_singular_value()
}

/// `x_α^δ = Σ_k Σ_j g_α(μ_{k,j}) (u_{k,j}^H ⟨y^δ, f_k⟩) v_{k,j}` synthesized against the dual frames.
pub fn filtered_reconstruct(dec: &FrameDecomposition, data: &NoisyData, filter: &FilterSpec) -> Result<ReconstructionResult> {
    let m = mu_max(dec);
    dec.reconstruct_filtered(&data.y_delta, |s| filter.eval(s, m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// `‖x_α - x_α^δ‖² ≤ (C2/B1) max_k Σ_j g_α(μ_{k,j})² ‖y - y^δ‖²`.
pub fn stability_bound_check(
    dec: &FrameDecomposition,
    filter: &FilterSpec,
    y: &ProductVector,
    y_delta: &ProductVector,
) -> Result<StabilityCheck> {
    let m = mu_max(dec);
    let g = |s: f64| filter.eval(s, m);
    let clean = dec.reconstruct_filtered(y, g)?;
    let noisy = dec.reconstruct_filtered(y_delta, g)?;
    let lhs = norm(dec.domain(), &clean.solution.sub(&noisy.solution))?.powi(2);
    let gmax = (0..dec.truncation())
        .map(|k| dec.lambdas().svd_k(k).values.iter().map(|&s| g(s).powi(2)).sum::<f64>())
        .fold(0.0, f64::max);
    let (_, c2) = dec.y_bounds();
    let (b1, _) = dec.x_bounds();
    let rhs = c2 / b1 * gmax * norm(dec.codomain(), &y.sub(y_delta))?.powi(2);
    Ok(StabilityCheck { lhs, rhs, ok: lhs <= rhs * (1.0 + 1e-10) })
}

/// Ascending parameter grid: Tikhonov in `[1e-10, 1]·μ_max²`, truncation
/// thresholds in `[1e-5, 1]·μ_max`, Landweber counts in `[1, 1e6]`.
pub fn alpha_grid(kind: FilterKind, mu_max: f64, points: usize) -> Vec<f64> {
    let logspace = |lo: f64, hi: f64| -> Vec<f64> {
        if points == 1 {
            return vec![hi];
        }
        (0..points)
            .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / (points - 1) as f64))
            .collect()
    };
    match kind {
        FilterKind::Tikhonov => logspace(-10.0, 0.0).into_iter().map(|a| a * mu_max * mu_max).collect(),
        FilterKind::Truncated => logspace(-5.0, 0.0).into_iter().map(|a| a * mu_max).collect(),
        FilterKind::Landweber => {
            let mut n: Vec<f64> = logspace(0.0, 6.0).into_iter().map(f64::round).collect();
            n.dedup();
            n
        }
    }
}

pub fn default_alpha_grid(dec: &FrameDecomposition, kind: FilterKind) -> Vec<f64> {
    alpha_grid(kind, mu_max(dec), 40)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub alpha: f64,
    /// `‖A x_α^δ - y^δ‖` through the decomposition.
    pub residual: f64,
    /// `‖x_α^δ - x†‖` when a reference solution is supplied.
    pub error: Option<f64>,
}

/// Filtered reconstructions over a parameter grid, in parallel.
pub fn sweep(
    dec: &FrameDecomposition,
    data: &NoisyData,
    kind: FilterKind,
    grid: &[f64],
    truth: Option<&ProductVector>,
) -> Result<Vec<SweepPoint>> {
    grid.par_iter()
        .map(|&alpha| {
            let x = filtered_reconstruct(dec, data, &FilterSpec::new(kind, alpha)?)?.solution;
            let residual = norm(dec.codomain(), &dec.apply_decomposed(&x)?.sub(&data.y_delta))?;
            let error = truth.map(|t| norm(dec.domain(), &x.sub(t))).transpose()?;
            Ok(SweepPoint { alpha, residual, error })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyChoice {
    pub alpha: f64,
    pub residual: f64,
    /// `false` when no grid point met `τδ`; the least smoothing point is returned.
    pub attained: bool,
    pub warnings: Vec<String>,
}

/// Walks the grid from most to least smoothing and stops at the first
/// parameter with `‖A x_α^δ - y^δ‖ ≤ τδ`.
pub fn choose_alpha_discrepancy(
    dec: &FrameDecomposition,
    data: &NoisyData,
    kind: FilterKind,
    tau: f64,
) -> Result<DiscrepancyChoice> {
    choose_alpha_on_grid(dec, data, kind, tau, &default_alpha_grid(dec, kind))
}

pub fn choose_alpha_on_grid(
    dec: &FrameDecomposition,
    data: &NoisyData,
    kind: FilterKind,
    tau: f64,
    grid: &[f64],
) -> Result<DiscrepancyChoice> {
    if data.delta == 0.0 {
        return Err(Error::NoiselessDiscrepancy);
    }
    if !(tau > 1.0) {
        return Err(Error::InvalidParameter(format!("discrepancy factor must exceed 1, got {tau}")));
    }
    if grid.is_empty() {
        return Err(Error::InvalidParameter("empty parameter grid".into()));
    }
    let mut ordered = grid.to_vec();
    ordered.sort_by(f64::total_cmp);
    if kind.larger_smooths_more() {
        ordered.reverse();
    }
    let mut last = None;
    for alpha in ordered {
        let x = filtered_reconstruct(dec, data, &FilterSpec::new(kind, alpha)?)?.solution;
        let residual = norm(dec.codomain(), &dec.apply_decomposed(&x)?.sub(&data.y_delta))?;
        if residual <= tau * data.delta {
            return Ok(DiscrepancyChoice { alpha, residual, attained: true, warnings: Vec::new() });
        }
        last = Some((alpha, residual));
    }
    let (alpha, residual) = last.expect("nonempty grid");
    Ok(DiscrepancyChoice {
        alpha,
        residual,
        attained: false,
        warnings: vec![format!("discrepancy level {} not reached; smallest residual {residual}", tau * data.delta)],
    })
}
