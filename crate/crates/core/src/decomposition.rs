//! Frame decompositions `⟨A x, f_k⟩ = Λ_k ⟨x, e_k⟩` and the solvers built on
//! them: the decomposed forward map, the reconstruction `𝒜y`, Picard
//! diagnostics and the residual sandwich.

use std::sync::{Arc, OnceLock};

use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::frame::{DualFrame, Frame};
use crate::hilbert::{norm_unchecked, ProductSpaceSpec, ProductVector, C64};
use crate::lambda::{BlockPartition, LambdaFamily};
use crate::linalg::{random_complex_vector, vector_norm};
use crate::operator::LinearOperator;

/// Partial sums above this are treated as overflow.
const PICARD_OVERFLOW: f64 = 1e300;
/// Relative last-quartile growth above which partial sums are called diverging.
const PICARD_GROWTH: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub max_relation_residual: f64,
    pub probes: usize,
    /// Worst residual per group over all probes.
    pub per_k_worst: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardVerdict {
    Converging,
    Diverging,
}

impl PicardVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            PicardVerdict::Converging => "converging",
            PicardVerdict::Diverging => "diverging",
        }
    }
}

/// Cumulative Picard sums with a growth heuristic. The true condition is
/// asymptotic; the verdict only looks at the last quartile of the sums.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardReport {
    pub partial_sums: Vec<f64>,
    pub verdict: PicardVerdict,
}

#[derive(Debug, Clone)]
pub struct ReconstructionResult {
    pub solution: ProductVector,
    /// `Λ_k† d_k` per group, flattened as in [`BlockPartition`].
    pub coeffs: Vec<DVector<C64>>,
    pub picard_sum: f64,
    pub picard_divergent: bool,
    /// `(sqrt(S/C2), sqrt(S/C1))`, bracketing `‖A x - y‖` for the returned `x`.
    pub residual_bounds: (f64, f64),
    pub truncation: usize,
    /// Norm of the coefficients of groups in `[0.9 K, K)`.
    pub tail_norm: f64,
    components: usize,
}

impl ReconstructionResult {
    /// Coefficients of group `k` belonging to component `m`.
    pub fn coeff(&self, k: usize, m: usize) -> Vec<C64> {
        self.coeffs[k].iter().skip(m).step_by(self.components).copied().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichReport {
    /// `Σ_k ‖Λ_k ⟨x, e_k⟩ - ⟨y, f_k⟩‖²`
    pub s: f64,
    /// `‖A x - y‖²`
    pub residual_sq: f64,
    pub c1: f64,
    pub c2: f64,
    pub lower_ok: bool,
    pub upper_ok: bool,
}

/// Frames of every domain and codomain component, coupled group by group.
#[derive(Debug, Clone)]
pub struct FrameDecomposition {
    domain: ProductSpaceSpec,
    codomain: ProductSpaceSpec,
    x_frames: Vec<Arc<Frame>>,
    y_frames: Vec<Arc<Frame>>,
    lambdas: LambdaFamily,
    partition: BlockPartition,
    truncation: usize,
    x_duals: OnceLock<Vec<Arc<DualFrame>>>,
    y_duals: OnceLock<Vec<Arc<DualFrame>>>,
    verification: Option<VerificationReport>,
}

impl FrameDecomposition {
    /// Scalar form: group `k` couples element `k` of every x-frame with
    /// element `k` of every y-frame through the `N×M` matrix `Λ_k`.
    pub fn new(
        x_frames: Vec<Arc<Frame>>,
        y_frames: Vec<Arc<Frame>>,
        lambdas: LambdaFamily,
    ) -> Result<Self> {
        let len = x_frames.first().map(|f| f.len()).unwrap_or(0);
        Self::with_partition(x_frames, y_frames, lambdas, BlockPartition::singletons(len))
    }

    pub fn with_partition(
        x_frames: Vec<Arc<Frame>>,
        y_frames: Vec<Arc<Frame>>,
        lambdas: LambdaFamily,
        partition: BlockPartition,
    ) -> Result<Self> {
        let domain = ProductSpaceSpec::new(x_frames.iter().map(|f| f.space().clone()).collect())?;
        let codomain = ProductSpaceSpec::new(y_frames.iter().map(|f| f.space().clone()).collect())?;
        let (m, n) = (x_frames.len(), y_frames.len());
        for (i, f) in x_frames.iter().enumerate() {
            if f.len() != partition.x_len() {
                return Err(Error::DimensionMismatch {
                    context: "x-frame length",
                    block: i,
                    expected: partition.x_len(),
                    found: f.len(),
                });
            }
        }
        for (i, f) in y_frames.iter().enumerate() {
            if f.len() != partition.y_len() {
                return Err(Error::DimensionMismatch {
                    context: "y-frame length",
                    block: i,
                    expected: partition.y_len(),
                    found: f.len(),
                });
            }
        }
        if lambdas.len() != partition.len() {
            return Err(Error::BlockCountMismatch {
                context: "lambda family",
                expected: partition.len(),
                found: lambdas.len(),
            });
        }
        for k in 0..partition.len() {
            let (rows, cols) = partition.block_shape(k, m, n);
            let shape = lambdas.matrix(k).shape();
            if shape != (rows, cols) {
                return Err(Error::DimensionMismatch {
                    context: "lambda block shape",
                    block: k,
                    expected: rows * cols,
                    found: shape.0 * shape.1,
                });
            }
        }
        let truncation = partition.len();
        Ok(Self {
            domain,
            codomain,
            x_frames,
            y_frames,
            lambdas,
            partition,
            truncation,
            x_duals: OnceLock::new(),
            y_duals: OnceLock::new(),
            verification: None,
        })
    }

    /// Restricts every k-sum to the first `k` groups.
    pub fn with_truncation(mut self, k: usize) -> Result<Self> {
        if k == 0 || k > self.partition.len() {
            return Err(Error::InvalidParameter(format!(
                "truncation {k} outside 1..={}",
                self.partition.len()
            )));
        }
        self.truncation = k;
        Ok(self)
    }

    /// Installs precomputed duals (e.g. from the cache).
    pub fn with_duals(self, x_duals: Vec<Arc<DualFrame>>, y_duals: Option<Vec<Arc<DualFrame>>>) -> Result<Self> {
        check_duals(&self.x_frames, &x_duals)?;
        let _ = self.x_duals.set(x_duals);
        if let Some(y) = y_duals {
            check_duals(&self.y_frames, &y)?;
            let _ = self.y_duals.set(y);
        }
        Ok(self)
    }

    /// Runs [`verify_assumption`] and stores the report.
    pub fn verified(mut self, op: &dyn LinearOperator, probes: usize, seed: u64) -> Result<Self> {
        self.verification = Some(verify_assumption(op, &self, probes, seed)?);
        Ok(self)
    }

    pub fn domain(&self) -> &ProductSpaceSpec {
        &self.domain
    }

    pub fn codomain(&self) -> &ProductSpaceSpec {
        &self.codomain
    }

    pub fn x_frames(&self) -> &[Arc<Frame>] {
        &self.x_frames
    }

    pub fn y_frames(&self) -> &[Arc<Frame>] {
        &self.y_frames
    }

    pub fn lambdas(&self) -> &LambdaFamily {
        &self.lambdas
    }

    pub fn partition(&self) -> &BlockPartition {
        &self.partition
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn verification(&self) -> Option<&VerificationReport> {
        self.verification.as_ref()
    }

    /// Exact duals of the x-frames, computed once (frames shared between
    /// components are solved once).
    pub fn x_duals(&self) -> &[Arc<DualFrame>] {
        self.x_duals.get_or_init(|| shared_duals(&self.x_frames))
    }

    pub fn y_duals(&self) -> &[Arc<DualFrame>] {
        self.y_duals.get_or_init(|| shared_duals(&self.y_frames))
    }

    /// `(C1, C2)`: smallest lower and largest upper y-frame bound.
    pub fn y_bounds(&self) -> (f64, f64) {
        component_bounds(&self.y_frames)
    }

    /// `(B1, B2)` over the x-frames.
    pub fn x_bounds(&self) -> (f64, f64) {
        component_bounds(&self.x_frames)
    }

    /// Per-group x-coefficients `(⟨x_m, e_j^m⟩)` flattened as `jpos * M + m`.
    pub fn x_coefficients(&self, x: &ProductVector) -> Result<Vec<DVector<C64>>> {
        self.domain.check("x coefficients", x)?;
        let analyses = analyze_all(&self.x_frames, x);
        Ok(gather(&analyses, |k| self.partition.x_group(k), self.partition.len()))
    }

    /// Per-group y-coefficients `(⟨y_n, f_j^n⟩)` flattened as `jpos * N + n`.
    pub fn y_coefficients(&self, y: &ProductVector) -> Result<Vec<DVector<C64>>> {
        self.codomain.check("y coefficients", y)?;
        let analyses = analyze_all(&self.y_frames, y);
        Ok(gather(&analyses, |k| self.partition.y_group(k), self.partition.len()))
    }

    /// `Σ_k` group coefficients synthesized against the x-duals.
    pub fn synthesize_x(&self, coeffs: &[DVector<C64>]) -> ProductVector {
        let m = self.x_frames.len();
        let len = self.partition.x_len();
        let mut per_component = vec![DVector::<C64>::zeros(len); m];
        for (k, c) in coeffs.iter().enumerate() {
            scatter(&mut per_component, self.partition.x_group(k), c);
        }
        let duals = self.x_duals();
        ProductVector::new(
            per_component
                .par_iter()
                .zip(duals.par_iter())
                .map(|(a, d)| d.synthesize(a).expect("coefficient length"))
                .collect(),
        )
    }

    fn synthesize_y(&self, coeffs: &[DVector<C64>]) -> ProductVector {
        let n = self.y_frames.len();
        let len = self.partition.y_len();
        let mut per_component = vec![DVector::<C64>::zeros(len); n];
        for (k, c) in coeffs.iter().enumerate() {
            scatter(&mut per_component, self.partition.y_group(k), c);
        }
        let duals = self.y_duals();
        ProductVector::new(
            per_component
                .par_iter()
                .zip(duals.par_iter())
                .map(|(a, d)| d.synthesize(a).expect("coefficient length"))
                .collect(),
        )
    }

    /// `Σ_k Σ_m λ_k ⟨x_m, e_k^m⟩ f̃_k^n` over the first `truncation` groups.
    pub fn apply_decomposed(&self, x: &ProductVector) -> Result<ProductVector> {
        let h = self.x_coefficients(x)?;
        let w: Vec<DVector<C64>> = (0..self.truncation)
            .into_par_iter()
            .map(|k| self.lambdas.matrix(k) * &h[k])
            .collect();
        Ok(self.synthesize_y(&w))
    }

    /// `𝒜y = Σ_k Σ_m (Λ_k† ⟨y, f_k⟩)_m ẽ_k^m`.
    pub fn reconstruct(&self, y: &ProductVector) -> Result<ReconstructionResult> {
        self.reconstruct_filtered(y, |s| 1.0 / s)
    }

    /// Same as [`reconstruct`](Self::reconstruct) with `1/μ` replaced by `g(μ)`.
    pub fn reconstruct_filtered<G>(&self, y: &ProductVector, g: G) -> Result<ReconstructionResult>
    where
        G: Fn(f64) -> f64 + Sync,
    {
        let d = self.y_coefficients(y)?;
        let kk = self.truncation;
        let coeffs: Vec<DVector<C64>> = (0..kk)
            .into_par_iter()
            .map(|k| self.lambdas.filtered_apply(k, &d[k], &g).expect("group shapes validated"))
            .collect();
        let solution = self.synthesize_x(&coeffs);

        let sums = self.picard_sums(&d);
        let picard_sum = sums.last().copied().unwrap_or(0.0);
        let s: f64 = (0..kk)
            .into_par_iter()
            .map(|k| vector_norm(&(self.lambdas.matrix(k) * &coeffs[k] - &d[k])).powi(2))
            .collect::<Vec<_>>()
            .iter()
            .sum();
        let (c1, c2) = self.y_bounds();
        let tail_start = (kk * 9) / 10;
        let tail_norm = coeffs[tail_start..]
            .iter()
            .map(|c| vector_norm(c).powi(2))
            .sum::<f64>()
            .sqrt();
        Ok(ReconstructionResult {
            solution,
            coeffs,
            picard_sum,
            picard_divergent: !picard_sum.is_finite() || picard_sum > PICARD_OVERFLOW,
            residual_bounds: ((s / c2).sqrt(), (s / c1).sqrt()),
            truncation: kk,
            tail_norm,
            components: self.x_frames.len(),
        })
    }

    fn picard_sums(&self, d: &[DVector<C64>]) -> Vec<f64> {
        let terms: Vec<f64> = (0..self.truncation)
            .into_par_iter()
            .map(|k| {
                let svd = self.lambdas.svd_k(k);
                let proj = svd.u.ad_mul(&d[k]);
                proj.iter().zip(&svd.values).map(|(c, s)| c.norm_sqr() / (s * s)).sum()
            })
            .collect();
        let mut acc = 0.0;
        terms
            .iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect()
    }

    /// Cumulative `Σ_{k≤κ} Σ_j μ_{k,j}^{-2} |u_{k,j}^H ⟨y, f_k⟩|²`.
    pub fn picard_diagnostic(&self, y: &ProductVector) -> Result<PicardReport> {
        let d = self.y_coefficients(y)?;
        let partial_sums = self.picard_sums(&d);
        let verdict = picard_verdict(&partial_sums);
        Ok(PicardReport { partial_sums, verdict })
    }

    /// Compares `S = Σ_k ‖Λ_k ⟨x, e_k⟩ - ⟨y, f_k⟩‖²` with `C1 ‖Ax - y‖²` and
    /// `C2 ‖Ax - y‖²`.
    pub fn residual_sandwich(
        &self,
        op: &dyn LinearOperator,
        x: &ProductVector,
        y: &ProductVector,
    ) -> Result<SandwichReport> {
        let h = self.x_coefficients(x)?;
        let d = self.y_coefficients(y)?;
        let s: f64 = (0..self.partition.len())
            .map(|k| vector_norm(&(self.lambdas.matrix(k) * &h[k] - &d[k])).powi(2))
            .sum();
        let r = op.apply(x)?.sub(y);
        let residual_sq = norm_unchecked(&self.codomain, &r).powi(2);
        let (c1, c2) = self.y_bounds();
        let slack = 1e-10;
        let floor = 1e-24 * (1.0 + residual_sq);
        Ok(SandwichReport {
            s,
            residual_sq,
            c1,
            c2,
            lower_ok: c1 * residual_sq <= s * (1.0 + slack) + floor,
            upper_ok: s <= c2 * residual_sq * (1.0 + slack) + floor,
        })
    }

    /// `x ∈ N(A)` iff `Λ_k ⟨x, e_k⟩ = 0` for every `k`; tested with tolerance `tol`.
    pub fn nullspace_membership(&self, x: &ProductVector, tol: f64) -> Result<bool> {
        let h = self.x_coefficients(x)?;
        Ok((0..self.partition.len()).all(|k| vector_norm(&(self.lambdas.matrix(k) * &h[k])) <= tol))
    }
}

fn check_duals(frames: &[Arc<Frame>], duals: &[Arc<DualFrame>]) -> Result<()> {
    if frames.len() != duals.len() {
        return Err(Error::BlockCountMismatch {
            context: "dual frames",
            expected: frames.len(),
            found: duals.len(),
        });
    }
    for (i, (f, d)) in frames.iter().zip(duals).enumerate() {
        if f.len() != d.len() || f.space() != d.space() {
            return Err(Error::DimensionMismatch {
                context: "dual frame",
                block: i,
                expected: f.len(),
                found: d.len(),
            });
        }
    }
    Ok(())
}

fn shared_duals(frames: &[Arc<Frame>]) -> Vec<Arc<DualFrame>> {
    let mut out: Vec<Arc<DualFrame>> = Vec::with_capacity(frames.len());
    for (i, f) in frames.iter().enumerate() {
        if let Some(j) = (0..i).find(|&j| Arc::ptr_eq(&frames[j], f)) {
            out.push(out[j].clone());
        } else {
            out.push(Arc::new(f.dual_exact()));
        }
    }
    out
}

fn component_bounds(frames: &[Arc<Frame>]) -> (f64, f64) {
    frames.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), f| {
        let (b1, b2) = f.bounds();
        (lo.min(b1), hi.max(b2))
    })
}

fn analyze_all(frames: &[Arc<Frame>], v: &ProductVector) -> Vec<DVector<C64>> {
    frames
        .par_iter()
        .zip(v.blocks.par_iter())
        .map(|(f, b)| f.analyze(b).expect("checked against the product space"))
        .collect()
}

fn gather<'a, F>(analyses: &[DVector<C64>], group: F, groups: usize) -> Vec<DVector<C64>>
where
    F: Fn(usize) -> &'a [usize],
{
    let comps = analyses.len();
    (0..groups)
        .map(|k| {
            let idx = group(k);
            DVector::from_fn(idx.len() * comps, |p, _| analyses[p % comps][idx[p / comps]])
        })
        .collect()
}

fn scatter(per_component: &mut [DVector<C64>], idx: &[usize], c: &DVector<C64>) {
    let comps = per_component.len();
    for (p, v) in c.iter().enumerate() {
        per_component[p % comps][idx[p / comps]] = *v;
    }
}

/// Heuristic verdict: least-squares slope of the last quartile, times the
/// quartile length, relative to the final sum.
pub fn picard_verdict(partial_sums: &[f64]) -> PicardVerdict {
    let Some(&last) = partial_sums.last() else {
        return PicardVerdict::Converging;
    };
    if !last.is_finite() || last > PICARD_OVERFLOW {
        return PicardVerdict::Diverging;
    }
    if last <= 0.0 {
        return PicardVerdict::Converging;
    }
    let n = partial_sums.len();
    let q = (n / 4).max(2).min(n);
    if q < 2 {
        return PicardVerdict::Converging;
    }
    let tail = &partial_sums[n - q..];
    let mean_t = (q as f64 - 1.0) / 2.0;
    let mean_s = tail.iter().sum::<f64>() / q as f64;
    let (mut num, mut den) = (0.0, 0.0);
    for (i, s) in tail.iter().enumerate() {
        let dt = i as f64 - mean_t;
        num += dt * (s - mean_s);
        den += dt * dt;
    }
    let growth = num / den * q as f64 / last;
    if growth > PICARD_GROWTH {
        PicardVerdict::Diverging
    } else {
        PicardVerdict::Converging
    }
}

/// For random `x`, the largest group residual
/// `‖⟨A x, f_k⟩ - Λ_k ⟨x, e_k⟩‖ / (1 + ‖x‖)`.
pub fn verify_assumption(
    op: &dyn LinearOperator,
    dec: &FrameDecomposition,
    probes: usize,
    seed: u64,
) -> Result<VerificationReport> {
    if probes == 0 {
        return Err(Error::InvalidParameter("verification needs at least one probe".into()));
    }
    if op.domain() != dec.domain() || op.codomain() != dec.codomain() {
        return Err(Error::InvalidParameter(
            "operator spaces differ from the decomposition's frame spaces".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let groups = dec.partition().len();
    let mut per_k_worst = vec![0.0f64; groups];
    for _ in 0..probes {
        let x = dec.domain().split(&random_complex_vector(&mut rng, dec.domain().total_dim()))?;
        let scale = 1.0 + norm_unchecked(dec.domain(), &x);
        let h = dec.x_coefficients(&x)?;
        let d = dec.y_coefficients(&op.forward(&x))?;
        let res: Vec<f64> = (0..groups)
            .into_par_iter()
            .map(|k| vector_norm(&(&d[k] - dec.lambdas().matrix(k) * &h[k])) / scale)
            .collect();
        for (w, r) in per_k_worst.iter_mut().zip(res) {
            *w = w.max(r);
        }
    }
    Ok(VerificationReport {
        max_relation_residual: per_k_worst.iter().copied().fold(0.0, f64::max),
        probes,
        per_k_worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::ComponentSpace;
    use crate::operator::DenseOperator;
    use nalgebra::DMatrix;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn diagonal_setup(lambdas: &[f64]) -> (FrameDecomposition, DenseOperator) {
        let n = lambdas.len();
        let space = ComponentSpace::euclidean(n);
        let onb = Arc::new(Frame::orthonormal_basis(space));
        let fam = LambdaFamily::scalar(&lambdas.iter().map(|&l| c(l)).collect::<Vec<_>>());
        let dec = FrameDecomposition::new(vec![onb.clone()], vec![onb], fam).unwrap();
        let op = DenseOperator::euclidean(DMatrix::from_diagonal(&DVector::from_iterator(
            n,
            lambdas.iter().map(|&l| c(l)),
        )));
        (dec, op)
    }

    #[test]
    fn diagonal_reconstruction_divides() {
        let (dec, op) = diagonal_setup(&[2.0, 4.0, 0.5]);
        let dec = dec.verified(&op, 5, 1).unwrap();
        assert!(dec.verification().unwrap().max_relation_residual < 1e-15);
        let y = ProductVector::from_real(&[vec![1.0, 2.0, 3.0]]);
        let r = dec.reconstruct(&y).unwrap();
        let expected = DVector::from_vec(vec![c(0.5), c(0.5), c(6.0)]);
        assert!((r.solution.block(0) - expected).norm() < 1e-14);
        assert_eq!(r.truncation, 3);
        assert!(!r.picard_divergent);
        assert!(r.residual_bounds.1 < 1e-14);
    }

    #[test]
    fn decomposed_apply_and_zero() {
        let (dec, op) = diagonal_setup(&[2.0, 4.0, 0.5]);
        let zero = dec.domain().zeros();
        assert_eq!(dec.apply_decomposed(&zero).unwrap(), dec.codomain().zeros());
        let x = ProductVector::from_real(&[vec![1.0, -1.0, 2.0]]);
        let ax = op.apply(&x).unwrap();
        assert!((dec.apply_decomposed(&x).unwrap().block(0) - ax.block(0)).norm() < 1e-14);
    }

    #[test]
    fn corrupted_lambda_shows_in_verification() {
        let (_, op) = diagonal_setup(&[2.0, 4.0, 0.5]);
        let space = ComponentSpace::euclidean(3);
        let onb = Arc::new(Frame::orthonormal_basis(space));
        let fam = LambdaFamily::scalar(&[c(2.0), c(4.0 + 1e-3), c(0.5)]);
        let dec = FrameDecomposition::new(vec![onb.clone()], vec![onb], fam).unwrap();
        let report = verify_assumption(&op, &dec, 20, 3).unwrap();
        assert!(report.max_relation_residual > 1e-4 && report.max_relation_residual < 1e-3);
        let worst = report.per_k_worst.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
        assert_eq!(worst.0, 1);
    }

    #[test]
    fn picard_examples() {
        let kk = 10_000;
        let lam: Vec<f64> = (1..=kk).map(|k| 1.0 / k as f64).collect();
        let (dec, _) = diagonal_setup(&lam);
        let zero = dec.picard_diagnostic(&dec.codomain().zeros()).unwrap();
        assert!(zero.partial_sums.iter().all(|&s| s == 0.0));
        assert_eq!(zero.verdict, PicardVerdict::Converging);

        let harmonic = ProductVector::from_real(std::slice::from_ref(&lam));
        let rep = dec.picard_diagnostic(&harmonic).unwrap();
        assert!((rep.partial_sums[99] - 100.0).abs() < 1e-9);
        assert_eq!(rep.verdict, PicardVerdict::Diverging);

        let sq = ProductVector::from_real(&[lam.iter().map(|l| l * l).collect()]);
        let rep = dec.picard_diagnostic(&sq).unwrap();
        let limit = std::f64::consts::PI.powi(2) / 6.0;
        assert!((rep.partial_sums.last().unwrap() - limit).abs() < 2e-4);
        assert_eq!(rep.verdict, PicardVerdict::Converging);
    }

    #[test]
    fn picard_verdict_edge_cases() {
        assert_eq!(picard_verdict(&[]), PicardVerdict::Converging);
        assert_eq!(picard_verdict(&[1.0, f64::INFINITY]), PicardVerdict::Diverging);
        assert_eq!(picard_verdict(&[1.0, 2.0, 1e301]), PicardVerdict::Diverging);
        assert_eq!(picard_verdict(&[1.0; 40]), PicardVerdict::Converging);
    }

    #[test]
    fn sandwich_on_exact_solution_and_tight_frames() {
        let (dec, op) = diagonal_setup(&[2.0, 4.0, 0.5]);
        let x = ProductVector::from_real(&[vec![1.0, -1.0, 2.0]]);
        let y = op.apply(&x).unwrap();
        let rep = dec.residual_sandwich(&op, &x, &y).unwrap();
        assert!(rep.s < 1e-28 && rep.lower_ok && rep.upper_ok);
        let y2 = ProductVector::from_real(&[vec![0.3, 0.1, -2.0]]);
        let rep = dec.residual_sandwich(&op, &x, &y2).unwrap();
        assert!((rep.s - rep.residual_sq).abs() <= 1e-10 * rep.s);
    }

    #[test]
    fn nullspace_membership_examples() {
        let (dec, op) = diagonal_setup(&[2.0, 0.0, 0.5]);
        assert!(dec.nullspace_membership(&dec.domain().zeros(), 1e-12).unwrap());
        let v = ProductVector::from_real(&[vec![0.0, 3.0, 0.0]]);
        assert!(dec.nullspace_membership(&v, 1e-12).unwrap());
        assert!(op.apply(&v).unwrap().block(0).norm() < 1e-12);
        let (inj, _) = diagonal_setup(&[2.0, 1.0, 0.5]);
        assert!(!inj.nullspace_membership(&v, 1e-12).unwrap());
    }

    #[test]
    fn block_partition_flattening() {
        // two x components, one y component; group 0 couples x-indices {0,1}
        // with y-index {0}, group 1 couples x-index {2} with y-indices {1,2}
        let xs = Arc::new(Frame::orthonormal_basis(ComponentSpace::euclidean(3)));
        let ys = Arc::new(Frame::orthonormal_basis(ComponentSpace::euclidean(3)));
        let part = BlockPartition::new(vec![vec![0, 1], vec![2]], vec![vec![0], vec![1, 2]], 3, 3).unwrap();
        let b0 = DMatrix::from_row_slice(1, 4, &[c(1.0), c(2.0), c(3.0), c(4.0)]);
        let b1 = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(1.0)]);
        let dec = FrameDecomposition::with_partition(
            vec![xs.clone(), xs],
            vec![ys],
            LambdaFamily::new(vec![b0, b1]),
            part,
        )
        .unwrap();
        let x = ProductVector::from_real(&[vec![1.0, 10.0, 100.0], vec![2.0, 20.0, 200.0]]);
        let h = dec.x_coefficients(&x).unwrap();
        assert_eq!(h[0].as_slice(), &[c(1.0), c(2.0), c(10.0), c(20.0)]);
        assert_eq!(h[1].as_slice(), &[c(100.0), c(200.0)]);
        let y = dec.apply_decomposed(&x).unwrap();
        let expected = [1.0 + 4.0 + 30.0 + 80.0, 100.0, 200.0];
        for (a, b) in y.block(0).iter().zip(expected) {
            assert!((a - c(b)).norm() < 1e-12);
        }
    }

    #[test]
    fn shape_validation() {
        let xs = Arc::new(Frame::orthonormal_basis(ComponentSpace::euclidean(2)));
        let ys = Arc::new(Frame::orthonormal_basis(ComponentSpace::euclidean(3)));
        let r = FrameDecomposition::new(vec![xs.clone()], vec![ys], LambdaFamily::scalar(&[c(1.0); 2]));
        assert!(r.is_err());
        let r = FrameDecomposition::new(vec![xs.clone()], vec![xs.clone()], LambdaFamily::scalar(&[c(1.0); 3]));
        assert!(matches!(r, Err(Error::BlockCountMismatch { .. })));
        let dec = FrameDecomposition::new(vec![xs.clone()], vec![xs], LambdaFamily::scalar(&[c(1.0); 2])).unwrap();
        assert!(dec.clone().with_truncation(3).is_err());
        assert_eq!(dec.with_truncation(1).unwrap().truncation(), 1);
    }
}
