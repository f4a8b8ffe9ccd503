//! Builders of frame decompositions: singular systems as frames, the
//! stability construction `e_k = (1/conj λ_k) A* f_k`, and the smoothing
//! route `e_k = A* L f_k` with its reconstruction `𝒜̄`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::decomposition::{verify_assumption, FrameDecomposition, ReconstructionResult};
use crate::error::{Error, Result};
use crate::frame::{certify_bounds, Frame};
use crate::hilbert::{ComponentSpace, ProductSpaceSpec, ProductVector, C64};
use crate::lambda::LambdaFamily;
use crate::linalg::{generalized_extremes, orthogonal_complement, sorted_svd};
use crate::operator::{Composed, DenseOperator, LinearOperator};
use crate::sobolev::{SobolevMultiplier, SobolevScaleSpec};

const ORTHONORMAL_TOL: f64 = 1e-10;
const SVD_RANK_TOL: f64 = 1e-12;

/// Weighted singular system of an operator between two component spaces:
/// `A v_k = σ_k u_k`, with `v`, `u` orthonormal in the weighted inner products.
#[derive(Debug, Clone)]
pub struct OperatorSvd {
    pub domain: ComponentSpace,
    pub codomain: ComponentSpace,
    pub values: Vec<f64>,
    pub v: DMatrix<C64>,
    pub u: DMatrix<C64>,
    /// Orthonormal basis of `N(A)`.
    pub null_x: DMatrix<C64>,
    /// Orthonormal basis of `N(A*)`.
    pub null_y: DMatrix<C64>,
}

fn single_component<'a>(spec: &'a ProductSpaceSpec, what: &str) -> Result<&'a ComponentSpace> {
    if spec.len() != 1 {
        return Err(Error::InvalidParameter(format!(
            "{what} must have a single component, found {}",
            spec.len()
        )));
    }
    Ok(spec.component(0))
}

fn scale_rows(m: &DMatrix<C64>, s: impl Fn(usize) -> f64) -> DMatrix<C64> {
    let mut out = m.clone();
    for i in 0..out.nrows() {
        let f = s(i);
        out.row_mut(i).iter_mut().for_each(|z| *z *= f);
    }
    out
}

/// Singular system of a dense operator in the weighted geometry, computed
/// from `W_Y^{1/2} A W_X^{-1/2}`.
pub fn svd_of_dense(op: &DenseOperator) -> Result<OperatorSvd> {
    let x = single_component(op.domain(), "domain")?.clone();
    let y = single_component(op.codomain(), "codomain")?.clone();
    let wx = x.weights().to_vec();
    let wy = y.weights().to_vec();
    let mut a_hat = scale_rows(op.matrix(), |i| wy[i].sqrt());
    for (j, w) in wx.iter().enumerate() {
        let s = 1.0 / w.sqrt();
        a_hat.column_mut(j).iter_mut().for_each(|z| *z *= s);
    }
    let svd = sorted_svd(&a_hat);
    let top = svd.values.first().copied().unwrap_or(0.0);
    let r = svd.values.iter().take_while(|&&s| top > 0.0 && s > SVD_RANK_TOL * top).count();
    let v_hat = svd.v.columns(0, r).into_owned();
    let u_hat = svd.u.columns(0, r).into_owned();
    let nx_hat = orthogonal_complement(&v_hat);
    let ny_hat = orthogonal_complement(&u_hat);
    let unweigh_x = |m: &DMatrix<C64>| scale_rows(m, |i| 1.0 / wx[i].sqrt());
    let unweigh_y = |m: &DMatrix<C64>| scale_rows(m, |i| 1.0 / wy[i].sqrt());
    Ok(OperatorSvd {
        values: svd.values[..r].to_vec(),
        v: unweigh_x(&v_hat),
        u: unweigh_y(&u_hat),
        null_x: unweigh_x(&nx_hat),
        null_y: unweigh_y(&ny_hat),
        domain: x,
        codomain: y,
    })
}

fn check_orthonormal(space: &ComponentSpace, m: &DMatrix<C64>, what: &str) -> Result<()> {
    let w = DMatrix::from_diagonal(&DVector::from_iterator(
        space.dim(),
        space.weights().iter().map(|&w| C64::new(w, 0.0)),
    ));
    let g = m.adjoint() * w * m;
    let dev = (g - DMatrix::<C64>::identity(m.ncols(), m.ncols())).camax();
    if dev > ORTHONORMAL_TOL {
        return Err(Error::NonOrthonormal(format!("{what}: Gram deviation {dev:e}")));
    }
    Ok(())
}

/// Frame decomposition from a singular system: the x-frame is `{v_k}` plus a
/// basis of `N(A)`, the y-frame `{u_k}` plus a basis of `N(A*)`, and
/// `λ_k = σ_k` (zero on the null-space parts). Shorter sides are padded with
/// zero elements so both frames share the index set; frames stay tight with
/// bound 1.
pub fn from_svd(svd: &OperatorSvd) -> Result<FrameDecomposition> {
    let r = svd.values.len();
    if svd.v.ncols() != r || svd.u.ncols() != r {
        return Err(Error::InvalidParameter("singular vector count differs from singular value count".into()));
    }
    if svd.values.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidParameter("singular values must be positive".into()));
    }
    let x_basis = DMatrix::from_columns(
        &svd.v.column_iter().chain(svd.null_x.column_iter()).collect::<Vec<_>>(),
    );
    let y_basis = DMatrix::from_columns(
        &svd.u.column_iter().chain(svd.null_y.column_iter()).collect::<Vec<_>>(),
    );
    check_orthonormal(&svd.domain, &x_basis, "x singular vectors and null space")?;
    check_orthonormal(&svd.codomain, &y_basis, "y singular vectors and null space")?;
    if x_basis.ncols() != svd.domain.dim() || y_basis.ncols() != svd.codomain.dim() {
        return Err(Error::InvalidParameter(
            "singular vectors and null-space bases must span the spaces".into(),
        ));
    }
    let k = x_basis.ncols().max(y_basis.ncols());
    let pad = |m: DMatrix<C64>| m.resize_horizontally(k, C64::new(0.0, 0.0));
    let x_frame = Frame::new(svd.domain.clone(), pad(x_basis))?;
    let y_frame = Frame::new(svd.codomain.clone(), pad(y_basis))?;
    let lambdas: Vec<C64> = (0..k)
        .map(|i| C64::new(svd.values.get(i).copied().unwrap_or(0.0), 0.0))
        .collect();
    FrameDecomposition::new(
        vec![Arc::new(x_frame)],
        vec![Arc::new(y_frame)],
        LambdaFamily::scalar(&lambdas),
    )
}

/// Measured constants of the stability construction.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityCertificate {
    /// `c1 ‖x‖ ≤ ‖A x‖_Z ≤ c2 ‖x‖`
    pub c1: f64,
    pub c2: f64,
    /// `a1 ‖y‖_Z² ≤ Σ α_k² |⟨y, f_k⟩|² ≤ a2 ‖y‖_Z²`
    pub a1: f64,
    pub a2: f64,
    pub alphas: Vec<f64>,
    pub lambdas: Vec<C64>,
    /// `b1 ≤ α_k |λ_k| ≤ b2`
    pub b1: f64,
    pub b2: f64,
    /// Certified bounds of `{e_k}`.
    pub measured: (f64, f64),
}

impl StabilityCertificate {
    /// `(a1 (c1/b2)², a2 (c2/b1)²)`
    pub fn predicted(&self) -> (f64, f64) {
        (self.a1 * (self.c1 / self.b2).powi(2), self.a2 * (self.c2 / self.b1).powi(2))
    }

    /// Measured bounds inside the predicted interval widened by `slack`.
    pub fn within_prediction(&self, slack: f64) -> bool {
        let (p1, p2) = self.predicted();
        self.measured.0 >= p1 * (1.0 - slack) && self.measured.1 <= p2 * (1.0 + slack)
    }
}

/// Columns `A* g_k` for the columns `g_k` of `g`.
fn adjoint_columns(op: &dyn LinearOperator, g: &DMatrix<C64>) -> DMatrix<C64> {
    let cols: Vec<DVector<C64>> = (0..g.ncols())
        .into_par_iter()
        .map(|k| op.adjoint(&ProductVector::single(g.column(k).into_owned())).blocks.remove(0))
        .collect();
    DMatrix::from_columns(&cols)
}

fn certify_or_fail(space: &ComponentSpace, e: &DMatrix<C64>) -> Result<Frame> {
    match certify_bounds(e, space) {
        Ok(_) => Frame::new(space.clone(), e.clone()),
        Err(Error::NotAFrame { smallest_eigenvalue }) => Err(Error::StabilityConstructionFailed {
            smallest_singular_value: smallest_eigenvalue.max(0.0).sqrt(),
        }),
        Err(e) => Err(e),
    }
}

fn diag(w: &[f64]) -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_iterator(w.len(), w.iter().map(|&v| C64::new(v, 0.0))))
}

/// Builds `e_k = (1/conj λ_k) A* f_k` (default `λ_k = 1/α_k`), certifies the
/// family as a frame and measures the constants of the construction on the
/// discretization. `scale` defines the `Z`-norm on the codomain grid.
pub fn stability_construct(
    op: &dyn LinearOperator,
    y_frame: Arc<Frame>,
    scale: &SobolevScaleSpec,
    alphas: &[f64],
    lambdas: Option<&[C64]>,
) -> Result<(FrameDecomposition, StabilityCertificate)> {
    let x_space = single_component(op.domain(), "domain")?.clone();
    let y_space = single_component(op.codomain(), "codomain")?.clone();
    if y_frame.space() != &y_space {
        return Err(Error::InvalidParameter("y-frame lives in a different space than the codomain".into()));
    }
    let k = y_frame.len();
    if alphas.len() != k {
        return Err(Error::DimensionMismatch { context: "alphas", block: 0, expected: k, found: alphas.len() });
    }
    if alphas.iter().any(|a| *a == 0.0 || !a.is_finite()) {
        return Err(Error::InvalidParameter("alphas must be finite and nonzero".into()));
    }
    let lambdas: Vec<C64> = match lambdas {
        Some(l) if l.len() != k => {
            return Err(Error::DimensionMismatch { context: "lambdas", block: 0, expected: k, found: l.len() })
        }
        Some(l) => l.to_vec(),
        None => alphas.iter().map(|a| C64::new(1.0 / a, 0.0)).collect(),
    };
    if lambdas.iter().any(|l| l.norm() == 0.0) {
        return Err(Error::InvalidParameter("lambdas must be nonzero".into()));
    }
    if scale.grid.len() != y_space.dim() {
        return Err(Error::DimensionMismatch {
            context: "Sobolev grid",
            block: 0,
            expected: y_space.dim(),
            found: scale.grid.len(),
        });
    }

    let f = y_frame.matrix().into_owned();
    let mut e = adjoint_columns(op, &f);
    for (j, l) in lambdas.iter().enumerate() {
        let s = C64::new(1.0, 0.0) / l.conj();
        e.column_mut(j).iter_mut().for_each(|z| *z *= s);
    }
    let x_frame = certify_or_fail(&x_space, &e)?;

    let a = op.to_dense();
    let g_z = scale.gram()?;
    let wx = diag(x_space.weights());
    let wy = diag(y_space.weights());
    let (c1_sq, c2_sq) = generalized_extremes(&(a.adjoint() * &g_z * &a), &wx)?;
    let fw = wy.clone() * &f;
    let alpha_sq: Vec<f64> = alphas.iter().map(|a| a * a).collect();
    let norm_form = &fw * diag(&alpha_sq) * fw.adjoint();
    let (a1, a2) = generalized_extremes(&norm_form, &g_z)?;
    let products: Vec<f64> = alphas.iter().zip(&lambdas).map(|(a, l)| a.abs() * l.norm()).collect();
    let b1 = products.iter().copied().fold(f64::INFINITY, f64::min);
    let b2 = products.iter().copied().fold(0.0, f64::max);

    let certificate = StabilityCertificate {
        c1: c1_sq.max(0.0).sqrt(),
        c2: c2_sq.max(0.0).sqrt(),
        a1,
        a2,
        alphas: alphas.to_vec(),
        lambdas: lambdas.clone(),
        b1,
        b2,
        measured: x_frame.bounds(),
    };
    let dec = FrameDecomposition::new(vec![Arc::new(x_frame)], vec![y_frame], LambdaFamily::scalar(&lambdas))?;
    Ok((dec, certificate))
}

/// Decomposition of `L A` obtained from `e_k = A* L f_k`, with `Λ_k = 1`.
pub struct LConstruction {
    pub decomposition: FrameDecomposition,
    pub scale: SobolevScaleSpec,
    /// The composed operator `L A`.
    pub la: Composed,
    /// `c1 ‖x‖ ≤ ‖A x‖_Z ≤ c2 ‖x‖`
    pub c1: f64,
    pub c2: f64,
    /// Bounds of the y-frame.
    pub c_frame: (f64, f64),
    pub relation_residual: f64,
}

impl LConstruction {
    /// `(c1² C1, c2² C2)`
    pub fn predicted(&self) -> (f64, f64) {
        (self.c1 * self.c1 * self.c_frame.0, self.c2 * self.c2 * self.c_frame.1)
    }

    pub fn within_prediction(&self, slack: f64) -> bool {
        let (p1, p2) = self.predicted();
        let (b1, b2) = self.decomposition.x_bounds();
        b1 >= p1 * (1.0 - slack) && b2 <= p2 * (1.0 + slack)
    }
}

/// Builds `e_k = A* L f_k` with `L` the multiplier of `scale`.
pub fn l_operator_construct(
    op: Arc<dyn LinearOperator>,
    y_frame: Arc<Frame>,
    scale: &SobolevScaleSpec,
) -> Result<LConstruction> {
    let x_space = single_component(op.domain(), "domain")?.clone();
    let y_space = single_component(op.codomain(), "codomain")?.clone();
    if y_frame.space() != &y_space || scale.grid.space() != y_space {
        return Err(Error::InvalidParameter("y-frame, Sobolev grid and codomain must share one space".into()));
    }
    let l = SobolevMultiplier::new(scale.clone())?;
    let la = Composed::new(op.clone(), Arc::new(l))?;
    let e = adjoint_columns(&la, &y_frame.matrix());
    let x_frame = certify_or_fail(&x_space, &e)?;

    let a = op.to_dense();
    let g_z = scale.gram()?;
    let (c1_sq, c2_sq) = generalized_extremes(&(a.adjoint() * &g_z * &a), &diag(x_space.weights()))?;
    let k = y_frame.len();
    let c_frame = y_frame.bounds();
    let dec = FrameDecomposition::new(
        vec![Arc::new(x_frame)],
        vec![y_frame],
        LambdaFamily::scalar(&vec![C64::new(1.0, 0.0); k]),
    )?;
    let relation_residual = verify_assumption(&la, &dec, 4, 0x1a)?.max_relation_residual;
    Ok(LConstruction {
        decomposition: dec,
        scale: scale.clone(),
        la,
        c1: c1_sq.max(0.0).sqrt(),
        c2: c2_sq.max(0.0).sqrt(),
        c_frame,
        relation_residual,
    })
}

#[derive(Debug, Clone)]
pub struct AbarResult {
    pub result: ReconstructionResult,
    /// `‖L y‖² / ‖y‖²` exceeded half the mean squared multiplier.
    pub rough: bool,
    pub presmoothed: bool,
    /// `sqrt(C2 / B1) ‖L y‖` for the data actually used.
    pub norm_bound: f64,
    pub norm_ok: bool,
}

/// `𝒜̄ y = Σ_k ⟨L y, f_k⟩ ẽ_k`. Rough data (large `Z`-norm relative to the
/// `Y`-norm) is flagged; with `presmooth` it is replaced by `L^{-1} y` first.
pub fn reconstruct_abar(c: &LConstruction, y: &ProductVector, presmooth: bool) -> Result<AbarResult> {
    c.decomposition.codomain().check("data", y)?;
    let space = c.decomposition.codomain().component(0);
    let y0 = y.block(0);
    let ly = c.scale.apply_l(y0)?;
    let ny = space.norm(y0)?;
    let nly = space.norm(&ly)?;
    let m = c.scale.multiplier(c.scale.order)?;
    let mean_sq = m.iter().map(|v| v * v).sum::<f64>() / m.len() as f64;
    let rough = ny > 0.0 && (nly / ny).powi(2) > 0.5 * mean_sq;
    // presmoothing replaces y by U y = L^{-1} y, whose image under L is y itself
    let presmoothed = rough && presmooth;
    let l_data = if presmoothed { y0.clone() } else { ly };
    let result = c.decomposition.reconstruct(&ProductVector::single(l_data.clone()))?;
    let (_, c2) = c.decomposition.y_bounds();
    let (b1, _) = c.decomposition.x_bounds();
    let norm_bound = (c2 / b1).sqrt() * space.norm(&l_data)?;
    let sol_norm = c.decomposition.domain().component(0).norm(result.solution.block(0))?;
    Ok(AbarResult {
        result,
        rough,
        presmoothed,
        norm_bound,
        norm_ok: sol_norm <= norm_bound * (1.0 + 1e-10) + 1e-14,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_complex_matrix, random_complex_vector, vector_norm};
    use crate::sobolev::PeriodicGrid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn real(rows: usize, cols: usize, v: &[f64]) -> DMatrix<C64> {
        DMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| c(x)))
    }

    /// Minimum-norm least-squares solution by complete orthogonal
    /// decomposition, independent of the SVD path.
    fn qr_min_norm(a: &DMatrix<C64>, b: &DVector<C64>) -> DVector<C64> {
        let (m, n) = a.shape();
        if m >= n {
            let qr = a.clone().qr();
            let q = qr.q();
            let r = qr.r();
            r.solve_upper_triangular(&(q.adjoint() * b)).unwrap()
        } else {
            let qr = a.adjoint().qr();
            let q = qr.q();
            let r = qr.r();
            let z = r.adjoint().solve_lower_triangular(b).unwrap();
            q * z
        }
    }

    #[test]
    fn diagonal_svd_gives_canonical_frames() {
        let op = DenseOperator::euclidean(real(2, 2, &[2.0, 0.0, 0.0, 1.0]));
        let svd = svd_of_dense(&op).unwrap();
        assert_eq!(svd.values, vec![2.0, 1.0]);
        let dec = from_svd(&svd).unwrap();
        for k in 0..2 {
            let e = dec.x_frames()[0].element(k);
            assert!((e[k].norm() - 1.0).abs() < 1e-14 && e[1 - k].norm() < 1e-14);
        }
        assert!(dec.x_frames()[0].is_tight() && dec.y_frames()[0].is_tight());
        assert!((dec.x_frames()[0].bounds().0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn nilpotent_svd_and_null_spaces() {
        let op = DenseOperator::euclidean(real(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        let svd = svd_of_dense(&op).unwrap();
        assert_eq!(svd.values.len(), 1);
        assert!((svd.values[0] - 1.0).abs() < 1e-14);
        assert!((svd.v[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((svd.u[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((svd.null_x[(0, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((svd.null_y[(1, 0)].norm() - 1.0).abs() < 1e-14);
        let dec = from_svd(&svd).unwrap();
        assert_eq!(dec.lambdas().matrix(1)[(0, 0)], c(0.0));
    }

    #[test]
    fn non_orthonormal_input_is_rejected() {
        let op = DenseOperator::euclidean(real(2, 2, &[2.0, 0.0, 0.0, 1.0]));
        let mut svd = svd_of_dense(&op).unwrap();
        svd.v[(0, 0)] = c(1.1);
        assert!(matches!(from_svd(&svd), Err(Error::NonOrthonormal(_))));
    }

    #[test]
    fn weighted_svd_reconstruct_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = ComponentSpace::new(vec![0.5, 1.0, 2.0, 1.5]).unwrap();
        let y = ComponentSpace::new(vec![1.0, 0.3, 0.7, 2.0, 1.1, 0.9]).unwrap();
        let a = random_complex_matrix(&mut rng, 6, 4);
        let op = DenseOperator::new(ProductSpaceSpec::single(x.clone()), ProductSpaceSpec::single(y.clone()), a.clone()).unwrap();
        let dec = from_svd(&svd_of_dense(&op).unwrap()).unwrap().verified(&op, 5, 9).unwrap();
        assert!(dec.verification().unwrap().max_relation_residual < 1e-10);
        // weighted least squares: minimize ‖W_Y^{1/2}(A x - y)‖ with min ‖W_X^{1/2} x‖
        let sy = DMatrix::from_diagonal(&DVector::from_iterator(6, y.weights().iter().map(|w| c(w.sqrt()))));
        let sx_inv = DMatrix::from_diagonal(&DVector::from_iterator(4, x.weights().iter().map(|w| c(1.0 / w.sqrt()))));
        for _ in 0..5 {
            let yv = random_complex_vector(&mut rng, 6);
            let z = qr_min_norm(&(&sy * &a * &sx_inv), &(&sy * &yv));
            let oracle = &sx_inv * z;
            let r = dec.reconstruct(&ProductVector::single(yv)).unwrap();
            assert!(vector_norm(&(r.solution.block(0) - &oracle)) <= 1e-8 * vector_norm(&oracle));
        }
    }

    #[test]
    fn wide_matrix_pads_the_x_frame() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a = random_complex_matrix(&mut rng, 3, 5);
        let op = DenseOperator::euclidean(a.clone());
        let dec = from_svd(&svd_of_dense(&op).unwrap()).unwrap();
        assert_eq!(dec.x_frames()[0].len(), 5);
        assert_eq!(dec.y_frames()[0].len(), 5);
        let yv = random_complex_vector(&mut rng, 3);
        let r = dec.reconstruct(&ProductVector::single(yv.clone())).unwrap();
        let oracle = qr_min_norm(&a, &yv);
        assert!(vector_norm(&(r.solution.block(0) - &oracle)) <= 1e-8 * vector_norm(&oracle));
    }

    fn circulant(symbol: &[f64]) -> (DenseOperator, Arc<Frame>, SobolevScaleSpec) {
        let n = symbol.len();
        let grid = PeriodicGrid::line(n, 1.0).unwrap();
        let space = grid.space();
        let fourier = DMatrix::from_fn(n, n, |p, k| {
            C64::from_polar(1.0, 2.0 * std::f64::consts::PI * (k * p) as f64 / n as f64)
        });
        let frame = Frame::new(space.clone(), fourier.clone()).unwrap();
        let d = DMatrix::from_diagonal(&DVector::from_iterator(n, symbol.iter().map(|&s| c(s))));
        let a = &fourier * d * fourier.adjoint() / c(n as f64);
        let spec = ProductSpaceSpec::single(space);
        let op = DenseOperator::new(spec.clone(), spec, a).unwrap();
        (op, Arc::new(frame), SobolevScaleSpec::new(0.0, grid).unwrap())
    }

    #[test]
    fn invertible_case_reduces_to_adjoint_frame() {
        let symbol = [2.0, 1.5, 0.5, 1.0, 0.8, 1.2];
        let (op, f, scale) = circulant(&symbol);
        let (dec, cert) = stability_construct(&op, f.clone(), &scale, &[1.0; 6], None).unwrap();
        let report = verify_assumption(&op, &dec, 10, 1).unwrap();
        assert!(report.max_relation_residual < 1e-10);
        let (b1, b2) = cert.measured;
        assert!((b1 - 0.25).abs() < 1e-10 && (b2 - 4.0).abs() < 1e-10);
        assert!(cert.within_prediction(0.05));
        assert!((cert.b1 - 1.0).abs() < 1e-15 && (cert.b2 - 1.0).abs() < 1e-15);
        let e0 = op.apply_adjoint(&ProductVector::single(f.element(0))).unwrap();
        assert!((dec.x_frames()[0].element(0) - e0.block(0)).norm() < 1e-12);
    }

    #[test]
    fn zero_operator_fails_construction() {
        let (op, f, scale) = circulant(&[0.0; 4]);
        let err = stability_construct(&op, f.clone(), &scale, &[1.0; 4], None).unwrap_err();
        assert!(err.to_string().contains("not a frame"));
        let err = l_operator_construct(Arc::new(op), f, &scale).err().unwrap();
        assert!(err.to_string().contains("not a frame"));
    }

    #[test]
    fn smoothing_operator_l_route() {
        let n = 16;
        let symbol: Vec<f64> = (0..n)
            .map(|j| {
                let xi = 2.0 * std::f64::consts::PI * crate::fourier::signed_frequency(j, n) as f64;
                (1.0 + xi * xi).powf(-0.5)
            })
            .collect();
        let (op, f, _) = circulant(&symbol);
        let scale = SobolevScaleSpec::new(1.0, PeriodicGrid::line(n, 1.0).unwrap()).unwrap();
        let op: Arc<dyn LinearOperator> = Arc::new(op);
        let lc = l_operator_construct(op.clone(), f, &scale).unwrap();
        assert!(lc.relation_residual < 1e-10);
        let (b1, b2) = lc.decomposition.x_bounds();
        assert!((b1 - 1.0).abs() < 1e-9 && (b2 - 1.0).abs() < 1e-9);
        assert!(lc.within_prediction(0.05));

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x0 = ProductVector::single(random_complex_vector(&mut rng, n));
        let y = op.apply(&x0).unwrap();
        let r = reconstruct_abar(&lc, &y, false).unwrap();
        assert!(r.norm_ok);
        assert!((r.result.solution.block(0) - x0.block(0)).norm() < 1e-8 * x0.block(0).norm());
        let zero = reconstruct_abar(&lc, &op.codomain().zeros(), false).unwrap();
        assert!(zero.result.solution.block(0).norm() == 0.0);
    }

    #[test]
    fn l_equal_identity_matches_stability_construction() {
        let symbol = [2.0, 1.5, 0.5, 1.0];
        let (op, f, scale) = circulant(&symbol);
        let (dec, _) = stability_construct(&op, f.clone(), &scale, &[1.0; 4], None).unwrap();
        let lc = l_operator_construct(Arc::new(op), f, &scale).unwrap();
        let a = dec.x_frames()[0].matrix().into_owned();
        let b = lc.decomposition.x_frames()[0].matrix().into_owned();
        assert!((a - b).norm() < 1e-12);
    }
}
