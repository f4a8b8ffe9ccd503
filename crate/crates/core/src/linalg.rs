//! Dense complex linear-algebra helpers shared by the frame and operator code.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen, SVD};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hilbert::C64;

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let n = h.nrows();
    let sym = hermitize(h);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Smallest and largest eigenvalue of a Hermitian matrix.
pub fn hermitian_extremes(h: DMatrix<C64>) -> (f64, f64) {
    let eig = SymmetricEigen::new(hermitize(h)).eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Extreme values of the Rayleigh quotient `x^H P x / x^H Q x` for Hermitian
/// `P` and Hermitian positive definite `Q`.
pub fn generalized_extremes(p: &DMatrix<C64>, q: &DMatrix<C64>) -> Result<(f64, f64)> {
    let chol = Cholesky::new(hermitize(q.clone()))
        .ok_or_else(|| Error::InvalidParameter("reference form is not positive definite".into()))?;
    let l = chol.l();
    // M = L^{-1} P L^{-H}
    let linv_p = l
        .solve_lower_triangular(p)
        .expect("Cholesky factor is nonsingular");
    let m = l
        .solve_lower_triangular(&linv_p.adjoint())
        .expect("Cholesky factor is nonsingular")
        .adjoint();
    Ok(hermitian_extremes(m))
}

/// Thin SVD with singular values sorted in descending order.
pub struct SortedSvd {
    pub values: Vec<f64>,
    pub u: DMatrix<C64>,
    pub v: DMatrix<C64>,
}

pub fn sorted_svd(m: &DMatrix<C64>) -> SortedSvd {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return SortedSvd {
            values: Vec::new(),
            u: DMatrix::zeros(rows, 0),
            v: DMatrix::zeros(cols, 0),
        };
    }
    let svd = SVD::new(m.clone(), true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let r = svd.singular_values.len();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    SortedSvd {
        values: order.iter().map(|&i| svd.singular_values[i]).collect(),
        u: DMatrix::from_fn(rows, r, |i, j| u[(i, order[j])]),
        v: DMatrix::from_fn(cols, r, |i, j| v_t[(order[j], i)].conj()),
    }
}

/// Symmetrizes round-off: returns `(H + H^H) / 2`.
pub fn hermitize(h: DMatrix<C64>) -> DMatrix<C64> {
    let ha = h.adjoint();
    (h + ha) * C64::new(0.5, 0.0)
}

/// Orthonormal basis (unweighted) of the orthogonal complement of the column
/// span of `q`, which must have orthonormal columns.
pub fn orthogonal_complement(q: &DMatrix<C64>) -> DMatrix<C64> {
    let n = q.nrows();
    let r = q.ncols();
    if r >= n {
        return DMatrix::zeros(n, 0);
    }
    let projector = DMatrix::<C64>::identity(n, n) - q * q.adjoint();
    let (values, vectors) = hermitian_eigen(projector);
    // eigenvalues of a projector cluster at 0 and 1; the complement is the 1-cluster
    let keep: Vec<usize> = (0..n).filter(|&i| values[i] > 0.5).collect();
    DMatrix::from_fn(n, keep.len(), |i, j| vectors[(i, keep[j])])
}

pub fn random_complex_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn random_real_vector<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DVector<C64> {
    DVector::from_fn(n, |_, _| C64::new(rng.sample::<f64, _>(StandardNormal), 0.0))
}

pub fn random_complex_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn vector_norm(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn svd_is_sorted_and_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_complex_matrix(&mut rng, 5, 3);
        let s = sorted_svd(&m);
        assert!(s.values.windows(2).all(|w| w[0] >= w[1]));
        let sigma = DMatrix::from_diagonal(&DVector::from_iterator(
            3,
            s.values.iter().map(|&x| C64::new(x, 0.0)),
        ));
        let rec = &s.u * sigma * s.v.adjoint();
        assert!((rec - m).norm() < 1e-12);
    }

    #[test]
    fn generalized_extremes_of_diagonal_pencil() {
        let p = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(2.0, 0.0), C64::new(9.0, 0.0)]));
        let q = DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(4.0, 0.0), C64::new(3.0, 0.0)]));
        let (lo, hi) = generalized_extremes(&p, &q).unwrap();
        assert!((lo - 0.5).abs() < 1e-14 && (hi - 3.0).abs() < 1e-14);
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_complex_matrix(&mut rng, 6, 2);
        let q = m.qr().q();
        let c = orthogonal_complement(&q);
        assert_eq!(c.ncols(), 4);
        assert!((c.adjoint() * &c - DMatrix::identity(4, 4)).norm() < 1e-12);
        assert!((q.adjoint() * &c).norm() < 1e-12);
    }
}
