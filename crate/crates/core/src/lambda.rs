//! The coupling matrices `Λ_k` of a frame decomposition, their singular
//! systems and pseudo-inverses, and block partitions of frame indices.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::hilbert::C64;
use crate::linalg::sorted_svd;

pub const DEFAULT_RANK_TOL: f64 = 1e-12;

/// Singular triplets `(μ_j, u_j, v_j)` with `μ_1 ≥ … ≥ μ_r > 0`.
#[derive(Debug, Clone)]
pub struct SingularSystem {
    pub values: Vec<f64>,
    /// `rows × r`, orthonormal columns.
    pub u: DMatrix<C64>,
    /// `cols × r`, orthonormal columns.
    pub v: DMatrix<C64>,
}

impl SingularSystem {
    pub fn rank(&self) -> usize {
        self.values.len()
    }

    fn of(m: &DMatrix<C64>, rank_tol: f64) -> Self {
        let full = sorted_svd(m);
        let top = full.values.first().copied().unwrap_or(0.0);
        let r = full
            .values
            .iter()
            .take_while(|&&s| top > 0.0 && s > rank_tol * top)
            .count();
        Self {
            values: full.values[..r].to_vec(),
            u: full.u.columns(0, r).into_owned(),
            v: full.v.columns(0, r).into_owned(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InjectivityReport {
    pub injective: bool,
    pub first_failing: Option<usize>,
}

/// A finite family of complex matrices with cached singular systems.
#[derive(Debug, Clone)]
pub struct LambdaFamily {
    matrices: Vec<DMatrix<C64>>,
    svds: Vec<SingularSystem>,
    rank_tol: f64,
}

impl LambdaFamily {
    pub fn new(matrices: Vec<DMatrix<C64>>) -> Self {
        Self::with_rank_tol(matrices, DEFAULT_RANK_TOL)
    }

    pub fn with_rank_tol(matrices: Vec<DMatrix<C64>>, rank_tol: f64) -> Self {
        let svds = matrices
            .par_iter()
            .map(|m| SingularSystem::of(m, rank_tol))
            .collect();
        Self { matrices, svds, rank_tol }
    }

    /// `1×1` matrices `(λ_k)`.
    pub fn scalar(values: &[C64]) -> Self {
        Self::new(values.iter().map(|&l| DMatrix::from_element(1, 1, l)).collect())
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn rank_tol(&self) -> f64 {
        self.rank_tol
    }

    pub fn matrix(&self, k: usize) -> &DMatrix<C64> {
        &self.matrices[k]
    }

    pub fn matrices(&self) -> &[DMatrix<C64>] {
        &self.matrices
    }

    pub fn svd_k(&self, k: usize) -> &SingularSystem {
        &self.svds[k]
    }

    pub fn rank(&self, k: usize) -> usize {
        self.svds[k].rank()
    }

    /// `Λ_k h`
    pub fn apply(&self, k: usize, h: &DVector<C64>) -> Result<DVector<C64>> {
        let m = &self.matrices[k];
        if h.len() != m.ncols() {
            return Err(Error::DimensionMismatch {
                context: "lambda apply",
                block: k,
                expected: m.ncols(),
                found: h.len(),
            });
        }
        Ok(m * h)
    }

    /// `Λ_k† w = Σ_j μ_j^{-1} (u_j^H w) v_j`
    pub fn pinv_apply(&self, k: usize, w: &DVector<C64>) -> Result<DVector<C64>> {
        self.filtered_apply(k, w, |s| 1.0 / s)
    }

    /// `Σ_j g(μ_j) (u_j^H w) v_j`
    pub fn filtered_apply<G: Fn(f64) -> f64>(&self, k: usize, w: &DVector<C64>, g: G) -> Result<DVector<C64>> {
        let m = &self.matrices[k];
        if w.len() != m.nrows() {
            return Err(Error::DimensionMismatch {
                context: "lambda pseudo-inverse",
                block: k,
                expected: m.nrows(),
                found: w.len(),
            });
        }
        let svd = &self.svds[k];
        let mut proj = svd.u.ad_mul(w);
        for (c, &s) in proj.iter_mut().zip(&svd.values) {
            *c *= g(s);
        }
        Ok(&svd.v * proj)
    }

    pub fn pinv_matrix(&self, k: usize) -> DMatrix<C64> {
        let svd = &self.svds[k];
        let mut v = svd.v.clone();
        for (j, &s) in svd.values.iter().enumerate() {
            v.column_mut(j).iter_mut().for_each(|z| *z /= s);
        }
        v * svd.u.adjoint()
    }

    /// `I - Σ_j v_j v_j^H`, the orthogonal projector onto `N(Λ_k)`.
    pub fn nullspace_projector(&self, k: usize) -> DMatrix<C64> {
        let cols = self.matrices[k].ncols();
        let v = &self.svds[k].v;
        DMatrix::identity(cols, cols) - v * v.adjoint()
    }

    /// Every `Λ_k` has full column rank.
    pub fn injectivity_check(&self) -> InjectivityReport {
        let first_failing = (0..self.len()).find(|&k| self.rank(k) < self.matrices[k].ncols());
        InjectivityReport { injective: first_failing.is_none(), first_failing }
    }

    pub fn max_singular_value(&self) -> f64 {
        self.svds
            .iter()
            .filter_map(|s| s.values.first().copied())
            .fold(0.0, f64::max)
    }

    pub fn min_singular_value(&self) -> Option<f64> {
        self.svds
            .iter()
            .filter_map(|s| s.values.last().copied())
            .reduce(f64::min)
    }
}

/// Groups of frame indices coupled by one block matrix each.
///
/// Group `k` couples x-frame indices `x_groups[k]` with y-frame indices
/// `y_groups[k]`. Coefficient vectors of a group are flattened with the
/// component index fastest: position `jpos * M + m` on the x-side and
/// `jpos * N + n` on the y-side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    x_groups: Vec<Vec<usize>>,
    y_groups: Vec<Vec<usize>>,
}

impl BlockPartition {
    pub fn new(x_groups: Vec<Vec<usize>>, y_groups: Vec<Vec<usize>>, x_len: usize, y_len: usize) -> Result<Self> {
        if x_groups.len() != y_groups.len() {
            return Err(Error::InvalidPartition(format!(
                "{} x-groups but {} y-groups",
                x_groups.len(),
                y_groups.len()
            )));
        }
        check_cover(&x_groups, x_len, "x")?;
        check_cover(&y_groups, y_len, "y")?;
        Ok(Self { x_groups, y_groups })
    }

    /// One index per group on both sides.
    pub fn singletons(len: usize) -> Self {
        let g: Vec<Vec<usize>> = (0..len).map(|k| vec![k]).collect();
        Self { x_groups: g.clone(), y_groups: g }
    }

    pub fn len(&self) -> usize {
        self.x_groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x_groups.is_empty()
    }

    pub fn x_group(&self, k: usize) -> &[usize] {
        &self.x_groups[k]
    }

    pub fn y_group(&self, k: usize) -> &[usize] {
        &self.y_groups[k]
    }

    pub fn x_len(&self) -> usize {
        self.x_groups.iter().map(Vec::len).sum()
    }

    pub fn y_len(&self) -> usize {
        self.y_groups.iter().map(Vec::len).sum()
    }

    /// Expected shape `(N·|K(Y,k)|, M·|K(X,k)|)` of block `k`.
    pub fn block_shape(&self, k: usize, m: usize, n: usize) -> (usize, usize) {
        (n * self.y_groups[k].len(), m * self.x_groups[k].len())
    }
}

fn check_cover(groups: &[Vec<usize>], len: usize, side: &str) -> Result<()> {
    let mut seen = vec![false; len];
    for g in groups {
        for &i in g {
            if i >= len {
                return Err(Error::InvalidPartition(format!("{side}-index {i} out of range {len}")));
            }
            if seen[i] {
                return Err(Error::InvalidPartition(format!("{side}-index {i} appears twice")));
            }
            seen[i] = true;
        }
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(Error::InvalidPartition(format!("{side}-index {i} not covered")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_complex_matrix, random_complex_vector};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real(rows: usize, cols: usize, v: &[f64]) -> DMatrix<C64> {
        DMatrix::from_row_iterator(rows, cols, v.iter().map(|&x| C64::new(x, 0.0)))
    }

    fn cv(v: &[f64]) -> DVector<C64> {
        DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn svd_examples() {
        let fam = LambdaFamily::new(vec![
            DMatrix::identity(2, 2),
            real(2, 2, &[3.0, 0.0, 0.0, 0.0]),
            real(2, 1, &[1.0, 1.0]),
        ]);
        assert_eq!(fam.svd_k(0).values, vec![1.0, 1.0]);
        assert_eq!(fam.rank(1), 1);
        assert!((fam.svd_k(1).values[0] - 3.0).abs() < 1e-15);
        let s = fam.svd_k(2);
        assert!((s.values[0] - 2f64.sqrt()).abs() < 1e-14);
        let phase = s.v[(0, 0)];
        assert!((phase.norm() - 1.0).abs() < 1e-14);
        let u = &s.u * phase.conj();
        let h = 1.0 / 2f64.sqrt();
        assert!((u - cv(&[h, h])).norm() < 1e-14);
    }

    #[test]
    fn pinv_examples() {
        let fam = LambdaFamily::new(vec![DMatrix::identity(2, 2), real(2, 1, &[1.0, 1.0])]);
        assert!((fam.pinv_apply(0, &cv(&[2.0, 5.0])).unwrap() - cv(&[2.0, 5.0])).norm() < 1e-14);
        assert!((fam.pinv_apply(1, &cv(&[1.0, 1.0])).unwrap() - cv(&[1.0])).norm() < 1e-14);
        assert!((fam.pinv_apply(1, &cv(&[1.0, 0.0])).unwrap() - cv(&[0.5])).norm() < 1e-14);
        assert!(fam.pinv_apply(1, &cv(&[1.0])).is_err());
    }

    #[test]
    fn nullspace_examples() {
        let fam = LambdaFamily::new(vec![
            real(3, 2, &[1.0, 0.0, 0.0, 1.0, 1.0, 1.0]),
            DMatrix::zeros(2, 3),
            real(1, 2, &[1.0, 0.0]),
        ]);
        assert!(fam.nullspace_projector(0).norm() < 1e-14);
        assert!((fam.nullspace_projector(1) - DMatrix::identity(3, 3)).norm() < 1e-14);
        assert!((fam.nullspace_projector(2) - real(2, 2, &[0.0, 0.0, 0.0, 1.0])).norm() < 1e-14);
        assert_eq!(fam.rank(1), 0);
    }

    #[test]
    fn injectivity_examples() {
        let all_id = LambdaFamily::new(vec![DMatrix::identity(2, 2); 3]);
        assert_eq!(all_id.injectivity_check(), InjectivityReport { injective: true, first_failing: None });
        let fam = LambdaFamily::new(vec![DMatrix::identity(2, 2), real(1, 2, &[1.0, 0.0]), DMatrix::identity(2, 2)]);
        assert_eq!(fam.injectivity_check(), InjectivityReport { injective: false, first_failing: Some(1) });
    }

    #[test]
    fn partition_validation() {
        assert!(BlockPartition::new(vec![vec![0, 1], vec![2]], vec![vec![0], vec![1]], 3, 2).is_ok());
        assert!(BlockPartition::new(vec![vec![0, 1], vec![1]], vec![vec![0], vec![1]], 3, 2).is_err());
        assert!(BlockPartition::new(vec![vec![0]], vec![vec![0]], 2, 1).is_err());
        assert!(BlockPartition::new(vec![vec![0]], vec![vec![0], vec![1]], 1, 2).is_err());
        let p = BlockPartition::new(vec![vec![0, 1], vec![2]], vec![vec![0], vec![1]], 3, 2).unwrap();
        assert_eq!(p.block_shape(0, 2, 3), (3, 4));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn moore_penrose_identities(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_complex_matrix(&mut rng, 4, 3);
            let fam = LambdaFamily::new(vec![m.clone()]);
            let p = fam.pinv_matrix(0);
            let tol = 1e-10 * (1.0 + m.norm() + p.norm()).powi(3);
            prop_assert!((&m * &p * &m - &m).norm() < tol);
            prop_assert!((&p * &m * &p - &p).norm() < tol);
            let mp = &m * &p;
            let pm = &p * &m;
            prop_assert!((mp.adjoint() - &mp).norm() < tol);
            prop_assert!((pm.adjoint() - &pm).norm() < tol);
            let s = fam.svd_k(0);
            let uu = s.u.adjoint() * &s.u;
            let vv = s.v.adjoint() * &s.v;
            prop_assert!((uu - DMatrix::<C64>::identity(s.rank(), s.rank())).norm() < 1e-12);
            prop_assert!((vv - DMatrix::<C64>::identity(s.rank(), s.rank())).norm() < 1e-12);
        }

        #[test]
        fn pinv_is_orthogonal_to_nullspace(seed in any::<u64>(), rank in 1usize..3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_complex_matrix(&mut rng, 4, rank) * random_complex_matrix(&mut rng, rank, 3);
            let fam = LambdaFamily::new(vec![m]);
            prop_assert_eq!(fam.rank(0), rank);
            let w = random_complex_vector(&mut rng, 4);
            let h = fam.pinv_apply(0, &w).unwrap();
            let p = fam.nullspace_projector(0);
            prop_assert!((&p * &h).norm() < 1e-10 * (1.0 + h.norm()));
            prop_assert!((&p * &p - &p).norm() < 1e-12);
            prop_assert!((p.adjoint() - &p).norm() < 1e-12);
        }
    }
}
