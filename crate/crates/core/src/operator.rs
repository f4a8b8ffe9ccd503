//! Bounded linear operators between product spaces.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hilbert::{inner_product, norm, ProductSpaceSpec, ProductVector, C64};
use crate::linalg::random_complex_vector;

/// `A : X → Y` together with its Hilbert-space adjoint `A* : Y → X`.
///
/// Implementors provide the raw maps; [`LinearOperator::apply`] and
/// [`LinearOperator::apply_adjoint`] validate shapes first.
pub trait LinearOperator: Send + Sync {
    fn domain(&self) -> &ProductSpaceSpec;
    fn codomain(&self) -> &ProductSpaceSpec;
    fn forward(&self, x: &ProductVector) -> ProductVector;
    fn adjoint(&self, y: &ProductVector) -> ProductVector;

    fn apply(&self, x: &ProductVector) -> Result<ProductVector> {
        self.domain().check("operator input", x)?;
        Ok(self.forward(x))
    }

    fn apply_adjoint(&self, y: &ProductVector) -> Result<ProductVector> {
        self.codomain().check("adjoint input", y)?;
        Ok(self.adjoint(y))
    }

    /// Matrix of the forward map on flattened coordinates.
    fn to_dense(&self) -> DMatrix<C64> {
        let n = self.domain().total_dim();
        let mut cols = Vec::with_capacity(n);
        for i in 0..n {
            let mut e = DVector::zeros(n);
            e[i] = C64::new(1.0, 0.0);
            let x = self.domain().split(&e).expect("unit vector has domain length");
            cols.push(self.forward(&x).flatten());
        }
        DMatrix::from_columns(&cols)
    }
}

/// Largest `|⟨Ax, y⟩ - ⟨x, A*y⟩| / (‖A‖-free scale)` over random probes,
/// relative to `‖Ax‖‖y‖ + ‖x‖‖A*y‖`.
pub fn adjoint_consistency(op: &dyn LinearOperator, probes: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let x = op
            .domain()
            .split(&random_complex_vector(&mut rng, op.domain().total_dim()))
            .expect("probe length");
        let y = op
            .codomain()
            .split(&random_complex_vector(&mut rng, op.codomain().total_dim()))
            .expect("probe length");
        let ax = op.forward(&x);
        let aty = op.adjoint(&y);
        let lhs = inner_product(op.codomain(), &ax, &y).unwrap();
        let rhs = inner_product(op.domain(), &x, &aty).unwrap();
        let scale = norm(op.codomain(), &ax).unwrap() * norm(op.codomain(), &y).unwrap()
            + norm(op.domain(), &x).unwrap() * norm(op.domain(), &aty).unwrap();
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    worst
}

/// Matrix operator on flattened coordinates; the adjoint is taken with
/// respect to the weighted inner products: `A* = W_X^{-1} A^H W_Y`.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    domain: ProductSpaceSpec,
    codomain: ProductSpaceSpec,
    matrix: DMatrix<C64>,
    adjoint: DMatrix<C64>,
}

impl DenseOperator {
    pub fn new(domain: ProductSpaceSpec, codomain: ProductSpaceSpec, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != codomain.total_dim() || matrix.ncols() != domain.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "dense operator shape",
                block: 0,
                expected: codomain.total_dim() * domain.total_dim(),
                found: matrix.nrows() * matrix.ncols(),
            });
        }
        let wx = domain.flat_weights();
        let wy = codomain.flat_weights();
        let adjoint = DMatrix::from_fn(matrix.ncols(), matrix.nrows(), |i, j| {
            matrix[(j, i)].conj() * wy[j] / wx[i]
        });
        Ok(Self { domain, codomain, matrix, adjoint })
    }

    /// Matrix between Euclidean spaces `C^cols → C^rows`.
    pub fn euclidean(matrix: DMatrix<C64>) -> Self {
        let domain = ProductSpaceSpec::single(crate::hilbert::ComponentSpace::euclidean(matrix.ncols()));
        let codomain = ProductSpaceSpec::single(crate::hilbert::ComponentSpace::euclidean(matrix.nrows()));
        Self::new(domain, codomain, matrix).expect("shapes match by construction")
    }

    pub fn from_operator(op: &dyn LinearOperator) -> Self {
        Self::new(op.domain().clone(), op.codomain().clone(), op.to_dense()).expect("dense shape")
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn adjoint_matrix(&self) -> &DMatrix<C64> {
        &self.adjoint
    }
}

impl LinearOperator for DenseOperator {
    fn domain(&self) -> &ProductSpaceSpec {
        &self.domain
    }

    fn codomain(&self) -> &ProductSpaceSpec {
        &self.codomain
    }

    fn forward(&self, x: &ProductVector) -> ProductVector {
        self.codomain.split(&(&self.matrix * x.flatten())).expect("codomain length")
    }

    fn adjoint(&self, y: &ProductVector) -> ProductVector {
        self.domain.split(&(&self.adjoint * y.flatten())).expect("domain length")
    }

    fn to_dense(&self) -> DMatrix<C64> {
        self.matrix.clone()
    }
}

/// `second ∘ first`.
#[derive(Clone)]
pub struct Composed {
    first: Arc<dyn LinearOperator>,
    second: Arc<dyn LinearOperator>,
}

impl Composed {
    pub fn new(first: Arc<dyn LinearOperator>, second: Arc<dyn LinearOperator>) -> Result<Self> {
        if first.codomain() != second.domain() {
            return Err(Error::InvalidParameter(
                "composition: codomain of the first operator differs from domain of the second".into(),
            ));
        }
        Ok(Self { first, second })
    }
}

impl LinearOperator for Composed {
    fn domain(&self) -> &ProductSpaceSpec {
        self.first.domain()
    }

    fn codomain(&self) -> &ProductSpaceSpec {
        self.second.codomain()
    }

    fn forward(&self, x: &ProductVector) -> ProductVector {
        self.second.forward(&self.first.forward(x))
    }

    fn adjoint(&self, y: &ProductVector) -> ProductVector {
        self.first.adjoint(&self.second.adjoint(y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::ComponentSpace;
    use crate::linalg::random_complex_matrix;

    fn weighted_dense(seed: u64) -> DenseOperator {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = ProductSpaceSpec::new(vec![
            ComponentSpace::new(vec![0.5, 2.0]).unwrap(),
            ComponentSpace::new(vec![1.5]).unwrap(),
        ])
        .unwrap();
        let y = ProductSpaceSpec::single(ComponentSpace::new(vec![0.25, 1.0, 3.0, 0.7]).unwrap());
        DenseOperator::new(x, y, random_complex_matrix(&mut rng, 4, 3)).unwrap()
    }

    #[test]
    fn dense_adjoint_is_consistent() {
        let op = weighted_dense(1);
        assert!(adjoint_consistency(&op, 50, 2) < 1e-13);
    }

    #[test]
    fn to_dense_roundtrip() {
        let op = weighted_dense(3);
        let composed = Composed::new(
            Arc::new(op.clone()),
            Arc::new(DenseOperator::new(op.codomain().clone(), op.codomain().clone(), DMatrix::identity(4, 4)).unwrap()),
        )
        .unwrap();
        assert!((composed.to_dense() - op.matrix()).norm() < 1e-14);
        assert!(adjoint_consistency(&composed, 20, 4) < 1e-13);
    }

    #[test]
    fn shape_errors() {
        let op = weighted_dense(5);
        let bad = ProductVector::single(DVector::zeros(3));
        assert!(matches!(op.apply(&bad), Err(Error::BlockCountMismatch { .. })));
        let bad_len = ProductVector::new(vec![DVector::zeros(2), DVector::zeros(2)]);
        assert!(matches!(op.apply(&bad_len), Err(Error::DimensionMismatch { block: 1, .. })));
        let x = op.domain().clone();
        assert!(DenseOperator::new(x.clone(), x, DMatrix::zeros(2, 2)).is_err());
    }
}
