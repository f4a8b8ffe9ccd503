//! Finite-dimensional component spaces and their products.
//!
//! A [`ComponentSpace`] is `C^dim` with the weighted inner product
//! `⟨u, v⟩ = Σ_i w_i u_i conj(v_i)`, linear in the first argument. Product
//! spaces carry the canonic inner product, the sum over components.

use nalgebra::DVector;
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

#[derive(Debug, Clone, PartialEq)]
pub struct ComponentSpace {
    weights: Vec<f64>,
}

impl ComponentSpace {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("space must have positive dimension".into()));
        }
        if let Some((i, w)) = weights
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w > 0.0))
        {
            return Err(Error::InvalidWeights(format!("weight {i} is {w}, must be positive")));
        }
        Ok(Self { weights })
    }

    /// Unit weights: the plain Euclidean inner product.
    pub fn euclidean(dim: usize) -> Self {
        Self::new(vec![1.0; dim]).expect("dimension must be positive")
    }

    /// `n` uniform samples of an interval of length `length`; each sample
    /// carries the quadrature weight `length / n`.
    pub fn quadrature(n: usize, length: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidWeights("space must have positive dimension".into()));
        }
        Self::new(vec![length / n as f64; n])
    }

    /// Uniform weight `weight` on `dim` coordinates.
    pub fn uniform(dim: usize, weight: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidWeights("space must have positive dimension".into()));
        }
        Self::new(vec![weight; dim])
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn check(&self, context: &'static str, block: usize, v: &DVector<C64>) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                context,
                block,
                expected: self.dim(),
                found: v.len(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, u: &DVector<C64>, v: &DVector<C64>) -> Result<C64> {
        self.check("inner product", 0, u)?;
        self.check("inner product", 0, v)?;
        Ok(self.inner_unchecked(u, v))
    }

    pub(crate) fn inner_unchecked(&self, u: &DVector<C64>, v: &DVector<C64>) -> C64 {
        self.weights
            .iter()
            .zip(u.iter().zip(v.iter()))
            .map(|(w, (a, b))| a * b.conj() * *w)
            .sum()
    }

    pub fn norm(&self, u: &DVector<C64>) -> Result<f64> {
        self.check("norm", 0, u)?;
        Ok(self.norm_unchecked(u))
    }

    pub(crate) fn norm_unchecked(&self, u: &DVector<C64>) -> f64 {
        self.weights
            .iter()
            .zip(u.iter())
            .map(|(w, a)| w * a.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn zeros(&self) -> DVector<C64> {
        DVector::zeros(self.dim())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpaceSpec {
    components: Vec<ComponentSpace>,
}

impl ProductSpaceSpec {
    pub fn new(components: Vec<ComponentSpace>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidParameter("product space needs at least one component".into()));
        }
        Ok(Self { components })
    }

    pub fn single(space: ComponentSpace) -> Self {
        Self { components: vec![space] }
    }

    pub fn repeated(space: ComponentSpace, count: usize) -> Result<Self> {
        Self::new(vec![space; count])
    }

    pub fn components(&self) -> &[ComponentSpace] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &ComponentSpace {
        &self.components[i]
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.components.iter().map(ComponentSpace::dim).sum()
    }

    pub fn check(&self, context: &'static str, v: &ProductVector) -> Result<()> {
        if v.blocks.len() != self.components.len() {
            return Err(Error::BlockCountMismatch {
                context,
                expected: self.components.len(),
                found: v.blocks.len(),
            });
        }
        for (i, (space, block)) in self.components.iter().zip(&v.blocks).enumerate() {
            space.check(context, i, block)?;
        }
        Ok(())
    }

    pub fn zeros(&self) -> ProductVector {
        ProductVector::new(self.components.iter().map(ComponentSpace::zeros).collect())
    }

    /// Splits a flat coordinate vector into blocks conforming to this space.
    pub fn split(&self, flat: &DVector<C64>) -> Result<ProductVector> {
        if flat.len() != self.total_dim() {
            return Err(Error::DimensionMismatch {
                context: "split",
                block: 0,
                expected: self.total_dim(),
                found: flat.len(),
            });
        }
        let mut offset = 0;
        let blocks = self
            .components
            .iter()
            .map(|c| {
                let b = flat.rows(offset, c.dim()).into_owned();
                offset += c.dim();
                b
            })
            .collect();
        Ok(ProductVector::new(blocks))
    }

    /// Flat vector of all quadrature weights, block after block.
    pub fn flat_weights(&self) -> Vec<f64> {
        self.components.iter().flat_map(|c| c.weights().iter().copied()).collect()
    }
}

/// Canonic inner product `Σ_m ⟨u_m, v_m⟩` of the product space.
pub fn inner_product(space: &ProductSpaceSpec, u: &ProductVector, v: &ProductVector) -> Result<C64> {
    space.check("inner product", u)?;
    space.check("inner product", v)?;
    Ok(space
        .components
        .iter()
        .zip(u.blocks.iter().zip(&v.blocks))
        .map(|(c, (a, b))| c.inner_unchecked(a, b))
        .sum())
}

pub fn norm(space: &ProductSpaceSpec, u: &ProductVector) -> Result<f64> {
    space.check("norm", u)?;
    Ok(norm_unchecked(space, u))
}

pub(crate) fn norm_unchecked(space: &ProductSpaceSpec, u: &ProductVector) -> f64 {
    space
        .components
        .iter()
        .zip(&u.blocks)
        .map(|(c, b)| c.norm_unchecked(b).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector {
    pub blocks: Vec<DVector<C64>>,
}

impl ProductVector {
    pub fn new(blocks: Vec<DVector<C64>>) -> Self {
        Self { blocks }
    }

    pub fn single(block: DVector<C64>) -> Self {
        Self { blocks: vec![block] }
    }

    pub fn from_real(blocks: &[Vec<f64>]) -> Self {
        Self::new(
            blocks
                .iter()
                .map(|b| DVector::from_iterator(b.len(), b.iter().map(|&v| C64::new(v, 0.0))))
                .collect(),
        )
    }

    pub fn block(&self, i: usize) -> &DVector<C64> {
        &self.blocks[i]
    }

    pub fn flatten(&self) -> DVector<C64> {
        let n = self.blocks.iter().map(|b| b.len()).sum();
        DVector::from_iterator(n, self.blocks.iter().flat_map(|b| b.iter().copied()))
    }

    pub fn sub(&self, other: &ProductVector) -> ProductVector {
        ProductVector::new(self.blocks.iter().zip(&other.blocks).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &ProductVector) -> ProductVector {
        ProductVector::new(self.blocks.iter().zip(&other.blocks).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: C64) -> ProductVector {
        ProductVector::new(self.blocks.iter().map(|a| a * s).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cvec(v: &[f64]) -> DVector<C64> {
        DVector::from_iterator(v.len(), v.iter().map(|&x| C64::new(x, 0.0)))
    }

    #[test]
    fn inner_product_examples() {
        let s = ProductSpaceSpec::single(ComponentSpace::euclidean(2));
        let u = ProductVector::single(cvec(&[1.0, 0.0]));
        assert_eq!(inner_product(&s, &u, &u).unwrap(), C64::new(1.0, 0.0));

        let s = ProductSpaceSpec::single(ComponentSpace::new(vec![2.0, 3.0]).unwrap());
        let u = ProductVector::single(cvec(&[1.0, 1.0]));
        assert_eq!(inner_product(&s, &u, &u).unwrap(), C64::new(5.0, 0.0));

        let s = ProductSpaceSpec::repeated(ComponentSpace::euclidean(1), 2).unwrap();
        let u = ProductVector::new(vec![cvec(&[1.0]), cvec(&[2.0])]);
        let v = ProductVector::new(vec![cvec(&[1.0]), cvec(&[1.0])]);
        assert_eq!(inner_product(&s, &u, &v).unwrap(), C64::new(3.0, 0.0));
    }

    #[test]
    fn norm_examples() {
        let s = ProductSpaceSpec::single(ComponentSpace::euclidean(2));
        assert_eq!(norm(&s, &s.zeros()).unwrap(), 0.0);
        assert_eq!(norm(&s, &ProductVector::single(cvec(&[3.0, 4.0]))).unwrap(), 5.0);
        let s = ProductSpaceSpec::single(ComponentSpace::new(vec![4.0]).unwrap());
        assert_eq!(norm(&s, &ProductVector::single(cvec(&[1.0]))).unwrap(), 2.0);
    }

    #[test]
    fn mismatch_names_block() {
        let s = ProductSpaceSpec::new(vec![ComponentSpace::euclidean(2), ComponentSpace::euclidean(3)]).unwrap();
        let u = ProductVector::new(vec![cvec(&[1.0, 0.0]), cvec(&[1.0])]);
        match inner_product(&s, &u, &u) {
            Err(Error::DimensionMismatch { block, expected, found, .. }) => {
                assert_eq!((block, expected, found), (1, 3, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
        let short = ProductVector::new(vec![cvec(&[1.0, 0.0])]);
        assert!(matches!(norm(&s, &short), Err(Error::BlockCountMismatch { .. })));
    }

    #[test]
    fn rejects_nonpositive_weights() {
        assert!(ComponentSpace::new(vec![1.0, 0.0]).is_err());
        assert!(ComponentSpace::new(vec![-1.0]).is_err());
        assert!(ComponentSpace::new(vec![]).is_err());
    }

    #[test]
    fn quadrature_weights() {
        let s = ComponentSpace::quadrature(8, 2.0).unwrap();
        assert!(s.weights().iter().all(|&w| w == 0.25));
    }

    fn random_pair(rng: &mut ChaCha8Rng) -> (ProductSpaceSpec, ProductVector, ProductVector) {
        let dims = [rng.random_range(1..6), rng.random_range(1..6)];
        let comps: Vec<_> = dims
            .iter()
            .map(|&d| ComponentSpace::new((0..d).map(|_| rng.random_range(0.1..3.0)).collect()).unwrap())
            .collect();
        let mut draw = |d: usize| {
            DVector::from_fn(d, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        };
        let u = ProductVector::new(dims.iter().map(|&d| draw(d)).collect());
        let v = ProductVector::new(dims.iter().map(|&d| draw(d)).collect());
        (ProductSpaceSpec::new(comps).unwrap(), u, v)
    }

    #[test]
    fn cauchy_schwarz_and_parallelogram() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let (s, u, v) = random_pair(&mut rng);
            let ip = inner_product(&s, &u, &v).unwrap().norm();
            let nu = norm(&s, &u).unwrap();
            let nv = norm(&s, &v).unwrap();
            assert!(ip <= nu * nv * (1.0 + 1e-12));

            let lhs = norm(&s, &u.add(&v)).unwrap().powi(2) + norm(&s, &u.sub(&v)).unwrap().powi(2);
            let rhs = 2.0 * (nu * nu + nv * nv);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn conjugate_symmetry_and_linearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (s, u, v) = random_pair(&mut rng);
        let a = inner_product(&s, &u, &v).unwrap();
        let b = inner_product(&s, &v, &u).unwrap();
        assert!((a - b.conj()).norm() < 1e-14);
        let c = C64::new(0.3, -1.2);
        let scaled = inner_product(&s, &u.scale(c), &v).unwrap();
        assert!((scaled - c * a).norm() < 1e-13);
    }
}
