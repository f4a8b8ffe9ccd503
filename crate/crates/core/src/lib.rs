//! Frame decompositions of bounded linear operators between product Hilbert
//! spaces, and frame-based solvers for (possibly ill-posed) equations `Ax = y`.
//!
//! The crate works on finite discretizations: every component space is a
//! complex coordinate space with a diagonal quadrature inner product. A frame
//! decomposition couples frames `{e_k^m}` of the domain components with frames
//! `{f_k^n}` of the codomain components through small matrices `Λ_k`, so that
//! the data-side frame coefficients of `Ax` are `Λ_k` times the solution-side
//! frame coefficients of `x`. Per-index pseudo-inverses of the `Λ_k` then give
//! reconstructions, Picard diagnostics and filtered (regularized) solutions.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cache;
pub mod cli;
pub mod constructors;
pub mod decomposition;
pub mod error;
pub mod fourier;
pub mod frame;
pub mod hilbert;
pub mod lambda;
pub mod linalg;
pub mod models;
pub mod operator;
pub mod regularization;
pub mod sobolev;

pub use error::{Error, Result};
pub use frame::{DualFrame, DualMethod, Frame};
pub use hilbert::{ComponentSpace, ProductSpaceSpec, ProductVector, C64};
pub use lambda::{BlockPartition, LambdaFamily, SingularSystem};
pub use operator::{DenseOperator, LinearOperator};
pub use decomposition::{FrameDecomposition, ReconstructionResult, VerificationReport};
