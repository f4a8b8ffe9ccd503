//! Desk-scale model problems with known structure.

pub mod convolution;
pub mod radon;
pub mod tomography;
pub mod wavelet;

pub use convolution::{convolution_decomposition, ConvolutionOperator, ConvolutionSpec};
pub use radon::{RadonProblem, RadonSpec};
pub use tomography::{TomographyBlocks, TomographyOperator, TomographyProblem, TomographySpec};
pub use wavelet::WaveletSpec;
