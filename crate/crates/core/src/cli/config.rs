//! Experiment configuration (TOML). Unknown keys are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Convolution,
    Radon,
    Tomography,
    DenseSvd,
    /// Identity operator decomposed with a user-given frame.
    Frame,
}

impl ProblemKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Convolution => "convolution",
            Self::Radon => "radon",
            Self::Tomography => "tomography",
            Self::DenseSvd => "dense_svd",
            Self::Frame => "frame",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    #[serde(default)]
    pub seed: u64,
    pub output: Option<PathBuf>,
    /// Number of index groups `K` used by reconstructions.
    pub truncation: Option<usize>,
    #[serde(default = "yes")]
    pub plots: bool,
    #[serde(default)]
    pub dual: DualConfig,
    pub convolution: Option<ConvolutionConfig>,
    pub radon: Option<RadonConfig>,
    pub tomography: Option<TomographyConfig>,
    pub dense_svd: Option<DenseSvdConfig>,
    pub frame: Option<FrameConfig>,
    #[serde(default)]
    pub regularization: RegularizationConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    pub solve: Option<SolveConfig>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DualKind {
    Exact,
    Neumann,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DualConfig {
    #[serde(default = "DualConfig::default_method")]
    pub method: DualKind,
    /// Target relative error of the Neumann dual.
    #[serde(default = "DualConfig::default_eps")]
    pub eps: f64,
}

impl DualConfig {
    fn default_method() -> DualKind {
        DualKind::Exact
    }
    fn default_eps() -> f64 {
        1e-12
    }
}

impl Default for DualConfig {
    fn default() -> Self {
        Self { method: Self::default_method(), eps: Self::default_eps() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolKind {
    /// `â ≡ 1`.
    Identity,
    /// `(1 + ξ²)^{-order/2}`.
    Sobolev,
    /// `exp(-time ξ²)`.
    Heat,
    /// Sobolev symbol with `â(0) = 0`.
    ZeroMean,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvolutionConfig {
    #[serde(default = "ConvolutionConfig::default_n")]
    pub n: usize,
    #[serde(default = "one")]
    pub length: f64,
    #[serde(default = "ConvolutionConfig::default_symbol")]
    pub symbol: SymbolKind,
    #[serde(default = "ConvolutionConfig::default_order")]
    pub order: f64,
    #[serde(default = "ConvolutionConfig::default_time")]
    pub time: f64,
}

fn one() -> f64 {
    1.0
}

impl ConvolutionConfig {
    fn default_n() -> usize {
        64
    }
    fn default_symbol() -> SymbolKind {
        SymbolKind::Sobolev
    }
    fn default_order() -> f64 {
        2.0
    }
    fn default_time() -> f64 {
        1e-3
    }
}

impl Default for ConvolutionConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadonConfig {
    #[serde(default = "RadonConfig::default_pixels")]
    pub pixels: usize,
    #[serde(default = "RadonConfig::default_angles")]
    pub angles: usize,
    #[serde(default = "RadonConfig::default_detectors")]
    pub detectors: usize,
    #[serde(default)]
    pub order: f64,
    #[serde(default = "RadonConfig::default_levels")]
    pub wavelet_levels: usize,
    /// Defaults to the angle count.
    pub angular_size: Option<usize>,
    /// Orthonormal scaling-filter taps; defaults to the 4-tap Daubechies filter.
    pub taps: Option<Vec<f64>>,
}

impl RadonConfig {
    fn default_pixels() -> usize {
        16
    }
    fn default_angles() -> usize {
        24
    }
    fn default_detectors() -> usize {
        32
    }
    fn default_levels() -> usize {
        3
    }
}

impl Default for RadonConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographyConfig {
    #[serde(default = "TomographyConfig::default_grid")]
    pub grid: usize,
    #[serde(default = "TomographyConfig::default_half_width")]
    pub half_width: f64,
    #[serde(default = "TomographyConfig::default_aperture")]
    pub aperture: f64,
    #[serde(default = "TomographyConfig::default_heights")]
    pub heights: Vec<f64>,
    #[serde(default = "TomographyConfig::default_directions")]
    pub directions: Vec<[f64; 2]>,
    #[serde(default = "TomographyConfig::default_cutoff")]
    pub cutoff: usize,
}

impl TomographyConfig {
    fn default_grid() -> usize {
        32
    }
    fn default_half_width() -> f64 {
        20.0
    }
    fn default_aperture() -> f64 {
        8.0
    }
    fn default_heights() -> Vec<f64> {
        vec![0.0, 4000.0]
    }
    fn default_directions() -> Vec<[f64; 2]> {
        vec![[0.0, 0.0], [1e-3, 5e-4], [-7e-4, 1e-3]]
    }
    fn default_cutoff() -> usize {
        8
    }
}

impl Default for TomographyConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseSvdConfig {
    #[serde(default = "DenseSvdConfig::default_rows")]
    pub rows: usize,
    #[serde(default = "DenseSvdConfig::default_cols")]
    pub cols: usize,
    /// Rank of the random operator; full rank when absent.
    pub rank: Option<usize>,
}

impl DenseSvdConfig {
    fn default_rows() -> usize {
        12
    }
    fn default_cols() -> usize {
        8
    }
}

impl Default for DenseSvdConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameConfig {
    /// Real frame vectors, one list per element.
    pub vectors: Vec<Vec<f64>>,
    /// Inner-product weights; Euclidean when absent.
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegularizationConfig {
    #[serde(default = "RegularizationConfig::default_filter")]
    pub filter: String,
    /// Explicit grid; otherwise `points` log-spaced values.
    pub alphas: Option<Vec<f64>>,
    #[serde(default = "RegularizationConfig::default_points")]
    pub points: usize,
    #[serde(default = "RegularizationConfig::default_tau")]
    pub tau: f64,
    #[serde(default = "yes")]
    pub discrepancy: bool,
}

impl RegularizationConfig {
    fn default_filter() -> String {
        "tikhonov".into()
    }
    fn default_points() -> usize {
        10
    }
    fn default_tau() -> f64 {
        1.5
    }
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Relative noise levels `δ / ‖y‖`; `0` is the clean run.
    #[serde(default = "NoiseConfig::default_levels")]
    pub levels: Vec<f64>,
    #[serde(default = "NoiseConfig::default_draws")]
    pub draws: usize,
}

impl NoiseConfig {
    fn default_levels() -> Vec<f64> {
        vec![0.0]
    }
    fn default_draws() -> usize {
        1
    }
}

impl Default for NoiseConfig {
    fn default() -> Self {
        toml::from_str("").expect("defaults")
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    /// Data CSV; relative paths are resolved against the config file.
    pub data: PathBuf,
    /// Filter parameter; plain reconstruction when absent.
    pub alpha: Option<f64>,
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads the file and resolves relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(s) = cfg.solve.as_mut() {
            if s.data.is_relative() {
                s.data = base.join(&s.data);
            }
        }
        if let Some(o) = cfg.output.as_mut() {
            if o.is_relative() {
                *o = base.join(&*o);
            }
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let present = [
            (ProblemKind::Convolution, self.convolution.is_some()),
            (ProblemKind::Radon, self.radon.is_some()),
            (ProblemKind::Tomography, self.tomography.is_some()),
            (ProblemKind::DenseSvd, self.dense_svd.is_some()),
            (ProblemKind::Frame, self.frame.is_some()),
        ];
        for (kind, given) in present {
            if given && kind != self.problem {
                return Err(Error::Config(format!(
                    "section [{}] does not apply to problem {}",
                    kind.as_str(),
                    self.problem.as_str()
                )));
            }
        }
        if self.problem == ProblemKind::Frame && self.frame.is_none() {
            return Err(Error::Config("problem frame needs a [frame] section".into()));
        }
        if self.truncation == Some(0) {
            return Err(Error::Config("truncation must be positive".into()));
        }
        if !(self.dual.eps > 0.0 && self.dual.eps < 1.0) {
            return Err(Error::Config("dual.eps must lie in (0, 1)".into()));
        }
        crate::regularization::FilterKind::parse(&self.regularization.filter)
            .map_err(|e| Error::Config(e.to_string()))?;
        if self.regularization.points == 0 {
            return Err(Error::Config("regularization.points must be positive".into()));
        }
        if let Some(a) = &self.regularization.alphas {
            if a.is_empty() || a.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::Config("regularization.alphas must be finite and nonnegative".into()));
            }
        }
        if !(self.regularization.tau > 1.0) {
            return Err(Error::Config("regularization.tau must exceed 1".into()));
        }
        if self.noise.levels.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::Config("noise levels must be finite and nonnegative".into()));
        }
        if self.noise.draws == 0 {
            return Err(Error::Config("noise.draws must be positive".into()));
        }
        Ok(())
    }
}
