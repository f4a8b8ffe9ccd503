//! Periodized orthonormal discrete wavelet transforms.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Daubechies 4-tap scaling filter (two vanishing moments).
pub fn daubechies4() -> Vec<f64> {
    let s3 = 3f64.sqrt();
    let d = 4.0 * 2f64.sqrt();
    vec![(1.0 + s3) / d, (3.0 + s3) / d, (3.0 - s3) / d, (1.0 - s3) / d]
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletSpec {
    /// Scaling (low-pass) filter taps.
    pub taps: Vec<f64>,
    pub levels: usize,
}

impl WaveletSpec {
    pub fn daubechies4(levels: usize) -> Self {
        Self { taps: daubechies4(), levels }
    }

    fn highpass(&self) -> Vec<f64> {
        let n = self.taps.len();
        (0..n)
            .map(|k| if k % 2 == 0 { 1.0 } else { -1.0 } * self.taps[n - 1 - k])
            .collect()
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.taps.len() < 2 || !self.taps.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter("wavelet filter needs an even number of taps".into()));
        }
        if self.levels == 0 || !n.is_multiple_of(1 << self.levels) || n >> self.levels == 0 {
            return Err(Error::InvalidParameter(format!(
                "{} wavelet levels do not fit a signal of length {n}",
                self.levels
            )));
        }
        Ok(())
    }

    /// Forward transform with coefficient layout
    /// `[approx_L | detail_L | … | detail_1]`, `detail_1` the finest.
    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = x.len();
        self.check(n)?;
        let g = self.highpass();
        let mut out = x.to_vec();
        let mut len = n;
        for _ in 0..self.levels {
            let half = len / 2;
            let mut tmp = vec![0.0; len];
            for i in 0..half {
                let (mut a, mut d) = (0.0, 0.0);
                for (k, (h, gk)) in self.taps.iter().zip(&g).enumerate() {
                    let v = out[(2 * i + k) % len];
                    a += h * v;
                    d += gk * v;
                }
                tmp[i] = a;
                tmp[half + i] = d;
            }
            out[..len].copy_from_slice(&tmp);
            len = half;
        }
        Ok(out)
    }

    /// Orthogonal analysis matrix: row `c` is the wavelet `ψ_c` sampled on
    /// the grid, so synthesis vectors are the columns of its transpose.
    pub fn analysis_matrix(&self, n: usize) -> Result<DMatrix<f64>> {
        self.check(n)?;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            let c = self.forward(&e)?;
            for (r, v) in c.iter().enumerate() {
                m[(r, i)] = *v;
            }
        }
        let dev = (&m * m.transpose() - DMatrix::identity(n, n)).amax();
        if dev > 1e-12 {
            return Err(Error::NonOrthonormal(format!("wavelet filter is not orthonormal (deviation {dev:e})")));
        }
        Ok(m)
    }

    /// Scale index `j` of each coefficient position: `2^j` coefficients per
    /// detail level; the approximation shares the coarsest detail's `j`.
    pub fn scale_indices(&self, n: usize) -> Result<Vec<i32>> {
        self.check(n)?;
        let log_n = n.trailing_zeros() as i32;
        let mut out = Vec::with_capacity(n);
        let coarse = n >> self.levels;
        let coarsest_j = log_n - self.levels as i32;
        out.extend(std::iter::repeat_n(coarsest_j, coarse));
        for level in (1..=self.levels).rev() {
            let len = n >> level;
            out.extend(std::iter::repeat_n(log_n - level as i32, len));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn daubechies_is_orthonormal_with_vanishing_moments() {
        let spec = WaveletSpec::daubechies4(3);
        let m = spec.analysis_matrix(32).unwrap();
        assert!((&m * m.transpose() - DMatrix::identity(32, 32)).amax() < 1e-13);
        let g = spec.highpass();
        assert!(g.iter().sum::<f64>().abs() < 1e-14);
        let first: f64 = g.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
        assert!(first.abs() < 1e-14);
    }

    #[test]
    fn linear_signals_have_no_fine_details() {
        let spec = WaveletSpec::daubechies4(1);
        let x: Vec<f64> = (0..16).map(|i| 2.0 * i as f64 + 1.0).collect();
        let c = spec.forward(&x).unwrap();
        // away from the periodic wrap the finest details vanish
        for d in &c[8..14] {
            assert!(d.abs() < 1e-12);
        }
    }

    #[test]
    fn scale_indices_layout() {
        let spec = WaveletSpec::daubechies4(2);
        let j = spec.scale_indices(16).unwrap();
        assert_eq!(&j[..4], &[2, 2, 2, 2]);
        assert_eq!(&j[4..8], &[2, 2, 2, 2]);
        assert!(j[8..].iter().all(|&v| v == 3));
    }

    #[test]
    fn rejects_bad_filters_and_levels() {
        assert!(WaveletSpec { taps: vec![1.0, 1.0], levels: 1 }.analysis_matrix(4).is_err());
        assert!(WaveletSpec::daubechies4(3).analysis_matrix(12).is_err());
        assert!(WaveletSpec { taps: vec![1.0, 0.5, 0.2], levels: 1 }.forward(&[0.0; 4]).is_err());
    }
}
