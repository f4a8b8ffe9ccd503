//! Multi-dimensional FFTs over flattened row-major grids.

use rustfft::FftPlanner;

use crate::hilbert::C64;

/// In-place FFT along the listed axes of a row-major array with `shape`.
/// The inverse transform is normalized by the transformed length.
pub fn fft_axes(data: &mut [C64], shape: &[usize], axes: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    for &axis in axes {
        let n = shape[axis];
        if n <= 1 {
            continue;
        }
        let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let mut line = vec![C64::new(0.0, 0.0); n];
        let mut scratch = vec![C64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        let scale = if inverse { 1.0 / n as f64 } else { 1.0 };
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (i, v) in line.iter_mut().enumerate() {
                    *v = data[base + i * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for (i, v) in line.iter().enumerate() {
                    data[base + i * stride] = v * scale;
                }
            }
        }
    }
}

/// Signed frequency of FFT bin `j` for length `n`: `j` for `j < n/2`, else `j - n`.
pub fn signed_frequency(j: usize, n: usize) -> i64 {
    if 2 * j < n {
        j as i64
    } else {
        j as i64 - n as i64
    }
}
