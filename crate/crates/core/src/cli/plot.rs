//! Minimal raster plots: log-log curves and grayscale images.

use std::path::Path;

use image::{GrayImage, Luma, Rgb, RgbImage};

use crate::error::{Error, Result};

const PALETTE: [[u8; 3]; 6] = [[31, 119, 180], [214, 39, 40], [44, 160, 44], [148, 103, 189], [255, 127, 14], [23, 190, 207]];

fn save_err(e: image::ImageError) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// Log-log plot of several `(x, y)` series; nonpositive points are skipped.
pub fn loglog(path: &Path, series: &[Vec<(f64, f64)>]) -> Result<()> {
    let (w, h, pad) = (640u32, 420u32, 40i64);
    let mut img = RgbImage::from_pixel(w, h, Rgb([255, 255, 255]));
    let pts: Vec<(f64, f64)> = series
        .iter()
        .flatten()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if pts.is_empty() {
        return img.save(path).map_err(save_err);
    }
    let span = |f: fn(&(f64, f64)) -> f64| {
        let lo = pts.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = pts.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if hi - lo < 1e-12 {
            (lo - 0.5, hi + 0.5)
        } else {
            (lo, hi)
        }
    };
    let (x0, x1) = span(|p| p.0);
    let (y0, y1) = span(|p| p.1);
    let to_px = |x: f64, y: f64| {
        let px = pad + ((x - x0) / (x1 - x0) * (w as i64 - 2 * pad) as f64).round() as i64;
        let py = h as i64 - pad - ((y - y0) / (y1 - y0) * (h as i64 - 2 * pad) as f64).round() as i64;
        (px, py)
    };
    let black = Rgb([0, 0, 0]);
    line(&mut img, (pad, h as i64 - pad), (w as i64 - pad, h as i64 - pad), black);
    line(&mut img, (pad, pad), (pad, h as i64 - pad), black);
    for (i, s) in series.iter().enumerate() {
        let color = Rgb(PALETTE[i % PALETTE.len()]);
        let mapped: Vec<(i64, i64)> = s
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
            .map(|(x, y)| to_px(x.log10(), y.log10()))
            .collect();
        for pair in mapped.windows(2) {
            line(&mut img, pair[0], pair[1], color);
        }
        for &(px, py) in &mapped {
            for dx in -2..=2 {
                for dy in -2..=2 {
                    put(&mut img, px + dx, py + dy, color);
                }
            }
        }
    }
    img.save(path).map_err(save_err)
}

fn put(img: &mut RgbImage, x: i64, y: i64, c: Rgb<u8>) {
    if x >= 0 && y >= 0 && (x as u32) < img.width() && (y as u32) < img.height() {
        img.put_pixel(x as u32, y as u32, c);
    }
}

fn line(img: &mut RgbImage, (x0, y0): (i64, i64), (x1, y1): (i64, i64), c: Rgb<u8>) {
    let steps = (x1 - x0).abs().max((y1 - y0).abs()).max(1);
    for s in 0..=steps {
        let t = s as f64 / steps as f64;
        put(img, (x0 as f64 + t * (x1 - x0) as f64).round() as i64, (y0 as f64 + t * (y1 - y0) as f64).round() as i64, c);
    }
}

/// Row-major `width × height` values, min-max scaled to gray and upsampled.
pub fn grayscale(path: &Path, values: &[f64], width: usize, height: usize) -> Result<()> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let range = if hi > lo { hi - lo } else { 1.0 };
    let zoom = (256 / width.max(height)).max(1) as u32;
    let img = GrayImage::from_fn(width as u32 * zoom, height as u32 * zoom, |x, y| {
        let (c, r) = ((x / zoom) as usize, (y / zoom) as usize);
        // first row is drawn at the bottom
        let v = values[(height - 1 - r) * width + c];
        Luma([((v - lo) / range * 255.0).round().clamp(0.0, 255.0) as u8])
    });
    img.save(path).map_err(save_err)
}
