//! Image-comparison metrics for edge maps in `[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// Stabiliser constants for SSIM with unit peak.
pub const SSIM_C1: f64 = 0.01 * 0.01;
pub const SSIM_C2: f64 = 0.03 * 0.03;
/// Side of the square SSIM window.
pub const SSIM_WINDOW: usize = 8;

/// Metric values for one operator applied to one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub image_id: String,
    pub operator: String,
    pub mse: f64,
    /// `+∞` for identical images.
    pub psnr_db: f64,
    pub ssim: f64,
    pub entropy: f64,
}

impl MetricsReport {
    /// Computes every metric of `edge` against `reference`.
    pub fn compute(image_id: &str, operator: &str, edge: &ImageGrid, reference: &ImageGrid) -> Result<Self> {
        Ok(Self {
            image_id: image_id.to_string(),
            operator: operator.to_string(),
            mse: mse(edge, reference)?,
            psnr_db: psnr(edge, reference)?,
            ssim: ssim(edge, reference)?,
            entropy: entropy(edge),
        })
    }
}

/// Mean squared difference.
pub fn mse(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let s: f64 = a.data().iter().zip(b.data()).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(s / a.len() as f64)
}

/// PSNR in dB for unit peak, `f64::INFINITY` when the images are identical.
pub fn psnr(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    Ok(psnr_from_mse(mse(a, b)?))
}

/// `10·log10(1 / mse)`.
pub fn psnr_from_mse(mse: f64) -> f64 {
    if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// Mean SSIM over all 8×8 windows at stride 1, uniform weights and
/// population statistics.
pub fn ssim(a: &ImageGrid, b: &ImageGrid) -> Result<f64> {
    a.ensure_same_dims(b)?;
    let (h, w) = a.dims();
    let n = SSIM_WINDOW;
    if h < n || w < n {
        return Err(Error::Dimension(format!("ssim needs at least {n}x{n}, got {h}x{w}")));
    }
    let count = (n * n) as f64;
    let mut total = 0.0;
    let mut windows = 0usize;
    for r in 0..=h - n {
        for c in 0..=w - n {
            let (mut sa, mut sb) = (0.0, 0.0);
            for y in r..r + n {
                for x in c..c + n {
                    sa += a.get(y, x);
                    sb += b.get(y, x);
                }
            }
            let (ma, mb) = (sa / count, sb / count);
            let (mut va, mut vb, mut cov) = (0.0, 0.0, 0.0);
            for y in r..r + n {
                for x in c..c + n {
                    let (da, db) = (a.get(y, x) - ma, b.get(y, x) - mb);
                    va += da * da;
                    vb += db * db;
                    cov += da * db;
                }
            }
            let (va, vb, cov) = (va / count, vb / count, cov / count);
            let num = (2.0 * ma * mb + SSIM_C1) * (2.0 * cov + SSIM_C2);
            let den = (ma * ma + mb * mb + SSIM_C1) * (va + vb + SSIM_C2);
            total += num / den;
            windows += 1;
        }
    }
    Ok(total / windows as f64)
}

/// Binary Shannon entropy of the fraction `p` of pixels above 0.
pub fn entropy(edge: &ImageGrid) -> f64 {
    binary_entropy(edge.count_positive() as f64 / edge.len() as f64)
}

/// `−p·log2 p − (1−p)·log2(1−p)` with `0·log 0 = 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |q: f64| if q <= 0.0 { 0.0 } else { -q * q.log2() };
    term(p) + term(1.0 - p)
}

/// Shannon entropy of a 256-bin histogram of values in `[0, 1]`, divided by
/// 8 bits so the result lies in `[0, 1]`.
pub fn histogram_entropy(edge: &ImageGrid) -> f64 {
    let mut bins = [0usize; 256];
    for &v in edge.data() {
        let i = (v.clamp(0.0, 1.0) * 255.0).round() as usize;
        bins[i] += 1;
    }
    let n = edge.len() as f64;
    bins.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.log2()
        })
        .sum::<f64>()
        / 8.0
}
