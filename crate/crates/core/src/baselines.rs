//! Classical reference detectors: Sobel, Prewitt, Canny and single-level
//! wavelet modulus maxima.

use serde::{Deserialize, Serialize};
use std::collections::VecDeque;

use crate::dwt::dwt2;
use crate::edge::{adaptive_threshold, direction, modulus_highfreq, nms};
use crate::error::{Error, Result};
use crate::filterbank::{FilterBank, WaveletSpec};
use crate::grid::{normalize_max, EdgeMap, ImageGrid};

/// Which baseline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineOperator {
    Sobel,
    Prewitt,
    Canny,
    Wtmm,
}

/// Settings shared by the baseline operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineParams {
    /// Fixed threshold on the normalised magnitude; the mid-range rule is
    /// used when absent.
    pub threshold: Option<f64>,
    pub canny_sigma: f64,
    /// Fractions of the maximum gradient magnitude.
    pub canny_low: f64,
    pub canny_high: f64,
    pub wtmm_bank: WaveletSpec,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            threshold: None,
            canny_sigma: 1.0,
            canny_low: 0.1,
            canny_high: 0.2,
            wtmm_bank: WaveletSpec::Standard { name: "haar".into() },
        }
    }
}

impl BaselineParams {
    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.threshold {
            if t.is_nan() || t < 0.0 {
                return Err(Error::Parameter(format!("threshold must be >= 0, got {t}")));
            }
        }
        if self.canny_sigma.is_nan() || self.canny_sigma <= 0.0 {
            return Err(Error::Parameter("canny sigma must be positive".into()));
        }
        if !(self.canny_low >= 0.0 && self.canny_low < self.canny_high) {
            return Err(Error::Parameter(format!(
                "canny thresholds need 0 <= low < high, got {} and {}",
                self.canny_low, self.canny_high
            )));
        }
        Ok(())
    }
}

/// Horizontal kernel of a 3×3 derivative operator with centre-row weight `k`
/// (1 for Prewitt, 2 for Sobel). The vertical kernel is its transpose.
pub fn derivative_kernel(k: f64) -> [[f64; 3]; 3] {
    [[-1.0, 0.0, 1.0], [-k, 0.0, k], [-1.0, 0.0, 1.0]]
}

/// 3×3 correlation with replicated borders.
pub fn correlate3(img: &ImageGrid, kernel: &[[f64; 3]; 3]) -> ImageGrid {
    let (h, w) = img.dims();
    let at = |r: i64, c: i64| img.get(r.clamp(0, h as i64 - 1) as usize, c.clamp(0, w as i64 - 1) as usize);
    ImageGrid::from_fn(h, w, |r, c| {
        let mut acc = 0.0;
        for (dy, row) in kernel.iter().enumerate() {
            for (dx, &k) in row.iter().enumerate() {
                if k != 0.0 {
                    acc += k * at(r as i64 + dy as i64 - 1, c as i64 + dx as i64 - 1);
                }
            }
        }
        acc
    })
}

fn transpose3(k: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut t = [[0.0; 3]; 3];
    for r in 0..3 {
        for c in 0..3 {
            t[r][c] = k[c][r];
        }
    }
    t
}

/// Raw `(gx, gy)` responses of the 3×3 derivative operator with centre weight `k`.
pub fn derivative_responses(img: &ImageGrid, k: f64) -> Result<(ImageGrid, ImageGrid)> {
    let (h, w) = img.dims();
    if h < 3 || w < 3 {
        return Err(Error::Dimension(format!("operator needs at least 3x3, got {h}x{w}")));
    }
    let kx = derivative_kernel(k);
    Ok((correlate3(img, &kx), correlate3(img, &transpose3(&kx))))
}

fn threshold_magnitude(mag: &ImageGrid, params: &BaselineParams) -> ImageGrid {
    let n = normalize_max(mag);
    match params.threshold {
        Some(t) => n.map(|v| if v > t { v } else { 0.0 }),
        None => adaptive_threshold(&n),
    }
}

fn kernel_operator(img: &ImageGrid, k: f64, params: &BaselineParams) -> Result<EdgeMap> {
    params.validate()?;
    let (gx, gy) = derivative_responses(img, k)?;
    Ok(threshold_magnitude(&gx.zip_map(&gy, f64::hypot)?, params))
}

/// Sobel magnitude, normalised and thresholded.
pub fn sobel(img: &ImageGrid, params: &BaselineParams) -> Result<EdgeMap> {
    kernel_operator(img, 2.0, params)
}

/// Prewitt magnitude, normalised and thresholded.
pub fn prewitt(img: &ImageGrid, params: &BaselineParams) -> Result<EdgeMap> {
    kernel_operator(img, 1.0, params)
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-radius..=radius).map(|i| (-(i * i) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with replicated borders.
pub fn gaussian_blur(img: &ImageGrid, sigma: f64) -> ImageGrid {
    let k = gaussian_kernel(sigma);
    let r = (k.len() / 2) as i64;
    let (h, w) = img.dims();
    let rows = ImageGrid::from_fn(h, w, |y, x| {
        k.iter()
            .enumerate()
            .map(|(i, kv)| kv * img.get(y, (x as i64 + i as i64 - r).clamp(0, w as i64 - 1) as usize))
            .sum()
    });
    ImageGrid::from_fn(h, w, |y, x| {
        k.iter()
            .enumerate()
            .map(|(i, kv)| kv * rows.get((y as i64 + i as i64 - r).clamp(0, h as i64 - 1) as usize, x))
            .sum()
    })
}

/// Canny detector: Gaussian smoothing, Sobel gradient, four-direction
/// non-maximum suppression and double thresholding with 8-connected
/// hysteresis. Output is binary (0 or 1).
pub fn canny(img: &ImageGrid, params: &BaselineParams) -> Result<EdgeMap> {
    params.validate()?;
    let (h, w) = img.dims();
    if h < 7 || w < 7 {
        return Err(Error::Dimension(format!("canny needs at least 7x7, got {h}x{w}")));
    }
    let smooth = gaussian_blur(img, params.canny_sigma);
    let (gx, gy) = derivative_responses(&smooth, 2.0)?;
    let mag = gx.zip_map(&gy, f64::hypot)?;
    let peak = mag.max();
    if peak <= 1e-12 {
        return Ok(ImageGrid::zeros(h, w));
    }
    // Ties along the gradient are broken towards the lower-index neighbour so
    // that symmetric ramps keep exactly one pixel.
    let mut thin = ImageGrid::zeros(h, w);
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let v = mag.get(y, x);
            if v <= 0.0 {
                continue;
            }
            let theta = direction(gy.get(y, x), gx.get(y, x));
            let [(dy0, dx0), (dy1, dx1)] = crate::edge::nms_offsets(theta);
            let a = mag.get((y as i64 + dy0) as usize, (x as i64 + dx0) as usize);
            let b = mag.get((y as i64 + dy1) as usize, (x as i64 + dx1) as usize);
            if v > a && v >= b {
                thin.set(y, x, v);
            }
        }
    }
    let lo = params.canny_low * peak;
    let hi = params.canny_high * peak;
    let mut out = ImageGrid::zeros(h, w);
    let mut queue = VecDeque::new();
    for y in 0..h {
        for x in 0..w {
            if thin.get(y, x) >= hi {
                out.set(y, x, 1.0);
                queue.push_back((y, x));
            }
        }
    }
    while let Some((y, x)) = queue.pop_front() {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let (ny, nx) = (y as i64 + dy, x as i64 + dx);
                if ny < 0 || nx < 0 || ny >= h as i64 || nx >= w as i64 {
                    continue;
                }
                let (ny, nx) = (ny as usize, nx as usize);
                if out.get(ny, nx) == 0.0 && thin.get(ny, nx) >= lo && thin.get(ny, nx) > 0.0 {
                    out.set(ny, nx, 1.0);
                    queue.push_back((ny, nx));
                }
            }
        }
    }
    Ok(out)
}

/// Single-level wavelet modulus maxima: detail modulus, non-maximum
/// suppression, mid-range threshold, normalisation, then nearest-neighbour
/// upsampling back to the input size.
pub fn wtmm(img: &ImageGrid, params: &BaselineParams) -> Result<EdgeMap> {
    params.validate()?;
    wtmm_with_bank(img, &params.wtmm_bank.resolve()?)
}

/// [`wtmm`] with an already resolved bank.
pub fn wtmm_with_bank(img: &ImageGrid, bank: &FilterBank) -> Result<EdgeMap> {
    let dec = dwt2(img, bank)?;
    let (m, a) = modulus_highfreq(&dec.ch, &dec.cv, &dec.cd)?;
    let e = normalize_max(&adaptive_threshold(&nms(&m, &a)?));
    let (h, w) = img.dims();
    Ok(ImageGrid::from_fn(h, w, |r, c| e.get(r / 2, c / 2)))
}

/// Dispatches to the chosen baseline.
pub fn run_baseline(op: BaselineOperator, img: &ImageGrid, params: &BaselineParams) -> Result<EdgeMap> {
    match op {
        BaselineOperator::Sobel => sobel(img, params),
        BaselineOperator::Prewitt => prewitt(img, params),
        BaselineOperator::Canny => canny(img, params),
        BaselineOperator::Wtmm => wtmm(img, params),
    }
}
