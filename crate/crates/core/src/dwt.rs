//! One-level separable 2D wavelet transform plus the ×2 resampling used
//! around it by the detector.
//!
//! The row pass runs first. Subband naming follows the filter applied along
//! each axis: `cH` is low-pass along x and high-pass along y (it responds to
//! horizontal structures), `cV` is high-pass along x and low-pass along y,
//! and `cD` is high-pass along both.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::filterbank::{Boundary, FilterBank};
use crate::grid::ImageGrid;

/// Approximation and detail subbands of a single decomposition level.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    pub ca: ImageGrid,
    pub ch: ImageGrid,
    pub cv: ImageGrid,
    pub cd: ImageGrid,
    /// Height of the decomposed image, used to crop after reconstruction.
    pub orig_height: usize,
    /// Width of the decomposed image.
    pub orig_width: usize,
}

impl WaveletDecomposition {
    /// Bundles four subbands, assuming an even-sized source of twice their size.
    pub fn new(ca: ImageGrid, ch: ImageGrid, cv: ImageGrid, cd: ImageGrid) -> Result<Self> {
        let (h, w) = ca.dims();
        Self::with_original_dims(ca, ch, cv, cd, 2 * h, 2 * w)
    }

    pub fn with_original_dims(
        ca: ImageGrid,
        ch: ImageGrid,
        cv: ImageGrid,
        cd: ImageGrid,
        orig_height: usize,
        orig_width: usize,
    ) -> Result<Self> {
        ca.ensure_same_dims(&ch)?;
        ca.ensure_same_dims(&cv)?;
        ca.ensure_same_dims(&cd)?;
        let (h, w) = ca.dims();
        if orig_height.div_ceil(2) != h || orig_width.div_ceil(2) != w {
            return Err(Error::Dimension(format!(
                "subbands {h}x{w} do not match an original of {orig_height}x{orig_width}"
            )));
        }
        Ok(Self { ca, ch, cv, cd, orig_height, orig_width })
    }

    /// Subband dimensions `(height, width)`.
    pub fn dims(&self) -> (usize, usize) {
        self.ca.dims()
    }
}

/// Whole-sample mirror index with period `2n - 2`.
#[inline]
pub(crate) fn reflect(i: i64, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let p = 2 * n as i64 - 2;
    let j = i.rem_euclid(p);
    if j < n as i64 {
        j as usize
    } else {
        (p - j) as usize
    }
}

fn analyze_line(x: &[f64], bank: &FilterBank, mode: Boundary, lo: &mut [f64], hi: &mut [f64]) {
    let n = x.len();
    let idx = |i: i64| match mode {
        Boundary::Symmetric => reflect(i, n),
        Boundary::Periodic => i.rem_euclid(n as i64) as usize,
    };
    for k in 0..n / 2 {
        let base = 2 * k as i64;
        let mut a = 0.0;
        for (m, v) in bank.analysis_low.iter() {
            a += v * x[idx(base + m)];
        }
        let mut d = 0.0;
        for (m, v) in bank.analysis_high.iter() {
            d += v * x[idx(base + m)];
        }
        lo[k] = 0.5 * a;
        hi[k] = 0.5 * d;
    }
}

fn synthesize_line(a: &[f64], d: &[f64], bank: &FilterBank, mode: Boundary, out: &mut [f64]) {
    let m = a.len();
    let n = 2 * m;
    let approx = |j: i64| match mode {
        Boundary::Symmetric => a[reflect(2 * j, n) / 2],
        Boundary::Periodic => a[j.rem_euclid(m as i64) as usize],
    };
    let detail = |j: i64| match mode {
        Boundary::Symmetric => d[(reflect(2 * j + 1, n) - 1) / 2],
        Boundary::Periodic => d[j.rem_euclid(m as i64) as usize],
    };
    for (i, o) in out.iter_mut().enumerate() {
        let i = i as i64;
        let mut s = 0.0;
        for (k, v) in bank.synthesis_low.iter() {
            let t = i - k;
            if t.rem_euclid(2) == 0 {
                s += v * approx(t.div_euclid(2));
            }
        }
        for (k, v) in bank.synthesis_high.iter() {
            let t = i - k;
            if t.rem_euclid(2) == 0 {
                s += v * detail(t.div_euclid(2));
            }
        }
        *o = s;
    }
}

/// Pads odd axes by one mirrored row/column so both axes are even.
fn pad_even(img: &ImageGrid) -> ImageGrid {
    let (h, w) = img.dims();
    let (ph, pw) = (h + h % 2, w + w % 2);
    if (ph, pw) == (h, w) {
        return img.clone();
    }
    ImageGrid::from_fn(ph, pw, |r, c| img.get(reflect(r as i64, h), reflect(c as i64, w)))
}

/// Filters every row of `img` into half-width low and high outputs.
fn analyze_rows(img: &ImageGrid, bank: &FilterBank, mode: Boundary) -> (ImageGrid, ImageGrid) {
    let (h, w) = img.dims();
    let half = w / 2;
    let mut lo = vec![0.0; h * half];
    let mut hi = vec![0.0; h * half];
    lo.par_chunks_mut(half)
        .zip(hi.par_chunks_mut(half))
        .enumerate()
        .for_each(|(r, (l, hh))| analyze_line(img.row(r), bank, mode, l, hh));
    (
        ImageGrid::new(h, half, lo).expect("finite row analysis"),
        ImageGrid::new(h, half, hi).expect("finite row analysis"),
    )
}

fn synthesize_rows(lo: &ImageGrid, hi: &ImageGrid, bank: &FilterBank, mode: Boundary) -> ImageGrid {
    let (h, half) = lo.dims();
    let w = 2 * half;
    let mut out = vec![0.0; h * w];
    out.par_chunks_mut(w).enumerate().for_each(|(r, o)| synthesize_line(lo.row(r), hi.row(r), bank, mode, o));
    ImageGrid::new(h, w, out).expect("finite row synthesis")
}

/// One-level decomposition with the bank's boundary rule.
///
/// Scaling is such that a constant image `c` gives `cA ≡ c` and zero details.
pub fn dwt2(img: &ImageGrid, bank: &FilterBank) -> Result<WaveletDecomposition> {
    dwt2_with(img, bank, bank.boundary())
}

/// One-level decomposition with an explicit boundary rule.
pub fn dwt2_with(img: &ImageGrid, bank: &FilterBank, mode: Boundary) -> Result<WaveletDecomposition> {
    let need = bank.max_analysis_len();
    let (h, w) = img.dims();
    if h < need || w < need {
        return Err(Error::Dimension(format!("image {h}x{w} is smaller than the {need}-tap analysis filter")));
    }
    let x = pad_even(img);
    let (lo, hi) = analyze_rows(&x, bank, mode);
    let (ca_t, ch_t) = analyze_rows(&lo.transpose(), bank, mode);
    let (cv_t, cd_t) = analyze_rows(&hi.transpose(), bank, mode);
    WaveletDecomposition::with_original_dims(
        ca_t.transpose(),
        ch_t.transpose(),
        cv_t.transpose(),
        cd_t.transpose(),
        h,
        w,
    )
}

/// Inverse of [`dwt2`]; exact for perfectly reconstructing banks.
pub fn idwt2(dec: &WaveletDecomposition, bank: &FilterBank) -> Result<ImageGrid> {
    idwt2_with(dec, bank, bank.boundary())
}

pub fn idwt2_with(dec: &WaveletDecomposition, bank: &FilterBank, mode: Boundary) -> Result<ImageGrid> {
    dec.ca.ensure_same_dims(&dec.ch)?;
    dec.ca.ensure_same_dims(&dec.cv)?;
    dec.ca.ensure_same_dims(&dec.cd)?;
    let lo = synthesize_rows(&dec.ca.transpose(), &dec.ch.transpose(), bank, mode).transpose();
    let hi = synthesize_rows(&dec.cv.transpose(), &dec.cd.transpose(), bank, mode).transpose();
    let full = synthesize_rows(&lo, &hi, bank, mode);
    if full.dims() == (dec.orig_height, dec.orig_width) {
        Ok(full)
    } else {
        full.crop(0, 0, dec.orig_height, dec.orig_width)
    }
}

/// Doubles both axes by linear interpolation on the even lattice.
///
/// `out[2i] = x[i]` and `out[2i+1] = (x[i] + x[i+1]) / 2`, with the last
/// sample repeated past the end, so corners keep their original values.
pub fn upsample2(img: &ImageGrid) -> ImageGrid {
    let (h, w) = img.dims();
    let up = |i: usize, n: usize| -> (usize, usize) { (i / 2, i.div_ceil(2).min(n - 1)) };
    let rows = ImageGrid::from_fn(2 * h, w, |r, c| {
        let (a, b) = up(r, h);
        0.5 * (img.get(a, c) + img.get(b, c))
    });
    ImageGrid::from_fn(2 * h, 2 * w, |r, c| {
        let (a, b) = up(c, w);
        0.5 * (rows.get(r, a) + rows.get(r, b))
    })
}

/// Keeps samples at even row and column indices.
pub fn downsample2(img: &ImageGrid) -> Result<ImageGrid> {
    let (h, w) = img.dims();
    if h < 2 || w < 2 {
        return Err(Error::Dimension(format!("downsampling needs at least 2x2, got {h}x{w}")));
    }
    Ok(ImageGrid::from_fn(h.div_ceil(2), w.div_ceil(2), |r, c| img.get(2 * r, 2 * c)))
}
