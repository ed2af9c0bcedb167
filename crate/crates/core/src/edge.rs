//! Gradient and modulus estimation, directional non-maximum suppression,
//! the mid-range adaptive threshold and the window-based uncertainty
//! selector that gates detail subbands.
//!
//! Coordinates: `x` is the column index, `y` the row index, and angles are
//! `atan(Cy / Cx)` in `(-π/2, π/2]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_8};

use crate::dwt::WaveletDecomposition;
use crate::error::{Error, Result};
use crate::grid::ImageGrid;

/// Derivative estimates together with their modulus and direction.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientField {
    pub cx: ImageGrid,
    pub cy: ImageGrid,
    pub modulus: ImageGrid,
    pub angle: ImageGrid,
}

/// `atan(num / den)` with the conventions `π/2` for `den = 0, num ≠ 0` and
/// `0` when both vanish.
#[inline]
pub fn direction(num: f64, den: f64) -> f64 {
    if den != 0.0 {
        (num / den).atan()
    } else if num != 0.0 {
        FRAC_PI_2
    } else {
        0.0
    }
}

/// Central differences inside, one-sided differences on the border.
pub fn gradient(img: &ImageGrid) -> Result<GradientField> {
    let (h, w) = img.dims();
    if h < 3 || w < 3 {
        return Err(Error::Dimension(format!("gradient needs at least 3x3, got {h}x{w}")));
    }
    let cx = ImageGrid::from_fn(h, w, |r, c| {
        if c == 0 {
            img.get(r, 1) - img.get(r, 0)
        } else if c == w - 1 {
            img.get(r, w - 1) - img.get(r, w - 2)
        } else {
            (img.get(r, c + 1) - img.get(r, c - 1)) / 2.0
        }
    });
    let cy = ImageGrid::from_fn(h, w, |r, c| {
        if r == 0 {
            img.get(1, c) - img.get(0, c)
        } else if r == h - 1 {
            img.get(h - 1, c) - img.get(h - 2, c)
        } else {
            (img.get(r + 1, c) - img.get(r - 1, c)) / 2.0
        }
    });
    let modulus = cx.zip_map(&cy, f64::hypot)?;
    let angle = cy.zip_map(&cx, direction)?;
    Ok(GradientField { cx, cy, modulus, angle })
}

/// `sqrt(cH² + cV² + cD²)` and `atan(cH / cV)`.
pub fn modulus_highfreq(ch: &ImageGrid, cv: &ImageGrid, cd: &ImageGrid) -> Result<(ImageGrid, ImageGrid)> {
    ch.ensure_same_dims(cv)?;
    ch.ensure_same_dims(cd)?;
    let (h, w) = ch.dims();
    let modulus = ImageGrid::from_fn(h, w, |r, c| {
        let (a, b, d) = (ch.get(r, c), cv.get(r, c), cd.get(r, c));
        (a * a + b * b + d * d).sqrt()
    });
    let angle = ch.zip_map(cv, direction)?;
    Ok((modulus, angle))
}

/// Neighbour offsets `(dy, dx)` compared by NMS for a given angle.
///
/// Angles within π/8 of the x axis compare left/right, within π/8 of the y
/// axis compare up/down, and the two diagonal classes around ±π/4 compare
/// the corresponding diagonal pair.
pub fn nms_offsets(theta: f64) -> [(i64, i64); 2] {
    let a = theta.abs();
    if a < FRAC_PI_8 {
        [(0, -1), (0, 1)]
    } else if a >= 3.0 * FRAC_PI_8 {
        [(-1, 0), (1, 0)]
    } else if theta > 0.0 {
        [(-1, -1), (1, 1)]
    } else {
        [(-1, 1), (1, -1)]
    }
}

/// Keeps a modulus value only where it strictly exceeds both neighbours
/// along its quantized direction; the one-pixel border is set to 0.
pub fn nms(modulus: &ImageGrid, angle: &ImageGrid) -> Result<ImageGrid> {
    modulus.ensure_same_dims(angle)?;
    let (h, w) = modulus.dims();
    let mut out = ImageGrid::zeros(h, w);
    if h < 3 || w < 3 {
        return Ok(out);
    }
    for y in 1..h - 1 {
        for x in 1..w - 1 {
            let v = modulus.get(y, x);
            let keep = nms_offsets(angle.get(y, x))
                .iter()
                .all(|&(dy, dx)| v > modulus.get((y as i64 + dy) as usize, (x as i64 + dx) as usize));
            if keep {
                out.set(y, x, v);
            }
        }
    }
    Ok(out)
}

/// Mid-range threshold `T = (max + min) / 2`.
pub fn midrange(g: &ImageGrid) -> f64 {
    (g.max() + g.min()) / 2.0
}

/// Zeroes every value that is not strictly above the mid-range threshold.
pub fn adaptive_threshold(g: &ImageGrid) -> ImageGrid {
    let t = midrange(g);
    g.map(|v| if v > t { v } else { 0.0 })
}

/// Which reading of the window gates the selector applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectorMode {
    /// Four gates taken at face value, with the undefined floor `I` read as
    /// the window mean of `cA`.
    Literal,
    /// Coverage and mean gates plus a detail-deviation gate against a
    /// robust image-wide floor; see [`uncertainty_select`].
    Structural,
}

/// Window geometry and gate settings of the selector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectorParams {
    /// Deviation tolerance `T`.
    pub t: f64,
    /// Window size `(rows, cols)`; both odd and at least 3.
    pub window: (usize, usize),
    /// Step between windows; defaults to half the window, rounded down.
    pub stride: (usize, usize),
    /// Open interval the window mean of `cA` must fall in.
    pub mean_gate: (f64, f64),
    /// Fraction of `cA` samples that must lie within `μ ± 2σ`.
    pub coverage: f64,
    /// Multiplier on the scaled median absolute deviation for the floor.
    pub floor_mads: f64,
    pub mode: SelectorMode,
}

impl Default for SelectorParams {
    fn default() -> Self {
        Self {
            t: 0.05,
            window: (7, 7),
            stride: (3, 3),
            mean_gate: (0.0, 1.0),
            coverage: 0.9,
            floor_mads: 3.0,
            mode: SelectorMode::Structural,
        }
    }
}

impl SelectorParams {
    pub fn validate(&self) -> Result<()> {
        let (wr, wc) = self.window;
        if wr < 3 || wc < 3 || wr % 2 == 0 || wc % 2 == 0 {
            return Err(Error::Parameter(format!("selector window must be odd and >= 3, got {wr}x{wc}")));
        }
        if self.stride.0 == 0 || self.stride.1 == 0 {
            return Err(Error::Parameter("selector stride must be positive".into()));
        }
        if !self.t.is_finite() || self.t < 0.0 {
            return Err(Error::Parameter(format!("selector T must be >= 0, got {}", self.t)));
        }
        if !(0.0..=1.0).contains(&self.coverage) {
            return Err(Error::Parameter("coverage must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// Statistics of one selector window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowStats {
    pub row: usize,
    pub col: usize,
    /// Mean of `cA`.
    pub mu_d: f64,
    /// Population standard deviation of `cA`.
    pub delta_d: f64,
    /// Fraction of `cA` samples within `μ ± 2σ`.
    pub coverage: f64,
    /// Standard deviations of `|cH|`, `|cV|`, `|cD|`.
    pub delta_hvd: [f64; 3],
    /// Mean of the combined detail modulus (diagnostic only).
    pub mu_e: f64,
    pub selected: bool,
}

/// Gated detail moduli plus per-window diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub ch: ImageGrid,
    pub cv: ImageGrid,
    pub cd: ImageGrid,
    pub windows: Vec<WindowStats>,
    /// Floor `I` of the structural detail gate; 0 in literal mode.
    pub floor: f64,
}

impl Selection {
    pub fn selected_count(&self) -> usize {
        self.windows.iter().filter(|w| w.selected).count()
    }
}

/// Window origins along one axis: every `stride` steps plus a final window
/// flush with the far edge, so the whole axis is covered.
pub fn window_positions(n: usize, size: usize, stride: usize) -> Vec<usize> {
    let mut v: Vec<usize> = (0..=n - size).step_by(stride).collect();
    if *v.last().expect("non-empty") != n - size {
        v.push(n - size);
    }
    v
}

fn mean_std(vals: &[f64]) -> (f64, f64) {
    let n = vals.len() as f64;
    let mean = vals.iter().sum::<f64>() / n;
    let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn median(vals: &mut [f64]) -> f64 {
    vals.sort_by(f64::total_cmp);
    let n = vals.len();
    if n % 2 == 1 {
        vals[n / 2]
    } else {
        0.5 * (vals[n / 2 - 1] + vals[n / 2])
    }
}

fn window(g: &ImageGrid, row: usize, col: usize, size: (usize, usize)) -> Vec<f64> {
    let mut out = Vec::with_capacity(size.0 * size.1);
    for r in row..row + size.0 {
        out.extend_from_slice(&g.row(r)[col..col + size.1]);
    }
    out
}

/// Structural uncertainty-aware selection of detail coefficients.
///
/// The subband lattice is scanned with `params.window` windows. For each
/// window the mean `μ_D` and deviation `δ_D` of `cA` and the deviations
/// `δ_h, δ_v, δ_d` of `|cH|, |cV|, |cD|` are computed. A window is kept when
///
/// 1. at least `params.coverage` of its `cA` samples lie in `μ_D ± 2δ_D`,
/// 2. `μ_D` lies strictly inside `params.mean_gate`, and
/// 3. the detail gate of the chosen mode holds:
///    * [`SelectorMode::Literal`]: every `δ_*` lies in `(μ_D, μ_D + T)` and
///      `δ_D − δ_* < T`;
///    * [`SelectorMode::Structural`]: `max δ_*` exceeds `(1 − T)·I`, where
///      `I = median + floor_mads · 1.4826 · MAD` of that maximum over all
///      windows.
///
/// Inside kept windows each detail modulus is passed through a window-local
/// [`nms`] (using the `atan(cH/cV)` direction) and overlapping windows are
/// merged by pointwise maximum. Everything outside kept windows is 0.
pub fn uncertainty_select(dec: &WaveletDecomposition, params: &SelectorParams) -> Result<Selection> {
    params.validate()?;
    let (h, w) = dec.dims();
    let (wr, wc) = params.window;
    if wr > h || wc > w {
        return Err(Error::Dimension(format!("selector window {wr}x{wc} exceeds subband {h}x{w}")));
    }
    let mods = [dec.ch.map(f64::abs), dec.cv.map(f64::abs), dec.cd.map(f64::abs)];
    let (_, angle) = modulus_highfreq(&dec.ch, &dec.cv, &dec.cd)?;
    let rows = window_positions(h, wr, params.stride.0);
    let cols = window_positions(w, wc, params.stride.1);
    let origins: Vec<(usize, usize)> = rows.iter().flat_map(|&r| cols.iter().map(move |&c| (r, c))).collect();

    let mut stats: Vec<WindowStats> = origins
        .par_iter()
        .map(|&(r, c)| {
            let a = window(&dec.ca, r, c, params.window);
            let (mu, sd) = mean_std(&a);
            let inside = a.iter().filter(|&&v| (v - mu).abs() <= 2.0 * sd + 1e-15).count();
            let mut delta = [0.0; 3];
            let mut mu_e = 0.0;
            for (k, m) in mods.iter().enumerate() {
                let vals = window(m, r, c, params.window);
                delta[k] = mean_std(&vals).1;
            }
            for rr in r..r + wr {
                for cc in c..c + wc {
                    mu_e += mods.iter().map(|m| m.get(rr, cc).powi(2)).sum::<f64>().sqrt();
                }
            }
            WindowStats {
                row: r,
                col: c,
                mu_d: mu,
                delta_d: sd,
                coverage: inside as f64 / a.len() as f64,
                delta_hvd: delta,
                mu_e: mu_e / (wr * wc) as f64,
                selected: false,
            }
        })
        .collect();

    let floor = match params.mode {
        SelectorMode::Literal => f64::NAN,
        SelectorMode::Structural => {
            let mut s: Vec<f64> = stats.iter().map(|st| max3(st.delta_hvd)).collect();
            let med = median(&mut s);
            let mut dev: Vec<f64> = s.iter().map(|v| (v - med).abs()).collect();
            let mad = 1.4826 * median(&mut dev);
            med + params.floor_mads * mad
        }
    };

    for st in stats.iter_mut() {
        let base = st.coverage >= params.coverage && st.mu_d > params.mean_gate.0 && st.mu_d < params.mean_gate.1;
        let detail = match params.mode {
            SelectorMode::Literal => {
                st.delta_hvd.iter().all(|&d| d > st.mu_d && d < st.mu_d + params.t && st.delta_d - d < params.t)
            }
            SelectorMode::Structural => max3(st.delta_hvd) > floor * (1.0 - params.t),
        };
        st.selected = base && detail;
    }

    let mut out = [ImageGrid::zeros(h, w), ImageGrid::zeros(h, w), ImageGrid::zeros(h, w)];
    for st in stats.iter().filter(|s| s.selected) {
        let ang = angle.crop(st.row, st.col, wr, wc)?;
        for (k, m) in mods.iter().enumerate() {
            let local = nms(&m.crop(st.row, st.col, wr, wc)?, &ang)?;
            for r in 0..wr {
                for c in 0..wc {
                    let (gr, gc) = (st.row + r, st.col + c);
                    let v = local.get(r, c);
                    if v > out[k].get(gr, gc) {
                        out[k].set(gr, gc, v);
                    }
                }
            }
        }
    }
    let [ch, cv, cd] = out;
    Ok(Selection { ch, cv, cd, windows: stats, floor: if floor.is_nan() { 0.0 } else { floor } })
}

fn max3(v: [f64; 3]) -> f64 {
    v[0].max(v[1]).max(v[2])
}
