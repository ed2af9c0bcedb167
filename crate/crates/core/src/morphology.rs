//! Grayscale morphology with weighted 3×3 structuring elements.
//!
//! Operators work on an 8-bit style intensity scale: callers pass grids in
//! that scale (see [`MorphConfig::scale`]), borders are replicated and every
//! erosion or dilation result is clamped to `[0, scale]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{normalize_offset, ImageGrid};

/// A 3×3 weighted neighbourhood. Index `[1][1]` is the origin and
/// `[1 + dy][1 + dx]` the offset `(dy, dx)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructuringElement {
    pub name: String,
    pub weights: [[f64; 3]; 3],
    pub domain: [[bool; 3]; 3],
}

impl StructuringElement {
    pub fn new(name: impl Into<String>, weights: [[f64; 3]; 3], domain: [[bool; 3]; 3]) -> Result<Self> {
        if !domain.iter().flatten().any(|&d| d) {
            return Err(Error::Parameter("structuring element needs a non-empty domain".into()));
        }
        if weights.iter().flatten().any(|w| !w.is_finite()) {
            return Err(Error::Parameter("structuring element weights must be finite".into()));
        }
        Ok(Self { name: name.into(), weights, domain })
    }

    /// Element with every entry in the domain.
    pub fn full(name: impl Into<String>, weights: [[f64; 3]; 3]) -> Self {
        Self::new(name, weights, [[true; 3]; 3]).expect("full domain is non-empty")
    }

    /// Flat 3×3 element (all weights 0).
    pub fn flat() -> Self {
        Self::full("flat", [[0.0; 3]; 3])
    }

    /// Same element with zero-weight entries removed from the domain.
    pub fn without_zero_entries(&self) -> Result<Self> {
        let mut domain = self.domain;
        for (r, row) in self.weights.iter().enumerate() {
            for (c, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    domain[r][c] = false;
                }
            }
        }
        Self::new(format!("{}-nz", self.name), self.weights, domain)
    }

    /// Point reflection through the origin.
    pub fn reflected(&self) -> Self {
        let mut w = [[0.0; 3]; 3];
        let mut d = [[false; 3]; 3];
        for r in 0..3 {
            for c in 0..3 {
                w[r][c] = self.weights[2 - r][2 - c];
                d[r][c] = self.domain[2 - r][2 - c];
            }
        }
        Self { name: format!("{}-reflected", self.name), weights: w, domain: d }
    }

    pub fn max_weight(&self) -> f64 {
        self.entries().map(|(_, _, w)| w).fold(f64::NEG_INFINITY, f64::max)
    }

    /// `(dy, dx, weight)` for every domain entry.
    pub fn entries(&self) -> impl Iterator<Item = (i64, i64, f64)> + '_ {
        (0..3).flat_map(move |r| {
            (0..3).filter(move |&c| self.domain[r][c]).map(move |c| (r as i64 - 1, c as i64 - 1, self.weights[r][c]))
        })
    }
}

/// Morphology settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorphConfig {
    /// Amplifier applied to the three anti-noise elements.
    pub mu: f64,
    /// Upper end of the working intensity range (lower end is 0).
    pub scale: f64,
    /// Treat zero entries of the elements as part of their domains.
    pub zero_weight_in_domain: bool,
}

impl Default for MorphConfig {
    fn default() -> Self {
        Self { mu: 2.0, scale: 255.0, zero_weight_in_domain: true }
    }
}

impl MorphConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() || self.mu <= 0.0 {
            return Err(Error::Parameter(format!("mu must be positive, got {}", self.mu)));
        }
        if !self.scale.is_finite() || self.scale <= 0.0 {
            return Err(Error::Parameter(format!("scale must be positive, got {}", self.scale)));
        }
        Ok(())
    }
}

/// The four built-in elements `(λ1, λ2, λ3, λh)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BuiltinElements {
    pub lambda1: StructuringElement,
    pub lambda2: StructuringElement,
    pub lambda3: StructuringElement,
    pub lambda_h: StructuringElement,
}

fn scaled(m: [[f64; 3]; 3], mu: f64) -> [[f64; 3]; 3] {
    m.map(|row| row.map(|v| v * mu))
}

/// Builds `λ1..λ3` scaled by `cfg.mu` and the unscaled Laplacian-shaped `λh`.
pub fn builtin_elements(cfg: &MorphConfig) -> Result<BuiltinElements> {
    cfg.validate()?;
    let l1 = StructuringElement::full("lambda1", scaled([[0.5, 1.0, 0.5], [1.0, 2.0, 1.0], [0.5, 1.0, 0.5]], cfg.mu));
    let mut l2 =
        StructuringElement::full("lambda2", scaled([[0.0, 0.5, 0.0], [0.5, 0.5, 0.5], [0.0, 0.5, 0.0]], cfg.mu));
    let mut l3 =
        StructuringElement::full("lambda3", scaled([[0.5, 0.0, 0.5], [0.0, 0.5, 0.0], [0.5, 0.0, 0.5]], cfg.mu));
    if !cfg.zero_weight_in_domain {
        l2 = l2.without_zero_entries()?;
        l3 = l3.without_zero_entries()?;
    }
    let lh = StructuringElement::full("lambda_h", [[-1.0, -1.0, -1.0], [-1.0, 8.0, -1.0], [-1.0, -1.0, -1.0]]);
    Ok(BuiltinElements { lambda1: l1, lambda2: l2, lambda3: l3, lambda_h: lh })
}

#[inline]
fn clamp_index(i: i64, n: usize) -> usize {
    i.clamp(0, n as i64 - 1) as usize
}

/// Unclamped erosion `min_{o ∈ domain} g(x + o) − w(o)` with replicated borders.
pub fn erode_raw(g: &ImageGrid, elem: &StructuringElement) -> ImageGrid {
    let (h, w) = g.dims();
    let entries: Vec<(i64, i64, f64)> = elem.entries().collect();
    ImageGrid::from_fn(h, w, |r, c| {
        entries.iter().fold(f64::INFINITY, |acc, &(dy, dx, wt)| {
            acc.min(g.get(clamp_index(r as i64 + dy, h), clamp_index(c as i64 + dx, w)) - wt)
        })
    })
}

/// Unclamped dilation `max_{o ∈ domain} g(x − o) + w(o)` with replicated
/// borders (the element is reflected, as in the Minkowski sum).
pub fn dilate_raw(g: &ImageGrid, elem: &StructuringElement) -> ImageGrid {
    let (h, w) = g.dims();
    let entries: Vec<(i64, i64, f64)> = elem.entries().collect();
    ImageGrid::from_fn(h, w, |r, c| {
        entries.iter().fold(f64::NEG_INFINITY, |acc, &(dy, dx, wt)| {
            acc.max(g.get(clamp_index(r as i64 - dy, h), clamp_index(c as i64 - dx, w)) + wt)
        })
    })
}

/// Erosion clamped to `[0, scale]`.
pub fn erode(g: &ImageGrid, elem: &StructuringElement, scale: f64) -> ImageGrid {
    erode_raw(g, elem).map(|v| v.clamp(0.0, scale))
}

/// Dilation clamped to `[0, scale]`.
pub fn dilate(g: &ImageGrid, elem: &StructuringElement, scale: f64) -> ImageGrid {
    dilate_raw(g, elem).map(|v| v.clamp(0.0, scale))
}

/// Opening: erosion followed by dilation with the same element.
pub fn open(g: &ImageGrid, elem: &StructuringElement, scale: f64) -> ImageGrid {
    dilate(&erode(g, elem, scale), elem, scale)
}

/// Closing: dilation followed by erosion.
pub fn close(g: &ImageGrid, elem: &StructuringElement, scale: f64) -> ImageGrid {
    erode(&dilate(g, elem, scale), elem, scale)
}

fn to_working(g: &ImageGrid, scale: f64) -> ImageGrid {
    g.map(|v| (v * scale).clamp(0.0, scale))
}

/// Multi-structure anti-noise response on a `[0, 1]` image.
///
/// With `m = (g ⊕ λ1) ⊖ λ2` the raw response is `(m ∘ λ3) − (m ⊖ λ3)`.
/// That difference carries a constant offset of `max λ3` on flat regions, so
/// the grid minimum is subtracted before dividing by the maximum.
pub fn anti_noise(g: &ImageGrid, cfg: &MorphConfig) -> Result<ImageGrid> {
    let el = builtin_elements(cfg)?;
    let s = cfg.scale;
    let x = to_working(g, s);
    let m = erode(&dilate(&x, &el.lambda1, s), &el.lambda2, s);
    let e = erode(&m, &el.lambda3, s);
    let o = dilate(&e, &el.lambda3, s);
    let raw = o.zip_map(&e, |a, b| a - b)?;
    Ok(normalize_offset(&raw))
}

/// Morphological gradient with `λh` on a `[0, 1]` image, offset-removed and
/// scaled to `[0, 1]`.
pub fn refine(g: &ImageGrid, cfg: &MorphConfig) -> Result<ImageGrid> {
    let el = builtin_elements(cfg)?;
    let s = cfg.scale;
    let x = to_working(g, s);
    let raw = dilate(&x, &el.lambda_h, s).zip_map(&erode(&x, &el.lambda_h, s), |a, b| a - b)?;
    Ok(normalize_offset(&raw))
}

/// Elementary step used by geodesic reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReconstructionStep {
    /// `g_i = min(g_{i-1} ⊖ λ, mask)`.
    Erosion,
    /// `g_i = min(g_{i-1} ⊕ λ, mask)`, classical reconstruction by dilation.
    Dilation,
}

/// Outcome of an iterated reconstruction.
#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub grid: ImageGrid,
    pub iterations: usize,
}

/// Iterates `g_i = min(step(g_{i-1}, λ), mask)` from `g_0 = marker` with
/// synchronous full-grid sweeps until the largest change is below `1e-9`.
///
/// Grids are in the `[0, 1]` scale; `λ` is applied in the working scale.
/// The iteration cap is `height · width`.
pub fn reconstruct_with(
    marker: &ImageGrid,
    mask: &ImageGrid,
    elem: &StructuringElement,
    step: ReconstructionStep,
    scale: f64,
) -> Result<Reconstruction> {
    marker.ensure_same_dims(mask)?;
    let cap = marker.len();
    let mut g = marker.clone();
    let mut residual = f64::INFINITY;
    for i in 1..=cap {
        let working = g.map(|v| v * scale);
        let moved = match step {
            ReconstructionStep::Erosion => erode(&working, elem, scale),
            ReconstructionStep::Dilation => dilate(&working, elem, scale),
        };
        let next = moved.zip_map(mask, |a, m| (a / scale).min(m))?;
        residual = next.max_abs_diff(&g)?;
        g = next;
        if residual < 1e-9 {
            return Ok(Reconstruction { grid: g, iterations: i });
        }
    }
    Err(Error::NonConvergence { iterations: cap, residual })
}

/// Reconstruction by iterated erosion under the mask, `G_i = min(E(G_{i-1}), mask)`.
pub fn reconstruct(marker: &ImageGrid, mask: &ImageGrid, elem: &StructuringElement) -> Result<ImageGrid> {
    reconstruct_with(marker, mask, elem, ReconstructionStep::Erosion, 255.0).map(|r| r.grid)
}

/// Pointwise `α·a + (1 − α)·b`.
pub fn weighted_fuse(a: &ImageGrid, b: &ImageGrid, alpha: f64) -> Result<ImageGrid> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    if alpha == 1.0 {
        a.ensure_same_dims(b)?;
        return Ok(a.clone());
    }
    if alpha == 0.0 {
        a.ensure_same_dims(b)?;
        return Ok(b.clone());
    }
    a.zip_map(b, |x, y| alpha * x + (1.0 - alpha) * y)
}
