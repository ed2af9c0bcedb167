//! Row-major real-valued raster used for images, subbands and edge maps.

use crate::error::{Error, Result};

/// A dense `height × width` grid of `f64` values stored row by row.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

/// Edge strength map with values in `[0, 1]`; 0 means "no edge".
pub type EdgeMap = ImageGrid;

impl ImageGrid {
    /// Wraps `data` as a grid, checking length and finiteness.
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension(format!("grid must be non-empty, got {height}x{width}")));
        }
        if data.len() != height * width {
            return Err(Error::Dimension(format!(
                "expected {} values for a {height}x{width} grid, got {}",
                height * width,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at row {}, column {}", i / width, i % width)));
        }
        Ok(Self { height, width, data })
    }

    pub fn filled(height: usize, width: usize, value: f64) -> Self {
        assert!(height > 0 && width > 0, "grid must be non-empty");
        Self { height, width, data: vec![value; height * width] }
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Self::filled(height, width, 0.0)
    }

    /// Builds a grid by evaluating `f(row, col)` at every pixel.
    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(height > 0 && width > 0, "grid must be non-empty");
        let mut data = Vec::with_capacity(height * width);
        for r in 0..height {
            for c in 0..width {
                data.push(f(r, c));
            }
        }
        Self { height, width, data }
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    /// `(height, width)`.
    #[inline]
    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.width + col] = value;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.width..(r + 1) * self.width]
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { height: self.height, width: self.width, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination of two equally sized grids.
    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.ensure_same_dims(other)?;
        Ok(Self {
            height: self.height,
            width: self.width,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn ensure_same_dims(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() {
            return Err(Error::Dimension(format!(
                "grid shapes differ: {}x{} vs {}x{}",
                self.height, self.width, other.height, other.width
            )));
        }
        Ok(())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.width, self.height, |r, c| self.get(c, r))
    }

    /// Copies the sub-rectangle starting at `(row, col)`.
    pub fn crop(&self, row: usize, col: usize, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 || row + height > self.height || col + width > self.width {
            return Err(Error::Dimension(format!(
                "crop {height}x{width} at ({row},{col}) exceeds {}x{}",
                self.height, self.width
            )));
        }
        Ok(Self::from_fn(height, width, |r, c| self.get(row + r, col + c)))
    }

    /// Largest absolute pointwise difference to `other` (grids must match).
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        self.ensure_same_dims(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// Number of strictly positive pixels.
    pub fn count_positive(&self) -> usize {
        self.data.iter().filter(|&&v| v > 0.0).count()
    }
}

/// Divides by the grid maximum when it is meaningfully positive.
///
/// Maps whose peak is below `1e-12` are treated as empty and returned as
/// zeros, so floating-point dust on flat inputs never gets stretched to 1.
pub fn normalize_max(g: &ImageGrid) -> ImageGrid {
    let m = g.max();
    if m > 1e-12 {
        g.map(|v| v / m)
    } else {
        ImageGrid::zeros(g.height(), g.width())
    }
}

/// Subtracts the grid minimum and then applies [`normalize_max`].
pub fn normalize_offset(g: &ImageGrid) -> ImageGrid {
    let lo = g.min();
    normalize_max(&g.map(|v| v - lo))
}
