//! Deterministic synthetic scenes with known edge locations.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::grid::ImageGrid;

/// Shapes available for synthetic test images.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    /// Axis-aligned square covering the middle half of the image.
    Square,
    /// Disk of radius `n / 4` centred in the image.
    Disk,
    /// Right triangle with its right angle at the upper-left quarter point.
    Triangle,
}

/// Binary `n × n` image: 1 inside the shape, 0 outside.
pub fn shape_image(shape: Shape, n: usize) -> ImageGrid {
    let q = n / 4;
    let centre = (n as f64 - 1.0) / 2.0;
    let radius = n as f64 / 4.0;
    ImageGrid::from_fn(n, n, |r, c| {
        let inside = match shape {
            Shape::Square => (q..n - q).contains(&r) && (q..n - q).contains(&c),
            Shape::Disk => {
                let (dy, dx) = (r as f64 - centre, c as f64 - centre);
                dy * dy + dx * dx <= radius * radius
            }
            Shape::Triangle => r >= q && c >= q && r < n - q && (c - q) <= (r - q),
        };
        if inside {
            1.0
        } else {
            0.0
        }
    })
}

/// The 128×128 test square (rows and columns 32..96 set to 1).
pub fn square(n: usize) -> ImageGrid {
    shape_image(Shape::Square, n)
}

/// Adds zero-mean Gaussian noise of standard deviation `sigma`, seeded, and
/// clips to `[0, 1]`.
pub fn add_gaussian_noise(img: &ImageGrid, sigma: f64, seed: u64) -> ImageGrid {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sigma).expect("sigma must be finite and non-negative");
    let mut out = img.clone();
    for v in out.data_mut() {
        *v = (*v + normal.sample(&mut rng)).clamp(0.0, 1.0);
    }
    out
}

/// One-pixel inner contour of a binary image: foreground pixels with at
/// least one 4-neighbour in the background (the image border counts as
/// foreground-preserving, i.e. replicated).
pub fn inner_contour(binary: &ImageGrid) -> ImageGrid {
    let (h, w) = binary.dims();
    ImageGrid::from_fn(h, w, |r, c| {
        if binary.get(r, c) <= 0.5 {
            return 0.0;
        }
        let at = |dr: i64, dc: i64| {
            let rr = (r as i64 + dr).clamp(0, h as i64 - 1) as usize;
            let cc = (c as i64 + dc).clamp(0, w as i64 - 1) as usize;
            binary.get(rr, cc)
        };
        if [(-1, 0), (1, 0), (0, -1), (0, 1)].iter().any(|&(dr, dc)| at(dr, dc) <= 0.5) {
            1.0
        } else {
            0.0
        }
    })
}
