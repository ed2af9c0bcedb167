//! Fixtures shared by the criterion benchmarks in `benches/`.

use edbsw_core::synthetic::{add_gaussian_noise, shape_image, Shape};
use edbsw_core::ImageGrid;

/// Noisy `n × n` disk, the standard benchmark input.
pub fn scene(n: usize) -> ImageGrid {
    add_gaussian_noise(&shape_image(Shape::Disk, n), 0.1, 0)
}

/// Image sides exercised by the size sweeps.
pub const SIDES: [usize; 3] = [64, 128, 256];
