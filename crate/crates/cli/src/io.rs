//! Image decoding and encoding plus atomic file output.

use std::io::{Cursor, Write};
use std::path::{Path, PathBuf};

use edbsw_core::ImageGrid;
use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ImageFormat, ImageReader};

use crate::error::{CliError, CliResult};

/// Rec.601 luma weights.
pub const LUMA: [f32; 3] = [0.299, 0.587, 0.114];

fn is_supported_extension(path: &Path) -> bool {
    matches!(
        path.extension().and_then(|e| e.to_str()).map(|e| e.to_ascii_lowercase()).as_deref(),
        Some("png") | Some("pgm")
    )
}

/// Reads a PNG or binary PGM file as a grayscale grid in `[0, 1]`.
///
/// Colour images are reduced with the Rec.601 weights; alpha is ignored.
pub fn read_gray(path: &Path) -> CliResult<ImageGrid> {
    let fail = |e: &dyn std::fmt::Display| CliError::input(format!("cannot read {}: {e}", path.display()));
    let reader = ImageReader::open(path).map_err(|e| fail(&e))?.with_guessed_format().map_err(|e| fail(&e))?;
    match reader.format() {
        Some(ImageFormat::Png) | Some(ImageFormat::Pnm) => {}
        _ => return Err(fail(&"only PNG and PGM inputs are supported")),
    }
    let img = reader.decode().map_err(|e| fail(&e))?;
    Ok(to_grid(&img))
}

/// Converts a decoded image to a `[0, 1]` grid.
pub fn to_grid(img: &DynamicImage) -> ImageGrid {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f64> = if img.color().has_color() {
        img.to_rgb32f().pixels().map(|p| (LUMA[0] * p[0] + LUMA[1] * p[1] + LUMA[2] * p[2]) as f64).collect()
    } else {
        img.to_luma32f().pixels().map(|p| p[0] as f64).collect()
    };
    ImageGrid::new(h, w, data.into_iter().map(|v| v.clamp(0.0, 1.0)).collect())
        .expect("decoded image has matching, finite samples")
}

/// 8-bit samples `round(255·v)` of a `[0, 1]` grid.
pub fn to_bytes(g: &ImageGrid) -> Vec<u8> {
    g.data().iter().map(|v| (255.0 * v.clamp(0.0, 1.0)).round() as u8).collect()
}

pub fn encode_png(g: &ImageGrid) -> Vec<u8> {
    let img = image::GrayImage::from_raw(g.width() as u32, g.height() as u32, to_bytes(g)).expect("buffer size");
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png).expect("in-memory PNG encoding");
    out.into_inner()
}

pub fn encode_pgm(g: &ImageGrid) -> Vec<u8> {
    let mut out = Vec::new();
    PnmEncoder::new(&mut out)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .encode(to_bytes(g).as_slice(), g.width() as u32, g.height() as u32, image::ExtendedColorType::L8)
        .expect("in-memory PGM encoding");
    out
}

/// Writes a grid as PNG or PGM depending on the extension (PNG otherwise).
pub fn write_gray(path: &Path, g: &ImageGrid) -> CliResult<()> {
    let is_pgm = path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    let bytes = if is_pgm { encode_pgm(g) } else { encode_png(g) };
    atomic_write(path, &bytes)
}

/// Writes `bytes` to a temporary file next to `path`, then renames it into
/// place so readers never observe a partial file.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: &dyn std::fmt::Display| CliError::input(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).map_err(|e| fail(&e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir).map_err(|e| fail(&e))?;
    tmp.write_all(bytes).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

/// Supported images directly inside `dir`, sorted by file name.
pub fn list_images(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(dir).map_err(|e| CliError::input(format!("cannot list {}: {e}", dir.display())))?;
    let mut files: Vec<PathBuf> =
        entries.filter_map(|e| e.ok().map(|e| e.path())).filter(|p| p.is_file() && is_supported_extension(p)).collect();
    files.sort();
    if files.is_empty() {
        return Err(CliError::input(format!("no PNG or PGM images in {}", dir.display())));
    }
    Ok(files)
}

/// File stem used as the image identifier.
pub fn image_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

/// Finds `<dir>/<id>.png` or `<dir>/<id>.pgm`.
pub fn find_by_id(dir: &Path, id: &str) -> Option<PathBuf> {
    ["png", "pgm", "PNG", "PGM"].iter().map(|ext| dir.join(format!("{id}.{ext}"))).find(|p| p.is_file())
}
