//! PNG output for color composites.

use std::path::Path;

use hspan_core::analysis::{render_rgb, Roi, RgbImage};
use hspan_core::HyperCube;

use crate::error::{Error, Result};

pub const TRUE_COLOR_NM: [f64; 3] = [641.0, 563.0, 478.0];
pub const FALSE_COLOR_NM: [f64; 3] = [1586.0, 1229.0, 770.0];

/// Percentile-stretched composite of an optional crop.
pub fn composite(cube: &HyperCube, wavelengths_nm: [f64; 3], stretch: (f64, f64), roi: Option<Roi>) -> Result<RgbImage> {
    let cropped;
    let source = match roi {
        Some(r) => {
            cropped = cube.crop(r.x, r.y, r.width, r.height)?;
            &cropped
        }
        None => cube,
    };
    Ok(render_rgb(source, wavelengths_nm, stretch)?)
}

pub fn write_png(path: &Path, img: &RgbImage) -> Result<()> {
    let buffer = image::RgbImage::from_raw(img.width as u32, img.height as u32, img.pixels.clone())
        .ok_or_else(|| Error::Invalid("pixel buffer does not match image size".into()))?;
    buffer.save_with_format(path, image::ImageFormat::Png)?;
    Ok(())
}
