//! Image file input and output (PNG and binary PGM/PPM).

use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::RasterError;
use crate::raster::RasterImage;

/// Reads a PNG, PGM (P5) or PPM (P6) file. Alpha is composited over white;
/// color images stay three-channel, gray images one-channel.
pub fn load_image(path: impl AsRef<Path>) -> Result<RasterImage, RasterError> {
    let path = path.as_ref();
    let decoded = image::open(path).map_err(|source| RasterError::Decode { path: path.to_owned(), source })?;
    Ok(from_dynamic(decoded))
}

fn over_white(value: u8, alpha: u8) -> u8 {
    let (v, a) = (value as u32, alpha as u32);
    ((v * a + 255 * (255 - a) + 127) / 255) as u8
}

fn from_dynamic(img: DynamicImage) -> RasterImage {
    let (width, height) = (img.width() as usize, img.height() as usize);
    let has_color = img.color().has_color();
    let has_alpha = img.color().has_alpha();
    let data = match (has_color, has_alpha) {
        (false, false) => img.into_luma8().into_raw(),
        (true, false) => img.into_rgb8().into_raw(),
        (false, true) => img
            .into_luma_alpha8()
            .into_raw()
            .chunks_exact(2)
            .map(|px| over_white(px[0], px[1]))
            .collect(),
        (true, true) => img
            .into_rgba8()
            .into_raw()
            .chunks_exact(4)
            .flat_map(|px| [over_white(px[0], px[3]), over_white(px[1], px[3]), over_white(px[2], px[3])])
            .collect(),
    };
    let channels = if has_color { 3 } else { 1 };
    RasterImage::new(width, height, channels, data).expect("decoder output matches its dimensions")
}

/// Writes the image; the format follows the file extension (`.png`, `.pgm`, `.ppm`).
pub fn save_image(path: impl AsRef<Path>, img: &RasterImage) -> Result<(), RasterError> {
    let path = path.as_ref();
    let color = if img.channels() == 1 { ExtendedColorType::L8 } else { ExtendedColorType::Rgb8 };
    let (w, h) = (img.width() as u32, img.height() as u32);
    let encode_err = |source| RasterError::Encode { path: path.to_owned(), source };
    let ext = path.extension().and_then(|e| e.to_str()).map(str::to_ascii_lowercase);
    // The generic encoder picks PAM (P7) for .pgm/.ppm; force the binary subtypes.
    let subtype = match ext.as_deref() {
        Some("pgm") => Some(PnmSubtype::Graymap(SampleEncoding::Binary)),
        Some("ppm") => Some(PnmSubtype::Pixmap(SampleEncoding::Binary)),
        _ => None,
    };
    match subtype {
        Some(subtype) => {
            let file = std::fs::File::create(path).map_err(|e| encode_err(image::ImageError::IoError(e)))?;
            PnmEncoder::new(std::io::BufWriter::new(file))
                .with_subtype(subtype)
                .write_image(img.data(), w, h, color)
                .map_err(encode_err)
        }
        None => image::save_buffer(path, img.data(), w, h, color).map_err(encode_err),
    }
}
