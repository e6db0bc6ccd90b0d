//! Raster containers and the threshold preprocessing that turns an input plan
//! into a clean black-and-white image.

use crate::error::RasterError;

/// Default binarization threshold: a pixel is ink iff its intensity is below it.
pub const DEFAULT_THRESHOLD: u8 = 128;

/// An 8-bit raster with one (gray) or three (RGB) interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<u8>,
}

impl RasterImage {
    /// Wraps row-major interleaved samples.
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<u8>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage);
        }
        if channels != 1 && channels != 3 {
            return Err(RasterError::UnsupportedChannels(channels));
        }
        let expected = width * height * channels;
        if data.len() != expected {
            return Err(RasterError::DataLength { expected, found: data.len() });
        }
        Ok(Self { width, height, channels, data })
    }

    /// A single-channel image filled with `value`.
    pub fn filled_gray(width: usize, height: usize, value: u8) -> Result<Self, RasterError> {
        Self::new(width, height, 1, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn data(&self) -> &[u8] {
        &self.data
    }

    pub fn into_data(self) -> Vec<u8> {
        self.data
    }

    /// Sample at `(x, y)` for channel `c`. Panics when out of range.
    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u8 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, c: usize, value: u8) {
        self.data[(y * self.width + x) * self.channels + c] = value;
    }
}

/// A boolean mask where `true` marks ink (wall) pixels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    data: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize, data: Vec<bool>) -> Result<Self, RasterError> {
        if width == 0 || height == 0 {
            return Err(RasterError::EmptyImage);
        }
        if data.len() != width * height {
            return Err(RasterError::DataLength { expected: width * height, found: data.len() });
        }
        Ok(Self { width, height, data })
    }

    /// An all-background image.
    pub fn blank(width: usize, height: usize) -> Result<Self, RasterError> {
        Self::new(width, height, vec![false; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[bool] {
        &self.data
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> bool {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, ink: bool) {
        self.data[y * self.width + x] = ink;
    }

    pub fn ink_count(&self) -> usize {
        self.data.iter().filter(|&&v| v).count()
    }

    /// Re-expands the mask to intensities: ink 0, background 255.
    pub fn to_gray(&self) -> RasterImage {
        let data = self.data.iter().map(|&ink| if ink { 0 } else { 255 }).collect();
        RasterImage { width: self.width, height: self.height, channels: 1, data }
    }
}

/// Collapses RGB to one channel by the rounded arithmetic mean of the three
/// samples. Gray input is returned unchanged.
pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage, RasterError> {
    match img.channels {
        1 => Ok(img.clone()),
        3 => {
            // A mean of three integers never lands on .5, so (sum + 1) / 3 is round().
            let data = img
                .data
                .chunks_exact(3)
                .map(|px| ((px[0] as u16 + px[1] as u16 + px[2] as u16 + 1) / 3) as u8)
                .collect();
            Ok(RasterImage { width: img.width, height: img.height, channels: 1, data })
        }
        c => Err(RasterError::UnsupportedChannels(c)),
    }
}

/// Marks every pixel with intensity strictly below `threshold` as ink.
pub fn binarize(gray: &RasterImage, threshold: u8) -> Result<BinaryImage, RasterError> {
    if gray.channels != 1 {
        return Err(RasterError::ChannelMismatch { expected: 1, found: gray.channels });
    }
    let data = gray.data.iter().map(|&v| v < threshold).collect();
    Ok(BinaryImage { width: gray.width, height: gray.height, data })
}

/// Renders the mask back to RGB: ink black, background white.
pub fn to_rgb(binary: &BinaryImage) -> RasterImage {
    let mut data = Vec::with_capacity(binary.data.len() * 3);
    for &ink in &binary.data {
        let v = if ink { 0 } else { 255 };
        data.extend_from_slice(&[v, v, v]);
    }
    RasterImage { width: binary.width, height: binary.height, channels: 3, data }
}

/// Full preprocessing: grayscale, then threshold.
pub fn preprocess(img: &RasterImage, threshold: u8) -> Result<BinaryImage, RasterError> {
    binarize(&to_grayscale(img)?, threshold)
}
