//! Raster primitives: the pixel container, grayscale conversion, gradients and
//! the dominant gradient direction of a region.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// BT.601 luma weights for R, G, B.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Name recorded in descriptor metadata for the RGB to gray map.
pub const GRAYSCALE_CONVENTION: &str = "bt601";

/// Row-major pixel grid with 1 or 3 interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterImage {
    width: usize,
    height: usize,
    channels: usize,
    n_bits: u32,
    data: Vec<u16>,
}

impl RasterImage {
    pub fn new(
        width: usize,
        height: usize,
        channels: usize,
        n_bits: u32,
        data: Vec<u16>,
    ) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "channel count must be 1 or 3, got {channels}"
            )));
        }
        if !(1..=16).contains(&n_bits) {
            return Err(Error::invalid(format!("unsupported bit depth {n_bits}")));
        }
        if data.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "data length {} does not match {width}x{height}x{channels}",
                data.len()
            )));
        }
        let max = ((1u32 << n_bits) - 1) as u16;
        if let Some(v) = data.iter().find(|&&v| v > max) {
            return Err(Error::invalid(format!(
                "value {v} exceeds {n_bits}-bit range"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            n_bits,
            data,
        })
    }

    /// 8-bit single-channel image built from a closure over `(x, y)`.
    pub fn gray_from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> u8) -> Self {
        let mut data = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y) as u16);
            }
        }
        Self {
            width,
            height,
            channels: 1,
            n_bits: 8,
            data,
        }
    }

    /// 8-bit RGB image built from a closure over `(x, y)`.
    pub fn rgb_from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> [u8; 3]) -> Self {
        let mut data = Vec::with_capacity(width * height * 3);
        for y in 0..height {
            for x in 0..width {
                data.extend(f(x, y).iter().map(|&v| v as u16));
            }
        }
        Self {
            width,
            height,
            channels: 3,
            n_bits: 8,
            data,
        }
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

    pub fn n_bits(&self) -> u32 {
        self.n_bits
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    /// Largest representable intensity, `2^n_bits - 1`.
    pub fn max_value(&self) -> u16 {
        ((1u32 << self.n_bits) - 1) as u16
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, c: usize) -> u16 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// The `(r, g, b)` triple at `(x, y)`; panics on single-channel images.
    #[inline]
    pub fn rgb(&self, x: usize, y: usize) -> [u16; 3] {
        assert_eq!(self.channels, 3);
        let i = (y * self.width + x) * 3;
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    pub fn pixels_rgb(&self) -> impl Iterator<Item = [u16; 3]> + '_ {
        assert_eq!(self.channels, 3);
        self.data.chunks_exact(3).map(|p| [p[0], p[1], p[2]])
    }

    /// Exact quarter turn. Pixel `(x, y)` lands at `(height - 1 - y, x)`,
    /// which turns gradient directions by +90 degrees (x right, y down).
    pub fn rotate_90(&self) -> Self {
        let (w, h, c) = (self.width, self.height, self.channels);
        let mut data = vec![0u16; self.data.len()];
        for y in 0..h {
            for x in 0..w {
                let (nx, ny) = (h - 1 - y, x);
                for k in 0..c {
                    data[(ny * h + nx) * c + k] = self.data[(y * w + x) * c + k];
                }
            }
        }
        Self {
            width: h,
            height: w,
            channels: c,
            n_bits: self.n_bits,
            data,
        }
    }

    /// Decodes any image file the `image` crate understands into 8-bit RGB.
    pub fn load_rgb(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let rgb = img.to_rgb8();
        let (w, h) = rgb.dimensions();
        Ok(Self {
            width: w as usize,
            height: h as usize,
            channels: 3,
            n_bits: 8,
            data: rgb.into_raw().into_iter().map(u16::from).collect(),
        })
    }

    /// Writes an 8-bit image as PNG.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        if self.n_bits != 8 {
            return Err(Error::invalid("PNG export requires an 8-bit image"));
        }
        let bytes: Vec<u8> = self.data.iter().map(|&v| v as u8).collect();
        let color = if self.channels == 1 {
            image::ExtendedColorType::L8
        } else {
            image::ExtendedColorType::Rgb8
        };
        image::save_buffer(
            path,
            &bytes,
            self.width as u32,
            self.height as u32,
            color,
        )
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// BT.601 luma, rounded and clamped to the source range.
pub fn to_grayscale(img: &RasterImage) -> Result<RasterImage> {
    if img.channels != 3 {
        return Err(Error::invalid(format!(
            "grayscale conversion needs 3 channels, got {}",
            img.channels
        )));
    }
    let max = img.max_value() as f64;
    let data = img
        .data
        .chunks_exact(3)
        .map(|p| {
            let luma = LUMA_WEIGHTS[0] * p[0] as f64
                + LUMA_WEIGHTS[1] * p[1] as f64
                + LUMA_WEIGHTS[2] * p[2] as f64;
            luma.round().clamp(0.0, max) as u16
        })
        .collect();
    Ok(RasterImage {
        width: img.width,
        height: img.height,
        channels: 1,
        n_bits: img.n_bits,
        data,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GradientOperator {
    /// Central differences inside, one-sided differences on the border.
    #[default]
    Central,
    /// 3x3 Sobel normalized by 1/8, replicated border.
    Sobel,
}

#[derive(Debug, Clone)]
pub struct GradientField {
    pub width: usize,
    pub height: usize,
    pub gx: Vec<f64>,
    pub gy: Vec<f64>,
    /// Degrees in `[0, 360)`, measured from +x towards +y.
    pub direction: Vec<f64>,
    pub magnitude: Vec<f64>,
}

impl GradientField {
    pub fn from_components(width: usize, height: usize, gx: Vec<f64>, gy: Vec<f64>) -> Self {
        assert_eq!(gx.len(), width * height);
        assert_eq!(gy.len(), width * height);
        let direction = gx
            .iter()
            .zip(&gy)
            .map(|(&x, &y)| direction_degrees(x, y))
            .collect();
        let magnitude = gx.iter().zip(&gy).map(|(&x, &y)| x.hypot(y)).collect();
        Self {
            width,
            height,
            gx,
            gy,
            direction,
            magnitude,
        }
    }
}

/// `atan2(gy, gx)` in degrees, mapped into `[0, 360)`.
///
/// The vector is first turned into the quadrant `x > 0, y >= 0` by whole
/// quarter turns, so a vector and its 90-degree rotation get angles that
/// differ by exactly 90. Zero vectors map to 0.
pub fn direction_degrees(gx: f64, gy: f64) -> f64 {
    let (quarter, x, y) = if gx > 0.0 && gy >= 0.0 {
        (0.0, gx, gy)
    } else if gx <= 0.0 && gy > 0.0 {
        (90.0, gy, -gx)
    } else if gx < 0.0 && gy <= 0.0 {
        (180.0, -gx, -gy)
    } else if gx >= 0.0 && gy < 0.0 {
        (270.0, -gy, gx)
    } else {
        return 0.0;
    };
    let within = if x == y {
        45.0
    } else {
        y.atan2(x).to_degrees()
    };
    quarter + within.clamp(0.0, 90.0 - 1e-12)
}

/// Per-pixel gradient of a single-channel image.
pub fn gradient(img: &RasterImage, op: GradientOperator) -> Result<GradientField> {
    if img.channels != 1 {
        return Err(Error::invalid("gradient needs a single-channel image"));
    }
    let values: Vec<f64> = img.data.iter().map(|&v| v as f64).collect();
    gradient_of(&values, img.width, img.height, op)
}

/// Gradient of a row-major `width x height` grid of reals.
pub fn gradient_of(
    values: &[f64],
    width: usize,
    height: usize,
    op: GradientOperator,
) -> Result<GradientField> {
    if width < 2 || height < 2 {
        return Err(Error::invalid(format!(
            "gradient needs at least 2x2 pixels, got {width}x{height}"
        )));
    }
    assert_eq!(values.len(), width * height);
    let at = |x: usize, y: usize| values[y * width + x];
    let mut gx = vec![0.0; width * height];
    let mut gy = vec![0.0; width * height];
    match op {
        GradientOperator::Central => {
            for y in 0..height {
                for x in 0..width {
                    let i = y * width + x;
                    gx[i] = if x == 0 {
                        at(1, y) - at(0, y)
                    } else if x == width - 1 {
                        at(x, y) - at(x - 1, y)
                    } else {
                        (at(x + 1, y) - at(x - 1, y)) / 2.0
                    };
                    gy[i] = if y == 0 {
                        at(x, 1) - at(x, 0)
                    } else if y == height - 1 {
                        at(x, y) - at(x, y - 1)
                    } else {
                        (at(x, y + 1) - at(x, y - 1)) / 2.0
                    };
                }
            }
        }
        GradientOperator::Sobel => {
            let clamp = |v: isize, n: usize| v.clamp(0, n as isize - 1) as usize;
            let px = |x: isize, y: isize| at(clamp(x, width), clamp(y, height));
            for y in 0..height as isize {
                for x in 0..width as isize {
                    let i = y as usize * width + x as usize;
                    gx[i] = (px(x + 1, y - 1) + 2.0 * px(x + 1, y) + px(x + 1, y + 1)
                        - px(x - 1, y - 1)
                        - 2.0 * px(x - 1, y)
                        - px(x - 1, y + 1))
                        / 8.0;
                    gy[i] = (px(x - 1, y + 1) + 2.0 * px(x, y + 1) + px(x + 1, y + 1)
                        - px(x - 1, y - 1)
                        - 2.0 * px(x, y - 1)
                        - px(x + 1, y - 1))
                        / 8.0;
                }
            }
        }
    }
    Ok(GradientField::from_components(width, height, gx, gy))
}

/// Center of the most populated 1-degree direction bin.
///
/// Only pixels with non-zero magnitude (and inside `mask`, when given) vote.
/// Ties go to the smallest bin index.
pub fn direction_mode(field: &GradientField, mask: Option<&[bool]>) -> Result<f64> {
    if let Some(m) = mask {
        if m.len() != field.direction.len() {
            return Err(Error::LengthMismatch {
                left: m.len(),
                right: field.direction.len(),
            });
        }
    }
    let mut bins = [0u32; 360];
    let mut any = false;
    for (i, (&dir, &mag)) in field.direction.iter().zip(&field.magnitude).enumerate() {
        if mag <= 0.0 || mask.is_some_and(|m| !m[i]) {
            continue;
        }
        bins[direction_bin(dir)] += 1;
        any = true;
    }
    if !any {
        return Err(Error::NoDominantDirection);
    }
    let mut best = 0;
    for (b, &count) in bins.iter().enumerate() {
        if count > bins[best] {
            best = b;
        }
    }
    Ok(best as f64 + 0.5)
}

#[inline]
pub(crate) fn direction_bin(degrees: f64) -> usize {
    (degrees.rem_euclid(360.0).floor() as usize).min(359)
}
