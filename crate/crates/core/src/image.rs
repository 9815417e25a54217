//! Pixel buffers plus the decode, resample and grayscale steps every measure
//! consumes.
//!
//! Samples are stored either as 8-bit integers or unit-interval `f32`.
//! All arithmetic runs in double precision; rounding happens only when a
//! result is written back into an 8-bit buffer (half away from zero).

use std::path::Path;

use crate::error::{Error, Result};
use crate::real::Real;

/// Colour interpretation of the stored samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Encoding {
    /// Nonlinear (gamma-encoded) sRGB, 3 channels.
    Srgb,
    /// Linear-light RGB, 3 channels.
    LinearRgb,
    /// Single luminance channel.
    Grayscale,
}

/// Sample storage: 8-bit integers in [0,255] or floats in [0,1].
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    U8(Vec<u8>),
    F32(Vec<f32>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depth {
    U8,
    F32,
}

/// Row-major, channel-interleaved pixel container.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    encoding: Encoding,
    data: Samples,
}

impl ImageBuffer {
    /// Wraps 8-bit samples. `data` must hold `width * height * channels`
    /// row-major interleaved values.
    pub fn from_u8(
        width: usize,
        height: usize,
        channels: usize,
        encoding: Encoding,
        data: Vec<u8>,
    ) -> Result<Self> {
        validate_shape(width, height, channels, data.len())?;
        Ok(Self { width, height, channels, encoding, data: Samples::U8(data) })
    }

    /// Wraps unit-interval float samples.
    pub fn from_f32(
        width: usize,
        height: usize,
        channels: usize,
        encoding: Encoding,
        data: Vec<f32>,
    ) -> Result<Self> {
        validate_shape(width, height, channels, data.len())?;
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidBuffer(format!(
                "float sample {v} outside the unit interval"
            )));
        }
        Ok(Self { width, height, channels, encoding, data: Samples::F32(data) })
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

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn depth(&self) -> Depth {
        match self.data {
            Samples::U8(_) => Depth::U8,
            Samples::F32(_) => Depth::F32,
        }
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    pub fn samples(&self) -> &Samples {
        &self.data
    }

    #[inline]
    fn index(&self, x: usize, y: usize, ch: usize) -> usize {
        (y * self.width + x) * self.channels + ch
    }

    /// Sample on the 8-bit scale: integers verbatim, floats scaled by 255
    /// without rounding.
    #[inline]
    pub fn sample_255<T: Real>(&self, x: usize, y: usize, ch: usize) -> T {
        let i = self.index(x, y, ch);
        match &self.data {
            Samples::U8(d) => T::from_u8(d[i]).unwrap(),
            Samples::F32(d) => T::from_f32(d[i]).unwrap() * T::from_u8(255).unwrap(),
        }
    }

    /// Sample on the unit scale: floats verbatim, integers divided by 255
    /// exactly.
    #[inline]
    pub fn sample_unit<T: Real>(&self, x: usize, y: usize, ch: usize) -> T {
        let i = self.index(x, y, ch);
        match &self.data {
            Samples::U8(d) => T::from_u8(d[i]).unwrap() / T::from_u8(255).unwrap(),
            Samples::F32(d) => T::from_f32(d[i]).unwrap(),
        }
    }

    /// Unit-scale RGB triple of a 3-channel image.
    #[inline]
    pub fn pixel_unit<T: Real>(&self, x: usize, y: usize) -> [T; 3] {
        [
            self.sample_unit(x, y, 0),
            self.sample_unit(x, y, 1),
            self.sample_unit(x, y, 2),
        ]
    }

    /// Converts to float depth (exact: integer samples divided by 255).
    pub fn to_f32_depth(&self) -> ImageBuffer {
        let data = match &self.data {
            Samples::U8(d) => d.iter().map(|&v| v as f32 / 255.0).collect(),
            Samples::F32(d) => d.clone(),
        };
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: self.channels,
            encoding: self.encoding,
            data: Samples::F32(data),
        }
    }

    /// Converts to 8-bit depth, rounding half away from zero.
    pub fn to_u8_depth(&self) -> ImageBuffer {
        let data = match &self.data {
            Samples::U8(d) => d.clone(),
            Samples::F32(d) => d
                .iter()
                .map(|&v| (f64::from(v) * 255.0).round().clamp(0.0, 255.0) as u8)
                .collect(),
        };
        ImageBuffer {
            width: self.width,
            height: self.height,
            channels: self.channels,
            encoding: self.encoding,
            data: Samples::U8(data),
        }
    }
}

fn validate_shape(width: usize, height: usize, channels: usize, len: usize) -> Result<()> {
    if width == 0 || height == 0 {
        return Err(Error::InvalidBuffer(format!("degenerate size {width}x{height}")));
    }
    if channels != 1 && channels != 3 {
        return Err(Error::InvalidBuffer(format!("{channels} channels, expected 1 or 3")));
    }
    let expected = width * height * channels;
    if len != expected {
        return Err(Error::InvalidBuffer(format!(
            "{len} samples for a {width}x{height}x{channels} buffer, expected {expected}"
        )));
    }
    Ok(())
}

/// Decodes a PNG or JPEG file into an 8-bit sRGB 3-channel buffer.
/// Grayscale sources are expanded to 3 channels.
pub fn load_image(path: impl AsRef<Path>) -> Result<ImageBuffer> {
    let path = path.as_ref();
    let decoded = image::open(path).map_err(|source| Error::Decode {
        path: path.to_path_buf(),
        source,
    })?;
    let rgb = decoded.into_rgb8();
    let (w, h) = (rgb.width() as usize, rgb.height() as usize);
    ImageBuffer::from_u8(w, h, 3, Encoding::Srgb, rgb.into_raw())
}

/// Encodes a buffer as an 8-bit PNG (float buffers are rounded first).
pub fn save_png(img: &ImageBuffer, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let u8img = img.to_u8_depth();
    let Samples::U8(data) = u8img.data else { unreachable!() };
    let (w, h) = (img.width as u32, img.height as u32);
    let err = |source| Error::Encode { path: path.to_path_buf(), source };
    match img.channels {
        1 => image::GrayImage::from_raw(w, h, data)
            .expect("validated shape")
            .save(path)
            .map_err(err),
        _ => image::RgbImage::from_raw(w, h, data)
            .expect("validated shape")
            .save(path)
            .map_err(err),
    }
}

/// Bilinear resampling with center-aligned sample positions and edge clamp.
///
/// Output dimensions are `round(input * scale)`; `scale = 1` returns a
/// sample-identical copy.
pub fn resize_bilinear(img: &ImageBuffer, scale: f64) -> Result<ImageBuffer> {
    if !(scale > 0.0 && scale <= 1.0) {
        return Err(Error::DegenerateResize {
            width: img.width,
            height: img.height,
            scale,
        });
    }
    let out_w = (img.width as f64 * scale).round() as usize;
    let out_h = (img.height as f64 * scale).round() as usize;
    if out_w == 0 || out_h == 0 {
        return Err(Error::DegenerateResize {
            width: img.width,
            height: img.height,
            scale,
        });
    }

    let x_ratio = img.width as f64 / out_w as f64;
    let y_ratio = img.height as f64 / out_h as f64;
    let ch = img.channels;
    let mut out = vec![0.0f64; out_w * out_h * ch];
    for oy in 0..out_h {
        let sy = ((oy as f64 + 0.5) * y_ratio - 0.5).max(0.0);
        let y0 = (sy.floor() as usize).min(img.height - 1);
        let y1 = (y0 + 1).min(img.height - 1);
        let ty = sy - y0 as f64;
        for ox in 0..out_w {
            let sx = ((ox as f64 + 0.5) * x_ratio - 0.5).max(0.0);
            let x0 = (sx.floor() as usize).min(img.width - 1);
            let x1 = (x0 + 1).min(img.width - 1);
            let tx = sx - x0 as f64;
            for c in 0..ch {
                let p00: f64 = img.sample_255(x0, y0, c);
                let p10: f64 = img.sample_255(x1, y0, c);
                let p01: f64 = img.sample_255(x0, y1, c);
                let p11: f64 = img.sample_255(x1, y1, c);
                let top = p00 + (p10 - p00) * tx;
                let bot = p01 + (p11 - p01) * tx;
                out[(oy * out_w + ox) * ch + c] = top + (bot - top) * ty;
            }
        }
    }

    let data = match img.depth() {
        Depth::U8 => Samples::U8(out.iter().map(|&v| v.round().clamp(0.0, 255.0) as u8).collect()),
        Depth::F32 => Samples::F32(out.iter().map(|&v| (v / 255.0) as f32).collect()),
    };
    Ok(ImageBuffer {
        width: out_w,
        height: out_h,
        channels: ch,
        encoding: img.encoding,
        data,
    })
}

/// Luminance weights shared by the grayscale conversion and the sharpness
/// measure's channel combination.
pub const LUMA_WEIGHTS: [f64; 3] = [0.299, 0.587, 0.114];

/// Collapses a 3-channel image to one channel with Y = 0.299 R + 0.587 G + 0.114 B.
pub fn to_grayscale(img: &ImageBuffer) -> Result<ImageBuffer> {
    if img.channels != 3 {
        return Err(Error::ChannelMismatch(img.channels));
    }
    let n = img.pixel_count();
    let data = match &img.data {
        Samples::U8(d) => {
            let mut out = Vec::with_capacity(n);
            for px in d.chunks_exact(3) {
                let y = LUMA_WEIGHTS[0] * px[0] as f64
                    + LUMA_WEIGHTS[1] * px[1] as f64
                    + LUMA_WEIGHTS[2] * px[2] as f64;
                out.push(y.round().clamp(0.0, 255.0) as u8);
            }
            Samples::U8(out)
        }
        Samples::F32(d) => {
            let mut out = Vec::with_capacity(n);
            for px in d.chunks_exact(3) {
                let y = LUMA_WEIGHTS[0] * px[0] as f64
                    + LUMA_WEIGHTS[1] * px[1] as f64
                    + LUMA_WEIGHTS[2] * px[2] as f64;
                out.push(y.clamp(0.0, 1.0) as f32);
            }
            Samples::F32(out)
        }
    };
    Ok(ImageBuffer {
        width: img.width,
        height: img.height,
        channels: 1,
        encoding: Encoding::Grayscale,
        data,
    })
}
