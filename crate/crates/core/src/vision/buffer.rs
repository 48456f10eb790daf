use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{DynamicImage, ExtendedColorType, ImageEncoder};

use crate::error::{Error, Result};

/// Row-major raster with interleaved channels and its horizontal field of view.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
    fov_deg: f64,
}

impl ImageBuffer {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>, fov_deg: f64) -> Result<Self> {
        if width < 2 || height < 2 {
            return Err(Error::invalid(format!(
                "image must be at least 2x2, got {width}x{height}"
            )));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::invalid(format!(
                "image must have 1 or 3 channels, got {channels}"
            )));
        }
        if !(fov_deg > 0.0 && fov_deg < 180.0) {
            return Err(Error::invalid(format!(
                "field of view {fov_deg} deg is outside (0, 180)"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::invalid(format!(
                "image data has {} values, expected {}",
                data.len(),
                width * height * channels
            )));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::invalid(format!("pixel value {v} is outside [0, 1]")));
        }
        Ok(ImageBuffer {
            width,
            height,
            channels,
            data,
            fov_deg,
        })
    }

    /// Builds an image by evaluating `f(x, y, channel)`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        fov_deg: f64,
        f: impl Fn(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c));
                }
            }
        }
        ImageBuffer::new(width, height, channels, data, fov_deg)
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

    pub fn fov_deg(&self) -> f64 {
        self.fov_deg
    }

    /// Vertical field of view implied by the aspect ratio.
    pub fn fov_y_deg(&self) -> f64 {
        self.fov_deg * self.height as f64 / self.width as f64
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// One channel as a row-major plane.
    pub fn plane(&self, c: usize) -> Vec<f64> {
        self.data.iter().skip(c).step_by(self.channels).copied().collect()
    }

    pub(crate) fn with_data(&self, data: Vec<f64>) -> ImageBuffer {
        debug_assert_eq!(data.len(), self.data.len());
        ImageBuffer { data, ..self.clone() }
    }

    /// Reads PPM (P6), PGM (P5) or PNG. Grayscale inputs stay single channel.
    pub fn read(path: impl AsRef<Path>, fov_deg: f64) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let decoded = image::load_from_memory(&bytes).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let (width, height, channels, raw) = match decoded {
            DynamicImage::ImageLuma8(_) | DynamicImage::ImageLumaA8(_) | DynamicImage::ImageLuma16(_) => {
                let g = decoded.to_luma8();
                (g.width(), g.height(), 1, g.into_raw())
            }
            other => {
                let rgb = other.to_rgb8();
                (rgb.width(), rgb.height(), 3, rgb.into_raw())
            }
        };
        let data = raw.into_iter().map(|v| f64::from(v) / 255.0).collect();
        ImageBuffer::new(width as usize, height as usize, channels, data, fov_deg).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// 8-bit samples, rounding and clamping each value.
    pub fn to_bytes(&self) -> Vec<u8> {
        self.data
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    /// Encodes binary PPM (3 channels) or PGM (1 channel).
    pub fn encode_pnm(&self) -> Vec<u8> {
        let (subtype, color) = if self.channels == 3 {
            (PnmSubtype::Pixmap(SampleEncoding::Binary), ExtendedColorType::Rgb8)
        } else {
            (PnmSubtype::Graymap(SampleEncoding::Binary), ExtendedColorType::L8)
        };
        let mut out = Vec::new();
        PnmEncoder::new(&mut out)
            .with_subtype(subtype)
            .write_image(&self.to_bytes(), self.width as u32, self.height as u32, color)
            .expect("in-memory PNM encoding of a valid buffer");
        out
    }

    pub fn write_pnm(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.encode_pnm()).map_err(|e| Error::io(path, e))
    }
}

/// Sum of squared 5-point Laplacian responses over interior pixels, all channels.
pub fn laplacian_energy(img: &ImageBuffer) -> f64 {
    let mut total = 0.0;
    for c in 0..img.channels() {
        for y in 1..img.height() - 1 {
            for x in 1..img.width() - 1 {
                let lap = img.get(x - 1, y, c) + img.get(x + 1, y, c) + img.get(x, y - 1, c) + img.get(x, y + 1, c)
                    - 4.0 * img.get(x, y, c);
                total += lap * lap;
            }
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_invalid_buffers() {
        assert!(ImageBuffer::new(1, 4, 1, vec![0.0; 4], 60.0).is_err());
        assert!(ImageBuffer::new(2, 2, 2, vec![0.0; 8], 60.0).is_err());
        assert!(ImageBuffer::new(2, 2, 1, vec![0.0; 3], 60.0).is_err());
        assert!(ImageBuffer::new(2, 2, 1, vec![0.0; 4], 180.0).is_err());
        assert!(ImageBuffer::new(2, 2, 1, vec![0.0, 0.5, 1.0, 1.5], 60.0).is_err());
    }

    #[test]
    fn pnm_round_trip_preserves_quantized_values() {
        let img = ImageBuffer::from_fn(5, 3, 3, 60.0, |x, y, c| ((x * 7 + y * 3 + c) % 256) as f64 / 255.0).unwrap();
        let dir = std::env::temp_dir().join(format!("embodykit-pnm-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("rt.ppm");
        img.write_pnm(&path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        assert!(bytes.starts_with(b"P6"));
        let back = ImageBuffer::read(&path, 60.0).unwrap();
        assert_eq!(back.to_bytes(), img.to_bytes());

        let gray = ImageBuffer::from_fn(4, 4, 1, 60.0, |x, y, _| (x + y) as f64 / 6.0).unwrap();
        let gpath = dir.join("rt.pgm");
        gray.write_pnm(&gpath).unwrap();
        assert!(std::fs::read(&gpath).unwrap().starts_with(b"P5"));
        let gback = ImageBuffer::read(&gpath, 60.0).unwrap();
        assert_eq!(gback.channels(), 1);
        assert_eq!(gback.to_bytes(), gray.to_bytes());
    }

    #[test]
    fn unreadable_image_reports_path() {
        let err = ImageBuffer::read("/nonexistent/input.ppm", 60.0).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/input.ppm"));
    }
}
