//! Foveation by an exponential radial warp about the image center.
//!
//! An output pixel at eccentricity `r` samples the source at `g(r)` along the
//! same direction, where
//!
//! ```text
//! g(r) = R · (exp(α·r/R) − 1) / (exp(α) − 1)
//! ```
//!
//! is the inverse of the log-polar eccentricity map
//! `ρ(s) = R · ln(1 + s·(exp(α) − 1)/R) / α`. Both fix `0` and `R`; for
//! `α > 0` the map `g` is convex, so the center is magnified and the
//! periphery compressed. `α = 0` is the identity.

use super::ImageBuffer;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoveationParams {
    pub warp_strength: f64,
    pub out_width: usize,
    pub out_height: usize,
}

impl FoveationParams {
    pub fn new(warp_strength: f64, out_width: usize, out_height: usize) -> Result<Self> {
        if !(warp_strength.is_finite() && warp_strength >= 0.0) {
            return Err(Error::invalid(format!(
                "warp strength {warp_strength} must be finite and nonnegative"
            )));
        }
        if out_width < 2 || out_height < 2 {
            return Err(Error::invalid("foveated output must be at least 2x2"));
        }
        Ok(FoveationParams {
            warp_strength,
            out_width,
            out_height,
        })
    }

    /// Same output size as `img`.
    pub fn same_size(warp_strength: f64, img: &ImageBuffer) -> Result<Self> {
        FoveationParams::new(warp_strength, img.width(), img.height())
    }
}

/// Source eccentricity sampled by output eccentricity `r`.
pub fn radial_warp(r: f64, max_radius: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        r
    } else {
        max_radius * ((alpha * (r / max_radius)).exp_m1() / alpha.exp_m1())
    }
}

/// Log-polar eccentricity of source radius `s`; the inverse of [`radial_warp`].
pub fn log_polar_radius(s: f64, max_radius: f64, alpha: f64) -> f64 {
    if alpha == 0.0 {
        s
    } else {
        max_radius * (s * alpha.exp_m1() / max_radius).ln_1p() / alpha
    }
}

/// Bilinear sample with edge clamping, coordinates in source pixels.
pub fn sample_bilinear(img: &ImageBuffer, x: f64, y: f64, c: usize) -> f64 {
    let x = x.clamp(0.0, (img.width() - 1) as f64);
    let y = y.clamp(0.0, (img.height() - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(img.width() - 1);
    let y1 = (y0 + 1).min(img.height() - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let top = img.get(x0, y0, c) * (1.0 - fx) + img.get(x1, y0, c) * fx;
    let bottom = img.get(x0, y1, c) * (1.0 - fx) + img.get(x1, y1, c) * fx;
    top * (1.0 - fy) + bottom * fy
}

pub fn foveate(img: &ImageBuffer, params: &FoveationParams) -> ImageBuffer {
    let (wi, hi) = (img.width() as f64, img.height() as f64);
    let (wo, ho) = (params.out_width as f64, params.out_height as f64);
    let (cxi, cyi) = ((wi - 1.0) / 2.0, (hi - 1.0) / 2.0);
    let (cxo, cyo) = ((wo - 1.0) / 2.0, (ho - 1.0) / 2.0);
    let sx = (wi - 1.0) / (wo - 1.0);
    let sy = (hi - 1.0) / (ho - 1.0);
    let max_radius = cxi.hypot(cyi);
    let alpha = params.warp_strength;

    let channels = img.channels();
    let mut data = Vec::with_capacity(params.out_width * params.out_height * channels);
    for y in 0..params.out_height {
        for x in 0..params.out_width {
            let dx = (x as f64 - cxo) * sx;
            let dy = (y as f64 - cyo) * sy;
            let r = dx.hypot(dy);
            let scale = if r > 0.0 {
                radial_warp(r, max_radius, alpha) / r
            } else {
                1.0
            };
            let (px, py) = (cxi + dx * scale, cyi + dy * scale);
            for c in 0..channels {
                data.push(sample_bilinear(img, px, py, c).clamp(0.0, 1.0));
            }
        }
    }
    ImageBuffer::new(params.out_width, params.out_height, channels, data, img.fov_deg())
        .expect("foveated output keeps the input invariants")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn warp_fixes_center_and_rim() {
        for alpha in [0.0, 0.5, 3.0, 10.0] {
            assert_eq!(radial_warp(0.0, 7.3, alpha), 0.0);
            assert_eq!(radial_warp(7.3, 7.3, alpha), 7.3);
        }
    }

    #[test]
    fn warp_midpoint_value() {
        let expected = 1.5f64.exp_m1() / 3.0f64.exp_m1();
        assert!((radial_warp(0.5, 1.0, 3.0) - expected).abs() < 1e-15);
        assert!((expected - 0.1824).abs() < 5e-5);
    }

    #[test]
    fn uniform_image_stays_uniform() {
        let img = ImageBuffer::from_fn(9, 7, 3, 60.0, |_, _, c| [0.1, 0.5, 0.9][c]).unwrap();
        let out = foveate(&img, &FoveationParams::new(4.0, 12, 10).unwrap());
        for (i, v) in out.data().iter().enumerate() {
            assert!((v - [0.1, 0.5, 0.9][i % 3]).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_negative_warp() {
        assert!(FoveationParams::new(-1.0, 4, 4).is_err());
        assert!(FoveationParams::new(f64::NAN, 4, 4).is_err());
    }
}
