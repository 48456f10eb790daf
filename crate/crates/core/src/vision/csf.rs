//! Age-dependent acuity and the linear contrast-sensitivity low-pass filter.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::ImageBuffer;
use crate::error::{Error, Result};
use crate::growth::AgeMonths;

/// Visual acuity (cycles per degree) tabulated by age.
#[derive(Debug, Clone, PartialEq)]
pub struct AcuityTable {
    points: Vec<(f64, f64)>,
}

impl AcuityTable {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        for &(age, acuity) in &points {
            if !(1.0..=24.0).contains(&age) {
                return Err(Error::invalid(format!("acuity table age {age} is outside [1, 24]")));
            }
            if !(acuity > 0.0 && acuity.is_finite()) {
                return Err(Error::invalid(format!(
                    "acuity {acuity} cpd at age {age} must be positive"
                )));
            }
        }
        for w in points.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid("acuity table ages must be strictly increasing"));
            }
            if w[1].1 < w[0].1 {
                return Err(Error::invalid("acuity table values must be nondecreasing"));
            }
        }
        Ok(AcuityTable { points })
    }

    /// Parses a table with header `age_months,acuity_cpd`.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("age_months,acuity_cpd") {
            return Err(Error::invalid("acuity table: expected header `age_months,acuity_cpd`"));
        }
        let points = lines
            .map(|line| {
                let fields: Vec<_> = line.split(',').map(str::trim).collect();
                match fields.as_slice() {
                    [age, acuity] => match (age.parse(), acuity.parse()) {
                        (Ok(a), Ok(v)) => Ok((a, v)),
                        _ => Err(Error::invalid(format!("acuity table: malformed row `{line}`"))),
                    },
                    _ => Err(Error::invalid(format!("acuity table: malformed row `{line}`"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        AcuityTable::new(points)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// Piecewise-linear acuity at `age`, clamped to the first and last nodes.
pub fn acuity_for_age(table: &AcuityTable, age: AgeMonths) -> Result<f64> {
    let pts = table.points();
    let (first, last) = match (pts.first(), pts.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(Error::invalid("acuity table is empty")),
    };
    let x = age.value();
    if x <= first.0 {
        return Ok(first.1);
    }
    if x >= last.0 {
        return Ok(last.1);
    }
    let i = pts.partition_point(|p| p.0 <= x);
    let (x0, y0) = pts[i - 1];
    let (x1, y1) = pts[i];
    if x == x0 {
        return Ok(y0);
    }
    Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Linear contrast sensitivity: `1 - f/acuity` below the acuity, zero above.
pub fn csf_gain(f: f64, acuity: f64) -> f64 {
    if f < acuity {
        1.0 - f / acuity
    } else {
        0.0
    }
}

fn signed_index(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// Radial spatial frequency in cycles per degree of DFT bin `(kx, ky)`.
pub fn bin_frequency(kx: usize, ky: usize, img: &ImageBuffer) -> f64 {
    let fx = signed_index(kx, img.width()) / img.fov_deg();
    let fy = signed_index(ky, img.height()) / img.fov_y_deg();
    (fx * fx + fy * fy).sqrt()
}

/// CSF-filtered pixel values before clamping, interleaved like the input.
pub fn csf_filter_unclamped(img: &ImageBuffer, acuity: f64) -> Vec<f64> {
    let (w, h, channels) = (img.width(), img.height(), img.channels());
    let mut planner = FftPlanner::<f64>::new();
    let row_fwd = planner.plan_fft_forward(w);
    let row_inv = planner.plan_fft_inverse(w);
    let col_fwd = planner.plan_fft_forward(h);
    let col_inv = planner.plan_fft_inverse(h);

    // Gains in transposed (column-major) layout: index kx * h + ky.
    let gains: Vec<f64> = (0..w)
        .flat_map(|kx| (0..h).map(move |ky| (kx, ky)))
        .map(|(kx, ky)| csf_gain(bin_frequency(kx, ky, img), acuity))
        .collect();

    let norm = 1.0 / (w * h) as f64;
    let mut out = vec![0.0; img.data().len()];
    for c in 0..channels {
        let mut rows: Vec<Complex<f64>> = img.plane(c).into_iter().map(|v| Complex::new(v, 0.0)).collect();
        row_fwd.process(&mut rows);
        let mut cols = transpose(&rows, w, h);
        col_fwd.process(&mut cols);
        for (z, g) in cols.iter_mut().zip(&gains) {
            *z *= g;
        }
        col_inv.process(&mut cols);
        let mut rows = transpose(&cols, h, w);
        row_inv.process(&mut rows);
        for (i, z) in rows.iter().enumerate() {
            out[i * channels + c] = z.re * norm;
        }
    }
    out
}

fn transpose(src: &[Complex<f64>], w: usize, h: usize) -> Vec<Complex<f64>> {
    let mut dst = vec![Complex::new(0.0, 0.0); src.len()];
    for y in 0..h {
        for x in 0..w {
            dst[x * h + y] = src[y * w + x];
        }
    }
    dst
}

/// Low-pass filters every channel with the CSF at the given acuity and
/// clamps the result to `[0, 1]`.
pub fn apply_csf_filter(img: &ImageBuffer, acuity: f64) -> ImageBuffer {
    let data = csf_filter_unclamped(img, acuity)
        .into_iter()
        .map(|v| v.clamp(0.0, 1.0))
        .collect();
    img.with_data(data)
}
