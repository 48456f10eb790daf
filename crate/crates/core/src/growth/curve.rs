//! Logarithmic growth curves `a·ln(age + b) + c` and their constrained fit.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound on the logarithm shift `b`.
pub const MIN_SHIFT: f64 = 0.1;
/// Upper end of the shift search interval.
pub const MAX_SHIFT: f64 = 50.0;

const SCAN_POINTS: usize = 8000;
const REFINE_TOL: f64 = 1e-9;

/// Age in months since birth, restricted to the modeled range `[0, 24]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AgeMonths(f64);

impl AgeMonths {
    pub const MIN: f64 = 0.0;
    pub const MAX: f64 = 24.0;
    /// Age at which the bundled template body is calibrated.
    pub const TEMPLATE: AgeMonths = AgeMonths(18.0);

    pub fn new(months: f64) -> Result<Self> {
        if !months.is_finite() || !(Self::MIN..=Self::MAX).contains(&months) {
            return Err(Error::invalid(format!("age {months} months is outside [0, 24]")));
        }
        Ok(AgeMonths(months))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AgeMonths {
    type Error = Error;

    fn try_from(months: f64) -> Result<Self> {
        AgeMonths::new(months)
    }
}

impl From<AgeMonths> for f64 {
    fn from(age: AgeMonths) -> f64 {
        age.0
    }
}

/// Mean values of one body measurement at increasing ages.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSamples {
    name: String,
    points: Vec<(AgeMonths, f64)>,
}

impl MeasurementSamples {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let name = name.into();
        if points.len() < 3 {
            return Err(Error::invalid(format!(
                "measurement `{name}` needs at least 3 samples, got {}",
                points.len()
            )));
        }
        let mut out = Vec::with_capacity(points.len());
        for &(age, mean) in &points {
            if !age.is_finite() || !mean.is_finite() {
                return Err(Error::invalid(format!(
                    "measurement `{name}` has a non-finite sample ({age}, {mean})"
                )));
            }
            if mean <= 0.0 {
                return Err(Error::invalid(format!(
                    "measurement `{name}` has a non-positive mean {mean} at age {age}"
                )));
            }
            out.push((AgeMonths::new(age)?, mean));
        }
        if out.windows(2).any(|w| w[1].0.value() <= w[0].0.value()) {
            return Err(Error::invalid(format!(
                "measurement `{name}` ages must be strictly increasing"
            )));
        }
        Ok(MeasurementSamples { name, points: out })
    }

    /// Parses a growth table with header `age_months,value`.
    pub fn from_csv(name: impl Into<String>, text: &str) -> Result<Self> {
        let name = name.into();
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next().map(str::trim) {
            Some("age_months,value") => {}
            other => {
                return Err(Error::invalid(format!(
                    "growth table `{name}`: expected header `age_months,value`, found {other:?}"
                )))
            }
        }
        let mut points = Vec::new();
        for (i, line) in lines.enumerate() {
            let mut fields = line.split(',').map(str::trim);
            let parse = |f: Option<&str>| -> Result<f64> {
                f.and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::invalid(format!("growth table `{name}`: malformed row {}: `{line}`", i + 2)))
            };
            let age = parse(fields.next())?;
            let value = parse(fields.next())?;
            if fields.next().is_some() {
                return Err(Error::invalid(format!(
                    "growth table `{name}`: too many fields in row {}",
                    i + 2
                )));
            }
            points.push((age, value));
        }
        MeasurementSamples::new(name, points)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.points.iter().map(|&(a, m)| (a.value(), m))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Parameters of `f(x) = a·ln(x + b) + c` for one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthCurve {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl GrowthCurve {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && c.is_finite()) {
            return Err(Error::invalid("growth curve parameters must be finite"));
        }
        if b < MIN_SHIFT {
            return Err(Error::invalid(format!(
                "growth curve shift b = {b} is below {MIN_SHIFT}"
            )));
        }
        Ok(GrowthCurve { a, b, c })
    }

    pub fn eval(&self, age: AgeMonths) -> f64 {
        self.eval_months(age.value())
    }

    /// Evaluates the curve at an unchecked age. The argument of the logarithm
    /// stays positive for any `months > -b`.
    pub fn eval_months(&self, months: f64) -> f64 {
        self.a * (months + self.b).ln() + self.c
    }

    /// Sum of squared residuals over the samples.
    pub fn residual(&self, samples: &MeasurementSamples) -> f64 {
        samples
            .points()
            .map(|(x, y)| {
                let r = self.eval_months(x) - y;
                r * r
            })
            .sum()
    }
}

pub fn eval_curve(curve: &GrowthCurve, age: AgeMonths) -> f64 {
    curve.eval(age)
}

/// Linear least squares for `(a, c)` at a fixed shift `b`, returning
/// `(a, c, sum of squared residuals)`.
pub fn profile_fit(xs: &[f64], ys: &[f64], b: f64) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let us: Vec<f64> = xs.iter().map(|&x| (x + b).ln()).collect();
    let u_mean = us.iter().sum::<f64>() / n;
    let y_mean = ys.iter().sum::<f64>() / n;
    let (mut suu, mut suy) = (0.0, 0.0);
    for (&u, &y) in us.iter().zip(ys) {
        let du = u - u_mean;
        suu += du * du;
        suy += du * (y - y_mean);
    }
    let a = if suu > 0.0 { suy / suu } else { 0.0 };
    let c = y_mean - a * u_mean;
    let sse = us
        .iter()
        .zip(ys)
        .map(|(&u, &y)| {
            let r = a * u + c - y;
            r * r
        })
        .sum();
    (a, c, sse)
}

fn golden_section(lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut lo, mut hi) = (lo, hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > REFINE_TOL {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Least-squares fit of `a·ln(x + b) + c` subject to `b ≥ 0.1`.
///
/// For a fixed `b` the model is linear in `(a, c)`, so the fit profiles out
/// `(a, c)` and searches `b` alone: a log-spaced scan over `[0.1, 50]`
/// followed by golden-section refinement of every local minimum of the scan.
/// Constant data has `a = 0` and returns `b` at the lower bound.
pub fn fit_log_curve(samples: &MeasurementSamples) -> Result<GrowthCurve> {
    let (xs, ys): (Vec<f64>, Vec<f64>) = samples.points().unzip();
    if ys.iter().any(|&y| y != ys[0]) {
        let sse_at = |b: f64| profile_fit(&xs, &ys, b).2;

        let ratio = (MAX_SHIFT / MIN_SHIFT).ln();
        let grid: Vec<f64> = (0..SCAN_POINTS)
            .map(|i| {
                if i + 1 == SCAN_POINTS {
                    MAX_SHIFT
                } else {
                    MIN_SHIFT * (ratio * i as f64 / (SCAN_POINTS - 1) as f64).exp()
                }
            })
            .collect();
        let values: Vec<f64> = grid.iter().map(|&b| sse_at(b)).collect();

        let mut best_b = grid[0];
        let mut best_sse = values[0];
        for i in 0..grid.len() {
            let left = if i == 0 { f64::INFINITY } else { values[i - 1] };
            let right = values.get(i + 1).copied().unwrap_or(f64::INFINITY);
            if values[i] < best_sse {
                best_b = grid[i];
                best_sse = values[i];
            }
            if values[i] <= left && values[i] <= right {
                let lo = grid[i.saturating_sub(1)];
                let hi = grid[(i + 1).min(grid.len() - 1)];
                let (b, sse) = golden_section(lo, hi, sse_at);
                if sse < best_sse {
                    best_b = b;
                    best_sse = sse;
                }
            }
        }
        let (a, c, _) = profile_fit(&xs, &ys, best_b);
        GrowthCurve::new(a, best_b, c)
    } else {
        GrowthCurve::new(0.0, MIN_SHIFT, ys[0])
    }
}

/// Name of the derived girth measurement.
pub const GIRTH: &str = "girth";

/// Derives a girth measurement `sqrt(mass / height)` at each mass sample age.
///
/// With body-part lengths bound to height and cross-sections bound to girth,
/// a part's volume ratio follows the mass ratio.
pub fn derive_girth_samples(height: &GrowthCurve, mass: &MeasurementSamples) -> Result<MeasurementSamples> {
    let points = mass
        .points()
        .map(|(age, m)| (age, (m / height.eval_months(age)).sqrt()))
        .collect();
    MeasurementSamples::new(GIRTH, points)
}
