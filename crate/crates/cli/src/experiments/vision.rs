//! Acuity filtering and foveation on a photo or a built-in test pattern.

use std::path::{Path, PathBuf};

use embodykit_core::data::default_acuity_table;
use embodykit_core::growth::AgeMonths;
use embodykit_core::vision::{
    acuity_for_age, apply_csf_filter, foveate, laplacian_energy, vision_pipeline, AcuityTable, FoveationParams,
    ImageBuffer, PipelineOrder,
};
use serde::{Deserialize, Serialize};

use crate::config::write_artifact;
use crate::csv::Table;
use crate::error::{CliError, CliResult};

pub const ENERGY_COLUMNS: [&str; 3] = ["age_months", "acuity_cpd", "laplacian_energy"];
const PATTERN_STEM: &str = "pattern";
const PATTERN_SIZE: (usize, usize) = (160, 120);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    #[default]
    AcuityThenFoveation,
    FoveationThenAcuity,
}

impl From<Order> for PipelineOrder {
    fn from(order: Order) -> Self {
        match order {
            Order::AcuityThenFoveation => PipelineOrder::AcuityThenFoveation,
            Order::FoveationThenAcuity => PipelineOrder::FoveationThenAcuity,
        }
    }
}

fn default_ages() -> Vec<f64> {
    vec![1.0, 2.0, 4.0, 6.0, 12.0]
}
fn default_fov() -> f64 {
    60.0
}
fn default_warp() -> f64 {
    2.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisionConfig {
    /// PPM, PGM or PNG input. Without one a synthetic pattern is used.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub image: Option<PathBuf>,
    #[serde(default = "default_ages")]
    pub ages: Vec<f64>,
    /// Horizontal field of view of the input, degrees.
    #[serde(default = "default_fov")]
    pub fov_deg: f64,
    #[serde(default = "default_warp")]
    pub warp: f64,
    #[serde(default)]
    pub order: Order,
    /// `age_months,acuity_cpd` CSV replacing the bundled table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acuity_table: Option<PathBuf>,
}

impl Default for VisionConfig {
    fn default() -> Self {
        VisionConfig {
            image: None,
            ages: default_ages(),
            fov_deg: default_fov(),
            warp: default_warp(),
            order: Order::default(),
            acuity_table: None,
        }
    }
}

impl VisionConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.ages.is_empty() {
            return Err(CliError::Config("ages must not be empty".into()));
        }
        for &age in &self.ages {
            AgeMonths::new(age)?;
        }
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(CliError::Config(format!(
                "fov_deg {} is outside (0, 180)",
                self.fov_deg
            )));
        }
        if !(self.warp >= 0.0 && self.warp.is_finite()) {
            return Err(CliError::Config(format!(
                "warp {} must be finite and nonnegative",
                self.warp
            )));
        }
        Ok(())
    }

    fn acuity(&self) -> CliResult<AcuityTable> {
        match &self.acuity_table {
            None => Ok(default_acuity_table()?),
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
                AcuityTable::from_csv(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
            }
        }
    }

    /// Output file prefix: the input's file stem, or `pattern`.
    pub fn stem(&self) -> String {
        self.image
            .as_ref()
            .and_then(|p| p.file_stem())
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| PATTERN_STEM.to_string())
    }
}

/// Radial chirp with a checker overlay: fine detail everywhere, finer toward the rim.
pub fn test_pattern(fov_deg: f64) -> CliResult<ImageBuffer> {
    let (w, h) = PATTERN_SIZE;
    let (cx, cy) = ((w as f64 - 1.0) / 2.0, (h as f64 - 1.0) / 2.0);
    Ok(ImageBuffer::from_fn(w, h, 3, fov_deg, |x, y, c| {
        let (dx, dy) = (x as f64 - cx, y as f64 - cy);
        let r = (dx * dx + dy * dy).sqrt();
        let chirp = 0.5 + 0.5 * (r * r / 40.0).cos();
        let checker = if (x / 8 + y / 8) % 2 == 0 { 1.0 } else { 0.0 };
        match c {
            0 => 0.6 * chirp + 0.4 * checker,
            1 => chirp,
            _ => 0.3 + 0.4 * checker,
        }
    })?)
}

pub struct AgedImage {
    pub age: f64,
    pub acuity_cpd: f64,
    pub filtered: ImageBuffer,
    pub combined: ImageBuffer,
}

pub struct VisionResult {
    pub stem: String,
    pub input: ImageBuffer,
    pub foveated: ImageBuffer,
    pub ages: Vec<AgedImage>,
}

impl VisionResult {
    pub fn energy_table(&self) -> Table {
        let mut table = Table::new(&ENERGY_COLUMNS);
        for a in &self.ages {
            table.push(vec![a.age, a.acuity_cpd, laplacian_energy(&a.filtered)]);
        }
        table
    }
}

pub fn run_vision_demo(config: &VisionConfig) -> CliResult<VisionResult> {
    config.validate()?;
    let table = config.acuity()?;
    let input = match &config.image {
        Some(path) => ImageBuffer::read(path, config.fov_deg)?,
        None => test_pattern(config.fov_deg)?,
    };
    let params = FoveationParams::same_size(config.warp, &input)?;
    let foveated = foveate(&input, &params);
    let mut ages = Vec::with_capacity(config.ages.len());
    for &age in &config.ages {
        let acuity = acuity_for_age(&table, AgeMonths::new(age)?)?;
        ages.push(AgedImage {
            age,
            acuity_cpd: acuity,
            filtered: apply_csf_filter(&input, acuity),
            combined: vision_pipeline(&input, acuity, &params, config.order.into()),
        });
    }
    Ok(VisionResult {
        stem: config.stem(),
        input,
        foveated,
        ages,
    })
}

fn image_name(stem: &str, kind: &str, age: Option<f64>, img: &ImageBuffer) -> String {
    let ext = if img.channels() == 3 { "ppm" } else { "pgm" };
    match age {
        Some(a) => format!("{stem}_{kind}_{a}.{ext}"),
        None => format!("{stem}_{kind}.{ext}"),
    }
}

/// Writes `<stem>_acuity_<age>`, `<stem>_foveated`, `<stem>_combined_<age>`
/// images and `<stem>_energy.csv`.
pub fn write_vision_demo(config: &VisionConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let result = run_vision_demo(config)?;
    let stem = &result.stem;
    let mut written = Vec::new();
    for a in &result.ages {
        written.push(write_artifact(
            out,
            &image_name(stem, "acuity", Some(a.age), &a.filtered),
            a.filtered.encode_pnm(),
        )?);
    }
    written.push(write_artifact(
        out,
        &image_name(stem, "foveated", None, &result.foveated),
        result.foveated.encode_pnm(),
    )?);
    for a in &result.ages {
        written.push(write_artifact(
            out,
            &image_name(stem, "combined", Some(a.age), &a.combined),
            a.combined.encode_pnm(),
        )?);
    }
    written.push(write_artifact(
        out,
        &format!("{stem}_energy.csv"),
        result.energy_table().to_csv(),
    )?);
    Ok(written)
}
