//! Body growth tables and single-age body generation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use embodykit_core::data::{BODY_MASS, HEAD_CIRCUMFERENCE, HEIGHT};
use embodykit_core::growth::{build_body_spec, AgeMonths, BodySpec};
use serde::{Deserialize, Serialize};

use crate::config::{write_artifact, BodyData, LoadedBody};
use crate::csv::Table;
use crate::error::CliResult;
use crate::svg::{line_chart, Series};

pub const GROWTH_COLUMNS: [&str; 4] = ["age_months", "height_cm", "head_circumference_cm", "total_mass_kg"];

fn default_ages() -> Vec<f64> {
    (0..=24).map(f64::from).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthCurvesConfig {
    #[serde(default = "default_ages")]
    pub ages: Vec<f64>,
    #[serde(default)]
    pub body: BodyData,
}

impl Default for GrowthCurvesConfig {
    fn default() -> Self {
        GrowthCurvesConfig {
            ages: default_ages(),
            body: BodyData::default(),
        }
    }
}

/// Builds the body at `age` from already loaded data.
pub fn body_at(body: &LoadedBody, age: f64, overrides: &BTreeMap<String, Vec<f64>>) -> CliResult<BodySpec> {
    Ok(build_body_spec(
        &body.template,
        AgeMonths::new(age)?,
        &body.curves,
        overrides,
    )?)
}

pub fn run_growth_curves(config: &GrowthCurvesConfig) -> CliResult<Table> {
    let body = config.body.load()?;
    growth_table(&body, &config.ages)
}

pub fn growth_table(body: &LoadedBody, ages: &[f64]) -> CliResult<Table> {
    let mut table = Table::new(&GROWTH_COLUMNS);
    for &age in ages {
        let a = AgeMonths::new(age)?;
        let spec = build_body_spec(&body.template, a, &body.curves, &BTreeMap::new())?;
        table.push(vec![
            age,
            body.curves[HEIGHT].eval(a),
            body.curves[HEAD_CIRCUMFERENCE].eval(a),
            spec.total_mass(),
        ]);
    }
    Ok(table)
}

pub fn write_growth_curves(config: &GrowthCurvesConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let body = config.body.load()?;
    let table = growth_table(&body, &config.ages)?;
    let mut written = vec![write_artifact(out, "growth_curves.csv", table.to_csv())?];
    let ages = table.column("age_months").expect("age column");
    let charts = [
        (HEIGHT, "height_cm", "Height", "cm"),
        (HEAD_CIRCUMFERENCE, "head_circumference_cm", "Head circumference", "cm"),
        (BODY_MASS, "total_mass_kg", "Body mass", "kg"),
    ];
    for (measurement, column, title, unit) in charts {
        let model = table.column(column).expect("known column");
        let mut series = vec![Series {
            label: "model".into(),
            points: ages.iter().copied().zip(model).collect(),
        }];
        if let Some(samples) = body.tables.get(measurement) {
            series.push(Series {
                label: "table".into(),
                points: samples.points().collect(),
            });
        }
        let svg = line_chart(title, "age (months)", unit, &series);
        written.push(write_artifact(out, &format!("growth_{measurement}.svg"), svg)?);
    }
    Ok(written)
}

fn default_age() -> f64 {
    AgeMonths::TEMPLATE.value()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowConfig {
    #[serde(default = "default_age")]
    pub age: f64,
    /// Part name to replacement geometry dims.
    #[serde(default)]
    pub overrides: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub body: BodyData,
}

impl Default for GrowConfig {
    fn default() -> Self {
        GrowConfig {
            age: default_age(),
            overrides: BTreeMap::new(),
            body: BodyData::default(),
        }
    }
}

pub fn run_grow(config: &GrowConfig) -> CliResult<BodySpec> {
    let body = config.body.load()?;
    body_at(&body, config.age, &config.overrides)
}

pub fn write_grow(config: &GrowConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let spec = run_grow(config)?;
    let name = format!("body_{}m.json", config.age);
    Ok(vec![write_artifact(out, &name, spec.to_json())?])
}
