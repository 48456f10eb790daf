//! Bundled default tables.
//!
//! The growth tables are approximate readings of published infant growth
//! medians (height ≈ 50→88 cm, head circumference ≈ 35→48 cm, body mass
//! ≈ 3.3→12 kg over 0–24 months). The acuity table is a placeholder with a
//! plausible shape. Supply measured tables for quantitative work.

use std::collections::{BTreeMap, BTreeSet};

use crate::dynamics::{chain_from_body_spec_with, ChainOptions, KinematicChain};
use crate::growth::{
    build_body_spec, derive_girth_samples, fit_log_curve, AgeMonths, BodyTemplate, GrowthCurve, MeasurementSamples,
    GIRTH,
};
use crate::vision::AcuityTable;
use crate::Result;

pub const HEIGHT: &str = "height";
pub const HEAD_CIRCUMFERENCE: &str = "head_circumference";
pub const BODY_MASS: &str = "body_mass";

pub const HEIGHT_CSV: &str = include_str!("../data/height.csv");
pub const HEAD_CIRCUMFERENCE_CSV: &str = include_str!("../data/head_circumference.csv");
pub const BODY_MASS_CSV: &str = include_str!("../data/body_mass.csv");
pub const ACUITY_CSV: &str = include_str!("../data/acuity.csv");
/// Joints of the bundled arm chain, shoulder to elbow. The shoulder rotation
/// stays locked so a hand position task has no self-motion left over.
pub const ARM_JOINTS: [&str; 3] = ["right_shoulder_flex", "right_shoulder_abduct", "right_elbow"];

pub const TEMPLATE_JSON: &str = include_str!("../data/template_18m.json");

/// The three bundled growth tables keyed by measurement name.
pub fn default_growth_tables() -> Result<BTreeMap<String, MeasurementSamples>> {
    [
        (HEIGHT, HEIGHT_CSV),
        (HEAD_CIRCUMFERENCE, HEAD_CIRCUMFERENCE_CSV),
        (BODY_MASS, BODY_MASS_CSV),
    ]
    .into_iter()
    .map(|(name, csv)| Ok((name.to_string(), MeasurementSamples::from_csv(name, csv)?)))
    .collect()
}

/// Fits a curve per table and adds the derived girth curve when both height
/// and body mass are present.
pub fn fit_curves(tables: &BTreeMap<String, MeasurementSamples>) -> Result<BTreeMap<String, GrowthCurve>> {
    let mut curves = tables
        .iter()
        .map(|(name, samples)| Ok((name.clone(), fit_log_curve(samples)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    if let (Some(height), Some(mass)) = (curves.get(HEIGHT), tables.get(BODY_MASS)) {
        let girth = derive_girth_samples(height, mass)?;
        curves.insert(GIRTH.to_string(), fit_log_curve(&girth)?);
    }
    Ok(curves)
}

pub fn default_curves() -> Result<BTreeMap<String, GrowthCurve>> {
    fit_curves(&default_growth_tables()?)
}

pub fn default_template() -> Result<BodyTemplate> {
    BodyTemplate::from_json(TEMPLATE_JSON)
}

pub fn default_acuity_table() -> Result<AcuityTable> {
    AcuityTable::from_csv(ACUITY_CSV)
}

/// The template body's right arm at 18 months, hanging from a fixed torso,
/// with every other joint locked. The hand site is `right_hand`.
pub fn default_arm_chain() -> Result<KinematicChain> {
    let template = default_template()?;
    let spec = build_body_spec(&template, AgeMonths::TEMPLATE, &default_curves()?, &BTreeMap::new())?;
    let locked: BTreeSet<String> = spec
        .parts()
        .flat_map(|p| p.joints.iter().map(|j| j.name.clone()))
        .filter(|n| !ARM_JOINTS.contains(&n.as_str()))
        .collect();
    let options = ChainOptions {
        locked_joints: locked,
        ..ChainOptions::default()
    };
    chain_from_body_spec_with(&spec, "upper_body", &options)
}
