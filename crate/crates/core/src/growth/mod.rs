//! Anthropometric growth: fitted log curves per measurement and an
//! age-specific body built from a template calibrated at 18 months.

mod body;
mod curve;

pub use body::{build_body_spec, geom_volume, BodyPart, BodySpec, BodyTemplate, GeomPrimitive, Joint};
pub use curve::{
    derive_girth_samples, eval_curve, fit_log_curve, profile_fit, AgeMonths, GrowthCurve, MeasurementSamples, GIRTH,
    MAX_SHIFT, MIN_SHIFT,
};
