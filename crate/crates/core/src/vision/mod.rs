//! Infant vision: age-dependent contrast-sensitivity filtering and foveation.

mod buffer;
mod csf;
mod foveate;

pub use buffer::{laplacian_energy, ImageBuffer};
pub use csf::{acuity_for_age, apply_csf_filter, bin_frequency, csf_filter_unclamped, csf_gain, AcuityTable};
pub use foveate::{foveate, log_polar_radius, radial_warp, sample_bilinear, FoveationParams};

/// Order of the two stages in the combined vision pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PipelineOrder {
    #[default]
    AcuityThenFoveation,
    FoveationThenAcuity,
}

/// Acuity filtering and foveation, in the requested order.
pub fn vision_pipeline(
    img: &ImageBuffer,
    acuity: f64,
    foveation: &FoveationParams,
    order: PipelineOrder,
) -> ImageBuffer {
    match order {
        PipelineOrder::AcuityThenFoveation => foveate(&apply_csf_filter(img, acuity), foveation),
        PipelineOrder::FoveationThenAcuity => apply_csf_filter(&foveate(img, foveation), acuity),
    }
}
