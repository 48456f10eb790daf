//! Numerics for a growing, developing infant body model.
//!
//! The crate is split by subsystem:
//!
//! - [`growth`]: log-curve fitting of anthropometric tables and age-specific
//!   body specifications with volume-proportional mass and actuator strength.
//! - [`vision`]: contrast-sensitivity low-pass filtering and log-polar
//!   foveation of rendered images.
//! - [`delays`]: FIFO delay lines for sensory observations and motor commands.
//! - [`dynamics`]: a fixed-base hinge-joint rigid-body engine.
//! - [`control`]: a prioritized operational-space torque controller.
//! - [`scenegen`]: seeded room-and-toys scene generation.
//!
//! Bundled default data tables live in [`data`].

pub mod control;
pub mod data;
pub mod delays;
pub mod dynamics;
pub mod error;
pub mod growth;
pub mod scenegen;
pub mod vision;

pub use error::{Error, Result};
