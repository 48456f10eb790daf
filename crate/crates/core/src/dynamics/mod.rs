//! Fixed-base articulated rigid-body dynamics over hinge-joint trees.

mod chain;
mod kinematics;
mod rigid;

pub use chain::{
    chain_from_body_spec, chain_from_body_spec_with, primitive_inertia, ChainOptions, ChainState, KinematicChain, Link,
    Site, GRAVITY,
};
pub use kinematics::{forward_kinematics, jacobian, site_pose, Kinematics, SitePose};
pub use rigid::{bias_forces, forward_dynamics, inverse_dynamics, kinetic_energy, mass_matrix, potential_energy, step};
