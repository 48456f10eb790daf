//! Prioritized operational-space control of selected joints.

mod ik;
mod priority;
mod task;

pub use ik::{solve_position_ik, IkOptions, IkSolution};
pub use priority::{
    task_priority_torques, ControlOutput, JointSelection, Posture, TaskPriorityController, DEFAULT_DAMPING,
};
pub use task::{misalignment_angle, rotation_log, task_error, Metric, Target, TaskSpec};
