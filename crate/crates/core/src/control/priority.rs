//! Dynamically consistent task-priority torque control.
//!
//! For tasks in priority order, with `J_i` the task rows of the site Jacobian
//! (unselected joint columns zeroed) and `N_0 = I`:
//!
//! ```text
//! J̃_i = J_i · N_{i−1}
//! Λ_i = (J̃_i · M⁻¹ · J̃_iᵀ + λ²·I)⁻¹
//! J̄_i = M⁻¹ · J̃_iᵀ · Λ_i
//! N_i = N_{i−1} · (I − J̄_i · J̃_i)
//! F_i = Λ_i · (kp·e_i − kd·J_i·q̇)
//! τ   = Σ J̃_iᵀ·F_i + S·h
//! ```
//!
//! Lower-priority torques then produce no acceleration in any higher-priority
//! task space. An optional joint posture torque `N_kᵀ·(kp·(q_ref − q) − kd·q̇)`
//! sits below every task and damps the remaining self-motion.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::task::{task_error, TaskSpec};
use crate::dynamics::{bias_forces, mass_matrix, ChainState, KinematicChain, Kinematics};
use crate::error::{Error, Result};

/// Default Tikhonov damping of the task-space inertia inverse.
pub const DEFAULT_DAMPING: f64 = 1e-6;

/// Joints the controller may command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointSelection {
    mask: Vec<bool>,
}

impl JointSelection {
    pub fn new(mask: Vec<bool>) -> Result<Self> {
        if !mask.iter().any(|&m| m) {
            return Err(Error::invalid("joint selection must include at least one joint"));
        }
        Ok(JointSelection { mask })
    }

    pub fn all(n: usize) -> Result<Self> {
        JointSelection::new(vec![true; n])
    }

    pub fn from_names<S: AsRef<str>>(chain: &KinematicChain, names: &[S]) -> Result<Self> {
        let mut mask = vec![false; chain.dof()];
        for name in names {
            let name = name.as_ref();
            let i = chain
                .joint_index(name)
                .ok_or_else(|| Error::invalid(format!("unknown joint `{name}` in selection")))?;
            mask[i] = true;
        }
        JointSelection::new(mask)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn is_selected(&self, i: usize) -> bool {
        self.mask[i]
    }
}

#[derive(Debug, Clone)]
pub struct ControlOutput {
    pub tau: DVector<f64>,
    /// Task errors in input order.
    pub errors: Vec<Vector3<f64>>,
}

/// Joint-space spring torque (N·m/rad, N·m·s/rad) applied in the null space
/// of all tasks.
#[derive(Debug, Clone, PartialEq)]
pub struct Posture {
    pub reference: DVector<f64>,
    pub kp: f64,
    pub kd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskPriorityController {
    pub damping: f64,
    pub posture: Option<Posture>,
}

impl Default for TaskPriorityController {
    fn default() -> Self {
        TaskPriorityController {
            damping: DEFAULT_DAMPING,
            posture: None,
        }
    }
}

impl TaskPriorityController {
    pub fn new(damping: f64) -> Result<Self> {
        if !(damping >= 0.0 && damping.is_finite()) {
            return Err(Error::invalid("controller damping must be finite and nonnegative"));
        }
        Ok(TaskPriorityController { damping, posture: None })
    }

    pub fn with_posture(mut self, posture: Posture) -> Result<Self> {
        if !(posture.kp >= 0.0 && posture.kd >= 0.0 && posture.kp.is_finite() && posture.kd.is_finite()) {
            return Err(Error::invalid("posture gains must be finite and nonnegative"));
        }
        self.posture = Some(posture);
        Ok(self)
    }

    pub fn compute(
        &self,
        chain: &KinematicChain,
        state: &ChainState,
        tasks: &[TaskSpec],
        selection: &JointSelection,
    ) -> Result<ControlOutput> {
        let n = chain.dof();
        if tasks.is_empty() {
            return Err(Error::invalid("task list is empty"));
        }
        if selection.mask().len() != n {
            return Err(Error::invalid(format!(
                "selection has {} flags, chain has {n} joints",
                selection.mask().len()
            )));
        }
        let mut seen = BTreeSet::new();
        for t in tasks {
            t.validate(chain)?;
            if !seen.insert(t.priority) {
                return Err(Error::invalid(format!("duplicate task priority {}", t.priority)));
            }
        }
        let mut order: Vec<usize> = (0..tasks.len()).collect();
        order.sort_by_key(|&i| tasks[i].priority);

        let kin = Kinematics::compute(chain, &state.q)?;
        chain.check_dim(&state.qdot, "joint velocity vector")?;
        let m = mass_matrix(chain, &state.q)?;
        let m_inv = m
            .cholesky()
            .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?
            .inverse();
        let h = bias_forces(chain, &state.q, &state.qdot)?;

        let mut tau = DVector::zeros(n);
        let mut null = DMatrix::<f64>::identity(n, n);
        let mut errors = vec![Vector3::zeros(); tasks.len()];
        let damping2 = Matrix3::identity() * (self.damping * self.damping);
        for &ti in &order {
            let task = &tasks[ti];
            let site = chain.site(&task.site)?;
            let pose = kin.site_pose(site);
            let error = task_error(task, &pose)?;
            errors[ti] = error;

            let full = kin.site_jacobian(chain, site);
            let row0 = if task.is_angular() { 3 } else { 0 };
            let mut jac = full.rows(row0, 3).into_owned();
            for (j, selected) in selection.mask().iter().enumerate() {
                if !selected {
                    jac.column_mut(j).fill(0.0);
                }
            }
            let projected = &jac * &null;
            let lambda_inv = &projected * &m_inv * projected.transpose() + damping2;
            let lambda = lambda_inv
                .fixed_view::<3, 3>(0, 0)
                .into_owned()
                .try_inverse()
                .ok_or_else(|| {
                    Error::Numerical(format!("task on `{}` is singular; use a positive damping", task.site))
                })?;
            let task_vel = &jac * &state.qdot;
            let cmd = error * task.kp - Vector3::new(task_vel[0], task_vel[1], task_vel[2]) * task.kd;
            let force = lambda * cmd;
            tau += projected.transpose() * DVector::from_column_slice(force.as_slice());

            let lambda_dyn = DMatrix::from_column_slice(3, 3, lambda.as_slice());
            let dyn_inverse = &m_inv * projected.transpose() * lambda_dyn;
            null = &null * (DMatrix::identity(n, n) - dyn_inverse * &projected);
        }
        if let Some(posture) = &self.posture {
            chain.check_dim(&posture.reference, "posture reference")?;
            let mut spring = (&posture.reference - &state.q) * posture.kp - &state.qdot * posture.kd;
            for (j, selected) in selection.mask().iter().enumerate() {
                if !selected {
                    spring[j] = 0.0;
                }
            }
            tau += null.transpose() * spring;
        }
        for (j, selected) in selection.mask().iter().enumerate() {
            tau[j] = if *selected { tau[j] + h[j] } else { 0.0 };
        }
        Ok(ControlOutput { tau, errors })
    }
}

/// Torques from [`TaskPriorityController`] with default damping.
pub fn task_priority_torques(
    chain: &KinematicChain,
    state: &ChainState,
    tasks: &[TaskSpec],
    selection: &JointSelection,
) -> Result<DVector<f64>> {
    Ok(TaskPriorityController::default()
        .compute(chain, state, tasks, selection)?
        .tau)
}
