//! Damped least-squares position inverse kinematics.

use nalgebra::{DVector, Matrix3, Vector3};

use super::JointSelection;
use crate::dynamics::{KinematicChain, Kinematics};
use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IkOptions {
    pub damping: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Default for IkOptions {
    fn default() -> Self {
        IkOptions {
            damping: 0.05,
            max_iterations: 200,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct IkSolution {
    pub q: DVector<f64>,
    pub residual: f64,
    pub converged: bool,
}

/// Moves the selected joints so that `site` reaches `target`, clamping to
/// joint ranges after every update.
pub fn solve_position_ik(
    chain: &KinematicChain,
    q0: &DVector<f64>,
    site: &str,
    target: &Vector3<f64>,
    selection: &JointSelection,
    options: &IkOptions,
) -> Result<IkSolution> {
    let site = chain.site(site)?;
    let mut q = chain.clamp_to_range(q0);
    let mut residual;
    for _ in 0..options.max_iterations {
        let kin = Kinematics::compute(chain, &q)?;
        let err = target - kin.site_pose(site).position;
        residual = err.norm();
        if residual < options.tolerance {
            return Ok(IkSolution {
                q,
                residual,
                converged: true,
            });
        }
        let mut jac = kin.site_jacobian(chain, site).rows(0, 3).into_owned();
        for (j, selected) in selection.mask().iter().enumerate() {
            if !selected {
                jac.column_mut(j).fill(0.0);
            }
        }
        let jjt = &jac * jac.transpose();
        let a = Matrix3::from_fn(|i, j| jjt[(i, j)]) + Matrix3::identity() * options.damping.powi(2);
        let Some(a_inv) = a.try_inverse() else { break };
        let w = a_inv * err;
        let dq = jac.transpose() * DVector::from_column_slice(w.as_slice());
        q = chain.clamp_to_range(&(q + dq));
    }
    let kin = Kinematics::compute(chain, &q)?;
    residual = (target - kin.site_pose(site).position).norm();
    Ok(IkSolution {
        converged: residual < options.tolerance,
        q,
        residual,
    })
}
