//! Recursive Newton–Euler inverse dynamics, composite-rigid-body mass matrix
//! and semi-implicit Euler stepping, all in world coordinates.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix6, Vector3, Vector6};

use super::chain::{ChainState, KinematicChain};
use super::kinematics::Kinematics;
use crate::error::{Error, Result};

fn skew(v: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

struct WorldBodies {
    axis: Vec<Vector3<f64>>,
    origin: Vec<Vector3<f64>>,
    com: Vec<Vector3<f64>>,
    inertia: Vec<Matrix3<f64>>,
}

impl WorldBodies {
    fn new(chain: &KinematicChain, kin: &Kinematics) -> Self {
        let n = chain.dof();
        let mut wb = WorldBodies {
            axis: Vec::with_capacity(n),
            origin: Vec::with_capacity(n),
            com: Vec::with_capacity(n),
            inertia: Vec::with_capacity(n),
        };
        for (i, link) in chain.links().iter().enumerate() {
            let frame = &kin.links[i];
            let rot = frame.rotation.to_rotation_matrix().into_inner();
            wb.axis.push(rot * link.axis);
            wb.origin.push(frame.translation.vector);
            wb.com.push((frame * nalgebra::Point3::from(link.com)).coords);
            wb.inertia.push(rot * link.inertia * rot.transpose());
        }
        wb
    }
}

/// Joint torques producing acceleration `qdd` at state `(q, qdot)` under the
/// given gravity vector.
pub fn inverse_dynamics(
    chain: &KinematicChain,
    q: &DVector<f64>,
    qdot: &DVector<f64>,
    qdd: &DVector<f64>,
    gravity: &Vector3<f64>,
) -> Result<DVector<f64>> {
    chain.check_dim(q, "joint position vector")?;
    chain.check_dim(qdot, "joint velocity vector")?;
    chain.check_dim(qdd, "joint acceleration vector")?;
    let kin = Kinematics::compute_unchecked(chain, q);
    Ok(rnea(chain, &kin, qdot, qdd, gravity))
}

fn rnea(
    chain: &KinematicChain,
    kin: &Kinematics,
    qdot: &DVector<f64>,
    qdd: &DVector<f64>,
    gravity: &Vector3<f64>,
) -> DVector<f64> {
    let n = chain.dof();
    let wb = WorldBodies::new(chain, kin);
    let mut omega = vec![Vector3::zeros(); n];
    let mut alpha = vec![Vector3::zeros(); n];
    let mut acc = vec![Vector3::zeros(); n];
    let mut force = vec![Vector3::zeros(); n];
    let mut moment = vec![Vector3::zeros(); n];

    for (i, link) in chain.links().iter().enumerate() {
        let z = wb.axis[i];
        let (w_p, dw_p, a_p) = match link.parent {
            Some(p) => {
                let r = wb.origin[i] - wb.origin[p];
                let a = acc[p] + alpha[p].cross(&r) + omega[p].cross(&omega[p].cross(&r));
                (omega[p], alpha[p], a)
            }
            None => (Vector3::zeros(), Vector3::zeros(), -gravity),
        };
        omega[i] = w_p + z * qdot[i];
        alpha[i] = dw_p + z * qdd[i] + w_p.cross(&(z * qdot[i]));
        acc[i] = a_p;

        let rc = wb.com[i] - wb.origin[i];
        let a_com = acc[i] + alpha[i].cross(&rc) + omega[i].cross(&omega[i].cross(&rc));
        let f = a_com * link.mass;
        let inertia = &wb.inertia[i];
        force[i] = f;
        moment[i] = inertia * alpha[i] + omega[i].cross(&(inertia * omega[i])) + rc.cross(&f);
    }

    let mut tau = DVector::zeros(n);
    for i in (0..n).rev() {
        tau[i] = wb.axis[i].dot(&moment[i]);
        if let Some(p) = chain.links()[i].parent {
            let r = wb.origin[i] - wb.origin[p];
            let f = force[i];
            force[p] += f;
            let m = moment[i] + r.cross(&f);
            moment[p] += m;
        }
    }
    tau
}

/// Coriolis, centrifugal and gravity torques `h` in `M·q̈ + h = τ`.
pub fn bias_forces(chain: &KinematicChain, q: &DVector<f64>, qdot: &DVector<f64>) -> Result<DVector<f64>> {
    inverse_dynamics(chain, q, qdot, &DVector::zeros(chain.dof()), &chain.gravity())
}

/// Joint-space inertia matrix by the composite-rigid-body algorithm.
pub fn mass_matrix(chain: &KinematicChain, q: &DVector<f64>) -> Result<DMatrix<f64>> {
    chain.check_dim(q, "joint position vector")?;
    let kin = Kinematics::compute_unchecked(chain, q);
    Ok(crba(chain, &kin))
}

fn crba(chain: &KinematicChain, kin: &Kinematics) -> DMatrix<f64> {
    let n = chain.dof();
    let wb = WorldBodies::new(chain, kin);

    // Spatial inertia about the world origin, ordered [angular; linear].
    let mut composite: Vec<Matrix6<f64>> = chain
        .links()
        .iter()
        .enumerate()
        .map(|(i, link)| {
            let m = link.mass;
            let cx = skew(&wb.com[i]);
            let mut s = Matrix6::zeros();
            s.fixed_view_mut::<3, 3>(0, 0).copy_from(&(wb.inertia[i] - cx * cx * m));
            s.fixed_view_mut::<3, 3>(0, 3).copy_from(&(cx * m));
            s.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-cx * m));
            s.fixed_view_mut::<3, 3>(3, 3).copy_from(&(Matrix3::identity() * m));
            s
        })
        .collect();
    for i in (0..n).rev() {
        if let Some(p) = chain.links()[i].parent {
            let ci = composite[i];
            composite[p] += ci;
        }
    }

    let motion: Vec<Vector6<f64>> = (0..n)
        .map(|i| {
            let z = wb.axis[i];
            let v = wb.origin[i].cross(&z);
            Vector6::new(z.x, z.y, z.z, v.x, v.y, v.z)
        })
        .collect();

    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        let f = composite[i] * motion[i];
        m[(i, i)] = motion[i].dot(&f);
        let mut j = chain.links()[i].parent;
        while let Some(a) = j {
            let v = motion[a].dot(&f);
            m[(i, a)] = v;
            m[(a, i)] = v;
            j = chain.links()[a].parent;
        }
    }
    m
}

/// Joint accelerations `M⁻¹(τ − h)` at a state.
pub fn forward_dynamics(chain: &KinematicChain, state: &ChainState, tau: &DVector<f64>) -> Result<DVector<f64>> {
    chain.check_dim(tau, "torque vector")?;
    chain.check_dim(&state.q, "joint position vector")?;
    chain.check_dim(&state.qdot, "joint velocity vector")?;
    let kin = Kinematics::compute_unchecked(chain, &state.q);
    let h = rnea(chain, &kin, &state.qdot, &DVector::zeros(chain.dof()), &chain.gravity());
    let m = crba(chain, &kin);
    let chol = m
        .cholesky()
        .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?;
    Ok(chol.solve(&(tau - h)))
}

/// One semi-implicit Euler step with hard joint-limit clamping: a clamped
/// joint has its velocity zeroed. Passive joint damping `B` is integrated
/// implicitly, `(M + dt·B)·q̇' = M·q̇ + dt·(τ − h)`, so it never destabilizes
/// light joints.
pub fn step(chain: &KinematicChain, state: &ChainState, tau: &DVector<f64>, dt: f64) -> Result<ChainState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid(format!("timestep {dt} must be positive")));
    }
    let mut qdot = if chain.links().iter().all(|l| l.damping == 0.0) {
        let qdd = forward_dynamics(chain, state, tau)?;
        &state.qdot + qdd * dt
    } else {
        chain.check_dim(tau, "torque vector")?;
        chain.check_dim(&state.q, "joint position vector")?;
        chain.check_dim(&state.qdot, "joint velocity vector")?;
        let kin = Kinematics::compute_unchecked(chain, &state.q);
        let h = rnea(chain, &kin, &state.qdot, &DVector::zeros(chain.dof()), &chain.gravity());
        let m = crba(chain, &kin);
        let rhs = &m * &state.qdot + (tau - h) * dt;
        let mut a = m;
        for (i, l) in chain.links().iter().enumerate() {
            a[(i, i)] += dt * l.damping;
        }
        a.cholesky()
            .ok_or_else(|| Error::Numerical("mass matrix is not positive definite".into()))?
            .solve(&rhs)
    };
    let mut q = &state.q + &qdot * dt;
    for (i, link) in chain.links().iter().enumerate() {
        let clamped = q[i].clamp(link.range[0], link.range[1]);
        if clamped != q[i] {
            q[i] = clamped;
            qdot[i] = 0.0;
        }
    }
    if q.iter().chain(qdot.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Numerical("state diverged to a non-finite value".into()));
    }
    Ok(ChainState { q, qdot })
}

pub fn kinetic_energy(chain: &KinematicChain, state: &ChainState) -> Result<f64> {
    let m = mass_matrix(chain, &state.q)?;
    Ok(0.5 * state.qdot.dot(&(m * &state.qdot)))
}

pub fn potential_energy(chain: &KinematicChain, q: &DVector<f64>) -> Result<f64> {
    let kin = Kinematics::compute(chain, q)?;
    let g = chain.gravity();
    Ok(chain
        .links()
        .iter()
        .zip(&kin.links)
        .map(|(l, frame)| -l.mass * g.dot(&(frame * nalgebra::Point3::from(l.com)).coords))
        .sum())
}
