use std::collections::BTreeMap;
use std::f64::consts::PI;

use embodykit_core::data::{default_arm_chain, default_curves, default_template};
use embodykit_core::dynamics::{
    bias_forces, chain_from_body_spec, inverse_dynamics, jacobian, kinetic_energy, mass_matrix, site_pose, step,
    ChainState, KinematicChain,
};
use embodykit_core::growth::{build_body_spec, AgeMonths};
use nalgebra::{DMatrix, DVector, Isometry3, Matrix3, Vector3};

mod common;
use common::{link, random_chain, Rng};

fn whole_body() -> KinematicChain {
    let template = default_template().unwrap();
    let spec = build_body_spec(
        &template,
        AgeMonths::new(9.0).unwrap(),
        &default_curves().unwrap(),
        &BTreeMap::new(),
    )
    .unwrap();
    chain_from_body_spec(&spec, "hips", true).unwrap()
}

fn vee_skew(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(m[(2, 1)] - m[(1, 2)], m[(0, 2)] - m[(2, 0)], m[(1, 0)] - m[(0, 1)]) * 0.5
}

fn check_jacobian(chain: &KinematicChain, site: &str, q: &DVector<f64>) {
    let j = jacobian(chain, q, site).unwrap();
    let h = 1e-6;
    for i in 0..chain.dof() {
        let (mut qp, mut qm) = (q.clone(), q.clone());
        qp[i] += h;
        qm[i] -= h;
        let (p, m) = (
            site_pose(chain, &qp, site).unwrap(),
            site_pose(chain, &qm, site).unwrap(),
        );
        let lin = (p.position - m.position) / (2.0 * h);
        let r = site_pose(chain, q, site).unwrap().rotation;
        let ang = vee_skew(&((p.rotation - m.rotation) / (2.0 * h) * r.transpose()));
        let col = j.column(i);
        let analytic = Vector3::new(col[0], col[1], col[2]);
        let analytic_ang = Vector3::new(col[3], col[4], col[5]);
        let scale = analytic.norm().max(analytic_ang.norm()).max(1.0);
        assert!((lin - analytic).norm() / scale < 1e-6, "linear column {i}");
        assert!((ang - analytic_ang).norm() / scale < 1e-6, "angular column {i}");
    }
}

#[test]
fn jacobian_matches_finite_differences() {
    let mut rng = Rng::new(1);
    for _ in 0..10 {
        let chain = random_chain(&mut rng, 6, Vector3::new(0.0, 0.0, -9.81));
        let q = rng.vector(6, PI);
        check_jacobian(&chain, "tip", &q);
    }
    let arm = default_arm_chain().unwrap();
    let q = rng.vector(arm.dof(), 0.5);
    check_jacobian(&arm, "right_hand", &q);
    let body = whole_body();
    let q = rng.vector(body.dof(), 0.3);
    check_jacobian(&body, "right_foot", &q);
    check_jacobian(&body, "left_eye", &q);
}

#[test]
fn planar_two_link_kinematics() {
    let (l1, l2) = (0.4, 0.3);
    let z = Vector3::z();
    let links = vec![
        link(
            "a".into(),
            None,
            z,
            Isometry3::identity(),
            1.0,
            Vector3::zeros(),
            Matrix3::identity() * 0.01,
        ),
        link(
            "b".into(),
            Some(0),
            z,
            Isometry3::translation(l1, 0.0, 0.0),
            1.0,
            Vector3::zeros(),
            Matrix3::identity() * 0.01,
        ),
    ];
    let mut chain = KinematicChain::new(links, vec![], Isometry3::identity(), Vector3::zeros()).unwrap();
    chain
        .add_site("tip", Some(1), Isometry3::translation(l2, 0.0, 0.0))
        .unwrap();
    let q = DVector::from_vec(vec![0.7, -1.1]);
    let tip = site_pose(&chain, &q, "tip").unwrap().position;
    let expected = Vector3::new(
        l1 * q[0].cos() + l2 * (q[0] + q[1]).cos(),
        l1 * q[0].sin() + l2 * (q[0] + q[1]).sin(),
        0.0,
    );
    assert!((tip - expected).norm() < 1e-12);
    let j = jacobian(&chain, &q, "tip").unwrap();
    let s12 = (q[0] + q[1]).sin();
    let c12 = (q[0] + q[1]).cos();
    assert!((j[(0, 0)] + l1 * q[0].sin() + l2 * s12).abs() < 1e-12);
    assert!((j[(1, 1)] - l2 * c12).abs() < 1e-12);
}

fn check_mass_matrix(chain: &KinematicChain, q: &DVector<f64>) {
    let m = mass_matrix(chain, q).unwrap();
    assert!((&m - m.transpose()).amax() < 1e-12);
    let eig = m.clone().symmetric_eigen().eigenvalues;
    assert!(eig.min() > 0.0, "min eigenvalue {}", eig.min());
    let n = chain.dof();
    for j in 0..n {
        let mut e = DVector::zeros(n);
        e[j] = 1.0;
        let col = inverse_dynamics(chain, q, &DVector::zeros(n), &e, &Vector3::zeros()).unwrap();
        assert!((col - m.column(j)).amax() < 1e-12 * m.amax().max(1.0));
    }
}

#[test]
fn mass_matrix_is_spd_and_matches_unit_accelerations() {
    let mut rng = Rng::new(2);
    for _ in 0..20 {
        let chain = random_chain(&mut rng, 5, Vector3::new(0.0, 0.0, -9.81));
        check_mass_matrix(&chain, &rng.vector(5, PI));
    }
    let arm = default_arm_chain().unwrap();
    let body = whole_body();
    for _ in 0..100 {
        let q = rng.vector(arm.dof(), PI);
        check_mass_matrix(&arm, &q);
        let q = rng.vector(body.dof(), PI);
        let m = mass_matrix(&body, &q).unwrap();
        assert!(m.symmetric_eigen().eigenvalues.min() > 0.0);
    }
}

/// Point-mass-plus-inertia planar 2R arm with gravity along -y.
#[test]
fn two_link_bias_matches_lagrangian() {
    let (m1, m2, l1, c1, c2, i1, i2, g) = (1.3, 0.8, 0.5, 0.2, 0.15, 0.02, 0.01, 9.81);
    let z = Vector3::z();
    let inertia = |i: f64| Matrix3::from_diagonal(&Vector3::new(0.005, 0.007, i));
    let links = vec![
        link(
            "a".into(),
            None,
            z,
            Isometry3::identity(),
            m1,
            Vector3::new(c1, 0.0, 0.0),
            inertia(i1),
        ),
        link(
            "b".into(),
            Some(0),
            z,
            Isometry3::translation(l1, 0.0, 0.0),
            m2,
            Vector3::new(c2, 0.0, 0.0),
            inertia(i2),
        ),
    ];
    let chain = KinematicChain::new(links, vec![], Isometry3::identity(), Vector3::new(0.0, -g, 0.0)).unwrap();
    let mut rng = Rng::new(3);
    for _ in 0..20 {
        let q = rng.vector(2, PI);
        let qd = rng.vector(2, 3.0);
        let (s2, cq1, cq12) = (q[1].sin(), q[0].cos(), (q[0] + q[1]).cos());
        let h1 = -m2 * l1 * c2 * s2 * (2.0 * qd[0] * qd[1] + qd[1] * qd[1])
            + (m1 * c1 + m2 * l1) * g * cq1
            + m2 * c2 * g * cq12;
        let h2 = m2 * l1 * c2 * s2 * qd[0] * qd[0] + m2 * c2 * g * cq12;
        let h = bias_forces(&chain, &q, &qd).unwrap();
        assert!((h[0] - h1).abs() < 1e-9 && (h[1] - h2).abs() < 1e-9, "{h} vs {h1} {h2}");

        let m11 = i1 + i2 + m1 * c1 * c1 + m2 * (l1 * l1 + c2 * c2 + 2.0 * l1 * c2 * q[1].cos());
        let m12 = i2 + m2 * (c2 * c2 + l1 * c2 * q[1].cos());
        let m22 = i2 + m2 * c2 * c2;
        let m = mass_matrix(&chain, &q).unwrap();
        assert!((m[(0, 0)] - m11).abs() < 1e-12 && (m[(0, 1)] - m12).abs() < 1e-12 && (m[(1, 1)] - m22).abs() < 1e-12);
    }
}

fn pendulum(mass: f64, radius: f64, d: f64) -> KinematicChain {
    let i = 0.4 * mass * radius * radius;
    let links = vec![link(
        "swing".into(),
        None,
        Vector3::y(),
        Isometry3::identity(),
        mass,
        Vector3::new(0.0, 0.0, -d),
        Matrix3::identity() * i,
    )];
    KinematicChain::new(links, vec![], Isometry3::identity(), Vector3::new(0.0, 0.0, -9.81)).unwrap()
}

#[test]
fn pendulum_statics_and_period() {
    let (mass, radius, d, g) = (0.7, 0.05, 0.3, 9.81);
    let chain = pendulum(mass, radius, d);
    let i_joint = 0.4 * mass * radius * radius + mass * d * d;
    let m = mass_matrix(&chain, &DVector::zeros(1)).unwrap();
    assert!((m[(0, 0)] - i_joint).abs() < 1e-12);
    // Horizontal: the com sits at +x or -x, gravity torque magnitude m g d.
    let h = bias_forces(&chain, &DVector::from_element(1, PI / 2.0), &DVector::zeros(1)).unwrap();
    assert!((h[0].abs() - mass * g * d).abs() < 1e-12);

    let dt = 1e-4;
    let mut state = ChainState::at_rest(DVector::from_element(1, 0.02));
    let mut crossings = Vec::new();
    for k in 0..40000 {
        let next = step(&chain, &state, &DVector::zeros(1), dt).unwrap();
        if state.q[0] > 0.0 && next.q[0] <= 0.0 {
            let frac = state.q[0] / (state.q[0] - next.q[0]);
            crossings.push((k as f64 + frac) * dt);
        }
        state = next;
    }
    let periods: Vec<f64> = crossings.windows(2).map(|w| w[1] - w[0]).collect();
    let period = periods.iter().sum::<f64>() / periods.len() as f64;
    let expected = 2.0 * PI * (i_joint / (mass * g * d)).sqrt();
    assert!((period - expected).abs() / expected < 0.01, "{period} vs {expected}");
}

#[test]
fn unforced_kinetic_energy_is_conserved() {
    let mut rng = Rng::new(4);
    for _ in 0..5 {
        let chain = random_chain(&mut rng, 5, Vector3::zeros());
        let mut state = ChainState {
            q: rng.vector(5, PI),
            qdot: rng.vector(5, 1.0),
        };
        let e0 = kinetic_energy(&chain, &state).unwrap();
        for _ in 0..1000 {
            state = step(&chain, &state, &DVector::zeros(5), 1e-4).unwrap();
        }
        let e1 = kinetic_energy(&chain, &state).unwrap();
        assert!((e1 - e0).abs() / e0 < 1e-3, "{e0} -> {e1}");
    }
}

#[test]
fn stepping_rules() {
    let mut rng = Rng::new(5);
    let chain = random_chain(&mut rng, 4, Vector3::zeros());
    let rest = ChainState::zeros(4);
    assert_eq!(step(&chain, &rest, &DVector::zeros(4), 0.005).unwrap(), rest);

    let g = random_chain(&mut rng, 4, Vector3::new(0.0, 0.0, -9.81));
    let s = ChainState {
        q: rng.vector(4, 1.0),
        qdot: rng.vector(4, 1.0),
    };
    let tau = rng.vector(4, 1.0);
    let a = step(&g, &s, &tau, 0.005).unwrap();
    let b = step(&g, &s, &tau, 0.005).unwrap();
    assert!(a.q.iter().zip(b.q.iter()).all(|(x, y)| x.to_bits() == y.to_bits()));
    assert!(step(&g, &s, &tau, 0.0).is_err());

    let arm = default_arm_chain().unwrap();
    let elbow = arm.joint_index("right_elbow").unwrap();
    let hi = arm.links()[elbow].range[1];
    let mut q = DVector::zeros(arm.dof());
    q[elbow] = hi - 1e-9;
    let mut state = ChainState::at_rest(q);
    let mut tau = DVector::zeros(arm.dof());
    tau[elbow] = 5.0;
    for _ in 0..50 {
        state = step(&arm, &state, &tau, 0.005).unwrap();
        assert_eq!(state.q[elbow], hi);
        assert_eq!(state.qdot[elbow], 0.0);
    }
}

#[test]
fn passive_damping_is_integrated_implicitly() {
    let mut rng = Rng::new(6);
    let base = random_chain(&mut rng, 4, Vector3::new(0.0, 0.0, -9.81));
    let b = [0.5, 2.0, 0.0, 7.0];
    let chain = base.clone().with_damping(&b).unwrap();
    let s = ChainState {
        q: rng.vector(4, 1.0),
        qdot: rng.vector(4, 2.0),
    };
    let tau = rng.vector(4, 1.0);
    let dt = 0.005;
    let m = mass_matrix(&base, &s.q).unwrap();
    let h = bias_forces(&base, &s.q, &s.qdot).unwrap();
    let a = &m + DMatrix::from_diagonal(&DVector::from_row_slice(&b)) * dt;
    let expected = a.lu().solve(&(&m * &s.qdot + (&tau - h) * dt)).unwrap();
    let next = step(&chain, &s, &tau, dt).unwrap();
    assert!((next.qdot - &expected).amax() < 1e-10);
    assert!((next.q - (&s.q + expected * dt)).amax() < 1e-12);
    assert!(base.with_damping(&[-1.0, 0.0, 0.0, 0.0]).is_err());
}
