use embodykit_core::control::{
    task_priority_torques, JointSelection, TaskPriorityController, TaskSpec, DEFAULT_DAMPING,
};
use embodykit_core::data::default_arm_chain;
use embodykit_core::dynamics::{bias_forces, jacobian, mass_matrix, site_pose, step, ChainState, KinematicChain};
use nalgebra::{DVector, Isometry3, Matrix3, Vector3};
use proptest::prelude::*;

mod common;
use common::{random_chain_with, Rng};

/// `J·M⁻¹·(τ − h)` on the linear rows at `site`.
fn task_accel(chain: &KinematicChain, state: &ChainState, tau: &DVector<f64>, site: &str) -> Vector3<f64> {
    let m = mass_matrix(chain, &state.q).unwrap();
    let h = bias_forces(chain, &state.q, &state.qdot).unwrap();
    let qdd = m.lu().solve(&(tau - h)).unwrap();
    let j = jacobian(chain, &state.q, site).unwrap();
    let a = j.rows(0, 3) * qdd;
    Vector3::new(a[0], a[1], a[2])
}

fn chain_with_mid_site(rng: &mut Rng, n: usize) -> KinematicChain {
    let mut chain = random_chain_with(rng, n, Vector3::new(0.0, 0.0, -9.81), true);
    chain
        .add_site("mid", Some(n / 2), Isometry3::translation(0.05, 0.1, 0.0))
        .unwrap();
    chain
}

/// Smallest singular value of the selected Jacobian rows at `tip`.
fn min_singular(chain: &KinematicChain, q: &DVector<f64>, rows: std::ops::Range<usize>) -> f64 {
    let j = jacobian(chain, q, "tip").unwrap();
    let sub = j.rows(rows.start, rows.len()).into_owned();
    sub.svd(false, false).singular_values.min()
}

fn random_state(rng: &mut Rng, n: usize) -> ChainState {
    ChainState {
        q: rng.vector(n, std::f64::consts::PI),
        qdot: rng.vector(n, 1.0),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn lower_priority_tasks_do_not_disturb_the_primary(seed in any::<u64>(), n in 6usize..10) {
        let mut rng = Rng::new(seed);
        let chain = chain_with_mid_site(&mut rng, n);
        let state = random_state(&mut rng, n);
        // Both tasks together must be feasible, or the exact secondary is singular.
        prop_assume!(min_singular(&chain, &state.q, 0..6) > 0.05);
        let all = JointSelection::all(n).unwrap();
        let exact = TaskPriorityController::new(0.0).unwrap();
        let primary = TaskSpec::position(1, "tip", rng.vec3(0.5), 40.0, 5.0);
        let alone = exact.compute(&chain, &state, std::slice::from_ref(&primary), &all).unwrap();
        let secondary = TaskSpec::orientation(2, "tip", Matrix3::identity(), 10.0, 1.0);
        let both = exact.compute(&chain, &state, &[primary, secondary], &all).unwrap();
        let a = task_accel(&chain, &state, &alone.tau, "tip");
        let b = task_accel(&chain, &state, &both.tau, "tip");
        prop_assert!((a - b).norm() <= 1e-6 * a.norm().max(1.0), "{a} vs {b}");
        // The secondary does change the torque.
        prop_assert!((&alone.tau - &both.tau).norm() > 1e-6);
    }

    #[test]
    fn unselected_joints_get_exactly_zero(seed in any::<u64>()) {
        let mut rng = Rng::new(seed);
        let n = 6;
        let chain = chain_with_mid_site(&mut rng, n);
        let state = random_state(&mut rng, n);
        let mut mask: Vec<bool> = (0..n).map(|_| rng.unit() < 0.6).collect();
        mask[n - 1] = true;
        let selection = JointSelection::new(mask.clone()).unwrap();
        let tasks = [
            TaskSpec::position(1, "tip", rng.vec3(0.5), 50.0, 10.0),
            TaskSpec::position(2, "mid", rng.vec3(0.5), 50.0, 10.0),
        ];
        let tau = task_priority_torques(&chain, &state, &tasks, &selection).unwrap();
        for (j, selected) in mask.iter().enumerate() {
            if !selected {
                prop_assert_eq!(tau[j].to_bits(), 0.0f64.to_bits());
            }
        }
    }
}

#[test]
fn single_task_realizes_kp_times_error() {
    let mut rng = Rng::new(11);
    let mut checked = 0;
    while checked < 10 {
        let n = 6;
        let chain = chain_with_mid_site(&mut rng, n);
        let state = ChainState::at_rest(rng.vector(n, std::f64::consts::PI));
        if min_singular(&chain, &state.q, 0..3) < 0.05 {
            continue;
        }
        let target = rng.vec3(0.5);
        let kp = 37.0;
        let task = TaskSpec::position(1, "tip", target, kp, 0.0);
        let all = JointSelection::all(n).unwrap();
        let exact = TaskPriorityController::new(0.0).unwrap();
        let out = exact
            .compute(&chain, &state, std::slice::from_ref(&task), &all)
            .unwrap();
        let e = target - site_pose(&chain, &state.q, "tip").unwrap().position;
        let a = task_accel(&chain, &state, &out.tau, "tip");
        assert!(
            (a - e * kp).norm() < 1e-6 * (e * kp).norm().max(1.0),
            "{a} vs {}",
            e * kp
        );

        let doubled = TaskSpec { kp: 2.0 * kp, ..task };
        let out2 = exact.compute(&chain, &state, &[doubled], &all).unwrap();
        let a2 = task_accel(&chain, &state, &out2.tau, "tip");
        assert!((a2 - a * 2.0).norm() < 1e-6 * a2.norm().max(1.0));
        checked += 1;
    }
}

#[test]
fn duplicate_priorities_are_rejected() {
    let mut rng = Rng::new(12);
    let chain = chain_with_mid_site(&mut rng, 4);
    let state = ChainState::zeros(4);
    let tasks = [
        TaskSpec::position(1, "tip", Vector3::zeros(), 1.0, 0.0),
        TaskSpec::position(1, "mid", Vector3::zeros(), 1.0, 0.0),
    ];
    assert!(task_priority_torques(&chain, &state, &tasks, &JointSelection::all(4).unwrap()).is_err());
    assert!(task_priority_torques(&chain, &state, &[], &JointSelection::all(4).unwrap()).is_err());
}

/// Targets are hand positions of random interior arm poses, which the arm
/// can reach without touching a limit.
#[test]
fn bundled_arm_converges_under_default_gains() {
    let arm = default_arm_chain().unwrap();
    let n = arm.dof();
    let all = JointSelection::all(n).unwrap();
    let controller = TaskPriorityController::new(DEFAULT_DAMPING).unwrap();
    let mut start = DVector::zeros(n);
    start[arm.joint_index("right_shoulder_flex").unwrap()] = 0.4;
    start[arm.joint_index("right_elbow").unwrap()] = 0.8;
    let mut rng = Rng::new(13);
    for _ in 0..10 {
        let pose = DVector::from_fn(n, |i, _| {
            let [lo, hi] = arm.links()[i].range;
            let mid = 0.5 * (lo + hi);
            mid + 0.3 * (hi - lo) * rng.range(-0.5, 0.5)
        });
        let target = site_pose(&arm, &pose, "right_hand").unwrap().position;
        let task = TaskSpec::position(1, "right_hand", target, 50.0, 10.0);
        let mut state = ChainState::at_rest(start.clone());
        let mut errors = Vec::new();
        for _ in 0..500 {
            let tau = controller
                .compute(&arm, &state, std::slice::from_ref(&task), &all)
                .unwrap()
                .tau;
            state = step(&arm, &state, &tau, 0.005).unwrap();
            errors.push((target - site_pose(&arm, &state.q, "right_hand").unwrap().position).norm());
        }
        let settled = errors.iter().position(|&e| e < 0.01).expect("never within 1 cm");
        assert!(errors[settled..].iter().all(|&e| e < 0.01), "left the 1 cm ball");
        // kd = 10 against kp = 50 is underdamped, so the decay has micron-level
        // ripples. Its envelope over 50-step blocks is what shrinks.
        let peaks: Vec<f64> = errors[settled..]
            .chunks(50)
            .map(|c| c.iter().copied().fold(0.0, f64::max))
            .collect();
        assert!(peaks.windows(2).all(|w| w[1] <= w[0]), "{peaks:?}");
    }
}
