//! Hand reaching with gaze alignment under the task-priority controller.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use embodykit_core::control::{
    misalignment_angle, solve_position_ik, IkOptions, JointSelection, Posture, TaskPriorityController, TaskSpec,
};
use embodykit_core::delays::{DelayConfig, DelayLine, TIMESTEP_S};
use embodykit_core::dynamics::{
    chain_from_body_spec_with, mass_matrix, step, ChainOptions, ChainState, KinematicChain, Kinematics,
};
use embodykit_core::growth::BodySpec;
use embodykit_core::scenegen::SceneRng;
use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::growth::body_at;
use crate::config::{write_artifact, BodyData};
use crate::csv::Table;
use crate::error::{CliError, CliResult};
use crate::svg::{line_chart, Series};

pub const HAND: &str = "right_hand";
pub const EYE: &str = "left_eye";
pub const SHOULDER: &str = "right_shoulder_flex";
/// Gaze direction in the eye frame.
pub const GAZE_AXIS: [f64; 3] = [1.0, 0.0, 0.0];

const CONTROLLED: [&str; 5] = [
    "right_shoulder_flex",
    "right_shoulder_abduct",
    "right_elbow",
    "left_eye_horizontal",
    "left_eye_vertical",
];
const ARM: [&str; 3] = ["right_shoulder_flex", "right_shoulder_abduct", "right_elbow"];
const START_POSE: [(&str, f64); 2] = [("right_shoulder_flex", 0.4), ("right_elbow", 0.8)];
/// The head is held still, turned down and toward the right hand.
const HEAD_POSE: [(&str, f64); 3] = [("head_tilt", 0.6), ("head_swivel", -0.4), ("head_tilt_side", 0.0)];
/// Largest gaze eccentricity accepted for a sampled target, radians.
const MAX_GAZE_ANGLE: f64 = 0.7;
const IK_ACCEPT: f64 = 1e-3;
/// Required clearance of the IK solution from every arm joint limit, radians.
const LIMIT_MARGIN: f64 = 0.1;
const MAX_DRAWS: usize = 10_000;

pub const TRAJECTORY_COLUMNS: [&str; 5] = ["gain_set", "target", "step", "distance_m", "misalignment_deg"];
pub const MEAN_COLUMNS: [&str; 4] = ["gain_set", "step", "mean_distance_m", "mean_misalignment_deg"];
pub const TARGET_COLUMNS: [&str; 5] = ["target", "draws", "x_m", "y_m", "z_m"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Gains {
    pub kp: f64,
    pub kd: f64,
}

fn default_age() -> f64 {
    18.0
}
fn default_targets() -> usize {
    10
}
fn default_steps() -> usize {
    2000
}
fn default_dt() -> f64 {
    TIMESTEP_S
}
fn default_shell() -> [f64; 2] {
    [0.5, 0.95]
}
fn default_gain_sets() -> Vec<Gains> {
    vec![
        Gains { kp: 25.0, kd: 2.0 },
        Gains { kp: 50.0, kd: 4.0 },
        Gains { kp: 100.0, kd: 8.0 },
    ]
}
fn default_damping() -> f64 {
    1e-2
}
fn default_motor_delay() -> usize {
    1
}
fn default_joint_damping() -> f64 {
    15.0
}
fn default_posture() -> Gains {
    Gains { kp: 0.2, kd: 0.05 }
}

/// Settings shared by the reach and delay demos.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReachConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_age")]
    pub age: f64,
    #[serde(default = "default_targets")]
    pub targets: usize,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    /// Target distance from the shoulder as fractions of full arm extension.
    #[serde(default = "default_shell")]
    pub shell: [f64; 2],
    #[serde(default = "default_gain_sets")]
    pub gain_sets: Vec<Gains>,
    /// Controller damping λ. The eye's tiny inertia needs more than the
    /// library default to keep its rank-2 alignment task invertible.
    #[serde(default = "default_damping")]
    pub damping: f64,
    #[serde(default = "default_motor_delay")]
    pub motor_delay: usize,
    /// Passive joint viscosity as a rate, 1/s. Each joint gets damping
    /// `joint_damping · M_jj` at the start pose.
    #[serde(default = "default_joint_damping")]
    pub joint_damping: f64,
    /// Pull toward the start pose in the null space of both tasks.
    #[serde(default = "default_posture")]
    pub posture: Gains,
    #[serde(default)]
    pub body: BodyData,
}

impl Default for ReachConfig {
    fn default() -> Self {
        ReachConfig {
            seed: 0,
            age: default_age(),
            targets: default_targets(),
            steps: default_steps(),
            dt: default_dt(),
            shell: default_shell(),
            gain_sets: default_gain_sets(),
            damping: default_damping(),
            motor_delay: default_motor_delay(),
            joint_damping: default_joint_damping(),
            posture: default_posture(),
            body: BodyData::default(),
        }
    }
}

impl ReachConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.targets == 0 || self.steps == 0 {
            return Err(CliError::Config(
                "reach demo needs at least one target and one step".into(),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CliError::Config(format!("timestep {} must be positive", self.dt)));
        }
        if !(0.0 < self.shell[0] && self.shell[0] <= self.shell[1] && self.shell[1] <= 1.0) {
            return Err(CliError::Config(format!(
                "target shell {:?} must satisfy 0 < inner <= outer <= 1",
                self.shell
            )));
        }
        if self.gain_sets.is_empty() {
            return Err(CliError::Config("at least one gain set is required".into()));
        }
        for g in &self.gain_sets {
            if !(g.kp > 0.0 && g.kd >= 0.0 && g.kp.is_finite() && g.kd.is_finite()) {
                return Err(CliError::Config(format!(
                    "gains {g:?} must be finite with kp > 0, kd >= 0"
                )));
            }
        }
        if !(self.joint_damping >= 0.0 && self.joint_damping.is_finite()) {
            return Err(CliError::Config("joint damping must be nonnegative".into()));
        }
        if !(self.posture.kp >= 0.0 && self.posture.kd >= 0.0) {
            return Err(CliError::Config("posture gains must be nonnegative".into()));
        }
        if !(self.damping >= 0.0 && self.damping.is_finite()) {
            return Err(CliError::Config("controller damping must be nonnegative".into()));
        }
        Ok(())
    }
}

/// Upright chain from the torso. The right shoulder (flex, abduct), right
/// elbow and left eye are controlled; the head, the left arm and the right
/// shoulder rotation are locked, and the right eye is left passive.
pub struct ReachSetup {
    pub spec: BodySpec,
    pub chain: KinematicChain,
    pub selection: JointSelection,
    pub arm: JointSelection,
    pub q0: DVector<f64>,
    pub shoulder: Vector3<f64>,
    pub arm_length: f64,
}

impl ReachSetup {
    pub fn new(config: &ReachConfig) -> CliResult<Self> {
        let body = config.body.load()?;
        let spec = body_at(&body, config.age, &BTreeMap::new())?;
        let mut locked: BTreeSet<String> = [
            "left_shoulder_flex",
            "left_shoulder_abduct",
            "left_shoulder_rotate",
            "left_elbow",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        locked.insert("right_shoulder_rotate".to_string());
        locked.extend(HEAD_POSE.iter().map(|(n, _)| n.to_string()));
        let options = ChainOptions {
            locked_joints: locked,
            locked_angles: HEAD_POSE.iter().map(|(n, a)| (n.to_string(), *a)).collect(),
            gravity: None,
        };
        let chain = chain_from_body_spec_with(&spec, "upper_body", &options)?;
        let selection = JointSelection::from_names(&chain, &CONTROLLED)?;
        let arm = JointSelection::from_names(&chain, &ARM)?;
        let mut q0 = DVector::zeros(chain.dof());
        for (name, value) in START_POSE {
            let i = chain
                .joint_index(name)
                .ok_or_else(|| CliError::Config(format!("joint `{name}` is not in the body template")))?;
            q0[i] = value;
        }
        let m0 = mass_matrix(&chain, &q0)?;
        let damping: Vec<f64> = (0..chain.dof()).map(|j| config.joint_damping * m0[(j, j)]).collect();
        let chain = chain.with_damping(&damping)?;
        let straight = Kinematics::compute(&chain, &DVector::zeros(chain.dof()))?;
        let shoulder_link = chain
            .joint_index(SHOULDER)
            .ok_or_else(|| CliError::Config(format!("joint `{SHOULDER}` is not in the body template")))?;
        let shoulder = straight.links[shoulder_link].translation.vector;
        let hand = straight.site_pose(chain.site(HAND)?).position;
        chain.site(EYE)?;
        Ok(ReachSetup {
            spec,
            chain,
            selection,
            arm,
            q0,
            shoulder,
            arm_length: (hand - shoulder).norm(),
        })
    }

    pub fn hand_position(&self, q: &DVector<f64>) -> CliResult<Vector3<f64>> {
        let kin = Kinematics::compute(&self.chain, q)?;
        Ok(kin.site_pose(self.chain.site(HAND)?).position)
    }

    pub fn tasks(&self, target: &Vector3<f64>, gains: Gains) -> Vec<TaskSpec> {
        vec![
            TaskSpec::position(1, HAND, *target, gains.kp, gains.kd),
            TaskSpec::alignment(2, EYE, *target, Vector3::from(GAZE_AXIS), gains.kp, gains.kd),
        ]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachTarget {
    pub position: Vector3<f64>,
    /// Candidates drawn for this target, including rejected ones.
    pub draws: usize,
}

/// Targets uniform by volume in the shell around the shoulder, in front of
/// the body, kept only if position IK reaches them with the arm clear of its
/// joint limits and the eye can turn to them.
pub fn sample_targets(setup: &ReachSetup, config: &ReachConfig) -> CliResult<Vec<ReachTarget>> {
    let mut rng = SceneRng::new(config.seed);
    let r_in = config.shell[0] * setup.arm_length;
    let r_out = config.shell[1] * setup.arm_length;
    let (eye, gaze_axis) = {
        let kin = Kinematics::compute(&setup.chain, &setup.q0)?;
        let pose = kin.site_pose(setup.chain.site(EYE)?);
        (pose.position, pose.rotation * Vector3::from(GAZE_AXIS))
    };
    let mut out = Vec::with_capacity(config.targets);
    for _ in 0..config.targets {
        let mut draws = 0;
        let target = loop {
            if draws == MAX_DRAWS {
                return Err(CliError::Numerical(format!(
                    "no reachable target found in {MAX_DRAWS} draws"
                )));
            }
            draws += 1;
            let dir = Vector3::new(rng.normal(), rng.normal(), rng.normal());
            let u = rng.unit();
            let Some(dir) = dir.try_normalize(1e-12) else { continue };
            if dir.x <= 0.0 || dir.z >= 0.0 {
                continue;
            }
            let radius = (r_in.powi(3) + u * (r_out.powi(3) - r_in.powi(3))).cbrt();
            let candidate = setup.shoulder + dir * radius;
            let gaze = candidate - eye;
            if gaze.angle(&gaze_axis) > MAX_GAZE_ANGLE {
                continue;
            }
            let ik = solve_position_ik(
                &setup.chain,
                &setup.q0,
                HAND,
                &candidate,
                &setup.arm,
                &IkOptions::default(),
            )?;
            let clear = setup.chain.links().iter().enumerate().all(|(j, link)| {
                !setup.arm.is_selected(j)
                    || (ik.q[j] - link.range[0] >= LIMIT_MARGIN && link.range[1] - ik.q[j] >= LIMIT_MARGIN)
            });
            if ik.residual < IK_ACCEPT && clear {
                break candidate;
            }
        };
        out.push(ReachTarget {
            position: target,
            draws,
        });
    }
    Ok(out)
}

/// Per-step measurements of one reach, true state, step 0 included.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachTrace {
    pub distance: Vec<f64>,
    pub misalignment_deg: Vec<f64>,
    pub hand: Vec<Vector3<f64>>,
    pub final_q: DVector<f64>,
}

impl ReachTrace {
    /// First step at which the hand is closer than `radius`.
    pub fn first_within(&self, radius: f64) -> Option<usize> {
        self.distance.iter().position(|d| *d < radius)
    }

    /// Hand path length over straight-line displacement.
    pub fn tortuosity(&self) -> f64 {
        let path: f64 = self.hand.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
        let chord = (self.hand[self.hand.len() - 1] - self.hand[0]).norm();
        path / chord
    }
}

/// Simulates one reach with the controller seeing joint state through
/// `sensory_delay`-step lines and its torques applied `motor_delay` steps
/// late.
pub fn simulate_reach(
    setup: &ReachSetup,
    target: &Vector3<f64>,
    gains: Gains,
    delays: DelayConfig,
    config: &ReachConfig,
) -> CliResult<ReachTrace> {
    let (steps, dt) = (config.steps, config.dt);
    let chain = &setup.chain;
    let controller = TaskPriorityController::new(config.damping)?.with_posture(Posture {
        reference: setup.q0.clone(),
        kp: config.posture.kp,
        kd: config.posture.kd,
    })?;
    let hand_site = chain.site(HAND)?;
    let eye_site = chain.site(EYE)?;
    let gaze = Vector3::from(GAZE_AXIS);

    let mut state = ChainState::at_rest(setup.q0.clone());
    let mut q_line = DelayLine::new(delays.proprioception, state.q.clone());
    let mut qd_line = DelayLine::new(delays.proprioception, state.qdot.clone());
    let mut seen_line = DelayLine::new(delays.vision, target.as_slice().to_vec());
    let mut motor: Option<DelayLine<DVector<f64>>> = None;

    let mut trace = ReachTrace {
        distance: Vec::with_capacity(steps + 1),
        misalignment_deg: Vec::with_capacity(steps + 1),
        hand: Vec::with_capacity(steps + 1),
        final_q: DVector::zeros(0),
    };
    let record = |state: &ChainState, trace: &mut ReachTrace| -> CliResult<()> {
        let kin = Kinematics::compute(chain, &state.q)?;
        let hand = kin.site_pose(hand_site).position;
        trace.distance.push((target - hand).norm());
        trace
            .misalignment_deg
            .push(misalignment_angle(&kin.site_pose(eye_site), &gaze, target).to_degrees());
        trace.hand.push(hand);
        Ok(())
    };
    record(&state, &mut trace)?;
    for _ in 0..steps {
        let observed = ChainState {
            q: q_line.step(state.q.clone())?,
            qdot: qd_line.step(state.qdot.clone())?,
        };
        let seen = Vector3::from_column_slice(&seen_line.step(target.as_slice().to_vec())?);
        let tau = controller
            .compute(chain, &observed, &setup.tasks(&seen, gains), &setup.selection)?
            .tau;
        let line = motor.get_or_insert_with(|| DelayLine::new(delays.motor, tau.clone()));
        let applied = line.step(tau)?;
        state = step(chain, &state, &applied, dt)?;
        record(&state, &mut trace)?;
    }
    trace.final_q = state.q;
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReachResult {
    pub targets: Vec<ReachTarget>,
    pub gain_sets: Vec<Gains>,
    /// Indexed `[gain_set][target]`.
    pub traces: Vec<Vec<ReachTrace>>,
    pub joint_names: Vec<String>,
}

impl ReachResult {
    pub fn mean_distance(&self, gain_set: usize) -> Vec<f64> {
        mean_over(&self.traces[gain_set], |t| &t.distance)
    }

    pub fn mean_misalignment_deg(&self, gain_set: usize) -> Vec<f64> {
        mean_over(&self.traces[gain_set], |t| &t.misalignment_deg)
    }
}

pub fn mean_over(traces: &[ReachTrace], field: impl Fn(&ReachTrace) -> &Vec<f64>) -> Vec<f64> {
    let len = field(&traces[0]).len();
    (0..len)
        .map(|k| traces.iter().map(|t| field(t)[k]).sum::<f64>() / traces.len() as f64)
        .collect()
}

pub fn reach_delays(config: &ReachConfig) -> DelayConfig {
    DelayConfig {
        proprioception: 0,
        vision: 0,
        motor: config.motor_delay,
    }
}

pub fn run_reach_demo(config: &ReachConfig) -> CliResult<ReachResult> {
    config.validate()?;
    let setup = ReachSetup::new(config)?;
    let targets = sample_targets(&setup, config)?;
    let traces = config
        .gain_sets
        .iter()
        .map(|&gains| {
            targets
                .iter()
                .map(|t| simulate_reach(&setup, &t.position, gains, reach_delays(config), config))
                .collect::<CliResult<Vec<_>>>()
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(ReachResult {
        targets,
        gain_sets: config.gain_sets.clone(),
        traces,
        joint_names: setup.chain.links().iter().map(|l| l.name.clone()).collect(),
    })
}

#[derive(Serialize)]
struct FinalState<'a> {
    age_months: f64,
    joint_names: &'a [String],
    targets: Vec<[f64; 3]>,
    /// `[gain_set][target]` joint angles at the last step.
    final_joint_angles: Vec<Vec<Vec<f64>>>,
}

pub fn write_reach_demo(config: &ReachConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let result = run_reach_demo(config)?;
    let mut traj = Table::new(&TRAJECTORY_COLUMNS);
    let mut mean = Table::new(&MEAN_COLUMNS);
    let mut targets = Table::new(&TARGET_COLUMNS);
    for (ti, t) in result.targets.iter().enumerate() {
        targets.push(vec![
            ti as f64,
            t.draws as f64,
            t.position.x,
            t.position.y,
            t.position.z,
        ]);
    }
    let mut dist_series = Vec::new();
    let mut mis_series = Vec::new();
    for (g, gains) in result.gain_sets.iter().enumerate() {
        for (ti, trace) in result.traces[g].iter().enumerate() {
            for k in 0..trace.distance.len() {
                traj.push(vec![
                    g as f64,
                    ti as f64,
                    k as f64,
                    trace.distance[k],
                    trace.misalignment_deg[k],
                ]);
            }
        }
        let md = result.mean_distance(g);
        let mm = result.mean_misalignment_deg(g);
        for k in 0..md.len() {
            mean.push(vec![g as f64, k as f64, md[k], mm[k]]);
        }
        let label = format!("kp {} kd {}", gains.kp, gains.kd);
        dist_series.push(Series {
            label: label.clone(),
            points: md.iter().enumerate().map(|(k, v)| (k as f64, *v)).collect(),
        });
        mis_series.push(Series {
            label,
            points: mm.iter().enumerate().map(|(k, v)| (k as f64, *v)).collect(),
        });
    }
    let snapshot = FinalState {
        age_months: config.age,
        joint_names: &result.joint_names,
        targets: result.targets.iter().map(|t| t.position.into()).collect(),
        final_joint_angles: result
            .traces
            .iter()
            .map(|per| per.iter().map(|t| t.final_q.as_slice().to_vec()).collect())
            .collect(),
    };
    let mut snapshot_json = serde_json::to_string_pretty(&snapshot).expect("snapshot serializes");
    snapshot_json.push('\n');
    Ok(vec![
        write_artifact(out, "reach_final_state.json", snapshot_json)?,
        write_artifact(out, "reach_targets.csv", targets.to_csv())?,
        write_artifact(out, "reach_trajectories.csv", traj.to_csv())?,
        write_artifact(out, "reach_mean.csv", mean.to_csv())?,
        write_artifact(
            out,
            "reach_distance.svg",
            line_chart("Hand-target distance", "step", "m", &dist_series),
        )?,
        write_artifact(
            out,
            "reach_misalignment.svg",
            line_chart("Eye-target misalignment", "step", "deg", &mis_series),
        )?,
    ])
}
