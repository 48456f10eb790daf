//! Maximal-activation strength tests in a supine posture.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use embodykit_core::delays::TIMESTEP_S;
use embodykit_core::dynamics::{chain_from_body_spec_with, step, ChainOptions, ChainState};
use nalgebra::{DVector, Vector3};
use serde::{Deserialize, Serialize};

use super::growth::body_at;
use crate::config::{write_artifact, BodyData};
use crate::csv::Table;
use crate::error::{CliError, CliResult};
use crate::svg::{line_chart, Series};

/// Lying face-up: the body's forward axis points away from the floor.
pub const SUPINE_GRAVITY: Vector3<f64> = Vector3::new(-9.81, 0.0, 0.0);

pub const TRAJECTORY_COLUMNS: [&str; 3] = ["step", "time_s", "angle_rad"];
pub const SUMMARY_COLUMNS: [&str; 3] = ["age_months", "time_to_limit_s", "final_angle_rad"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Behavior {
    HeadLift,
    LegLift,
}

impl Behavior {
    pub fn name(self) -> &'static str {
        match self {
            Behavior::HeadLift => "head_lift",
            Behavior::LegLift => "leg_lift",
        }
    }

    /// Part the chain is rooted at and the actuated joint.
    pub fn chain_root(self) -> &'static str {
        match self {
            Behavior::HeadLift => "upper_body",
            Behavior::LegLift => "hips",
        }
    }

    pub fn joint(self) -> &'static str {
        match self {
            Behavior::HeadLift => "head_tilt",
            Behavior::LegLift => "right_hip_flex",
        }
    }
}

fn default_ages() -> Vec<f64> {
    vec![0.0, 6.0, 12.0, 18.0, 24.0]
}

fn default_behaviors() -> Vec<Behavior> {
    vec![Behavior::HeadLift, Behavior::LegLift]
}

fn default_steps() -> usize {
    500
}

fn default_dt() -> f64 {
    TIMESTEP_S
}

fn default_activation() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrengthConfig {
    #[serde(default = "default_ages")]
    pub ages: Vec<f64>,
    #[serde(default = "default_behaviors")]
    pub behaviors: Vec<Behavior>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_activation")]
    pub activation: f64,
    #[serde(default)]
    pub body: BodyData,
}

impl Default for StrengthConfig {
    fn default() -> Self {
        StrengthConfig {
            ages: default_ages(),
            behaviors: default_behaviors(),
            steps: default_steps(),
            dt: default_dt(),
            activation: default_activation(),
            body: BodyData::default(),
        }
    }
}

impl StrengthConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.ages.is_empty() || self.behaviors.is_empty() {
            return Err(CliError::Config(
                "strength test needs at least one age and behavior".into(),
            ));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(CliError::Config(format!("timestep {} must be positive", self.dt)));
        }
        if !(0.0..=1.0).contains(&self.activation) {
            return Err(CliError::Config(format!(
                "activation {} must lie in [0, 1]",
                self.activation
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrengthRun {
    pub behavior: Behavior,
    pub age: f64,
    pub dt: f64,
    /// Joint angle before the first step and after each step.
    pub angles: Vec<f64>,
    pub limit: f64,
    /// First step index at which the upper joint limit is reached.
    pub limit_step: Option<usize>,
}

impl StrengthRun {
    pub fn time_to_limit(&self) -> Option<f64> {
        self.limit_step.map(|s| s as f64 * self.dt)
    }

    pub fn trajectory_table(&self) -> Table {
        let mut t = Table::new(&TRAJECTORY_COLUMNS);
        for (i, a) in self.angles.iter().enumerate() {
            t.push(vec![i as f64, i as f64 * self.dt, *a]);
        }
        t
    }
}

pub fn run_strength_test(config: &StrengthConfig) -> CliResult<Vec<StrengthRun>> {
    config.validate()?;
    let body = config.body.load()?;
    let mut runs = Vec::new();
    for &behavior in &config.behaviors {
        for &age in &config.ages {
            let spec = body_at(&body, age, &BTreeMap::new())?;
            let locked: BTreeSet<String> = spec
                .parts()
                .flat_map(|p| p.joints.iter().map(|j| j.name.clone()))
                .filter(|n| n != behavior.joint())
                .collect();
            let options = ChainOptions {
                locked_joints: locked,
                gravity: Some(SUPINE_GRAVITY),
                ..ChainOptions::default()
            };
            let chain = chain_from_body_spec_with(&spec, behavior.chain_root(), &options)?;
            let joint = chain
                .joint_index(behavior.joint())
                .ok_or_else(|| CliError::Config(format!("joint `{}` is not in the body template", behavior.joint())))?;
            let link = &chain.links()[joint];
            let limit = link.range[1];
            let mut tau = DVector::zeros(chain.dof());
            tau[joint] = link.gear * config.activation;

            let mut state = ChainState::zeros(chain.dof());
            let mut angles = Vec::with_capacity(config.steps + 1);
            angles.push(state.q[joint]);
            let mut limit_step = None;
            for k in 1..=config.steps {
                state = step(&chain, &state, &tau, config.dt)?;
                angles.push(state.q[joint]);
                if limit_step.is_none() && state.q[joint] >= limit {
                    limit_step = Some(k);
                }
            }
            runs.push(StrengthRun {
                behavior,
                age,
                dt: config.dt,
                angles,
                limit,
                limit_step,
            });
        }
    }
    Ok(runs)
}

pub fn write_strength_test(config: &StrengthConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let runs = run_strength_test(config)?;
    let mut written = Vec::new();
    for &behavior in &config.behaviors {
        let mine: Vec<&StrengthRun> = runs.iter().filter(|r| r.behavior == behavior).collect();
        let mut summary = Table::new(&SUMMARY_COLUMNS);
        let mut series = Vec::new();
        for run in &mine {
            let name = format!("strength_{}_{}m.csv", behavior.name(), run.age);
            written.push(write_artifact(out, &name, run.trajectory_table().to_csv())?);
            summary.push(vec![
                run.age,
                run.time_to_limit().unwrap_or(f64::NAN),
                *run.angles.last().expect("trajectory has the initial angle"),
            ]);
            series.push(Series {
                label: format!("{} months", run.age),
                points: run
                    .angles
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (i as f64 * run.dt, *a))
                    .collect(),
            });
        }
        let base = format!("strength_{}", behavior.name());
        written.push(write_artifact(out, &format!("{base}_summary.csv"), summary.to_csv())?);
        let svg = line_chart(
            &format!("{} joint angle", behavior.joint()),
            "time (s)",
            "angle (rad)",
            &series,
        );
        written.push(write_artifact(out, &format!("{base}.svg"), svg)?);
    }
    Ok(written)
}
