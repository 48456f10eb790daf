//! The reach demo with the controller observing the body through delay lines.

use std::path::{Path, PathBuf};

use embodykit_core::delays::DelayConfig;
use serde::{Deserialize, Serialize};

use super::reach::{
    mean_over, sample_targets, simulate_reach, Gains, ReachConfig, ReachSetup, ReachTarget, ReachTrace,
};
use crate::config::write_artifact;
use crate::csv::Table;
use crate::error::{CliError, CliResult};
use crate::svg::{line_chart, Series};

/// Hand distance counted as touching the target.
pub const TOUCH_RADIUS: f64 = 0.01;

pub const TRAJECTORY_COLUMNS: [&str; 8] = [
    "delay_steps",
    "target",
    "step",
    "distance_m",
    "misalignment_deg",
    "hand_x_m",
    "hand_y_m",
    "hand_z_m",
];
pub const SUMMARY_COLUMNS: [&str; 6] = [
    "delay_steps",
    "delay_ms",
    "targets_reached",
    "mean_time_to_target_s",
    "max_time_to_target_s",
    "mean_tortuosity",
];

fn default_delays() -> Vec<usize> {
    vec![0, 10, 40]
}

fn default_gains() -> Gains {
    Gains { kp: 25.0, kd: 2.0 }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayDemoConfig {
    /// Proprioceptive and visual delay in timesteps, one run each.
    #[serde(default = "default_delays")]
    pub sensory_delays: Vec<usize>,
    #[serde(default = "default_gains")]
    pub gains: Gains,
    /// Shared reach settings; its gain sets are ignored.
    #[serde(default)]
    pub reach: ReachConfig,
}

impl Default for DelayDemoConfig {
    fn default() -> Self {
        DelayDemoConfig {
            sensory_delays: default_delays(),
            gains: default_gains(),
            reach: ReachConfig::default(),
        }
    }
}

impl DelayDemoConfig {
    /// The reach config whose single gain set this demo runs.
    pub fn reach_config(&self) -> ReachConfig {
        ReachConfig {
            gain_sets: vec![self.gains],
            ..self.reach.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayRun {
    pub delay_steps: usize,
    pub traces: Vec<ReachTrace>,
}

impl DelayRun {
    /// Per-target first step within the touch radius.
    pub fn touch_steps(&self) -> Vec<Option<usize>> {
        self.traces.iter().map(|t| t.first_within(TOUCH_RADIUS)).collect()
    }

    pub fn mean_tortuosity(&self) -> f64 {
        self.traces.iter().map(ReachTrace::tortuosity).sum::<f64>() / self.traces.len() as f64
    }

    pub fn mean_distance(&self) -> Vec<f64> {
        mean_over(&self.traces, |t| &t.distance)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DelayResult {
    pub targets: Vec<ReachTarget>,
    pub runs: Vec<DelayRun>,
    pub dt: f64,
}

pub fn run_delay_demo(config: &DelayDemoConfig) -> CliResult<DelayResult> {
    if config.sensory_delays.is_empty() {
        return Err(CliError::Config("delay demo needs at least one delay".into()));
    }
    let reach = config.reach_config();
    reach.validate()?;
    let setup = ReachSetup::new(&reach)?;
    let targets = sample_targets(&setup, &reach)?;
    let runs = config
        .sensory_delays
        .iter()
        .map(|&d| {
            let delays = DelayConfig {
                proprioception: d,
                vision: d,
                motor: reach.motor_delay,
            };
            let traces = targets
                .iter()
                .map(|t| simulate_reach(&setup, &t.position, config.gains, delays, &reach))
                .collect::<CliResult<Vec<_>>>()?;
            Ok(DelayRun { delay_steps: d, traces })
        })
        .collect::<CliResult<Vec<_>>>()?;
    Ok(DelayResult {
        targets,
        runs,
        dt: reach.dt,
    })
}

pub fn write_delay_demo(config: &DelayDemoConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let result = run_delay_demo(config)?;
    let mut traj = Table::new(&TRAJECTORY_COLUMNS);
    let mut summary = Table::new(&SUMMARY_COLUMNS);
    let mut series = Vec::new();
    for run in &result.runs {
        let d = run.delay_steps as f64;
        for (ti, trace) in run.traces.iter().enumerate() {
            for k in 0..trace.distance.len() {
                let h = trace.hand[k];
                traj.push(vec![
                    d,
                    ti as f64,
                    k as f64,
                    trace.distance[k],
                    trace.misalignment_deg[k],
                    h.x,
                    h.y,
                    h.z,
                ]);
            }
        }
        let hits: Vec<f64> = run
            .touch_steps()
            .into_iter()
            .flatten()
            .map(|s| s as f64 * result.dt)
            .collect();
        let (mean, max) = if hits.is_empty() {
            (f64::NAN, f64::NAN)
        } else {
            (
                hits.iter().sum::<f64>() / hits.len() as f64,
                hits.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        };
        summary.push(vec![
            d,
            DelayConfig::steps_to_ms(run.delay_steps),
            hits.len() as f64,
            mean,
            max,
            run.mean_tortuosity(),
        ]);
        series.push(Series {
            label: format!("{} ms", DelayConfig::steps_to_ms(run.delay_steps)),
            points: run
                .mean_distance()
                .iter()
                .enumerate()
                .map(|(k, v)| (k as f64, *v))
                .collect(),
        });
    }
    Ok(vec![
        write_artifact(out, "delay_trajectories.csv", traj.to_csv())?,
        write_artifact(out, "delay_summary.csv", summary.to_csv())?,
        write_artifact(
            out,
            "delay_distance.svg",
            line_chart("Hand-target distance", "step", "m", &series),
        )?,
    ])
}
