//! Sensorimotor delays as FIFO delay lines counted in simulation timesteps.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default simulation timestep in seconds.
pub const TIMESTEP_S: f64 = 0.005;

/// Values that can flow through a delay line. The shape must stay constant
/// for the lifetime of a line.
pub trait Signal: Clone {
    fn shape(&self) -> usize;
}

impl Signal for f64 {
    fn shape(&self) -> usize {
        1
    }
}

impl Signal for Vec<f64> {
    fn shape(&self) -> usize {
        self.len()
    }
}

impl<const N: usize> Signal for [f64; N] {
    fn shape(&self) -> usize {
        N
    }
}

impl Signal for nalgebra::DVector<f64> {
    fn shape(&self) -> usize {
        self.len()
    }
}

/// Returns each input `delay_steps` calls later; the first `delay_steps`
/// outputs are the prefill value.
#[derive(Debug, Clone)]
pub struct DelayLine<T> {
    delay_steps: usize,
    shape: usize,
    buffer: VecDeque<T>,
}

impl<T: Signal> DelayLine<T> {
    pub fn new(delay_steps: usize, prefill: T) -> Self {
        let shape = prefill.shape();
        let mut buffer = VecDeque::with_capacity(delay_steps + 1);
        buffer.extend(std::iter::repeat_n(prefill, delay_steps));
        DelayLine {
            delay_steps,
            shape,
            buffer,
        }
    }

    pub fn delay_steps(&self) -> usize {
        self.delay_steps
    }

    pub fn len(&self) -> usize {
        self.buffer.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buffer.is_empty()
    }

    pub fn step(&mut self, input: T) -> Result<T> {
        if input.shape() != self.shape {
            return Err(Error::invalid(format!(
                "delay line carries elements of shape {}, got {}",
                self.shape,
                input.shape()
            )));
        }
        self.buffer.push_back(input);
        Ok(self.buffer.pop_front().expect("buffer holds the element just pushed"))
    }
}

pub fn delay_step<T: Signal>(line: &mut DelayLine<T>, input: T) -> Result<T> {
    line.step(input)
}

/// How a delay line is filled before real data arrives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Prefill {
    /// Repeat the first real observation.
    #[default]
    First,
    Zero,
}

/// Per-modality delays in timesteps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelayConfig {
    #[serde(default)]
    pub proprioception: usize,
    #[serde(default)]
    pub vision: usize,
    #[serde(default)]
    pub motor: usize,
}

impl DelayConfig {
    pub fn steps_to_ms(steps: usize) -> f64 {
        steps as f64 * TIMESTEP_S * 1000.0
    }
}
