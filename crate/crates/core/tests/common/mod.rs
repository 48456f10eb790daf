//! Random chains shared by the dynamics and control tests.
#![allow(dead_code)]

use std::f64::consts::PI;

use embodykit_core::dynamics::{KinematicChain, Link};
use nalgebra::{DVector, Isometry3, Matrix3, Rotation3, Translation3, UnitQuaternion, Vector3};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

pub struct Rng(ChaCha8Rng);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(ChaCha8Rng::seed_from_u64(seed))
    }
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
    pub fn range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }
    pub fn vec3(&mut self, scale: f64) -> Vector3<f64> {
        Vector3::new(
            self.range(-scale, scale),
            self.range(-scale, scale),
            self.range(-scale, scale),
        )
    }
    pub fn direction(&mut self) -> Vector3<f64> {
        loop {
            let v = self.vec3(1.0);
            if v.norm() > 0.1 {
                return v.normalize();
            }
        }
    }
    pub fn vector(&mut self, n: usize, scale: f64) -> DVector<f64> {
        DVector::from_fn(n, |_, _| self.range(-scale, scale))
    }
}

pub fn link(
    name: String,
    parent: Option<usize>,
    axis: Vector3<f64>,
    offset: Isometry3<f64>,
    mass: f64,
    com: Vector3<f64>,
    inertia: Matrix3<f64>,
) -> Link {
    Link {
        name,
        parent,
        axis,
        offset,
        mass,
        com,
        inertia,
        range: [-100.0, 100.0],
        gear: 1.0,
        damping: 0.0,
    }
}

/// A random tree: each link hangs off a random earlier one.
pub fn random_chain(rng: &mut Rng, n: usize, gravity: Vector3<f64>) -> KinematicChain {
    random_chain_with(rng, n, gravity, false)
}

/// Like [`random_chain`], or an unbranched chain with `serial`.
pub fn random_chain_with(rng: &mut Rng, n: usize, gravity: Vector3<f64>, serial: bool) -> KinematicChain {
    let links = (0..n)
        .map(|i| {
            let parent = match i {
                0 => None,
                _ if serial => Some(i - 1),
                _ => Some((rng.unit() * i as f64) as usize),
            };
            let rot = Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(rng.direction()), rng.range(0.0, PI));
            let d = Vector3::new(rng.range(0.01, 0.1), rng.range(0.01, 0.1), rng.range(0.01, 0.1));
            let inertia = rot.matrix() * Matrix3::from_diagonal(&d) * rot.matrix().transpose();
            let offset = Isometry3::from_parts(
                Translation3::from(rng.vec3(0.3)),
                UnitQuaternion::from_scaled_axis(rng.vec3(1.0)),
            );
            link(
                format!("j{i}"),
                parent,
                rng.direction(),
                offset,
                rng.range(0.2, 2.0),
                rng.vec3(0.2),
                inertia,
            )
        })
        .collect();
    let mut chain = KinematicChain::new(links, vec![], Isometry3::identity(), gravity).unwrap();
    chain
        .add_site("tip", Some(n - 1), Isometry3::translation(0.1, -0.05, 0.2))
        .unwrap();
    chain
}
