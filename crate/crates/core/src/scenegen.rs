//! Seeded procedural scenes: a box room of six textured planes, an agent
//! position and toys scattered around the agent.
//!
//! The generator is a ChaCha8 stream (`rand_chacha`) seeded through
//! `SeedableRng::seed_from_u64`. All variates are derived from raw 64-bit
//! outputs by the documented conversions in [`SceneRng`], in this order:
//! room size (x, y, z), plane textures (floor, ceiling, +x, −x, +y, −y walls),
//! agent x, agent y, agent yaw, toy count, then per toy its shape, color
//! (r, g, b) and position.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Recorded in every scene file.
pub const RNG_NAME: &str = "chacha8/seed_from_u64";

const MAX_PLACEMENT_ATTEMPTS: usize = 100_000;

/// Random variates over a ChaCha8 stream.
pub struct SceneRng {
    inner: ChaCha8Rng,
}

impl SceneRng {
    pub fn new(seed: u64) -> Self {
        SceneRng {
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` from the top 53 bits of one output.
    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    /// Uniform integer in `[lo, hi]` by rejection of the biased tail.
    pub fn int_inclusive(&mut self, lo: u64, hi: u64) -> u64 {
        let span = hi - lo + 1;
        if span == 0 {
            return self.next_u64();
        }
        let zone = (u64::MAX / span) * span;
        loop {
            let x = self.next_u64();
            if x < zone {
                return lo + x % span;
            }
        }
    }

    pub fn index(&mut self, len: usize) -> usize {
        self.int_inclusive(0, len as u64 - 1) as usize
    }

    /// Standard normal by Box–Muller (cosine branch, two uniforms per draw).
    pub fn normal(&mut self) -> f64 {
        let u1 = 1.0 - self.unit();
        let u2 = self.unit();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyPrimitive {
    pub kind: String,
    pub dims: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToyShape {
    pub id: String,
    pub primitives: Vec<ToyPrimitive>,
}

fn default_agent_height() -> f64 {
    0.25
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    /// `(min, max)` room extent along x, y and z in meters.
    pub room_x: [f64; 2],
    pub room_y: [f64; 2],
    pub room_z: [f64; 2],
    pub textures: Vec<String>,
    pub toys: Vec<ToyShape>,
    pub toy_count: [u64; 2],
    pub reach_radius: f64,
    /// Spread of toys is `reach_radius / placement_concentration`; zero
    /// places toys uniformly in the room.
    pub placement_concentration: f64,
    #[serde(default = "default_agent_height")]
    pub agent_height: f64,
}

impl Default for SceneConfig {
    fn default() -> Self {
        let prim = |kind: &str, dims: &[f64]| ToyPrimitive {
            kind: kind.to_string(),
            dims: dims.to_vec(),
        };
        let toy = |id: &str, primitives: Vec<ToyPrimitive>| ToyShape {
            id: id.to_string(),
            primitives,
        };
        SceneConfig {
            room_x: [2.0, 6.0],
            room_y: [2.0, 6.0],
            room_z: [2.2, 3.2],
            textures: [
                "wood",
                "carpet",
                "tiles",
                "plaster",
                "wallpaper_stripes",
                "brick",
                "concrete",
                "linoleum",
            ]
            .iter()
            .map(|s| s.to_string())
            .collect(),
            toys: vec![
                toy("ball", vec![prim("sphere", &[0.05])]),
                toy("block", vec![prim("box", &[0.03, 0.03, 0.03])]),
                toy("rattle", vec![prim("capsule", &[0.012, 0.05]), prim("sphere", &[0.03])]),
                toy("duck", vec![prim("sphere", &[0.04]), prim("sphere", &[0.025])]),
                toy(
                    "car",
                    vec![prim("box", &[0.06, 0.03, 0.02]), prim("capsule", &[0.012, 0.03])],
                ),
                toy("stacking_ring", vec![prim("capsule", &[0.015, 0.035])]),
            ],
            toy_count: [2, 8],
            reach_radius: 0.35,
            placement_concentration: 2.0,
            agent_height: default_agent_height(),
        }
    }
}

impl SceneConfig {
    pub fn validate(&self) -> Result<()> {
        for (axis, r) in [("x", self.room_x), ("y", self.room_y), ("z", self.room_z)] {
            if !(r[0] > 0.0 && r[0] <= r[1] && r[1].is_finite()) {
                return Err(Error::Config(format!(
                    "room_{axis} range {r:?} must satisfy 0 < min <= max"
                )));
            }
        }
        if self.textures.is_empty() || self.toys.is_empty() {
            return Err(Error::Config("texture and toy catalogs must be nonempty".into()));
        }
        if self.toy_count[0] > self.toy_count[1] {
            return Err(Error::Config(format!(
                "toy_count range {:?} must satisfy min <= max",
                self.toy_count
            )));
        }
        if !(self.reach_radius > 0.0 && self.reach_radius.is_finite()) {
            return Err(Error::Config("reach_radius must be positive".into()));
        }
        if !(self.placement_concentration >= 0.0 && self.placement_concentration.is_finite()) {
            return Err(Error::Config("placement_concentration must be nonnegative".into()));
        }
        if !(self.agent_height > 0.0 && self.agent_height < self.room_z[0]) {
            return Err(Error::Config(format!(
                "agent height {} does not fit in rooms as low as {} m",
                self.agent_height, self.room_z[0]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plane {
    pub name: String,
    pub center: [f64; 3],
    /// Inward-facing unit normal.
    pub normal: [f64; 3],
    pub extent: [f64; 2],
    pub texture: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Room {
    /// Interior spans `[-x/2, x/2] × [-y/2, y/2] × [0, z]`.
    pub size: [f64; 3],
    pub planes: Vec<Plane>,
}

impl Room {
    pub fn strictly_contains(&self, p: [f64; 3]) -> bool {
        p[0].abs() < self.size[0] / 2.0 && p[1].abs() < self.size[1] / 2.0 && p[2] > 0.0 && p[2] < self.size[2]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub position: [f64; 3],
    pub yaw: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Toy {
    pub shape: String,
    pub color: [f64; 3],
    pub position: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub rng: String,
    pub seed: u64,
    pub room: Room,
    pub agent: Agent,
    pub toys: Vec<Toy>,
}

impl Scene {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("scenes always serialize");
        s.push('\n');
        s
    }
}

/// Name, center, inward normal and extent of one room plane.
type PlaneLayout = (&'static str, [f64; 3], [f64; 3], [f64; 2]);

pub fn generate_scene(seed: u64, config: &SceneConfig) -> Result<Scene> {
    config.validate()?;
    let mut rng = SceneRng::new(seed);

    let size = [
        rng.uniform(config.room_x[0], config.room_x[1]),
        rng.uniform(config.room_y[0], config.room_y[1]),
        rng.uniform(config.room_z[0], config.room_z[1]),
    ];
    let [sx, sy, sz] = size;
    let layout: [PlaneLayout; 6] = [
        ("floor", [0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [sx, sy]),
        ("ceiling", [0.0, 0.0, sz], [0.0, 0.0, -1.0], [sx, sy]),
        ("wall_pos_x", [sx / 2.0, 0.0, sz / 2.0], [-1.0, 0.0, 0.0], [sy, sz]),
        ("wall_neg_x", [-sx / 2.0, 0.0, sz / 2.0], [1.0, 0.0, 0.0], [sy, sz]),
        ("wall_pos_y", [0.0, sy / 2.0, sz / 2.0], [0.0, -1.0, 0.0], [sx, sz]),
        ("wall_neg_y", [0.0, -sy / 2.0, sz / 2.0], [0.0, 1.0, 0.0], [sx, sz]),
    ];
    let planes = layout
        .iter()
        .map(|&(name, center, normal, extent)| Plane {
            name: name.to_string(),
            center,
            normal,
            extent,
            texture: config.textures[rng.index(config.textures.len())].clone(),
        })
        .collect();
    let room = Room { size, planes };

    let agent_x = rng.uniform(-0.4 * sx, 0.4 * sx);
    let agent_y = rng.uniform(-0.4 * sy, 0.4 * sy);
    let yaw = rng.uniform(0.0, std::f64::consts::TAU);
    let agent = Agent {
        position: [agent_x, agent_y, config.agent_height],
        yaw,
    };

    let count = rng.int_inclusive(config.toy_count[0], config.toy_count[1]);
    let mut toys = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let shape = config.toys[rng.index(config.toys.len())].id.clone();
        let color = [rng.unit(), rng.unit(), rng.unit()];
        let position = place_toy(&mut rng, &room, &agent, config)?;
        toys.push(Toy { shape, color, position });
    }

    Ok(Scene {
        rng: RNG_NAME.to_string(),
        seed,
        room,
        agent,
        toys,
    })
}

fn place_toy(rng: &mut SceneRng, room: &Room, agent: &Agent, config: &SceneConfig) -> Result<[f64; 3]> {
    let [sx, sy, sz] = room.size;
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let p = if config.placement_concentration == 0.0 {
            [
                rng.uniform(-sx / 2.0, sx / 2.0),
                rng.uniform(-sy / 2.0, sy / 2.0),
                rng.uniform(0.0, sz),
            ]
        } else {
            let sigma = config.reach_radius / config.placement_concentration;
            let a = agent.position;
            [
                a[0] + sigma * rng.normal(),
                a[1] + sigma * rng.normal(),
                a[2] + sigma * rng.normal(),
            ]
        };
        if room.strictly_contains(p) {
            return Ok(p);
        }
    }
    Err(Error::Config(
        "could not place a toy inside the room; widen the room or raise the concentration".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        let cfg = SceneConfig::default();
        let a = generate_scene(42, &cfg).unwrap().to_json();
        let b = generate_scene(42, &cfg).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn degenerate_count_range() {
        let cfg = SceneConfig {
            toy_count: [3, 3],
            ..SceneConfig::default()
        };
        for seed in 0..20 {
            let scene = generate_scene(seed, &cfg).unwrap();
            assert_eq!(scene.toys.len(), 3);
            assert!(scene.toys.iter().all(|t| scene.room.strictly_contains(t.position)));
        }
    }

    #[test]
    fn six_planes_with_catalog_textures() {
        let cfg = SceneConfig::default();
        let scene = generate_scene(7, &cfg).unwrap();
        assert_eq!(scene.room.planes.len(), 6);
        assert!(scene.room.planes.iter().all(|p| cfg.textures.contains(&p.texture)));
    }

    #[test]
    fn invalid_configs_are_config_errors() {
        let bad = SceneConfig {
            room_x: [3.0, 2.0],
            ..SceneConfig::default()
        };
        assert!(matches!(generate_scene(0, &bad), Err(Error::Config(_))));
        let low = SceneConfig {
            room_z: [0.2, 0.3],
            ..SceneConfig::default()
        };
        assert!(matches!(generate_scene(0, &low), Err(Error::Config(_))));
        let empty = SceneConfig {
            textures: vec![],
            ..SceneConfig::default()
        };
        assert!(matches!(generate_scene(0, &empty), Err(Error::Config(_))));
    }

    #[test]
    fn int_range_stays_in_bounds() {
        let mut rng = SceneRng::new(1);
        for _ in 0..1000 {
            let v = rng.int_inclusive(3, 5);
            assert!((3..=5).contains(&v));
        }
        assert!((0..1000).all(|_| (0.0..1.0).contains(&rng.unit())));
    }
}
