//! Seeded room-and-toys scene files.

use std::path::{Path, PathBuf};

use embodykit_core::scenegen::{generate_scene, Scene, SceneConfig};

use crate::config::write_artifact;
use crate::error::{CliError, CliResult};

pub fn run_scene(seed: u64, config: &SceneConfig) -> CliResult<Scene> {
    config.validate()?;
    Ok(generate_scene(seed, config)?)
}

/// `out` ending in `.json` names the file itself; anything else is a
/// directory that receives `scene.json`.
pub fn write_scene(seed: u64, config: &SceneConfig, out: &Path) -> CliResult<Vec<PathBuf>> {
    let scene = run_scene(seed, config)?;
    let is_file = out.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    if !is_file {
        return Ok(vec![write_artifact(out, "scene.json", scene.to_json())?]);
    }
    let dir = out
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let name = out
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| CliError::Config(format!("output name {} is not valid UTF-8", out.display())))?;
    Ok(vec![write_artifact(dir, name, scene.to_json())?])
}
