//! JSON files: worlds, world specs, scenarios and traces.

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use zonemem_core::worldgen::{self, WorldSpec};
use zonemem_core::{Scenario, WorldMap};

use crate::error::{Error, Result};

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::json(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("in-memory serialization");
    out.push(b'\n');
    out
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_bytes(path, &to_json_bytes(value))
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_world(path: &Path) -> Result<WorldMap> {
    if !path.is_file() {
        return Err(Error::WorldNotFound(path.to_path_buf()));
    }
    read_json(path)
}

pub fn save_world(path: &Path, map: &WorldMap) -> Result<()> {
    write_json(path, map)
}

pub fn load_spec(path: &Path) -> Result<WorldSpec> {
    read_json(path)
}

/// A built-in world preset generated with `seed`.
pub fn preset_world(name: &str, seed: u64) -> Result<WorldMap> {
    let spec = worldgen::preset(name, seed).ok_or_else(|| {
        Error::Usage(format!(
            "unknown preset {name} (expected one of {})",
            worldgen::PRESETS.join(", ")
        ))
    })?;
    Ok(worldgen::generate(&spec)?)
}

/// A scenario preset name or a path to scenario JSON.
pub fn load_scenario(name_or_path: &str) -> Result<Scenario> {
    if let Some(s) = Scenario::preset(name_or_path) {
        return Ok(s);
    }
    let path = Path::new(name_or_path);
    if path.is_file() {
        return read_json(path);
    }
    Err(Error::Usage(format!(
        "unknown scenario {name_or_path} (expected loop, round-trip or a JSON file)"
    )))
}
