//! Flat `key = value` scenario files.
//!
//! ```text
//! # medium team, all three weight schemes are run separately
//! preset = medium
//! epochs = 10
//! algorithms = proposed, greedy
//! weight_scheme = weight2
//! ```
//!
//! `preset`, if present, must come first; later keys override it.

use std::path::Path;
use std::str::FromStr;

use crate::error::{CsmError, Result};
use crate::tracking::config::{Algorithm, ScenarioConfig};

fn parse_value<T: FromStr>(field: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| CsmError::config(field, format!("cannot parse `{value}`: {e}")))
}

/// Sets one field by name. Shared by the file parser and command-line
/// overrides.
pub fn apply_override(cfg: &mut ScenarioConfig, key: &str, value: &str) -> Result<()> {
    let v = value.trim();
    match key {
        "preset" => {
            let seed = cfg.seed;
            *cfg = ScenarioConfig::preset(v)?;
            cfg.seed = seed;
        }
        "robots" => cfg.robots = parse_value(key, v)?,
        "targets" => cfg.targets = parse_value(key, v)?,
        "comm_radius" => cfg.comm_radius = parse_value(key, v)?,
        "reach_radius" => cfg.reach_radius = parse_value(key, v)?,
        "sense_radius" => cfg.sense_radius = parse_value(key, v)?,
        "safety_radius" => cfg.safety_radius = parse_value(key, v)?,
        "noise_std" => cfg.noise_std = parse_value(key, v)?,
        "process_noise_std" => cfg.process_noise_std = parse_value(key, v)?,
        "max_target_speed" => cfg.max_target_speed = parse_value(key, v)?,
        "epochs" => cfg.epochs = parse_value(key, v)?,
        "rounds" => cfg.rounds = parse_value(key, v)?,
        "radial_steps" => cfg.radial_steps = parse_value(key, v)?,
        "angular_step_deg" => cfg.angular_step_deg = parse_value(key, v)?,
        "weight_scheme" => cfg.weight_scheme = parse_value(key, v)?,
        "weight3_samples" => cfg.weight3_samples = parse_value(key, v)?,
        "weight3_radius" => cfg.weight3_radius = parse_value(key, v)?,
        "objective_mode" => cfg.objective_mode = parse_value(key, v)?,
        "solver_starts" => cfg.solver_starts = parse_value(key, v)?,
        "seed" => cfg.seed = parse_value(key, v)?,
        "arena_width" => cfg.arena_width = parse_value(key, v)?,
        "arena_height" => cfg.arena_height = parse_value(key, v)?,
        "record_timing" => cfg.record_timing = parse_value(key, v)?,
        "algorithms" => {
            cfg.algorithms = v
                .split(',')
                .map(|a| parse_value::<Algorithm>(key, a.trim()))
                .collect::<Result<_>>()?;
        }
        other => return Err(CsmError::config(other, "unknown key")),
    }
    Ok(())
}

/// Parses a scenario file body. The result is validated.
pub fn parse_config(text: &str) -> Result<ScenarioConfig> {
    let mut cfg = ScenarioConfig::default();
    let mut seen_other = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CsmError::Parse {
            line: idx + 1,
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        let key = key.trim();
        if key == "preset" && seen_other {
            return Err(CsmError::Parse {
                line: idx + 1,
                message: "`preset` must precede other keys".into(),
            });
        }
        seen_other |= key != "preset";
        apply_override(&mut cfg, key, value)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}
