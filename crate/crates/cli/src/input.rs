use std::fs::File;
use std::path::Path;

use anyhow::{Context, Result};
use converse_core::{ChebyshevSystem, CircleFunction, Error, SystemSpec};
use serde_json::Value;

/// Reads `trig:K`, `custom:@basis.json`, or `custom:{...}` with inline JSON.
pub fn parse_system(text: &str) -> Result<SystemSpec> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| Error::InvalidInput(format!("system '{text}' should look like trig:K or custom:@file")))?;
    match kind {
        "trig" => {
            let order = rest
                .trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidInput(format!("trig order '{rest}' is not a non-negative integer")))?;
            Ok(SystemSpec::Trig { order })
        }
        "custom" => {
            let json = match rest.strip_prefix('@') {
                Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?,
                None => rest.to_string(),
            };
            let mut value: Value =
                serde_json::from_str(&json).map_err(|e| Error::InvalidInput(format!("basis file: {e}")))?;
            if let Value::Object(map) = &mut value {
                map.entry("type").or_insert_with(|| Value::from("custom"));
            }
            serde_json::from_value(value)
                .map_err(|e| Error::InvalidInput(format!("basis file: {e}")).into())
        }
        _ => Err(Error::InvalidInput(format!("unknown system kind '{kind}'")).into()),
    }
}

pub fn load_system(text: &str) -> Result<(SystemSpec, ChebyshevSystem)> {
    let spec = parse_system(text)?;
    let system = ChebyshevSystem::from_spec(&spec)?;
    Ok((spec, system))
}

/// An expression in `x`, or `@path` to a two-column CSV.
pub fn load_function(text: &str, period: f64) -> Result<CircleFunction> {
    match text.strip_prefix('@') {
        Some(path) => {
            let file = File::open(Path::new(path)).with_context(|| format!("opening {path}"))?;
            Ok(CircleFunction::from_csv(file, period)?)
        }
        None => Ok(CircleFunction::parse(text, period)?),
    }
}

pub fn parse_eps_schedule(text: &str) -> Result<Vec<f64>> {
    let values = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| *v > 0.0 && v.is_finite())
                .ok_or_else(|| Error::InvalidInput(format!("bad eps value '{s}'")))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(values)
}

pub fn parse_point(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("bad coordinate '{s}'")).into())
        })
        .collect()
}

pub fn check_positive(name: &str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("--{name} must be positive, got {value}")).into())
    }
}
