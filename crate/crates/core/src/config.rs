//! Flat `key = value` run configuration, overrides and manifests.
//!
//! Blank lines and `#` comments are ignored. Every key must be known; the
//! manifest written by [`to_manifest`] lists every key and parses back to the
//! same configuration.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::cfd::CaseConfig;
use crate::error::{Error, Result};
use crate::hhl::{HhlConfig, Precision};
use crate::hybrid::{HybridConfig, RunMode};

pub const KEYS: &[&str] = &[
    "nodes_per_side",
    "density",
    "viscosity",
    "lid_velocity",
    "outer_max",
    "outer_tol",
    "gs_tol",
    "gs_max",
    "relax_velocity",
    "relax_pressure",
    "precision",
    "trotter_steps",
    "rotation_constant",
    "prune_limit",
    "coefficient_limit",
    "sample_iterations",
    "mode",
    "shadow_reference",
];

impl FromStr for RunMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "classical" => Ok(RunMode::Classical),
            "hybrid" => Ok(RunMode::Hybrid),
            "sample" => Ok(RunMode::Sample),
            other => Err(Error::Parse(format!("unknown mode {other:?}"))),
        }
    }
}

impl std::fmt::Display for RunMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RunMode::Classical => "classical",
            RunMode::Hybrid => "hybrid",
            RunMode::Sample => "sample",
        })
    }
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig::new(
            CaseConfig::default(),
            HhlConfig::new(Precision::new(3, 4).expect("valid precision")),
        )
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| Error::Parse(format!("{key} = {value:?}: {e}")))
}

/// Sets one key.
pub fn apply(cfg: &mut HybridConfig, key: &str, value: &str) -> Result<()> {
    let v = value.trim();
    let c = &mut cfg.case;
    let h = &mut cfg.hhl;
    match key.trim() {
        "nodes_per_side" => c.nodes_per_side = parse(key, v)?,
        "density" => c.density = parse(key, v)?,
        "viscosity" => c.viscosity = parse(key, v)?,
        "lid_velocity" => c.lid_velocity = parse(key, v)?,
        "outer_max" => c.outer_max = parse(key, v)?,
        "outer_tol" => c.outer_tol = parse(key, v)?,
        "gs_tol" => c.gs_tol = parse(key, v)?,
        "gs_max" => c.gs_max = parse(key, v)?,
        "relax_velocity" => c.relax_velocity = parse(key, v)?,
        "relax_pressure" => c.relax_pressure = parse(key, v)?,
        "precision" => h.precision = v.parse()?,
        "trotter_steps" => h.trotter_steps = parse(key, v)?,
        "rotation_constant" => h.rotation_constant = if v == "auto" { None } else { Some(parse(key, v)?) },
        "prune_limit" => h.prune_limit = parse(key, v)?,
        "coefficient_limit" => h.coefficient_limit = parse(key, v)?,
        "sample_iterations" => {
            cfg.sample_iterations = v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| parse(key, s))
                .collect::<Result<_>>()?
        }
        "mode" => cfg.mode = v.parse()?,
        "shadow_reference" => cfg.shadow_reference = parse(key, v)?,
        other => return Err(Error::Config(format!("unknown configuration key {other:?}"))),
    }
    Ok(())
}

/// Splits `key=value`.
pub fn split_pair(s: &str) -> Result<(&str, &str)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("{s:?} is not key=value")))?;
    Ok((k.trim(), v.trim()))
}

/// Applies a config text on top of `cfg`.
pub fn apply_text(cfg: &mut HybridConfig, text: &str) -> Result<()> {
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_pair(line).map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
        apply(cfg, k, v).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("line {}: {m}", no + 1)),
            other => other,
        })?;
    }
    Ok(())
}

/// Defaults, then an optional config text, then `key=value` overrides.
pub fn resolve(text: Option<&str>, overrides: &[String]) -> Result<HybridConfig> {
    let mut cfg = HybridConfig::default();
    if let Some(t) = text {
        apply_text(&mut cfg, t)?;
    }
    for o in overrides {
        let (k, v) = split_pair(o)?;
        apply(&mut cfg, k, v)?;
    }
    Ok(cfg)
}

/// Every key with its resolved value.
pub fn to_manifest(cfg: &HybridConfig) -> String {
    let c = &cfg.case;
    let h = &cfg.hhl;
    let samples: Vec<String> = cfg.sample_iterations.iter().map(usize::to_string).collect();
    let mut s = String::new();
    let mut kv = |k: &str, v: String| {
        let _ = writeln!(s, "{k} = {v}");
    };
    kv("nodes_per_side", c.nodes_per_side.to_string());
    kv("density", format!("{:e}", c.density));
    kv("viscosity", format!("{:e}", c.viscosity));
    kv("lid_velocity", format!("{:e}", c.lid_velocity));
    kv("outer_max", c.outer_max.to_string());
    kv("outer_tol", format!("{:e}", c.outer_tol));
    kv("gs_tol", format!("{:e}", c.gs_tol));
    kv("gs_max", c.gs_max.to_string());
    kv("relax_velocity", format!("{:e}", c.relax_velocity));
    kv("relax_pressure", format!("{:e}", c.relax_pressure));
    kv("precision", h.precision.to_string());
    kv("trotter_steps", h.trotter_steps.to_string());
    kv(
        "rotation_constant",
        h.rotation_constant.map_or("auto".into(), |v| format!("{v:e}")),
    );
    kv("prune_limit", format!("{:e}", h.prune_limit));
    kv("coefficient_limit", format!("{:e}", h.coefficient_limit));
    kv("sample_iterations", samples.join(","));
    kv("mode", cfg.mode.to_string());
    kv("shadow_reference", cfg.shadow_reference.to_string());
    s
}
