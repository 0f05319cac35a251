//! Run configuration: one TOML tree with full defaulting.

use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use stres_core::evolution::ExperimentConfig;
use stres_core::suites::SuiteConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub seed: u64,
    /// Baseline file, relative to the config file's directory when relative.
    pub baselines: PathBuf,
    /// Dyadic gap of the gapped flag operator.
    pub gap: i32,
    pub run: ExperimentConfig,
    pub resonance: ResonanceConfig,
    pub cutoffs: CutoffConfig,
    pub selftest: SelftestConfig,
    pub suites: SuiteConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            baselines: PathBuf::from("baselines.toml"),
            gap: 3,
            run: ExperimentConfig::default(),
            resonance: ResonanceConfig::default(),
            cutoffs: CutoffConfig::default(),
            selftest: SelftestConfig::default(),
            suites: SuiteConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ResonanceConfig {
    /// Phase names such as "++" or "-++"; empty means all eight.
    pub phases: Vec<String>,
    pub per_axis: usize,
    pub extent: f64,
    /// Random points for the null-identity residual.
    pub identity_points: usize,
    pub identity_tolerance: f64,
}

impl Default for ResonanceConfig {
    fn default() -> Self {
        Self { phases: Vec::new(), per_axis: 64, extent: 4.0, identity_points: 10_000, identity_tolerance: 1e-12 }
    }
}

/// Width overrides applied to every cutoff family; unset keeps the defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CutoffConfig {
    pub delta_t: Option<f64>,
    pub delta_s: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SelftestConfig {
    /// Replaces every round-off tolerance of the battery when set.
    pub tolerance: Option<f64>,
}

impl RunConfig {
    /// Parses `text` after applying `key=value` overrides (dotted keys; a bare
    /// key addresses the `run` table).
    pub fn from_toml(text: &str, overrides: &[(String, toml::Value)]) -> Result<Self, String> {
        let mut table: toml::Table = text.parse().map_err(|e| format!("config: {e}"))?;
        for (key, value) in overrides {
            set_path(&mut table, key, value.clone())?;
        }
        let mut cfg: RunConfig = toml::Value::Table(table).try_into().map_err(|e| format!("config: {e}"))?;
        cfg.suites.seed = cfg.seed;
        Ok(cfg)
    }

    pub fn load(path: Option<&Path>, overrides: &[(String, toml::Value)]) -> Result<Self, String> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?,
            None => String::new(),
        };
        let mut cfg = Self::from_toml(&text, overrides)?;
        if let Some(dir) = path.and_then(Path::parent) {
            if cfg.baselines.is_relative() {
                cfg.baselines = dir.join(&cfg.baselines);
            }
        }
        Ok(cfg)
    }

    /// Canonical text used for hashing and echoed next to the outputs.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

fn set_path(table: &mut toml::Table, key: &str, value: toml::Value) -> Result<(), String> {
    let parts: Vec<&str> = key.split('.').collect();
    let parts = if parts.len() == 1 && !TOP_LEVEL.contains(&parts[0]) { vec!["run", parts[0]] } else { parts };
    let (last, inner) = parts.split_last().ok_or("empty key")?;
    let mut t = table;
    for p in inner {
        t = t
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()))
            .as_table_mut()
            .ok_or_else(|| format!("{key}: {p} is not a table"))?;
    }
    t.insert(last.to_string(), value);
    Ok(())
}

const TOP_LEVEL: [&str; 3] = ["seed", "baselines", "gap"];

/// Parses a TOML scalar or array; bare words become strings.
pub fn parse_value(text: &str) -> toml::Value {
    let probe = format!("v = {text}");
    match probe.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(text.to_string()),
    }
}

/// `KEY=V1,V2,...` into the key and its values. Array values are written
/// with brackets and are not split.
pub fn parse_sweep(spec: &str) -> Result<(String, Vec<toml::Value>), String> {
    let (key, list) = spec.split_once('=').ok_or_else(|| format!("sweep {spec:?} is not KEY=LIST"))?;
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    for c in list.chars() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ => {}
        }
        if c == ',' && depth == 0 {
            items.push(std::mem::take(&mut cur));
        } else {
            cur.push(c);
        }
    }
    items.push(cur);
    let values: Vec<toml::Value> = items.iter().map(|s| s.trim()).filter(|s| !s.is_empty()).map(parse_value).collect();
    if key.trim().is_empty() || values.is_empty() {
        return Err(format!("sweep {spec:?} needs a key and at least one value"));
    }
    Ok((key.trim().to_string(), values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        assert_eq!(RunConfig::from_toml("", &[]).unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_toml("[run]\nwidht = 2.0\n", &[]).is_err());
        assert!(RunConfig::from_toml("colour = 1\n", &[]).is_err());
    }

    #[test]
    fn overrides_address_run_by_default() {
        let o = vec![("epsilon".to_string(), parse_value("0.5")), ("cutoffs.delta_t".to_string(), parse_value("0.2"))];
        let c = RunConfig::from_toml("[run]\nn = 16\n", &o).unwrap();
        assert_eq!(c.run.epsilon, 0.5);
        assert_eq!(c.run.n, 16);
        assert_eq!(c.cutoffs.delta_t, Some(0.2));
    }

    #[test]
    fn sweep_lists_split_outside_brackets() {
        let (k, v) = parse_sweep("alpha=[1.0, 0.0],[0.5, 0.5]").unwrap();
        assert_eq!(k, "alpha");
        assert_eq!(v.len(), 2);
        let (_, v) = parse_sweep("mode=paper,resonant-contrast").unwrap();
        assert_eq!(v[1], toml::Value::String("resonant-contrast".into()));
        assert!(parse_sweep("epsilon").is_err());
    }

    #[test]
    fn canonical_text_round_trips() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_toml(&c.canonical(), &[]).unwrap(), c);
    }
}
