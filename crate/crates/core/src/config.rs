//! Run configuration shared by the command-line driver and the C interface.
//!
//! Settings arrive as string key/value pairs, first from an optional TOML
//! file and then from flags, later sources overriding earlier ones.
//! Tolerances use `tol.KEY` (or a `[tol]` table), scenario parameters
//! `param.KEY`.

use std::collections::BTreeMap;
use std::path::PathBuf;

use crate::pipeline::{parse_extents, Format, Gauge, ScenarioConfig, Tolerances};
use crate::scenarios::{self, Scenario};
use crate::Error;

pub const DEFAULT_SCENARIO: &str = "sphere";
pub const DEFAULT_GRID: usize = 64;
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_TRIALS: usize = 1000;

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub grids: Vec<Vec<usize>>,
    pub spacing: Option<f64>,
    pub gauge: Gauge,
    pub normal_twist: f64,
    pub tolerances: Tolerances,
    pub out: Option<PathBuf>,
    pub formats: Vec<Format>,
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, Error> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::Input(format!("invalid value '{value}' for {key}")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, Error> {
    value
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| number(key, s))
        .collect()
}

impl RunConfig {
    pub fn from_map(map: &BTreeMap<String, String>) -> Result<Self, Error> {
        let mut scenario = scenarios::by_name(map.get("scenario").map_or(DEFAULT_SCENARIO, String::as_str))?;
        let dim = scenario.chart_dim();
        let mut params = Vec::new();
        let mut tol_overrides = Vec::new();
        let mut config = Self {
            grids: vec![vec![DEFAULT_GRID; dim]],
            spacing: None,
            gauge: Gauge::None,
            normal_twist: 0.0,
            tolerances: Tolerances::default(),
            out: None,
            formats: Vec::new(),
            seed: DEFAULT_SEED,
            trials: DEFAULT_TRIALS,
            dims: (2..=6).collect(),
            scenario: scenario.clone(),
        };
        for (key, value) in map {
            let key = key.replace('_', "-");
            if let Some(t) = key.strip_prefix("tol.").or_else(|| key.strip_prefix("tol-")) {
                tol_overrides.push((t.to_string(), number::<f64>(&key, value)?));
                continue;
            }
            if let Some(p) = key.strip_prefix("param.").or_else(|| key.strip_prefix("param-")) {
                params.push((p.to_string(), number::<f64>(&key, value)?));
                continue;
            }
            match key.as_str() {
                "scenario" => {}
                "grid" => config.grids = vec![parse_extents(value, dim)?],
                "grids" => {
                    config.grids = value
                        .split(',')
                        .map(|g| parse_extents(g, dim))
                        .collect::<Result<_, _>>()?
                }
                "spacing" => config.spacing = Some(number(&key, value)?),
                "gauge" => config.gauge = value.parse()?,
                "normal-twist" => config.normal_twist = number(&key, value)?,
                "out" => config.out = Some(PathBuf::from(value)),
                "format" => {
                    config.formats = value
                        .split(',')
                        .filter(|s| !s.trim().is_empty())
                        .map(|s| s.trim().parse())
                        .collect::<Result<_, _>>()?
                }
                "seed" => config.seed = number(&key, value)?,
                "trials" => config.trials = number(&key, value)?,
                "dims" => config.dims = list(&key, value)?,
                _ => return Err(Error::Input(format!("unknown setting '{key}'"))),
            }
        }
        for (k, v) in params {
            scenario.set_param(&k, v)?;
        }
        let mut t = Tolerances::for_scenario(&scenario);
        for (k, v) in tol_overrides {
            t.set(&k, v)?;
        }
        if let Some(h) = config.spacing {
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::Input(format!("spacing must be positive, got {h}")));
            }
        }
        if config.dims.iter().any(|&d| !(1..=crate::clifford::MAX_DIM).contains(&d)) {
            return Err(Error::Input(format!("dims must lie in 1..={}", crate::clifford::MAX_DIM)));
        }
        config.tolerances = t;
        config.scenario = scenario;
        Ok(config)
    }

    /// Scenario run on `extents`; with an explicit spacing the grid is
    /// centred on the default chart region.
    pub fn scenario_config(&self, extents: &[usize]) -> Result<ScenarioConfig, Error> {
        let mut config = ScenarioConfig::new(self.scenario.clone(), extents)?;
        if let Some(h) = self.spacing {
            let origin = self
                .scenario
                .default_bounds
                .iter()
                .zip(extents)
                .map(|(&(lo, hi), &n)| 0.5 * (lo + hi) - 0.5 * h * (n as f64 - 1.0))
                .collect();
            config.grid = crate::grid::ChartGrid::new(extents.to_vec(), vec![h; extents.len()], origin)?;
            self.scenario.check_grid(&config.grid).map_err(Error::from)?;
        }
        config.gauge = self.gauge;
        config.normal_twist = self.normal_twist;
        config.tolerances = self.tolerances.clone();
        Ok(config)
    }
}

/// Flattens a TOML document into dotted keys with string values.
pub fn parse_settings(text: &str) -> Result<BTreeMap<String, String>, Error> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Input(format!("config: {}", e.to_string().trim_end())))?;
    let mut out = BTreeMap::new();
    flatten("", &table, &mut out)?;
    Ok(out)
}

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, String>) -> Result<(), Error> {
    for (key, value) in table {
        let key = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        let text = match value {
            toml::Value::String(s) => s.clone(),
            toml::Value::Integer(i) => i.to_string(),
            toml::Value::Float(f) => f.to_string(),
            toml::Value::Boolean(b) => b.to_string(),
            toml::Value::Array(items) => items
                .iter()
                .map(|v| match v {
                    toml::Value::String(s) => s.clone(),
                    other => other.to_string(),
                })
                .collect::<Vec<_>>()
                .join(","),
            toml::Value::Table(t) => {
                flatten(&key, t, out)?;
                continue;
            }
            toml::Value::Datetime(_) => return Err(Error::Input(format!("config: unsupported value for {key}"))),
        };
        out.insert(key, text);
    }
    Ok(())
}

/// Exit status for a failed command: 2 for bad input, 1 for failed checks.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Input(_) | Error::Grid(_) | Error::Scenario(_) => 2,
        _ => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_and_overrides() {
        let c = RunConfig::from_map(&BTreeMap::new()).unwrap();
        assert_eq!(c.scenario.name, "sphere");
        assert_eq!(c.grids, vec![vec![64, 64]]);
        let c = RunConfig::from_map(&map(&[
            ("scenario", "torus"),
            ("grids", "8,16x12"),
            ("tol-killing", "0.25"),
            ("param.minor", "0.5"),
            ("format", "obj,csv"),
        ]))
        .unwrap();
        assert_eq!(c.grids, vec![vec![8, 8], vec![16, 12]]);
        assert_eq!(c.tolerances.killing, 0.25);
        assert_eq!(c.formats, vec![Format::Obj, Format::Csv]);
        assert_eq!(c.scenario.jet(&[0.0, 0.0]).position[0], 2.5);
    }

    #[test]
    fn bad_settings_are_input_errors() {
        for bad in [
            map(&[("scenario", "klein")]),
            map(&[("grid", "axb")]),
            map(&[("tol-killing", "-1")]),
            map(&[("colour", "blue")]),
            map(&[("gauge", "sideways")]),
        ] {
            let err = RunConfig::from_map(&bad).unwrap_err();
            assert_eq!(exit_code(&err), 2, "{err}");
        }
    }

    #[test]
    fn settings_file() {
        let kv = parse_settings("scenario = \"torus\"\ngrid = 32\nformat = [\"obj\", \"csv\"]\n[tol]\nkilling = 0.3\n").unwrap();
        assert_eq!(kv["grid"], "32");
        assert_eq!(kv["format"], "obj,csv");
        assert_eq!(kv["tol.killing"], "0.3");
        let c = RunConfig::from_map(&kv).unwrap();
        assert_eq!(c.tolerances.killing, 0.3);
        let err = parse_settings("grid = \n").unwrap_err();
        assert!(err.to_string().contains("line 1"), "{err}");
    }

    #[test]
    fn explicit_spacing_is_centred() {
        let c = RunConfig::from_map(&map(&[("spacing", "0.1")])).unwrap();
        let sc = c.scenario_config(&[11, 11]).unwrap();
        let (lo, hi) = sc.grid.bounds()[0];
        assert!((lo + 0.5).abs() < 1e-15 && (hi - 0.5).abs() < 1e-15);
        let c = RunConfig::from_map(&map(&[("spacing", "0.5")])).unwrap();
        assert_eq!(exit_code(&c.scenario_config(&[11, 11]).unwrap_err()), 2);
    }
}
