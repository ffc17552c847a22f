//! Scenario selection: the built-in experiments or a TOML scenario file.
//!
//! ```toml
//! departments = ["atv", "configs/ww.toml"]   # built-in names or paths
//! cashiers = [2, 4]          # optional sweep over a staff of `staff_total`
//! staff_total = 10
//! weeks = 10
//! replications = 20
//! seed = 42
//! mixes = ["f", { label = "mostly-d", counts = [1000, 1000, 1000, 6000, 1000] }]
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use manprasim_core::experiments::{
    custom_scenario, experiment_1, experiment_2, DEFAULT_REPLICATIONS, DEFAULT_WEEKS, STAFF_TOTAL,
};
use manprasim_core::{staffing_sweep, DepartmentConfig, MixConfig, PoolMix, Scenario};
use serde::Deserialize;

use crate::config::{field_error, load_department, parse_error, FieldError};
use crate::error::{CliError, ConfigLoadError};

pub const POOL_SIZE: u64 = 10_000;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged, expecting = "a mix label (a-f, g-atv, g-ww) or a table with label and counts")]
pub enum MixEntry {
    Builtin(String),
    Custom(CustomMix),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomMix {
    pub label: String,
    /// Customers per stereotype: enthusiast, solution demander, service
    /// seeker, disinterested, internet shopper.
    pub counts: [u32; 5],
}

fn default_staff_total() -> u32 {
    STAFF_TOTAL
}

fn default_pool_size() -> u64 {
    POOL_SIZE
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub departments: Vec<String>,
    #[serde(default)]
    pub cashiers: Vec<u32>,
    #[serde(default = "default_staff_total")]
    pub staff_total: u32,
    pub weeks: Option<f64>,
    pub replications: Option<u32>,
    pub seed: Option<u64>,
    #[serde(default = "default_pool_size")]
    pub pool_size: u64,
    pub mixes: Vec<MixEntry>,
}

pub const DEFAULT_SEED: u64 = 42;

/// Parameters from the command line that override scenario defaults.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub weeks: Option<f64>,
    pub replications: Option<u32>,
    /// `--seed`; beats a seed in the scenario file.
    pub seed: Option<u64>,
    /// `MANPRASIM_SEED`; used only when nothing else names a seed.
    pub fallback_seed: Option<u64>,
}

impl Overrides {
    fn resolve_seed(&self, from_file: Option<u64>) -> (u64, &'static str) {
        if let Some(s) = self.seed {
            (s, "flag")
        } else if let Some(s) = from_file {
            (s, "scenario")
        } else if let Some(s) = self.fallback_seed {
            (s, "env")
        } else {
            (DEFAULT_SEED, "default")
        }
    }
}

pub fn builtin_department(name: &str) -> Option<DepartmentConfig> {
    match name.to_ascii_lowercase().as_str() {
        "atv" | "a&tv" => Some(DepartmentConfig::atv()),
        "ww" => Some(DepartmentConfig::ww()),
        _ => None,
    }
}

pub fn builtin_mix(label: &str) -> Option<(PoolMix, &'static str)> {
    use MixConfig::*;
    let m = match label {
        "a" => A,
        "b" => B,
        "c" => C,
        "d" => D,
        "e" => E,
        "f" => F,
        "g-atv" => GAudioTv,
        "g-ww" => GWomenswear,
        _ => return None,
    };
    Some((m.mix(), m.label()))
}

/// Check that a mix holds exactly `pool_size` customers.
pub fn check_mix(mix: &PoolMix, pool_size: u64) -> Result<(), String> {
    if mix.total() == pool_size {
        Ok(())
    } else {
        Err(format!(
            "mix must sum to pool size ({} customers given, pool size {pool_size})",
            mix.total()
        ))
    }
}

/// A resolved set of scenarios plus the department configs it used.
#[derive(Debug, Clone)]
pub struct Plan {
    pub name: String,
    pub scenarios: Vec<Scenario>,
    pub departments: Vec<DepartmentConfig>,
    pub config_paths: Vec<PathBuf>,
    pub seed: u64,
    pub seed_source: &'static str,
}

pub fn load_departments(paths: &[PathBuf]) -> Result<Vec<DepartmentConfig>, CliError> {
    paths
        .iter()
        .map(|p| load_department(p).map_err(CliError::from))
        .collect()
}

/// Resolve `exp1`, `exp2`, `all` or a scenario file path.
pub fn plan(
    scenario: &str,
    configs: &[PathBuf],
    overrides: &Overrides,
) -> Result<Plan, CliError> {
    let builtin = matches!(scenario, "exp1" | "exp2" | "all");
    if !builtin {
        return plan_file(Path::new(scenario), configs, overrides);
    }
    let departments = if configs.is_empty() {
        vec![DepartmentConfig::atv(), DepartmentConfig::ww()]
    } else {
        load_departments(configs)?
    };
    let weeks = overrides.weeks.unwrap_or(DEFAULT_WEEKS);
    let reps = overrides.replications.unwrap_or(DEFAULT_REPLICATIONS);
    let (seed, seed_source) = overrides.resolve_seed(None);
    let sweep_err = |e: manprasim_core::ConfigError| CliError::Usage(e.to_string());
    let mut scenarios = Vec::new();
    if scenario != "exp2" {
        scenarios.extend(experiment_1(&departments, weeks, reps, seed).map_err(sweep_err)?);
    }
    if scenario != "exp1" {
        scenarios.extend(experiment_2(&departments, weeks, reps, seed).map_err(sweep_err)?);
    }
    for s in &scenarios {
        s.validate().map_err(|e| CliError::Usage(format!("{}: {e}", s.id)))?;
    }
    Ok(Plan {
        name: scenario.to_string(),
        scenarios,
        departments,
        config_paths: configs.to_vec(),
        seed,
        seed_source,
    })
}

fn plan_file(path: &Path, configs: &[PathBuf], overrides: &Overrides) -> Result<Plan, CliError> {
    let origin = path.display().to_string();
    let text = fs::read_to_string(path).map_err(|source| ConfigLoadError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let file: ScenarioFile = toml::from_str(&text).map_err(|e| parse_error(&origin, &text, &e))?;
    let invalid = |field: String, message: String| -> CliError {
        field_error(&origin, &text, FieldError::new(field, message)).into()
    };
    let base = path.parent().unwrap_or(Path::new("."));

    let mut config_paths = Vec::new();
    let departments = if configs.is_empty() {
        let mut out = Vec::new();
        for (i, d) in file.departments.iter().enumerate() {
            match builtin_department(d) {
                Some(c) => out.push(c),
                None => {
                    let p = base.join(d);
                    if !p.exists() {
                        return Err(invalid(
                            format!("departments[{i}]"),
                            format!("{d:?} is neither a built-in department nor a file"),
                        ));
                    }
                    out.push(load_department(&p)?);
                    config_paths.push(p);
                }
            }
        }
        out
    } else {
        config_paths = configs.to_vec();
        load_departments(configs)?
    };
    if departments.is_empty() {
        return Err(invalid("departments".into(), "at least one department is required".into()));
    }
    if file.mixes.is_empty() {
        return Err(invalid("mixes".into(), "at least one mix is required".into()));
    }
    let mut mixes = Vec::new();
    for (i, m) in file.mixes.iter().enumerate() {
        let (mix, label) = match m {
            MixEntry::Builtin(l) => {
                let (mix, label) = builtin_mix(l).ok_or_else(|| {
                    invalid(format!("mixes[{i}]"), format!("unknown mix label {l:?}"))
                })?;
                (mix, label.to_string())
            }
            MixEntry::Custom(c) => (PoolMix(c.counts), c.label.clone()),
        };
        check_mix(&mix, file.pool_size).map_err(|msg| invalid("mixes".into(), msg))?;
        mixes.push((mix, label));
    }

    let weeks = overrides.weeks.or(file.weeks).unwrap_or(DEFAULT_WEEKS);
    let reps = overrides
        .replications
        .or(file.replications)
        .unwrap_or(DEFAULT_REPLICATIONS);
    let (seed, seed_source) = overrides.resolve_seed(file.seed);
    let mut scenarios = Vec::new();
    for dept in &departments {
        let staffings = if file.cashiers.is_empty() {
            vec![None]
        } else {
            file.cashiers
                .iter()
                .map(|&c| {
                    staffing_sweep(file.staff_total, c, dept.expert_fraction)
                        .map(Some)
                        .map_err(|e| invalid("cashiers".into(), e.message))
                })
                .collect::<Result<_, _>>()?
        };
        for staffing in staffings {
            for (mix, label) in &mixes {
                let s = custom_scenario(dept, staffing, *mix, label, weeks, reps, seed);
                s.validate()
                    .map_err(|e| invalid(e.field.clone(), format!("{}: {}", s.id, e.message)))?;
                scenarios.push(s);
            }
        }
    }
    Ok(Plan {
        name: origin,
        scenarios,
        departments,
        config_paths,
        seed,
        seed_source,
    })
}
