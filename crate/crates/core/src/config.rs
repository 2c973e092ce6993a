//! Key-value configuration (TOML syntax) with command-line overrides.
//!
//! Every key has a default, so an empty file is a valid configuration.
//! Overrides are `section.key=value` pairs applied on top of the file.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenarios::{ForcingSpec, Scenario};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub size: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { size: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PhysicsSection {
    pub nu: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        Self { nu: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TamingSection {
    pub enabled: bool,
    #[serde(rename = "N")]
    pub level: f64,
}

impl Default for TamingSection {
    fn default() -> Self {
        Self {
            enabled: true,
            level: 100.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t_end: f64,
    pub cfl: f64,
    pub dt_max: f64,
    pub dt_min: f64,
    pub sample_interval: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            cfl: 0.5,
            dt_max: 5e-3,
            dt_min: 1e-8,
            sample_interval: 1e-2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Write a checkpoint every this many samples (0 disables checkpoints).
    pub checkpoint_stride: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("output"),
            checkpoint_stride: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Single,
    SweepTaming,
    SweepResolution,
    Compare,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSection {
    pub kind: ExperimentKind,
    #[serde(rename = "N_list")]
    pub n_list: Vec<f64>,
    #[serde(rename = "M_list")]
    pub m_list: Vec<usize>,
    /// Concurrent runs in a sweep (0 = one per available core).
    pub workers: usize,
    /// Optional comparison sub-box `[lo, hi]` per axis, in `[0, 2π]`.
    pub subbox_lo: Option<[f64; 3]>,
    pub subbox_hi: Option<[f64; 3]>,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Single,
            n_list: vec![1.0, 2.0, 4.0, 8.0],
            m_list: vec![16, 32, 64],
            workers: 0,
            subbox_lo: None,
            subbox_hi: None,
        }
    }
}

/// Full simulation and experiment configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct SimConfig {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub taming: TamingSection,
    pub time: TimeSection,
    pub scenario: Scenario,
    pub forcing: ForcingSpec,
    pub output: OutputSection,
    pub experiment: ExperimentSection,
}

/// One simulation to execute as part of an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct RunDescriptor {
    pub label: String,
    pub config: SimConfig,
}

fn parse_override_value(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_override(table: &mut toml::Table, key: &str, raw: &str) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::config(format!("malformed override key {key:?}")));
    }
    let (last, path) = parts.split_last().unwrap();
    let mut cur = table;
    for p in path {
        let entry = cur
            .entry(p.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| Error::config(format!("override {key:?}: {p} is not a section")))?;
    }
    cur.insert(last.to_string(), parse_override_value(raw));
    Ok(())
}

impl SimConfig {
    /// Parse configuration text, apply `key=value` overrides (overrides win)
    /// and validate.
    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::config(format!("malformed config: {}", e.message())))?;
        for (k, v) in overrides {
            apply_override(&mut table, k, v)?;
        }
        let cfg: SimConfig = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, overrides)
    }

    /// Split `key=value` override strings.
    pub fn split_overrides<S: AsRef<str>>(items: &[S]) -> Result<Vec<(String, String)>> {
        items
            .iter()
            .map(|s| {
                let s = s.as_ref();
                s.split_once('=')
                    .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                    .ok_or_else(|| Error::config(format!("override {s:?} is not of the form key=value")))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        crate::spectral::GridSpec::new(self.grid.size)?;
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(format!("{name} must be positive, got {v}")))
            }
        };
        positive("physics.nu", self.physics.nu)?;
        if !(self.taming.level.is_finite() && self.taming.level >= 0.0) {
            return Err(Error::config(format!("taming.N must be >= 0, got {}", self.taming.level)));
        }
        if !(self.time.t_end.is_finite() && self.time.t_end >= 0.0) {
            return Err(Error::config(format!("time.t_end must be >= 0, got {}", self.time.t_end)));
        }
        positive("time.cfl", self.time.cfl)?;
        if self.time.cfl > 1.0 {
            return Err(Error::config(format!("time.cfl must lie in (0, 1], got {}", self.time.cfl)));
        }
        positive("time.dt_max", self.time.dt_max)?;
        positive("time.dt_min", self.time.dt_min)?;
        positive("time.sample_interval", self.time.sample_interval)?;
        if self.time.dt_min > self.time.dt_max {
            return Err(Error::config("time.dt_min must not exceed time.dt_max"));
        }
        if !self.scenario.amplitude.is_finite() {
            return Err(Error::config("scenario.amplitude must be finite"));
        }
        let e = &self.experiment;
        if e.n_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("experiment.N_list must be strictly increasing"));
        }
        if e.n_list.iter().any(|n| !(n.is_finite() && *n >= 0.0)) {
            return Err(Error::config("experiment.N_list entries must be >= 0"));
        }
        if e.m_list.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::config("experiment.M_list must be strictly increasing"));
        }
        for &m in &e.m_list {
            crate::spectral::GridSpec::new(m)
                .map_err(|_| Error::config(format!("experiment.M_list entry {m} must be even and >= 8")))?;
        }
        match e.kind {
            ExperimentKind::SweepTaming if e.n_list.len() < 3 => {
                return Err(Error::config("experiment.N_list needs at least 3 values for a taming sweep"))
            }
            ExperimentKind::SweepResolution if e.m_list.len() < 2 => {
                return Err(Error::config("experiment.M_list needs at least 2 values for a resolution sweep"))
            }
            _ => {}
        }
        if e.subbox_lo.is_some() != e.subbox_hi.is_some() {
            return Err(Error::config("experiment.subbox_lo and experiment.subbox_hi must be given together"));
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> crate::spectral::GridSpec {
        crate::spectral::GridSpec::new(self.grid.size).expect("validated")
    }

    pub fn taming_profile(&self) -> Result<crate::taming::TamingProfile> {
        if self.taming.enabled {
            crate::taming::TamingProfile::new(self.taming.level, self.physics.nu)
        } else {
            Ok(crate::taming::TamingProfile::disabled(self.physics.nu))
        }
    }

    /// Runs implied by the experiment section.
    pub fn run_descriptors(&self) -> Vec<RunDescriptor> {
        let single = |label: String, f: &dyn Fn(&mut SimConfig)| {
            let mut c = self.clone();
            c.experiment.kind = ExperimentKind::Single;
            f(&mut c);
            RunDescriptor { label, config: c }
        };
        match self.experiment.kind {
            ExperimentKind::Single => vec![single("run".into(), &|_| {})],
            ExperimentKind::SweepTaming => self
                .experiment
                .n_list
                .iter()
                .map(|&n| {
                    single(format!("N_{n}"), &|c: &mut SimConfig| {
                        c.taming.enabled = true;
                        c.taming.level = n;
                    })
                })
                .collect(),
            ExperimentKind::SweepResolution => self
                .experiment
                .m_list
                .iter()
                .map(|&m| single(format!("M_{m}"), &|c: &mut SimConfig| c.grid.size = m))
                .collect(),
            ExperimentKind::Compare => vec![
                single("tamed".into(), &|c: &mut SimConfig| c.taming.enabled = true),
                single("untamed".into(), &|c: &mut SimConfig| c.taming.enabled = false),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = SimConfig::parse("", &[]).unwrap();
        assert_eq!(c, SimConfig::default());
        assert_eq!(c.physics.nu, 1.0);
        assert_eq!(c.time.cfl, 0.5);
        assert_eq!(c.grid.size, 32);
    }

    #[test]
    fn negative_taming_level_rejected() {
        let err = SimConfig::parse("taming.N = -1.0", &[]).unwrap_err();
        assert!(err.to_string().contains("taming.N"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = SimConfig::parse("[physics]\nviscosity = 2.0", &[]).unwrap_err();
        assert!(err.to_string().contains("viscosity"), "{err}");
    }

    #[test]
    fn sweep_generates_one_run_per_level() {
        let c = SimConfig::parse(
            "[experiment]\nkind = \"sweep_taming\"\nN_list = [1.0, 2.0, 4.0, 8.0]",
            &[],
        )
        .unwrap();
        let runs = c.run_descriptors();
        assert_eq!(runs.len(), 4);
        assert_eq!(runs[2].config.taming.level, 4.0);
        assert!(runs.iter().all(|r| r.config.taming.enabled));
    }

    #[test]
    fn overrides_win_over_file() {
        let ov = SimConfig::split_overrides(&["taming.N=7.5", "scenario.name=shear_mode"]).unwrap();
        let c = SimConfig::parse("[taming]\nN = 2.0", &ov).unwrap();
        assert_eq!(c.taming.level, 7.5);
        assert_eq!(c.scenario.name, crate::scenarios::ScenarioKind::ShearMode);
    }

    #[test]
    fn list_invariants() {
        assert!(SimConfig::parse("experiment.N_list = [1.0, 1.0, 2.0]", &[]).is_err());
        assert!(SimConfig::parse("experiment.M_list = [16, 15]", &[]).is_err());
        assert!(SimConfig::parse("experiment.M_list = [16, 33]", &[]).is_err());
        assert!(SimConfig::parse("grid.size = 12", &[]).is_ok());
    }
}
