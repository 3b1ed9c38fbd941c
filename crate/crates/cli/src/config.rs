//! Experiment configuration: a versioned TOML document with one section per
//! concern. Unknown keys are rejected so typos fail loudly instead of
//! silently running a different experiment.

use quench_core::model::{build_case, CaseId, InitialState, ModelParams, Spin};
use quench_core::noise::{load_calibration, Calibration, Channels};
use quench_core::trotter::Scheme;
use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(message.into()))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub version: u32,
    pub model: Option<ModelSection>,
    pub initial: Option<InitialSection>,
    pub evolution: Option<EvolutionSection>,
    pub sampling: Option<SamplingSection>,
    #[serde(default)]
    pub mitigation: MitigationSection,
    pub noise: Option<NoiseSection>,
    pub select: Option<SelectSection>,
    pub observables: Option<ObservablesSection>,
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub case: String,
    pub n_sites: usize,
    pub hopping: f64,
    #[serde(default)]
    pub interaction: f64,
    #[serde(default)]
    pub field: f64,
    #[serde(default)]
    pub disorder_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    /// "domain-wall", "neel", or an explicit pattern like "100110"
    /// (0 = spin up, 1 = spin down, site 1 first).
    pub state: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSection {
    pub scheme: String,
    pub dt: f64,
    pub n_steps: u32,
    #[serde(default = "one")]
    pub substeps: u32,
}

fn one() -> u32 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSection {
    pub shots: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MitigationSection {
    #[serde(default)]
    pub postselect: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub calibration: PathBuf,
    pub channels: Vec<String>,
    pub layout: LayoutSpec,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum LayoutSpec {
    Named(String),
    Explicit(Vec<usize>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectSection {
    pub chain_length: Option<usize>,
    pub meas_threshold: f64,
    pub t2_threshold: f64,
    #[serde(default = "default_relax")]
    pub relax_factor: f64,
}

fn default_relax() -> f64 {
    1.25
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservablesSection {
    pub names: Vec<String>,
    #[serde(default)]
    pub sites: Vec<usize>,
    #[serde(default)]
    pub pairs: Vec<[usize; 2]>,
    #[serde(default)]
    pub qfi_signs: Vec<i32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: PathBuf,
}

pub const OBSERVABLE_NAMES: [&str; 6] =
    ["magnetization", "n_half", "correlator", "qfi", "parity", "fraction"];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<ExperimentConfig, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig =
            toml::from_str(&text).map_err(|e| ConfigError(format!("config parse error: {e}")))?;
        if config.version != CONFIG_VERSION {
            return err(format!(
                "unsupported config version {} (this build understands {CONFIG_VERSION})",
                config.version
            ));
        }
        if let Some(sampling) = &config.sampling {
            if sampling.shots == 0 {
                return err("sampling.shots must be at least 1");
            }
        }
        if let Some(obs) = &config.observables {
            for name in &obs.names {
                if !OBSERVABLE_NAMES.contains(&name.as_str()) {
                    return err(format!(
                        "unknown observable {name:?}; known: {}",
                        OBSERVABLE_NAMES.join(", ")
                    ));
                }
            }
        }
        Ok(config)
    }

    pub fn model_params(&self) -> Result<ModelParams, ConfigError> {
        let m = self.section(&self.model, "model")?;
        let case = match m.case.as_str() {
            "I" => CaseId::I,
            "II" => CaseId::II,
            "III" => CaseId::III,
            "IV" => CaseId::IV,
            other => return err(format!("model.case must be I..IV, got {other:?}")),
        };
        build_case(case, m.n_sites, m.hopping, m.interaction, m.field, m.disorder_seed)
            .map_err(|e| ConfigError(format!("model: {e}")))
    }

    pub fn initial_state(&self) -> Result<InitialState, ConfigError> {
        let m = self.section(&self.model, "model")?;
        let i = self.section(&self.initial, "initial")?;
        match i.state.as_str() {
            "domain-wall" => InitialState::domain_wall(m.n_sites)
                .map_err(|e| ConfigError(format!("initial: {e}"))),
            "neel" => Ok(InitialState::neel(m.n_sites)),
            pattern => {
                if pattern.len() != m.n_sites || !pattern.chars().all(|c| c == '0' || c == '1') {
                    return err(format!(
                        "initial.state must be \"domain-wall\", \"neel\", or {} chars of 0/1",
                        m.n_sites
                    ));
                }
                let spins = pattern
                    .chars()
                    .map(|c| if c == '0' { Spin::Up } else { Spin::Down })
                    .collect();
                Ok(InitialState::bitstring(spins))
            }
        }
    }

    pub fn scheme(&self) -> Result<Scheme, ConfigError> {
        let e = self.section(&self.evolution, "evolution")?;
        match e.scheme.as_str() {
            "basic" => Ok(Scheme::Basic),
            "symmetric" => Ok(Scheme::Symmetric),
            other => err(format!("evolution.scheme must be basic|symmetric, got {other:?}")),
        }
    }

    pub fn channels(&self) -> Result<Channels, ConfigError> {
        let n = self.section(&self.noise, "noise")?;
        let mut channels = Channels::none();
        for name in &n.channels {
            match name.as_str() {
                "cnot" => channels.cnot_depolarizing = true,
                "readout" => channels.readout = true,
                "dephasing" => channels.dephasing = true,
                other => {
                    return err(format!(
                        "noise.channels entries must be cnot|readout|dephasing, got {other:?}"
                    ))
                }
            }
        }
        Ok(channels)
    }

    pub fn calibration(&self, config_dir: &Path) -> Result<Calibration, ConfigError> {
        let n = self.section(&self.noise, "noise")?;
        let path = if n.calibration.is_absolute() {
            n.calibration.clone()
        } else {
            config_dir.join(&n.calibration)
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| ConfigError(format!("cannot read calibration {}: {e}", path.display())))?;
        load_calibration(&text).map_err(|e| ConfigError(format!("calibration: {e}")))
    }

    pub fn section<'a, T>(&self, field: &'a Option<T>, name: &str) -> Result<&'a T, ConfigError> {
        field.as_ref().ok_or_else(|| ConfigError(format!("config section [{name}] is required")))
    }
}
