//! TOML experiment configuration: one table per concern, deserialized
//! with serde and converted into core types.

use serde::Deserialize;

use gsemm_core::{ActivationKind, LearningConfig, ModelSpec, RetrievalCriterion, Variant};

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub model: ModelSection,
    pub memories: MemoriesSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(default)]
    pub retrieval: RetrievalSection,
    #[serde(default)]
    pub fixed_points: FixedPointsSection,
    pub learn: Option<LearnSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub variant: String,
    pub n_f: usize,
    pub n_h: usize,
    pub alpha_s: f64,
    pub alpha_c: f64,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default = "one")]
    pub tau_f: f64,
    #[serde(default = "tenth")]
    pub tau_h: f64,
    #[serde(default = "hundred")]
    pub tau_d: f64,
    pub sigma_f: Option<String>,
    pub sigma_h: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemoriesSection {
    pub seed: u64,
    #[serde(default)]
    pub cycles: Vec<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    #[serde(default = "default_duration")]
    pub duration: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub cue_memory: usize,
    #[serde(default)]
    pub noise_fraction: f64,
    #[serde(default = "one_u64")]
    pub noise_seed: u64,
    #[serde(default = "yes")]
    pub energy: bool,
}

impl Default for SimulateSection {
    fn default() -> Self {
        SimulateSection {
            duration: default_duration(),
            dt: default_dt(),
            record_every: default_record_every(),
            cue_memory: 0,
            noise_fraction: 0.0,
            noise_seed: 1,
            energy: true,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetrievalSection {
    #[serde(default = "default_threshold")]
    pub overlap_threshold: f64,
    #[serde(default = "one")]
    pub min_dwell: f64,
    #[serde(default = "default_duration")]
    pub max_time: f64,
}

impl Default for RetrievalSection {
    fn default() -> Self {
        RetrievalSection {
            overlap_threshold: default_threshold(),
            min_dwell: 1.0,
            max_time: default_duration(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedPointsSection {
    #[serde(default = "default_fp_step")]
    pub step: f64,
    #[serde(default = "default_fp_tol")]
    pub tol: f64,
    #[serde(default = "default_fp_iters")]
    pub max_iters: usize,
    #[serde(default = "default_sweep_every")]
    pub sweep_every: usize,
}

impl Default for FixedPointsSection {
    fn default() -> Self {
        FixedPointsSection {
            step: default_fp_step(),
            tol: default_fp_tol(),
            max_iters: default_fp_iters(),
            sweep_every: default_sweep_every(),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnSection {
    pub n_memories: usize,
    #[serde(default = "default_tau_xi")]
    pub tau_l_xi: f64,
    #[serde(default = "default_tau_phi")]
    pub tau_l_phi: f64,
    #[serde(default = "default_beta_c")]
    pub beta_c: f64,
    #[serde(default = "default_steps_per_memory")]
    pub steps_per_memory: usize,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "one")]
    pub init_range: f64,
    #[serde(default = "default_init_seed")]
    pub init_seed: u64,
    #[serde(default = "default_snapshot_every")]
    pub snapshot_every: usize,
    #[serde(default = "default_energy_record_every")]
    pub energy_record_every: usize,
}

fn one() -> f64 {
    1.0
}
fn tenth() -> f64 {
    0.1
}
fn hundred() -> f64 {
    100.0
}
fn one_u64() -> u64 {
    1
}
fn yes() -> bool {
    true
}
fn default_duration() -> f64 {
    300.0
}
fn default_dt() -> f64 {
    0.01
}
fn default_record_every() -> usize {
    10
}
fn default_threshold() -> f64 {
    0.9
}
fn default_fp_step() -> f64 {
    0.1
}
fn default_fp_tol() -> f64 {
    1e-6
}
fn default_fp_iters() -> usize {
    100_000
}
fn default_sweep_every() -> usize {
    10
}
fn default_tau_xi() -> f64 {
    6.2e5
}
fn default_tau_phi() -> f64 {
    6.2e7
}
fn default_beta_c() -> f64 {
    0.621
}
fn default_steps_per_memory() -> usize {
    4500
}
fn default_epochs() -> usize {
    100
}
fn default_init_seed() -> u64 {
    99
}
fn default_snapshot_every() -> usize {
    10
}
fn default_energy_record_every() -> usize {
    500
}

fn activation_kind(name: &str) -> Result<ActivationKind, CliError> {
    match name {
        "identity" => Ok(ActivationKind::Identity),
        "tanh" => Ok(ActivationKind::Tanh),
        "softmax" => Ok(ActivationKind::Softmax),
        other => Err(CliError::config(format!(
            "unknown activation '{other}' (expected identity, tanh, or softmax)"
        ))),
    }
}

impl Config {
    pub fn load(path: &std::path::Path) -> Result<Config, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let cfg: Config = toml::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        Ok(cfg)
    }

    pub fn model_spec(&self) -> Result<ModelSpec, CliError> {
        let m = &self.model;
        let variant = match m.variant.as_str() {
            "lisem" => Variant::Lisem,
            "dsem" => Variant::Dsem,
            "gsemm" => {
                let sf = m.sigma_f.as_deref().ok_or_else(|| {
                    CliError::config("variant 'gsemm' needs model.sigma_f".to_string())
                })?;
                let sh = m.sigma_h.as_deref().ok_or_else(|| {
                    CliError::config("variant 'gsemm' needs model.sigma_h".to_string())
                })?;
                Variant::FullGsemm {
                    sigma_f: activation_kind(sf)?,
                    sigma_h: activation_kind(sh)?,
                }
            }
            other => {
                return Err(CliError::config(format!(
                    "unknown variant '{other}' (expected gsemm, lisem, or dsem)"
                )))
            }
        };
        let spec = ModelSpec {
            variant,
            n_f: m.n_f,
            n_h: m.n_h,
            alpha_s: m.alpha_s,
            alpha_c: m.alpha_c,
            gamma: m.gamma,
            tau_f: m.tau_f,
            tau_h: m.tau_h,
            tau_d: m.tau_d,
        };
        spec.validate().map_err(CliError::from_core_config)?;
        Ok(spec)
    }

    pub fn retrieval_criterion(&self) -> RetrievalCriterion {
        RetrievalCriterion {
            overlap_threshold: self.retrieval.overlap_threshold,
            min_dwell: self.retrieval.min_dwell,
            max_time: self.retrieval.max_time,
        }
    }

    pub fn learning_config(&self) -> Result<(LearningConfig, &LearnSection), CliError> {
        let l = self
            .learn
            .as_ref()
            .ok_or_else(|| CliError::config("config has no [learn] section".to_string()))?;
        let cfg = LearningConfig {
            tau_l_xi: l.tau_l_xi,
            tau_l_phi: l.tau_l_phi,
            beta_c: l.beta_c,
            steps_per_memory: l.steps_per_memory,
            epochs: l.epochs,
            init_range: l.init_range,
            dt: self.simulate.dt,
            energy_record_every: l.energy_record_every,
        };
        Ok((cfg, l))
    }
}
