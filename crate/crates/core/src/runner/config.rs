use serde::{Deserialize, Serialize};

use crate::classical::LyapunovConfig;
use crate::diagnostics::{Bands, DEFAULT_KNOT_COUNT, DEFAULT_THRESHOLD_FRACTION};
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::qsd::{HamiltonianScheme, IntegratorConfig};

/// Named configurations shipped with the crate.
pub const PRESETS: &[&str] = &["fig1", "fig3", "oracle"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub gamma: f64,
    pub g: f64,
    pub omega: f64,
    /// Single β; ignored when `beta_list` is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_list: Option<Vec<f64>>,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            gamma: 0.125,
            g: 0.3,
            omega: 1.0,
            beta: None,
            beta_list: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub steps_per_period: usize,
    pub hamiltonian: HamiltonianScheme,
    pub predictor_corrector: bool,
    pub recenter_threshold: f64,
    pub moving_frame: bool,
    /// Fixed cutoff for every β; per-β defaults apply when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    pub leakage_bound: f64,
    pub renormalize_every_step: bool,
    pub displacement_tolerance: f64,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            steps_per_period: d.steps_per_period,
            hamiltonian: d.hamiltonian,
            predictor_corrector: d.predictor_corrector,
            recenter_threshold: d.recenter_threshold,
            moving_frame: d.moving_frame,
            cutoff: None,
            leakage_bound: d.leakage_bound,
            renormalize_every_step: d.renormalize_every_step,
            displacement_tolerance: d.displacement_tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProtocolSection {
    pub periods_total: usize,
    pub transient_periods: usize,
    pub fine_samples_per_period: usize,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        Self {
            periods_total: 600,
            transient_periods: 100,
            fine_samples_per_period: 16,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InitialSection {
    pub alpha_re: f64,
    pub alpha_im: f64,
}

impl Default for InitialSection {
    fn default() -> Self {
        Self {
            alpha_re: 0.7,
            alpha_im: -0.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeedSection {
    pub base: u64,
    pub trajectories: usize,
}

impl Default for SeedSection {
    fn default() -> Self {
        Self {
            base: 1,
            trajectories: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            directory: "out".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiagnosticsSection {
    pub knot_count: usize,
    pub threshold_fraction: f64,
    pub low_max: f64,
    pub high_min: f64,
    pub high_max: f64,
}

impl Default for DiagnosticsSection {
    fn default() -> Self {
        let b = Bands::default();
        Self {
            knot_count: DEFAULT_KNOT_COUNT,
            threshold_fraction: DEFAULT_THRESHOLD_FRACTION,
            low_max: b.low_max,
            high_min: b.high_min,
            high_max: b.high_max,
        }
    }
}

impl DiagnosticsSection {
    pub fn bands(&self) -> Bands {
        Bands {
            low_max: self.low_max,
            high_min: self.high_min,
            high_max: self.high_max,
        }
    }
}

/// Settings of the `classical` subcommand.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassicalSection {
    pub steps_per_period: usize,
    pub lyapunov_periods: usize,
    pub lyapunov_transient: usize,
    pub renorm_interval: usize,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        let d = LyapunovConfig::default();
        Self {
            // divisible by the power-of-two fine-sample rates
            steps_per_period: 1024,
            lyapunov_periods: d.total_periods,
            lyapunov_transient: d.transient_periods,
            renorm_interval: d.renorm_interval,
        }
    }
}

impl ClassicalSection {
    pub fn lyapunov(&self) -> LyapunovConfig {
        LyapunovConfig {
            steps_per_period: self.steps_per_period,
            total_periods: self.lyapunov_periods,
            transient_periods: self.lyapunov_transient,
            renorm_interval: self.renorm_interval,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelSection,
    pub integrator: IntegratorSection,
    pub protocol: ProtocolSection,
    pub initial: InitialSection,
    pub seeds: SeedSection,
    pub outputs: OutputSection,
    pub diagnostics: DiagnosticsSection,
    pub classical: ClassicalSection,
}

/// Cutoff used when `integrator.cutoff` is unset.
pub fn default_cutoff(beta: f64) -> usize {
    if beta >= 0.5 {
        64
    } else if beta >= 0.2 {
        128
    } else {
        256
    }
}

impl RunConfig {
    pub fn betas(&self) -> Vec<f64> {
        match (&self.model.beta_list, self.model.beta) {
            (Some(list), _) => list.clone(),
            (None, Some(b)) => vec![b],
            (None, None) => vec![1.0],
        }
    }

    pub fn model_params(&self, beta: f64) -> Result<ModelParams> {
        ModelParams::new(self.model.gamma, self.model.g, self.model.omega, beta)
    }

    pub fn cutoff(&self, beta: f64) -> usize {
        self.integrator.cutoff.unwrap_or_else(|| default_cutoff(beta))
    }

    pub fn integrator_config(&self, beta: f64) -> IntegratorConfig {
        let s = &self.integrator;
        IntegratorConfig {
            steps_per_period: s.steps_per_period,
            hamiltonian: s.hamiltonian,
            predictor_corrector: s.predictor_corrector,
            recenter_threshold: s.recenter_threshold,
            moving_frame: s.moving_frame,
            cutoff: self.cutoff(beta),
            leakage_bound: s.leakage_bound,
            renormalize_every_step: s.renormalize_every_step,
            fine_samples_per_period: self.protocol.fine_samples_per_period,
            displacement_tolerance: s.displacement_tolerance,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let betas = self.betas();
        if betas.is_empty() {
            return Err(Error::Config("model.beta_list is empty".into()));
        }
        for &b in &betas {
            if !(b > 0.0) || !b.is_finite() {
                return Err(Error::Config(format!("beta must be positive, got {b}")));
            }
            self.model_params(b)?;
            self.integrator_config(b).validate()?;
        }
        if self.seeds.base > i64::MAX as u64 {
            return Err(Error::Config(format!(
                "seeds.base must not exceed {} (TOML integers are signed 64-bit)",
                i64::MAX
            )));
        }
        let p = &self.protocol;
        if p.periods_total <= p.transient_periods {
            return Err(Error::Config(format!(
                "protocol.periods_total ({}) must exceed protocol.transient_periods ({})",
                p.periods_total, p.transient_periods
            )));
        }
        if p.fine_samples_per_period == 0 {
            return Err(Error::Config("protocol.fine_samples_per_period must be positive".into()));
        }
        if self.seeds.trajectories == 0 {
            return Err(Error::Config("seeds.trajectories must be at least 1".into()));
        }
        let d = &self.diagnostics;
        if d.knot_count < 4 {
            return Err(Error::Config("diagnostics.knot_count must be at least 4".into()));
        }
        if !(d.threshold_fraction > 0.0 && d.threshold_fraction < 1.0) {
            return Err(Error::Config("diagnostics.threshold_fraction must lie in (0, 1)".into()));
        }
        if !(0.0 < d.low_max && d.low_max < d.high_min && d.high_min < d.high_max) {
            return Err(Error::Config(
                "diagnostics bands need 0 < low_max < high_min < high_max".into(),
            ));
        }
        let c = &self.classical;
        if c.steps_per_period == 0 || c.renorm_interval == 0 || c.lyapunov_periods <= c.lyapunov_transient {
            return Err(Error::Config("invalid classical section".into()));
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (key, value) in over {
        match (base.get_mut(&key), value) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => {
                // A single β replaces a list and vice versa.
                if key == "model" {
                    if o.contains_key("beta") {
                        b.remove("beta_list");
                    }
                    if o.contains_key("beta_list") {
                        b.remove("beta");
                    }
                }
                merge(b, o);
            }
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn config_error(e: toml::de::Error) -> Error {
    Error::Config(e.to_string().trim_end().to_string())
}

/// Parses a config over the defaults. Keys are dotted (`model.beta = 0.3`)
/// or grouped in tables; unknown keys are an error.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    parse_config_over(text, &RunConfig::default())
}

/// Parses `text` and applies it on top of `base`.
pub fn parse_config_over(text: &str, base: &RunConfig) -> Result<RunConfig> {
    // Strict pass for key names and types, with line information.
    toml::from_str::<RunConfig>(text).map_err(config_error)?;
    let over: toml::Table = toml::from_str(text).map_err(config_error)?;
    let mut table = toml::Table::try_from(base).map_err(|e| Error::Config(e.to_string()))?;
    merge(&mut table, over);
    let config: RunConfig = table.try_into().map_err(config_error)?;
    config.validate()?;
    Ok(config)
}

pub fn preset(name: &str) -> Result<RunConfig> {
    let mut c = RunConfig::default();
    match name {
        "fig1" => {
            c.model.gamma = 0.125;
            c.model.beta_list = Some(vec![0.01, 0.3, 1.0]);
        }
        "fig3" => {
            c.model.gamma = 0.3;
            c.model.beta_list = Some(vec![0.01, 0.3, 1.0]);
        }
        "oracle" => {
            c.model.gamma = 0.3;
            c.model.beta = Some(1.0);
            c.integrator.cutoff = Some(30);
            // same fixed basis as the master equation; leakage is shared
            // truncation, and aborting leaky trajectories would bias the mean
            c.integrator.moving_frame = false;
            c.integrator.leakage_bound = 1.0;
            c.protocol.periods_total = 10;
            c.protocol.transient_periods = 0;
            c.protocol.fine_samples_per_period = 1;
            c.seeds.trajectories = 500;
        }
        _ => {
            return Err(Error::Config(format!(
                "unknown preset `{name}` (available: {})",
                PRESETS.join(", ")
            )))
        }
    }
    Ok(c)
}

impl RunConfig {
    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.betas(), vec![1.0]);
        assert_eq!(c.protocol.periods_total, 600);
        assert_eq!(c.protocol.transient_periods, 100);
        assert_eq!((c.initial.alpha_re, c.initial.alpha_im), (0.7, -0.2));
    }

    #[test]
    fn unknown_key_is_named() {
        let err = parse_config("model.bta = 0.3").unwrap_err().to_string();
        assert!(err.contains("bta"), "{err}");
        assert!(parse_config("[protocol]\nperiod_total = 5").is_err());
        assert!(parse_config("extra = 1").is_err());
    }

    #[test]
    fn type_mismatch_and_bad_beta() {
        assert!(parse_config("model.beta = \"big\"").is_err());
        assert!(parse_config("model.beta = 0.0").is_err());
        assert!(parse_config("model.beta_list = [0.3, -1.0]").is_err());
    }

    #[test]
    fn dotted_and_table_forms_agree() {
        let a = parse_config("model.beta = 0.3\nintegrator.cutoff = 40").unwrap();
        let b = parse_config("[model]\nbeta = 0.3\n[integrator]\ncutoff = 40").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.betas(), vec![0.3]);
        assert_eq!(a.integrator_config(0.3).cutoff, 40);
    }

    #[test]
    fn fig3_preset() {
        let c = preset("fig3").unwrap();
        assert_eq!((c.model.gamma, c.model.g, c.model.omega), (0.3, 0.3, 1.0));
        assert_eq!(c.betas(), vec![0.01, 0.3, 1.0]);
        let f1 = preset("fig1").unwrap();
        assert_eq!(f1.model.gamma, 0.125);
        assert_eq!(f1.betas(), vec![0.01, 0.3, 1.0]);
        assert!(preset("fig9").is_err());
    }

    #[test]
    fn overrides_on_a_preset() {
        let base = preset("fig3").unwrap();
        let c = parse_config_over("model.beta_list = [0.1, 0.3, 1.0]\nseeds.base = 9", &base).unwrap();
        assert_eq!(c.betas(), vec![0.1, 0.3, 1.0]);
        assert_eq!(c.model.gamma, 0.3);
        assert_eq!(c.seeds.base, 9);
        let single = parse_config_over("model.beta = 0.3", &base).unwrap();
        assert_eq!(single.betas(), vec![0.3]);
    }

    #[test]
    fn round_trip_through_toml() {
        let c = preset("oracle").unwrap();
        let text = c.to_toml().unwrap();
        assert_eq!(parse_config(&text).unwrap(), c);
    }

    #[test]
    fn per_beta_cutoffs() {
        assert_eq!(default_cutoff(1.0), 64);
        assert_eq!(default_cutoff(0.3), 128);
        assert_eq!(default_cutoff(0.1), 256);
        assert_eq!(default_cutoff(0.01), 256);
    }
}
