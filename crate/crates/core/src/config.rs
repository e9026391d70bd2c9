//! Experiment configuration: every parameter defaults to the full-scale
//! value; a desk-scale preset shrinks the expensive knobs for laptop runs.

use crate::adam::AdamConfig;
use crate::error::{Error, Result};
use crate::noise::ProfileKind;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct SimulationConfig {
    pub t_total: f64,
    pub m: usize,
    pub omega: f64,
    pub k_char: usize,
    pub k_test: usize,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            t_total: 1.0,
            m: 1024,
            omega: 12.0,
            k_char: 2000,
            k_test: 1000,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ProfilesConfig {
    /// Amplitude applied to the unit-variance N2-N4 constructions. The
    /// default is strong enough that the three colored profiles produce
    /// measurably different dephasing; at unit amplitude their features
    /// coincide to within Monte Carlo error for any probe pulse.
    pub scale: f64,
    pub kernel_width_fraction: f64,
    pub envelope_depth: f64,
}

impl Default for ProfilesConfig {
    fn default() -> Self {
        ProfilesConfig {
            scale: 4.0,
            kernel_width_fraction: 1.0 / 32.0,
            envelope_depth: 0.75,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct DatasetConfig {
    pub count: usize,
    pub n_pulses: usize,
    pub amp_min: f64,
    pub amp_max: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        DatasetConfig {
            count: 10000,
            n_pulses: 5,
            amp_min: -100.0,
            amp_max: 100.0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct GrayboxConfigBlock {
    pub k_model: usize,
    pub iterations: usize,
    pub test_fraction: f64,
    pub adam: AdamConfig,
}

impl Default for GrayboxConfigBlock {
    fn default() -> Self {
        GrayboxConfigBlock {
            k_model: 32,
            iterations: 1000,
            test_fraction: 0.1,
            // larger base step than the Adam default: the realization
            // signals start an order of magnitude below the noise amplitude
            // they must reach, and the cosine decay tempers the end of the run
            adam: AdamConfig {
                step: 3e-2,
                ..AdamConfig::default()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct OptimizerConfigBlock {
    pub iterations: usize,
    pub probes: usize,
}

impl Default for OptimizerConfigBlock {
    fn default() -> Self {
        OptimizerConfigBlock {
            iterations: 500,
            probes: 100,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ClassifierConfigBlock {
    pub replicas: usize,
    pub dither_std: f64,
    pub iterations: usize,
    pub test_fraction: f64,
    pub adam: AdamConfig,
}

impl Default for ClassifierConfigBlock {
    fn default() -> Self {
        ClassifierConfigBlock {
            replicas: 10000,
            dither_std: 0.05,
            iterations: 500,
            test_fraction: 0.1,
            adam: AdamConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct HarnessConfigBlock {
    pub steps: usize,
}

impl Default for HarnessConfigBlock {
    fn default() -> Self {
        HarnessConfigBlock { steps: 10000 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
#[serde(default)]
pub struct ExperimentConfig {
    pub simulation: SimulationConfig,
    pub profiles: ProfilesConfig,
    pub dataset: DatasetConfig,
    pub graybox: GrayboxConfigBlock,
    pub optimizer: OptimizerConfigBlock,
    pub classifier: ClassifierConfigBlock,
    pub harness: HarnessConfigBlock,
}

impl ExperimentConfig {
    /// The desk-scale preset: same physics, smaller ensembles. The graybox
    /// shrinks with it (K_model=8, 400 iterations) so the full pipeline
    /// stays within interactive budgets.
    pub fn desk_scale() -> Self {
        ExperimentConfig::default().desk_scaled()
    }

    /// Apply the desk-scale overrides on top of this config, keeping any
    /// other customization intact.
    pub fn desk_scaled(mut self) -> Self {
        self.simulation.m = 128;
        self.simulation.k_char = 400;
        self.simulation.k_test = 200;
        self.dataset.count = 500;
        self.classifier.replicas = 1000;
        self.harness.steps = 1000;
        self.graybox.k_model = 32;
        self.graybox.iterations = 800;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.simulation;
        if s.t_total <= 0.0 || s.m == 0 || s.k_char == 0 || s.k_test == 0 {
            return Err(Error::InvalidConfig(
                "simulation block needs t_total > 0 and m, k_char, k_test >= 1".into(),
            ));
        }
        if self.dataset.count == 0 || self.dataset.n_pulses == 0 {
            return Err(Error::InvalidConfig(
                "dataset block needs count >= 1 and n_pulses >= 1".into(),
            ));
        }
        if self.dataset.amp_min > self.dataset.amp_max {
            return Err(Error::InvalidConfig("empty dataset amplitude range".into()));
        }
        if self.graybox.k_model == 0 || self.graybox.iterations == 0 {
            return Err(Error::InvalidConfig(
                "graybox block needs k_model >= 1 and iterations >= 1".into(),
            ));
        }
        for (name, f) in [
            ("graybox", self.graybox.test_fraction),
            ("classifier", self.classifier.test_fraction),
        ] {
            if !(0.0..1.0).contains(&f) {
                return Err(Error::InvalidConfig(format!(
                    "{name} test fraction {f} outside [0, 1)"
                )));
            }
        }
        if self.classifier.replicas == 0 || self.classifier.dither_std < 0.0 {
            return Err(Error::InvalidConfig(
                "classifier block needs replicas >= 1 and dither_std >= 0".into(),
            ));
        }
        if self.harness.steps == 0 {
            return Err(Error::InvalidConfig("harness block needs steps >= 1".into()));
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML rendering; artifact manifests carry it
    /// so stages can refuse mismatched inputs.
    pub fn hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_toml().as_bytes());
        format!("{:x}", hasher.finalize())
    }

    pub fn amp_range(&self) -> (f64, f64) {
        (self.dataset.amp_min, self.dataset.amp_max)
    }
}

/// Profile membership of the three discrimination scenarios.
pub fn scenario_profiles(scenario: u8) -> Result<Vec<ProfileKind>> {
    use ProfileKind::*;
    match scenario {
        1 | 3 => Ok(vec![N0, N1, N2, N3, N4]),
        2 => Ok(vec![N5, N1, N2, N3, N4]),
        other => Err(Error::InvalidConfig(format!(
            "scenario {other} unknown; valid scenarios: 1, 2, 3"
        ))),
    }
}

/// Amplitude bounds the pulse optimizer must respect in a scenario;
/// scenario 3 restricts amplitudes to [-1, 1].
pub fn scenario_amp_range(scenario: u8, cfg: &ExperimentConfig) -> Result<(f64, f64)> {
    match scenario {
        1 | 2 => Ok(cfg.amp_range()),
        3 => Ok((-1.0, 1.0)),
        other => Err(Error::InvalidConfig(format!(
            "scenario {other} unknown; valid scenarios: 1, 2, 3"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_full_scale_parameters() {
        let cfg = ExperimentConfig::default();
        assert_eq!(cfg.simulation.t_total, 1.0);
        assert_eq!(cfg.simulation.m, 1024);
        assert_eq!(cfg.simulation.omega, 12.0);
        assert_eq!(cfg.simulation.k_char, 2000);
        assert_eq!(cfg.simulation.k_test, 1000);
        assert_eq!(cfg.dataset.count, 10000);
        assert_eq!(cfg.graybox.iterations, 1000);
        assert_eq!(cfg.graybox.test_fraction, 0.1);
        assert_eq!(cfg.optimizer.iterations, 500);
        assert_eq!(cfg.classifier.iterations, 500);
        assert_eq!(cfg.classifier.replicas, 10000);
        assert_eq!(cfg.harness.steps, 10000);
        cfg.validate().unwrap();
    }

    #[test]
    fn desk_scale_overrides() {
        let cfg = ExperimentConfig::desk_scale();
        assert_eq!(cfg.simulation.m, 128);
        assert_eq!(cfg.simulation.k_char, 400);
        assert_eq!(cfg.simulation.k_test, 200);
        assert_eq!(cfg.dataset.count, 500);
        assert_eq!(cfg.classifier.replicas, 1000);
        assert_eq!(cfg.harness.steps, 1000);
        cfg.validate().unwrap();
    }

    #[test]
    fn toml_round_trip_preserves_hash() {
        let cfg = ExperimentConfig::desk_scale();
        let again = ExperimentConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(cfg, again);
        assert_eq!(cfg.hash(), again.hash());
        assert_ne!(cfg.hash(), ExperimentConfig::default().hash());
    }

    #[test]
    fn partial_toml_uses_defaults() {
        let cfg = ExperimentConfig::from_toml("[simulation]\nm = 256\n").unwrap();
        assert_eq!(cfg.simulation.m, 256);
        assert_eq!(cfg.simulation.k_char, 2000);
    }

    #[test]
    fn invalid_configs_rejected() {
        assert!(ExperimentConfig::from_toml("[simulation]\nm = 0\n").is_err());
        assert!(ExperimentConfig::from_toml("[graybox]\ntest_fraction = 1.5\n").is_err());
        assert!(ExperimentConfig::from_toml("not toml at all [").is_err());
    }

    #[test]
    fn scenario_tables() {
        use ProfileKind::*;
        assert_eq!(scenario_profiles(1).unwrap(), vec![N0, N1, N2, N3, N4]);
        assert_eq!(scenario_profiles(2).unwrap(), vec![N5, N1, N2, N3, N4]);
        assert_eq!(scenario_profiles(3).unwrap(), vec![N0, N1, N2, N3, N4]);
        assert!(scenario_profiles(4).is_err());
        let cfg = ExperimentConfig::default();
        assert_eq!(scenario_amp_range(1, &cfg).unwrap(), (-100.0, 100.0));
        assert_eq!(scenario_amp_range(3, &cfg).unwrap(), (-1.0, 1.0));
    }
}
