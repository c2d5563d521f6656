//! Sweep configuration: a TOML file of scalar keys grouped in sections.
//!
//! Parsing is strict (unknown keys are rejected) and every section falls back
//! to documented defaults, so a config only needs the keys it changes.
//! Re-serializing a parsed config produces the canonical form: all keys
//! materialized, struct order, `toml` formatting.

use std::path::Path;

use mdiqkd::sources::{SourceFamily, SourceSpec};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {field}: {message}")]
    Invalid {
        field: &'static str,
        message: String,
    },
}

fn invalid(field: &'static str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field,
        message: message.into(),
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyName {
    Vacuum,
    WeakCoherent,
    PoissonianHsps,
    SubPoissonianHsps,
}

impl From<FamilyName> for SourceFamily {
    fn from(f: FamilyName) -> Self {
        match f {
            FamilyName::Vacuum => SourceFamily::Vacuum,
            FamilyName::WeakCoherent => SourceFamily::WeakCoherent,
            FamilyName::PoissonianHsps => SourceFamily::PoissonianHsps,
            FamilyName::SubPoissonianHsps => SourceFamily::SubPoissonianHsps,
        }
    }
}

/// One user's source. Trigger keys matter only to the heralded families and
/// `correlation` only to `sub-poissonian-hsps`.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    pub family: FamilyName,
    pub trigger_efficiency: f64,
    pub trigger_dark: f64,
    pub correlation: f64,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            family: FamilyName::WeakCoherent,
            trigger_efficiency: 0.75,
            trigger_dark: 1e-6,
            correlation: 0.9,
        }
    }
}

/// Relay detectors: shared dark rate per gate, and the efficiency that gets
/// folded into the channel transmittance.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorSection {
    pub dark_rate: f64,
    pub efficiency: f64,
}

impl Default for DetectorSection {
    fn default() -> Self {
        Self {
            dark_rate: 3e-6,
            efficiency: 1.0,
        }
    }
}

/// How a total channel loss splits between the two arms. `loss_split_a` is
/// the fraction of the dB total on Alice's arm; 0.5 puts the relay halfway.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ChannelSection {
    pub loss_split_a: f64,
}

impl Default for ChannelSection {
    fn default() -> Self {
        Self { loss_split_a: 0.5 }
    }
}

/// Total-loss grid in dB.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub loss_start_db: f64,
    pub loss_end_db: f64,
    pub loss_step_db: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            loss_start_db: 0.0,
            loss_end_db: 80.0,
            loss_step_db: 1.0,
        }
    }
}

/// Decoy intensities: fixed `mu`, and the grid the signal intensity `mu'`
/// is optimized over at every sweep point.
#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct DecoySection {
    pub mu: f64,
    pub mu_prime_min: f64,
    pub mu_prime_max: f64,
    pub mu_prime_step: f64,
    pub f_ec: f64,
}

impl Default for DecoySection {
    fn default() -> Self {
        Self {
            mu: 0.05,
            mu_prime_min: 0.1,
            mu_prime_max: 1.0,
            mu_prime_step: 0.01,
            f_ec: 1.16,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Copy, Debug, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    /// Misalignment probability `E_d`.
    pub misalignment: f64,
    /// Photon-number cutoff requested from the source constructors.
    pub n_max: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            misalignment: 0.015,
            n_max: 12,
        }
    }
}

#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    /// CSV destination; standard output when absent.
    pub path: Option<String>,
}

#[derive(Serialize, Deserialize, Clone, Debug, Default, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub alice: SourceSection,
    pub bob: SourceSection,
    pub detector: DetectorSection,
    pub channel: ChannelSection,
    pub sweep: SweepSection,
    pub decoy: DecoySection,
    pub model: ModelSection,
    pub output: OutputSection,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: SweepConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Canonical serialization: every key present, struct order.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let prob = |field: &'static str, v: f64| -> Result<(), ConfigError> {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(invalid(field, format!("{v} is outside [0, 1]")))
            }
        };
        prob("alice.trigger_efficiency", self.alice.trigger_efficiency)?;
        prob("alice.trigger_dark", self.alice.trigger_dark)?;
        prob("alice.correlation", self.alice.correlation)?;
        prob("bob.trigger_efficiency", self.bob.trigger_efficiency)?;
        prob("bob.trigger_dark", self.bob.trigger_dark)?;
        prob("bob.correlation", self.bob.correlation)?;
        if !(0.0..1.0).contains(&self.detector.dark_rate) {
            return Err(invalid(
                "detector.dark_rate",
                format!("{} is outside [0, 1)", self.detector.dark_rate),
            ));
        }
        if !(self.detector.efficiency > 0.0 && self.detector.efficiency <= 1.0) {
            return Err(invalid(
                "detector.efficiency",
                format!("{} is outside (0, 1]", self.detector.efficiency),
            ));
        }
        prob("channel.loss_split_a", self.channel.loss_split_a)?;
        if self.sweep.loss_start_db < 0.0 {
            return Err(invalid("sweep.loss_start_db", "must be non-negative"));
        }
        if self.sweep.loss_end_db < self.sweep.loss_start_db {
            return Err(invalid(
                "sweep.loss_end_db",
                "must not precede loss_start_db",
            ));
        }
        if self.sweep.loss_step_db <= 0.0 {
            return Err(invalid("sweep.loss_step_db", "must be positive"));
        }
        if self.decoy.mu <= 0.0 {
            return Err(invalid("decoy.mu", "must be positive"));
        }
        if self.decoy.mu_prime_min <= self.decoy.mu {
            return Err(invalid(
                "decoy.mu_prime_min",
                format!("must exceed mu = {}", self.decoy.mu),
            ));
        }
        if self.decoy.mu_prime_max < self.decoy.mu_prime_min {
            return Err(invalid(
                "decoy.mu_prime_max",
                "must not precede mu_prime_min",
            ));
        }
        if self.decoy.mu_prime_step <= 0.0 {
            return Err(invalid("decoy.mu_prime_step", "must be positive"));
        }
        if self.decoy.f_ec < 1.0 {
            return Err(invalid(
                "decoy.f_ec",
                "error-correction efficiency is at least 1",
            ));
        }
        prob("model.misalignment", self.model.misalignment)?;
        if self.model.n_max == 0 || self.model.n_max > mdiqkd::sources::MAX_CUTOFF {
            return Err(invalid(
                "model.n_max",
                format!("must lie in 1..={}", mdiqkd::sources::MAX_CUTOFF),
            ));
        }
        Ok(())
    }

    pub fn alice_spec(&self) -> SourceSpec<f64> {
        source_spec(&self.alice, self.decoy.mu)
    }

    pub fn bob_spec(&self) -> SourceSpec<f64> {
        source_spec(&self.bob, self.decoy.mu)
    }

    /// The swept total-loss values, in dB.
    pub fn loss_grid(&self) -> Vec<f64> {
        grid(
            self.sweep.loss_start_db,
            self.sweep.loss_end_db,
            self.sweep.loss_step_db,
        )
    }

    /// The ascending signal-intensity candidates.
    pub fn mu_prime_grid(&self) -> Vec<f64> {
        grid(
            self.decoy.mu_prime_min,
            self.decoy.mu_prime_max,
            self.decoy.mu_prime_step,
        )
    }
}

fn source_spec(section: &SourceSection, mu: f64) -> SourceSpec<f64> {
    SourceSpec {
        family: section.family.into(),
        intensity: mu,
        trigger_efficiency: section.trigger_efficiency,
        trigger_dark: section.trigger_dark,
        correlation: section.correlation,
    }
}

fn grid(start: f64, end: f64, step: f64) -> Vec<f64> {
    let count = ((end - start) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| start + step * i as f64).collect()
}
