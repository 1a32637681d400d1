//! Domain types shared by the analytic engine, the Monte Carlo oracle and the CLI.

mod config;
pub mod units;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

pub use config::{builtin_scenario, load_config, ParamPath, ParamTarget, BUILTIN_SCENARIOS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

impl ConfigError {
    pub(crate) fn invalid(field: impl Into<String>, message: impl Into<String>) -> Self {
        ConfigError::Invalid {
            field: field.into(),
            message: message.into(),
        }
    }
}

/// Uplink access rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AccessMode {
    /// Decoupled: the uplink goes to the geographically closest BS.
    Duda,
    /// Coupled, association on instantaneous (Rayleigh-faded) received power.
    CudaFading,
    /// Coupled, association on mean received power.
    CudaMeanFading,
}

impl AccessMode {
    pub const ALL: [AccessMode; 3] = [AccessMode::Duda, AccessMode::CudaFading, AccessMode::CudaMeanFading];

    pub fn as_str(self) -> &'static str {
        match self {
            AccessMode::Duda => "duda",
            AccessMode::CudaFading => "cuda_fading",
            AccessMode::CudaMeanFading => "cuda_mean",
        }
    }

    pub fn is_coupled(self) -> bool {
        !matches!(self, AccessMode::Duda)
    }
}

impl fmt::Display for AccessMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AccessMode {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "duda" => Ok(AccessMode::Duda),
            "cuda_fading" => Ok(AccessMode::CudaFading),
            "cuda_mean" => Ok(AccessMode::CudaMeanFading),
            other => Err(ConfigError::invalid(
                "access_mode",
                format!("expected duda, cuda_fading or cuda_mean, got `{other}`"),
            )),
        }
    }
}

/// One BS tier and the FPC settings of the UEs it serves.
#[derive(Debug, Clone, PartialEq)]
pub struct TierParams {
    pub name: String,
    /// BSs per m².
    pub bs_intensity: f64,
    /// W.
    pub bs_tx_power: f64,
    pub path_loss_exp: f64,
    pub fpc_factor: f64,
    /// W.
    pub baseline_ue_power: f64,
    /// Linear.
    pub sinr_threshold: f64,
}

impl TierParams {
    pub fn validate(&self, index: usize) -> Result<(), ConfigError> {
        let field = |name: &str| format!("tier[{index}].{name}");
        let positive = |value: f64, name: &str| {
            if value > 0.0 && value.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::invalid(
                    field(name),
                    format!("must be positive, got {value}"),
                ))
            }
        };
        positive(self.bs_intensity, "bs_intensity")?;
        positive(self.bs_tx_power, "bs_power")?;
        positive(self.baseline_ue_power, "baseline_ue_power")?;
        if !(self.path_loss_exp > 2.0 && self.path_loss_exp.is_finite()) {
            return Err(ConfigError::invalid(
                field("alpha"),
                format!("path-loss exponent must be > 2, got {}", self.path_loss_exp),
            ));
        }
        if !(0.0..=1.0).contains(&self.fpc_factor) {
            return Err(ConfigError::invalid(
                field("epsilon"),
                format!("FPC factor must lie in [0, 1], got {}", self.fpc_factor),
            ));
        }
        if !(self.sinr_threshold >= 0.0) || self.sinr_threshold.is_nan() {
            return Err(ConfigError::invalid(
                field("sinr_threshold"),
                format!("must be >= 0, got {}", self.sinr_threshold),
            ));
        }
        Ok(())
    }

    /// `α ε`, the exponent of the FPC distance compensation.
    pub fn compensation_exponent(&self) -> f64 {
        self.path_loss_exp * self.fpc_factor
    }
}

/// A validated K-tier scenario. Immutable; derive variants with the `with_*` methods.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    tiers: Vec<TierParams>,
    ue_intensity: f64,
    bandwidth: f64,
    noise_power: f64,
    access_mode: AccessMode,
    ue_static_power: f64,
    ue_max_tx_power: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct NetworkConfigBuilder {
    pub tiers: Vec<TierParams>,
    pub ue_intensity: f64,
    pub bandwidth: f64,
    pub noise_power: f64,
    pub access_mode: AccessMode,
    pub ue_static_power: f64,
    pub ue_max_tx_power: Option<f64>,
}

impl NetworkConfigBuilder {
    pub fn build(self) -> Result<NetworkConfig, ConfigError> {
        let config = NetworkConfig {
            tiers: self.tiers,
            ue_intensity: self.ue_intensity,
            bandwidth: self.bandwidth,
            noise_power: self.noise_power,
            access_mode: self.access_mode,
            ue_static_power: self.ue_static_power,
            ue_max_tx_power: self.ue_max_tx_power,
        };
        config.validate()?;
        Ok(config)
    }
}

impl NetworkConfig {
    pub fn builder(tiers: Vec<TierParams>) -> NetworkConfigBuilder {
        NetworkConfigBuilder {
            tiers,
            ue_intensity: 0.0,
            bandwidth: 0.0,
            noise_power: 0.0,
            access_mode: AccessMode::Duda,
            ue_static_power: 0.0,
            ue_max_tx_power: None,
        }
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.tiers.is_empty() {
            return Err(ConfigError::invalid("tier", "at least one [tier] block is required"));
        }
        for (i, tier) in self.tiers.iter().enumerate() {
            tier.validate(i)?;
        }
        if !(self.ue_intensity > 0.0 && self.ue_intensity.is_finite()) {
            return Err(ConfigError::invalid(
                "ue_intensity",
                format!("must be positive, got {}", self.ue_intensity),
            ));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(ConfigError::invalid(
                "bandwidth",
                format!("must be positive, got {}", self.bandwidth),
            ));
        }
        if !(self.noise_power >= 0.0 && self.noise_power.is_finite()) {
            return Err(ConfigError::invalid(
                "noise",
                format!("must be >= 0, got {}", self.noise_power),
            ));
        }
        if !(self.ue_static_power >= 0.0 && self.ue_static_power.is_finite()) {
            return Err(ConfigError::invalid(
                "ue_static_power",
                format!("must be >= 0, got {}", self.ue_static_power),
            ));
        }
        if let Some(cap) = self.ue_max_tx_power {
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(ConfigError::invalid(
                    "ue_max_power",
                    format!("must be positive, got {cap}"),
                ));
            }
        }
        Ok(())
    }

    pub fn tiers(&self) -> &[TierParams] {
        &self.tiers
    }

    pub fn tier(&self, index: usize) -> &TierParams {
        &self.tiers[index]
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    pub fn ue_intensity(&self) -> f64 {
        self.ue_intensity
    }

    pub fn bandwidth(&self) -> f64 {
        self.bandwidth
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn access_mode(&self) -> AccessMode {
        self.access_mode
    }

    pub fn ue_static_power(&self) -> f64 {
        self.ue_static_power
    }

    pub fn ue_max_tx_power(&self) -> Option<f64> {
        self.ue_max_tx_power
    }

    /// Total BS intensity `Σᵢ λ_Bi` of the superposed tiers.
    pub fn sum_intensity(&self) -> f64 {
        self.tiers.iter().map(|t| t.bs_intensity).sum()
    }

    pub fn with_access_mode(&self, mode: AccessMode) -> NetworkConfig {
        NetworkConfig {
            access_mode: mode,
            ..self.clone()
        }
    }

    /// Copy with one tier edited, revalidated.
    pub fn with_tier(&self, index: usize, edit: impl FnOnce(&mut TierParams)) -> Result<NetworkConfig, ConfigError> {
        if index >= self.tiers.len() {
            return Err(ConfigError::invalid(
                format!("tier[{index}]"),
                format!("scenario has {} tiers", self.tiers.len()),
            ));
        }
        let mut next = self.clone();
        edit(&mut next.tiers[index]);
        next.validate()?;
        Ok(next)
    }

    /// Copy with the global fields edited, revalidated.
    pub fn with_globals(&self, edit: impl FnOnce(&mut NetworkConfigBuilder)) -> Result<NetworkConfig, ConfigError> {
        let mut builder = NetworkConfigBuilder {
            tiers: self.tiers.clone(),
            ue_intensity: self.ue_intensity,
            bandwidth: self.bandwidth,
            noise_power: self.noise_power,
            access_mode: self.access_mode,
            ue_static_power: self.ue_static_power,
            ue_max_tx_power: self.ue_max_tx_power,
        };
        edit(&mut builder);
        builder.build()
    }

    /// Writes the scenario in the canonical linear-unit keys. Reloading the
    /// text gives back a bit-identical config.
    pub fn to_scenario_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("ue_intensity = {:?}\n", self.ue_intensity));
        out.push_str(&format!("bandwidth_hz = {:?}\n", self.bandwidth));
        if self.noise_power == 0.0 {
            out.push_str("interference_limited = true\n");
        } else {
            out.push_str(&format!("noise_w = {:?}\n", self.noise_power));
        }
        out.push_str(&format!("access_mode = {}\n", self.access_mode));
        out.push_str(&format!("ue_static_power_w = {:?}\n", self.ue_static_power));
        if let Some(cap) = self.ue_max_tx_power {
            out.push_str(&format!("ue_max_power_w = {cap:?}\n"));
        }
        for tier in &self.tiers {
            out.push_str("\n[tier]\n");
            out.push_str(&format!("name = {}\n", tier.name));
            out.push_str(&format!("bs_intensity = {:?}\n", tier.bs_intensity));
            out.push_str(&format!("bs_power_w = {:?}\n", tier.bs_tx_power));
            out.push_str(&format!("alpha = {:?}\n", tier.path_loss_exp));
            out.push_str(&format!("epsilon = {:?}\n", tier.fpc_factor));
            out.push_str(&format!("baseline_ue_power_w = {:?}\n", tier.baseline_ue_power));
            out.push_str(&format!("sinr_threshold = {:?}\n", tier.sinr_threshold));
        }
        out
    }
}

/// Per-tier entries of a [`PerformanceReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct TierReport {
    pub assoc_prob: f64,
    /// UEs per m² associated with the tier (`A_i λ_U`).
    pub ue_per_tier: f64,
    /// UEs per BS of the tier (`A_i λ_U / λ_Bi`).
    pub ue_per_bs: f64,
    /// Nats/s per UE.
    pub mean_rate: f64,
    pub se: f64,
    /// W.
    pub mean_tx_power: f64,
    /// Nats/J.
    pub ee: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TotalReport {
    /// Nats/s per m².
    pub rate: f64,
    pub se: f64,
    pub ee: f64,
    /// `load_ratio[i][j] = n_i / n_j`.
    pub load_ratio: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerformanceReport {
    pub mode: AccessMode,
    pub per_tier: Vec<TierReport>,
    pub total: TotalReport,
}
