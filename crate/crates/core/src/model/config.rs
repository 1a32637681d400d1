//! Scenario file grammar.
//!
//! Flat `key = value` lines, `#` comments, and one `[tier]` block per BS tier.
//! Global keys must come before the first `[tier]`. Power and threshold keys
//! come in a logarithmic spelling (`*_dbm`, `*_db`) and a canonical linear one
//! (`*_w`, plain `sinr_threshold`); giving both for the same field is an error,
//! as is any unknown or repeated key.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use super::units::{db_to_linear, dbm_to_watts, mhz_to_hz};
use super::{AccessMode, ConfigError, NetworkConfig, NetworkConfigBuilder, TierParams};

/// Built-in scenarios, `(name, file contents)`.
pub const BUILTIN_SCENARIOS: [(&str, &str); 2] = [
    ("table2_pico", include_str!("../../scenarios/table2_pico.cfg")),
    ("table2_femto", include_str!("../../scenarios/table2_femto.cfg")),
];

pub fn builtin_scenario(name: &str) -> Option<NetworkConfig> {
    BUILTIN_SCENARIOS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| load_config(text).expect("built-in scenario is valid"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum TierKey {
    BsIntensity,
    BsPowerDbm,
    BsPowerW,
    Alpha,
    Epsilon,
    BaselineDbm,
    BaselineW,
    ThresholdDb,
    ThresholdLinear,
}

impl TierKey {
    fn parse(key: &str) -> Option<Self> {
        Some(match key {
            "bs_intensity" => TierKey::BsIntensity,
            "bs_power_dbm" => TierKey::BsPowerDbm,
            "bs_power_w" => TierKey::BsPowerW,
            "alpha" => TierKey::Alpha,
            "epsilon" => TierKey::Epsilon,
            "baseline_ue_power_dbm" => TierKey::BaselineDbm,
            "baseline_ue_power_w" => TierKey::BaselineW,
            "sinr_threshold_db" => TierKey::ThresholdDb,
            "sinr_threshold" => TierKey::ThresholdLinear,
            _ => return None,
        })
    }

    fn as_str(self) -> &'static str {
        match self {
            TierKey::BsIntensity => "bs_intensity",
            TierKey::BsPowerDbm => "bs_power_dbm",
            TierKey::BsPowerW => "bs_power_w",
            TierKey::Alpha => "alpha",
            TierKey::Epsilon => "epsilon",
            TierKey::BaselineDbm => "baseline_ue_power_dbm",
            TierKey::BaselineW => "baseline_ue_power_w",
            TierKey::ThresholdDb => "sinr_threshold_db",
            TierKey::ThresholdLinear => "sinr_threshold",
        }
    }

    /// Field the key writes; aliases share one.
    fn field(self) -> &'static str {
        match self {
            TierKey::BsIntensity => "bs_intensity",
            TierKey::BsPowerDbm | TierKey::BsPowerW => "bs_power",
            TierKey::Alpha => "alpha",
            TierKey::Epsilon => "epsilon",
            TierKey::BaselineDbm | TierKey::BaselineW => "baseline_ue_power",
            TierKey::ThresholdDb | TierKey::ThresholdLinear => "sinr_threshold",
        }
    }

    fn apply(self, tier: &mut TierParams, value: f64) {
        match self {
            TierKey::BsIntensity => tier.bs_intensity = value,
            TierKey::BsPowerDbm => tier.bs_tx_power = dbm_to_watts(value),
            TierKey::BsPowerW => tier.bs_tx_power = value,
            TierKey::Alpha => tier.path_loss_exp = value,
            TierKey::Epsilon => tier.fpc_factor = value,
            TierKey::BaselineDbm => tier.baseline_ue_power = dbm_to_watts(value),
            TierKey::BaselineW => tier.baseline_ue_power = value,
            TierKey::ThresholdDb => tier.sinr_threshold = db_to_linear(value),
            TierKey::ThresholdLinear => tier.sinr_threshold = value,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum GlobalKey {
    UeIntensity,
    BandwidthMhz,
    BandwidthHz,
    NoiseDbm,
    NoiseW,
    UeMaxPowerDbm,
    UeMaxPowerW,
    UeStaticPowerDbm,
    UeStaticPowerW,
}

impl GlobalKey {
    fn parse(key: &str) -> Option<Self> {
        Some(match key {
            "ue_intensity" => GlobalKey::UeIntensity,
            "bandwidth_mhz" => GlobalKey::BandwidthMhz,
            "bandwidth_hz" => GlobalKey::BandwidthHz,
            "noise_dbm" => GlobalKey::NoiseDbm,
            "noise_w" => GlobalKey::NoiseW,
            "ue_max_power_dbm" => GlobalKey::UeMaxPowerDbm,
            "ue_max_power_w" => GlobalKey::UeMaxPowerW,
            "ue_static_power_dbm" => GlobalKey::UeStaticPowerDbm,
            "ue_static_power_w" => GlobalKey::UeStaticPowerW,
            _ => return None,
        })
    }

    fn as_str(self) -> &'static str {
        match self {
            GlobalKey::UeIntensity => "ue_intensity",
            GlobalKey::BandwidthMhz => "bandwidth_mhz",
            GlobalKey::BandwidthHz => "bandwidth_hz",
            GlobalKey::NoiseDbm => "noise_dbm",
            GlobalKey::NoiseW => "noise_w",
            GlobalKey::UeMaxPowerDbm => "ue_max_power_dbm",
            GlobalKey::UeMaxPowerW => "ue_max_power_w",
            GlobalKey::UeStaticPowerDbm => "ue_static_power_dbm",
            GlobalKey::UeStaticPowerW => "ue_static_power_w",
        }
    }

    fn field(self) -> &'static str {
        match self {
            GlobalKey::UeIntensity => "ue_intensity",
            GlobalKey::BandwidthMhz | GlobalKey::BandwidthHz => "bandwidth",
            GlobalKey::NoiseDbm | GlobalKey::NoiseW => "noise",
            GlobalKey::UeMaxPowerDbm | GlobalKey::UeMaxPowerW => "ue_max_power",
            GlobalKey::UeStaticPowerDbm | GlobalKey::UeStaticPowerW => "ue_static_power",
        }
    }

    fn apply(self, builder: &mut NetworkConfigBuilder, value: f64) {
        match self {
            GlobalKey::UeIntensity => builder.ue_intensity = value,
            GlobalKey::BandwidthMhz => builder.bandwidth = mhz_to_hz(value),
            GlobalKey::BandwidthHz => builder.bandwidth = value,
            GlobalKey::NoiseDbm => builder.noise_power = dbm_to_watts(value),
            GlobalKey::NoiseW => builder.noise_power = value,
            GlobalKey::UeMaxPowerDbm => builder.ue_max_tx_power = Some(dbm_to_watts(value)),
            GlobalKey::UeMaxPowerW => builder.ue_max_tx_power = Some(value),
            GlobalKey::UeStaticPowerDbm => builder.ue_static_power = dbm_to_watts(value),
            GlobalKey::UeStaticPowerW => builder.ue_static_power = value,
        }
    }
}

fn parse_number(value: &str, key: &str, line: usize) -> Result<f64, ConfigError> {
    value.parse::<f64>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("`{key}` expects a number, got `{value}`"),
    })
}

struct TierDraft {
    params: TierParams,
    seen: HashSet<&'static str>,
    header_line: usize,
}

impl TierDraft {
    fn new(index: usize, header_line: usize) -> Self {
        Self {
            params: TierParams {
                name: format!("tier{index}"),
                bs_intensity: f64::NAN,
                bs_tx_power: f64::NAN,
                path_loss_exp: f64::NAN,
                fpc_factor: f64::NAN,
                baseline_ue_power: f64::NAN,
                sinr_threshold: f64::NAN,
            },
            seen: HashSet::new(),
            header_line,
        }
    }

    fn finish(self, index: usize) -> Result<TierParams, ConfigError> {
        for field in [
            "bs_intensity",
            "bs_power",
            "alpha",
            "epsilon",
            "baseline_ue_power",
            "sinr_threshold",
        ] {
            if !self.seen.contains(field) {
                return Err(ConfigError::invalid(
                    format!("tier[{index}].{field}"),
                    format!("missing in [tier] block starting at line {}", self.header_line),
                ));
            }
        }
        Ok(self.params)
    }
}

/// Parses and validates a scenario file.
pub fn load_config(text: &str) -> Result<NetworkConfig, ConfigError> {
    let mut builder = NetworkConfig::builder(Vec::new());
    let mut global_seen: HashSet<&'static str> = HashSet::new();
    let mut interference_limited: Option<bool> = None;
    let mut tiers: Vec<TierDraft> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if content.starts_with('[') {
            if content == "[tier]" {
                tiers.push(TierDraft::new(tiers.len(), line));
                continue;
            }
            return Err(ConfigError::Parse {
                line,
                message: format!("unknown section `{content}`"),
            });
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse {
                line,
                message: format!("expected `key = value`, got `{content}`"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        if value.is_empty() {
            return Err(ConfigError::Parse {
                line,
                message: format!("`{key}` has no value"),
            });
        }
        let duplicate = |field: &str| ConfigError::Parse {
            line,
            message: format!("`{key}` sets `{field}` a second time"),
        };

        if let Some(draft) = tiers.last_mut() {
            if key == "name" {
                if !draft.seen.insert("name") {
                    return Err(duplicate("name"));
                }
                draft.params.name = value.to_string();
                continue;
            }
            let Some(tier_key) = TierKey::parse(key) else {
                return Err(ConfigError::Parse {
                    line,
                    message: format!("unknown key `{key}` in [tier] block"),
                });
            };
            if !draft.seen.insert(tier_key.field()) {
                return Err(duplicate(tier_key.field()));
            }
            tier_key.apply(&mut draft.params, parse_number(value, tier_key.as_str(), line)?);
            continue;
        }

        match key {
            "access_mode" => {
                if !global_seen.insert("access_mode") {
                    return Err(duplicate("access_mode"));
                }
                builder.access_mode = AccessMode::from_str(value).map_err(|e| ConfigError::Parse {
                    line,
                    message: e.to_string(),
                })?;
            }
            "interference_limited" => {
                if interference_limited.is_some() {
                    return Err(duplicate("interference_limited"));
                }
                interference_limited = Some(match value {
                    "true" => true,
                    "false" => false,
                    other => {
                        return Err(ConfigError::Parse {
                            line,
                            message: format!("`interference_limited` expects true or false, got `{other}`"),
                        })
                    }
                });
            }
            _ => {
                let Some(global) = GlobalKey::parse(key) else {
                    return Err(ConfigError::Parse {
                        line,
                        message: format!("unknown key `{key}`"),
                    });
                };
                if !global_seen.insert(global.field()) {
                    return Err(duplicate(global.field()));
                }
                global.apply(&mut builder, parse_number(value, global.as_str(), line)?);
            }
        }
    }

    for field in ["ue_intensity", "bandwidth"] {
        if !global_seen.contains(field) {
            return Err(ConfigError::invalid(field, "missing"));
        }
    }
    let has_noise = global_seen.contains("noise");
    match (interference_limited, has_noise) {
        (Some(true), true) => {
            return Err(ConfigError::invalid(
                "noise",
                "noise power given together with interference_limited = true",
            ))
        }
        (Some(true), false) => builder.noise_power = 0.0,
        (_, true) => {}
        (_, false) => {
            return Err(ConfigError::invalid(
                "noise",
                "give noise_dbm / noise_w or set interference_limited = true",
            ))
        }
    }

    builder.tiers = tiers
        .into_iter()
        .enumerate()
        .map(|(i, draft)| draft.finish(i))
        .collect::<Result<_, _>>()?;
    builder.build()
}

/// Which tiers a [`ParamPath`] addresses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamTarget {
    Tier(usize),
    AllTiers,
    Global,
}

/// A sweepable scenario parameter such as `tier[0].epsilon`, `tier[*].epsilon`
/// or `ue_intensity`. Values are in the unit of the scenario key.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParamPath {
    text: String,
    target: ParamTarget,
    key: ParamKey,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ParamKey {
    Tier(TierKey),
    Global(GlobalKey),
}

impl ParamPath {
    pub fn target(&self) -> ParamTarget {
        self.target
    }

    pub fn apply(&self, config: &NetworkConfig, value: f64) -> Result<NetworkConfig, ConfigError> {
        match (self.target, self.key) {
            (ParamTarget::Tier(i), ParamKey::Tier(key)) => config.with_tier(i, |t| key.apply(t, value)),
            (ParamTarget::AllTiers, ParamKey::Tier(key)) => {
                let mut next = config.clone();
                for i in 0..config.num_tiers() {
                    next = next.with_tier(i, |t| key.apply(t, value))?;
                }
                Ok(next)
            }
            (_, ParamKey::Global(key)) => config.with_globals(|b| key.apply(b, value)),
            (ParamTarget::Global, ParamKey::Tier(_)) => unreachable!("tier keys always carry a tier target"),
        }
    }
}

impl fmt::Display for ParamPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl FromStr for ParamPath {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim().to_string();
        let bad = |msg: &str| ConfigError::invalid("param", format!("`{text}`: {msg}"));
        if let Some(rest) = text.strip_prefix("tier[") {
            let (index, key) = rest.split_once("].").ok_or_else(|| bad("expected tier[N].key"))?;
            let target = if index == "*" {
                ParamTarget::AllTiers
            } else {
                ParamTarget::Tier(index.parse().map_err(|_| bad("tier index must be an integer or *"))?)
            };
            let key = TierKey::parse(key).ok_or_else(|| bad("unknown tier key"))?;
            return Ok(ParamPath {
                text,
                target,
                key: ParamKey::Tier(key),
            });
        }
        let key = GlobalKey::parse(&text).ok_or_else(|| bad("unknown parameter"))?;
        Ok(ParamPath {
            text,
            target: ParamTarget::Global,
            key: ParamKey::Global(key),
        })
    }
}
