//! Monte Carlo oracle: direct simulation of the point processes behind every
//! analytic metric.

mod moments;
mod oracle;
mod sampling;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::analytic::{association_probabilities, serving_intensity, AnalyticError};
use crate::model::{AccessMode, NetworkConfig};
use crate::special::QuadratureSpec;

pub use moments::Moments;
pub use oracle::{run_oracle, OracleReport, TierEstimates};
pub use sampling::{associate, fpc_power, sample_ppp, Association, Point};

#[derive(Debug, Error)]
pub enum McError {
    #[error("invalid Monte Carlo settings: {0}")]
    InvalidSettings(String),
    #[error("no base station inside the simulation region")]
    EmptyNetwork,
    #[error("tier index {index} out of range for {num_tiers} tiers")]
    TierOutOfRange { index: usize, num_tiers: usize },
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
}

/// How the interfering UEs are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InterfererMode {
    /// Per tier an independent PPP of intensity `A_j λ_U`, each point with its
    /// own fading and an independent serving distance.
    IndependentThinned,
    /// Full network: every UE is associated, each BS serves one of its UEs.
    OnePerBs,
    /// As `IndependentThinned`, but all interferers of a tier share one
    /// serving distance per drop. The analytic Laplace transform averages its
    /// exponent over a single `R_v` per tier, which is exact for this process.
    SharedServingDistance,
}

impl InterfererMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InterfererMode::IndependentThinned => "independent_thinned",
            InterfererMode::OnePerBs => "one_per_bs",
            InterfererMode::SharedServingDistance => "shared_serving_distance",
        }
    }
}

impl fmt::Display for InterfererMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InterfererMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "independent_thinned" | "thinned" => Ok(InterfererMode::IndependentThinned),
            "one_per_bs" => Ok(InterfererMode::OnePerBs),
            "shared_serving_distance" | "shared" => Ok(InterfererMode::SharedServingDistance),
            other => Err(format!(
                "unknown interferer mode `{other}` (expected independent_thinned, one_per_bs or shared_serving_distance)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McSettings {
    /// Radius of the simulated disc, metres.
    pub region_radius: f64,
    pub num_drops: u64,
    pub seed: u64,
    pub interferer_mode: InterfererMode,
    /// Clip UE transmit powers at the configured maximum.
    pub apply_power_cap: bool,
}

impl McSettings {
    /// `10 / sqrt(min λ_B)` radius, 10⁵ drops, thinned interferers, no cap.
    pub fn for_config(config: &NetworkConfig, seed: u64) -> Self {
        let min_intensity = config
            .tiers()
            .iter()
            .map(|t| t.bs_intensity)
            .fold(f64::INFINITY, f64::min);
        Self {
            region_radius: 10.0 / min_intensity.sqrt(),
            num_drops: 100_000,
            seed,
            interferer_mode: InterfererMode::IndependentThinned,
            apply_power_cap: false,
        }
    }

    pub fn validate(&self) -> Result<(), McError> {
        if !(self.region_radius > 0.0 && self.region_radius.is_finite()) {
            return Err(McError::InvalidSettings(format!(
                "region_radius must be positive and finite, got {}",
                self.region_radius
            )));
        }
        if self.num_drops < 1 {
            return Err(McError::InvalidSettings("num_drops must be >= 1".into()));
        }
        Ok(())
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n: u64,
}

impl McEstimate {
    /// `|analytic - mean| / sqrt(se² + err²)`; zero when both spreads vanish
    /// and the values coincide.
    pub fn z_score(&self, analytic: f64, analytic_err: f64) -> f64 {
        let diff = (analytic - self.mean).abs();
        let spread = self.std_error.hypot(analytic_err);
        if diff == 0.0 {
            0.0
        } else {
            diff / spread
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum McMetric {
    AssocProb,
    MeanPower,
    Rate,
    Se,
    Ee,
}

/// Monte Carlo estimate of one per-tier metric.
pub fn estimate_metric(
    config: &NetworkConfig,
    metric: McMetric,
    tier: usize,
    mode: AccessMode,
    settings: &McSettings,
) -> Result<McEstimate, McError> {
    if tier >= config.num_tiers() {
        return Err(McError::TierOutOfRange {
            index: tier,
            num_tiers: config.num_tiers(),
        });
    }
    let report = run_oracle(config, mode, settings, &[])?;
    let t = &report.per_tier[tier];
    Ok(match metric {
        McMetric::AssocProb => t.assoc_prob,
        McMetric::MeanPower => t.mean_tx_power,
        McMetric::Rate => t.mean_rate,
        McMetric::Se => t.se,
        McMetric::Ee => t.ee,
    })
}

/// One draw of the interference power at a receiver at the origin from UEs
/// farther than `r`.
///
/// With [`InterfererMode::OnePerBs`] the receiver is a typical location
/// rather than a BS of the network.
pub fn sample_interference<R: Rng + ?Sized>(
    config: &NetworkConfig,
    mode: AccessMode,
    r: f64,
    settings: &McSettings,
    rng: &mut R,
) -> Result<f64, McError> {
    settings.validate()?;
    let radius = settings.region_radius;
    let cap = if settings.apply_power_cap {
        config.ue_max_tx_power()
    } else {
        None
    };
    let mut total = 0.0;
    match settings.interferer_mode {
        InterfererMode::IndependentThinned | InterfererMode::SharedServingDistance => {
            let shared = settings.interferer_mode == InterfererMode::SharedServingDistance;
            let assoc = association_probabilities(config, mode, &QuadratureSpec::default())?;
            for (j, tier) in config.tiers().iter().enumerate() {
                let lambda_serving = serving_intensity(config, j, mode);
                let common = sampling::exp1(rng);
                for p in sample_ppp(assoc[j] * config.ue_intensity(), radius, rng) {
                    let x = p[0].hypot(p[1]);
                    if x <= r {
                        continue;
                    }
                    let own = sampling::exp1(rng);
                    let draw = if shared { common } else { own };
                    let rv = (draw / (std::f64::consts::PI * lambda_serving)).sqrt();
                    let power = fpc_power(tier.baseline_ue_power, tier.path_loss_exp, tier.fpc_factor, rv, cap);
                    total += power * sampling::exp1(rng) * x.powf(-tier.path_loss_exp);
                }
            }
        }
        InterfererMode::OnePerBs => {
            let bs: Vec<Vec<Point>> = config
                .tiers()
                .iter()
                .map(|t| sample_ppp(t.bs_intensity, radius, rng))
                .collect();
            let ues = sample_ppp(config.ue_intensity(), radius, rng);
            let mut served: Vec<Vec<Vec<(Point, f64)>>> = bs.iter().map(|t| vec![Vec::new(); t.len()]).collect();
            for ue in ues {
                let a = associate(ue, &bs, config, mode, rng)?;
                served[a.tier][a.index].push((ue, a.serving_distance));
            }
            for (j, cells) in served.iter().enumerate() {
                let tier = config.tier(j);
                for cell in cells.iter().filter(|c| !c.is_empty()) {
                    let (ue, d) = cell[rng.random_range(0..cell.len())];
                    let x = ue[0].hypot(ue[1]);
                    if x <= r {
                        continue;
                    }
                    let power = fpc_power(tier.baseline_ue_power, tier.path_loss_exp, tier.fpc_factor, d, cap);
                    total += power * sampling::exp1(rng) * x.powf(-tier.path_loss_exp);
                }
            }
        }
    }
    Ok(total)
}
