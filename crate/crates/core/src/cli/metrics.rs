use std::f64::consts::LN_2;

use crate::analytic::UplinkModel;
use crate::mc::{run_oracle, McEstimate, McSettings};
use crate::model::{AccessMode, NetworkConfig};
use crate::special::QuadratureSpec;

use super::{CliError, ReportRow};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    AssocProb,
    UePerBs,
    MeanPower,
    Rate,
    Se,
    Ee,
    TotalRate,
    TotalSe,
    TotalEe,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::AssocProb,
        Metric::UePerBs,
        Metric::MeanPower,
        Metric::Rate,
        Metric::Se,
        Metric::Ee,
        Metric::TotalRate,
        Metric::TotalSe,
        Metric::TotalEe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::AssocProb => "assoc_prob",
            Metric::UePerBs => "ue_per_bs",
            Metric::MeanPower => "mean_power",
            Metric::Rate => "rate",
            Metric::Se => "se",
            Metric::Ee => "ee",
            Metric::TotalRate => "total_rate",
            Metric::TotalSe => "total_se",
            Metric::TotalEe => "total_ee",
        }
    }

    /// One metric name or alias, or `all`.
    pub fn parse_list(name: &str) -> Result<Vec<Metric>, CliError> {
        let name = name.trim();
        if name == "all" {
            return Ok(Metric::ALL.to_vec());
        }
        let m = match name {
            "assoc" | "assoc_prob" => Metric::AssocProb,
            "load" | "ue_per_bs" => Metric::UePerBs,
            "power" | "mean_power" => Metric::MeanPower,
            "" => return Ok(Vec::new()),
            other => Metric::ALL
                .into_iter()
                .find(|m| m.name() == other)
                .ok_or_else(|| CliError::Usage(format!("unknown metric `{other}`")))?,
        };
        Ok(vec![m])
    }

    pub fn is_per_tier(self) -> bool {
        !matches!(self, Metric::TotalRate | Metric::TotalSe | Metric::TotalEe)
    }

    fn needs_rates(self) -> bool {
        !matches!(self, Metric::AssocProb | Metric::UePerBs | Metric::MeanPower)
    }

    /// Rates, SE and EE carry nats; `--bits` rescales them.
    fn is_information(self) -> bool {
        self.needs_rates()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EvalOptions {
    pub tier: Option<usize>,
    pub include_static_power: bool,
    pub bits: bool,
    /// Run the oracle with these settings and fill the mc columns.
    pub mc: Option<McSettings>,
}

/// Rows for `metrics` in the given order; per-tier metrics expand to one row
/// per tier, labelled `name[tier_name]`.
pub fn evaluate(
    scenario: &str,
    config: &NetworkConfig,
    mode: AccessMode,
    metrics: &[Metric],
    opts: &EvalOptions,
    sweep: Option<(String, f64)>,
) -> Result<Vec<ReportRow>, CliError> {
    let k = config.num_tiers();
    if let Some(t) = opts.tier {
        if t >= k {
            return Err(CliError::Usage(format!("--tier {t} out of range for {k} tiers")));
        }
    }
    let tiers: Vec<usize> = match opts.tier {
        Some(t) => vec![t],
        None => (0..k).collect(),
    };
    let static_power = opts.include_static_power.then(|| config.ue_static_power());
    let model = UplinkModel::new(config, mode, QuadratureSpec::default())?;
    let report = if metrics.iter().any(|m| m.needs_rates()) {
        Some(model.report(static_power)?)
    } else {
        None
    };
    let counts = model.ue_counts();
    let oracle = match &opts.mc {
        Some(settings) => Some(run_oracle(config, mode, settings, &[])?),
        None => None,
    };
    let unit = if opts.bits { 1.0 / LN_2 } else { 1.0 };
    let (param, value) = match sweep {
        Some((p, v)) => (p, Some(v)),
        None => (String::new(), None),
    };

    let mut rows = Vec::new();
    for &metric in metrics {
        let scale = if metric.is_information() { unit } else { 1.0 };
        let slots: Vec<Option<usize>> = if metric.is_per_tier() {
            tiers.iter().map(|&i| Some(i)).collect()
        } else {
            vec![None]
        };
        for slot in slots {
            let analytic = match (metric, slot, &report) {
                (Metric::AssocProb, Some(i), _) => model.assoc_probs()[i],
                (Metric::UePerBs, Some(i), _) => counts.per_bs[i],
                (Metric::MeanPower, Some(i), _) => model.mean_ue_power(i),
                (Metric::Rate, Some(i), Some(r)) => r.per_tier[i].mean_rate,
                (Metric::Se, Some(i), Some(r)) => r.per_tier[i].se,
                (Metric::Ee, Some(i), Some(r)) => r.per_tier[i].ee,
                (Metric::TotalRate, None, Some(r)) => r.total.rate,
                (Metric::TotalSe, None, Some(r)) => r.total.se,
                (Metric::TotalEe, None, Some(r)) => r.total.ee,
                _ => unreachable!("report computed whenever a rate metric is requested"),
            };
            let mc = oracle.as_ref().map(|o| {
                let est = match (metric, slot) {
                    (Metric::AssocProb, Some(i)) => o.per_tier[i].assoc_prob,
                    (Metric::UePerBs, Some(i)) => {
                        let c = config.ue_intensity() / config.tier(i).bs_intensity;
                        scaled(o.per_tier[i].assoc_prob, c)
                    }
                    (Metric::MeanPower, Some(i)) => o.per_tier[i].mean_tx_power,
                    (Metric::Rate, Some(i)) => o.per_tier[i].mean_rate,
                    (Metric::Se, Some(i)) => o.per_tier[i].se,
                    (Metric::Ee, Some(i)) => o.tier_energy_efficiency(i, static_power.unwrap_or(0.0)),
                    (Metric::TotalRate, None) => o.total_rate,
                    (Metric::TotalSe, None) => o.total_se,
                    (Metric::TotalEe, None) => o.total_energy_efficiency(static_power.unwrap_or(0.0)),
                    _ => unreachable!("slot matches the metric kind"),
                };
                scaled(est, scale)
            });
            let name = match slot {
                Some(i) => format!("{}[{}]", metric.name(), config.tier(i).name),
                None => metric.name().to_string(),
            };
            rows.push(ReportRow {
                scenario: scenario.to_string(),
                mode: mode.to_string(),
                param: param.clone(),
                value,
                metric: name,
                analytic: analytic * scale,
                mc,
            });
        }
    }
    Ok(rows)
}

fn scaled(e: McEstimate, c: f64) -> McEstimate {
    McEstimate {
        mean: e.mean * c,
        std_error: e.std_error * c.abs(),
        n: e.n,
    }
}
