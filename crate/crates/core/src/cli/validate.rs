use std::f64::consts::PI;
use std::fmt::Write;

use crate::analytic::{AnalyticError, UplinkModel};
use crate::mc::{run_oracle, McEstimate, McSettings};
use crate::model::{AccessMode, NetworkConfig};
use crate::special::QuadratureSpec;

use super::{format_sig9, CliError};

/// Serving-distance quantiles and target transform values of the probes.
const PROBE_TARGETS: [(f64, f64); 5] = [(0.1, 0.8), (0.3, 0.65), (0.5, 0.5), (0.7, 0.35), (0.9, 0.2)];

/// One analytic-vs-oracle comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub mode: AccessMode,
    pub metric: String,
    pub analytic: f64,
    /// Quadrature error estimate of `analytic`.
    pub analytic_err: f64,
    pub mc: McEstimate,
}

impl Check {
    pub fn z(&self) -> f64 {
        self.mc.z_score(self.analytic, self.analytic_err)
    }

    /// `z ≤ 3`.
    pub fn passed(&self) -> bool {
        self.z() <= 3.0
    }
}

/// Five `(r, s)` points for the Laplace comparison: `r` at the 10/30/50/70/90 %
/// quantiles of the serving distance, `s` solving `L(s, r) = 0.8 … 0.2`.
pub fn laplace_probes(model: &UplinkModel) -> Result<Vec<(f64, f64)>, AnalyticError> {
    let lambda_u = model.config().ue_intensity();
    let mut probes = Vec::with_capacity(PROBE_TARGETS.len());
    for (q, target) in PROBE_TARGETS {
        let r = (-(1.0 - q).ln() / (PI * lambda_u)).sqrt();
        let (mut lo, mut hi) = (-30.0f64, 30.0f64);
        while model.laplace(r, hi.exp())? > target && hi < 700.0 {
            hi += 30.0;
        }
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if model.laplace(r, mid.exp())? > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        probes.push((r, (0.5 * (lo + hi)).exp()));
    }
    Ok(probes)
}

/// Every analytic metric of one mode against the oracle: per tier the
/// association probability, mean power, rate, SE and EE; the three totals;
/// the Laplace transform at [`laplace_probes`].
pub fn validation_checks(
    config: &NetworkConfig,
    mode: AccessMode,
    settings: &McSettings,
    static_power: Option<f64>,
) -> Result<Vec<Check>, CliError> {
    let model = UplinkModel::new(config, mode, QuadratureSpec::default())?;
    let probes = laplace_probes(&model)?;
    let oracle = run_oracle(config, mode, settings, &probes)?;
    let counts = model.ue_counts();
    let extra = static_power.unwrap_or(0.0);
    let mut checks = Vec::new();
    let mut push = |metric: String, analytic: f64, analytic_err: f64, mc: McEstimate| {
        checks.push(Check {
            mode,
            metric,
            analytic,
            analytic_err,
            mc,
        })
    };

    let (mut total_rate, mut total_rate_err) = (0.0, 0.0);
    let (mut total_se, mut total_se_err) = (0.0, 0.0);
    let mut total_power = 0.0;
    for i in 0..config.num_tiers() {
        let tier = config.tier(i);
        let est = &oracle.per_tier[i];
        let j = model.excess_rate_integral(i)?;
        let rate_scale = config.bandwidth() / counts.per_bs[i];
        let (rate, rate_err) = (rate_scale * j.value, rate_scale * j.err_est);
        let (se, se_err) = (tier.bs_intensity * j.value, tier.bs_intensity * j.err_est);
        let power = model.mean_ue_power(i);
        let label = |name: &str| format!("{name}[{}]", tier.name);
        push(label("assoc_prob"), model.assoc_probs()[i], 0.0, est.assoc_prob);
        push(label("mean_power"), power, 0.0, est.mean_tx_power);
        push(label("rate"), rate, rate_err, est.mean_rate);
        push(label("se"), se, se_err, est.se);
        push(
            label("ee"),
            rate / (power + extra),
            rate_err / (power + extra),
            oracle.tier_energy_efficiency(i, extra),
        );
        total_rate += counts.per_tier[i] * rate;
        total_rate_err += counts.per_tier[i] * rate_err;
        total_se += se;
        total_se_err += se_err;
        total_power += counts.per_tier[i] * (power + extra);
    }
    push("total_rate".into(), total_rate, total_rate_err, oracle.total_rate);
    push("total_se".into(), total_se, total_se_err, oracle.total_se);
    push(
        "total_ee".into(),
        total_rate / total_power,
        total_rate_err / total_power,
        oracle.total_energy_efficiency(extra),
    );
    for (&(r, s), est) in probes.iter().zip(&oracle.laplace) {
        let label = format!("laplace(r={},s={})", format_sig9(r), format_sig9(s));
        push(label, model.laplace(r, s)?, 0.0, *est);
    }
    Ok(checks)
}

/// Fixed-width text report; identical inputs give identical bytes.
pub fn render_report(scenario: &str, settings: &McSettings, checks: &[Check]) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "validate scenario={scenario} seed={} drops={} radius={} interferers={} power_cap={}",
        settings.seed,
        settings.num_drops,
        format_sig9(settings.region_radius),
        settings.interferer_mode,
        settings.apply_power_cap
    )
    .unwrap();
    writeln!(
        out,
        "{:<11} {:<40} {:>16} {:>16} {:>16} {:>8}  status",
        "mode", "metric", "analytic", "mc_mean", "mc_se", "z"
    )
    .unwrap();
    for c in checks {
        writeln!(
            out,
            "{:<11} {:<40} {:>16} {:>16} {:>16} {:>8.2}  {}",
            c.mode.as_str(),
            c.metric,
            format_sig9(c.analytic),
            format_sig9(c.mc.mean),
            format_sig9(c.mc.std_error),
            c.z(),
            if c.passed() { "PASS" } else { "FAIL" }
        )
        .unwrap();
    }
    let failed = checks.iter().filter(|c| !c.passed()).count();
    writeln!(out, "summary: {} checks, {failed} FAIL", checks.len()).unwrap();
    out
}
