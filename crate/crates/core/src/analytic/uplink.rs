use std::cell::{Cell, RefCell};

use crate::model::{AccessMode, NetworkConfig, PerformanceReport, TierReport, TotalReport};
use crate::special::{gamma_fn, integrate, integrate_rayleigh_log, Integral, QuadratureSpec};

use super::association::{association_probabilities, check_tier, serving_intensity, ue_counts, UeCounts};
use super::laplace::{laplace_argument, InterferenceField};
use super::AnalyticError;

// Below s = k e^{-40} the t-integrand is s/k, so the discarded mass is under 1e-17.
const LN_T_MIN: f64 = -40.0;
const TAIL_CUTOFF: f64 = 1e-18;
const TAIL_WIDTH: f64 = 10.0;

/// Analytic uplink model of one scenario under one access mode.
///
/// Association probabilities are computed once on construction; everything
/// else is evaluated on demand.
#[derive(Debug, Clone)]
pub struct UplinkModel<'a> {
    config: &'a NetworkConfig,
    mode: AccessMode,
    spec: QuadratureSpec,
    assoc: Vec<f64>,
    field: InterferenceField,
}

impl<'a> UplinkModel<'a> {
    pub fn new(config: &'a NetworkConfig, mode: AccessMode, spec: QuadratureSpec) -> Result<Self, AnalyticError> {
        spec.validate()
            .map_err(|source| AnalyticError::quadrature("quadrature spec", source))?;
        let assoc = association_probabilities(config, mode, &spec)?;
        let field = InterferenceField::new(config, mode, &assoc);
        Ok(Self {
            config,
            mode,
            spec,
            assoc,
            field,
        })
    }

    pub fn config(&self) -> &NetworkConfig {
        self.config
    }

    pub fn mode(&self) -> AccessMode {
        self.mode
    }

    pub fn spec(&self) -> &QuadratureSpec {
        &self.spec
    }

    pub fn assoc_probs(&self) -> &[f64] {
        &self.assoc
    }

    pub fn ue_counts(&self) -> UeCounts {
        ue_counts(self.config, &self.assoc)
    }

    /// `E[exp(-s I)]` with the exclusion radius `r`.
    pub fn laplace(&self, r: f64, s: f64) -> Result<f64, AnalyticError> {
        if !(r > 0.0) || !(s >= 0.0) {
            return Err(AnalyticError::InvalidArgument(format!(
                "Laplace transform needs r > 0 and s >= 0, got r = {r}, s = {s}"
            )));
        }
        self.field.laplace(r, s, &self.spec)
    }

    /// `∫₀^∞ f_D(r) ∫_{ln(1+T_i)}^∞ L_i(s) e^{-sσ²} dt dr` with
    /// `f_D(r) = 2πλ_U r e^{-λ_U π r²}`: the mean excess of `ln(1 + SINR)` over
    /// the outage threshold on a typical tier-`tier` link, in nats.
    ///
    /// The inner integral runs over `ln s`, truncated where the integrand
    /// falls below `TAIL_CUTOFF`; the outer one over `ln(λ_U π r²)`.
    pub fn excess_rate_integral(&self, tier: usize) -> Result<Integral, AnalyticError> {
        check_tier(self.config, tier)?;
        let threshold = self.config.tier(tier).sinr_threshold;
        let middle_spec = self.spec.nested();
        let inner_spec = middle_spec.nested();
        let failure: RefCell<Option<AnalyticError>> = RefCell::new(None);
        let tail_err = Cell::new(0.0_f64);

        let conditional = |r: f64| -> f64 {
            if failure.borrow().is_some() {
                return 0.0;
            }
            // s = k (e^t - 1)
            let k = laplace_argument(self.config, tier, r, std::f64::consts::LN_2);
            match self.conditional_excess(r, k, threshold, &inner_spec, &middle_spec) {
                Ok((value, tail)) => {
                    tail_err.set(tail_err.get().max(tail));
                    value
                }
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };

        let outer = integrate_rayleigh_log(conditional, self.config.ue_intensity(), &self.spec);
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        let mut outer = outer.map_err(|source| AnalyticError::quadrature("rate integral over r", source))?;
        outer.err_est += tail_err.get();
        Ok(outer)
    }

    /// `∫_{kT}^∞ L(s) e^{-sσ²} ds / (k + s)` at serving distance `r`, with the
    /// bound on the discarded tail.
    fn conditional_excess(
        &self,
        r: f64,
        k: f64,
        threshold: f64,
        inner_spec: &QuadratureSpec,
        spec: &QuadratureSpec,
    ) -> Result<(f64, f64), AnalyticError> {
        let noise = self.config.noise_power();
        let failure: RefCell<Option<AnalyticError>> = RefCell::new(None);
        let integrand = |v: f64| -> f64 {
            let s = v.exp();
            let noise_term = if noise == 0.0 { 1.0 } else { (-s * noise).exp() };
            if noise_term == 0.0 || failure.borrow().is_some() {
                return 0.0;
            }
            match self.field.laplace(r, s, inner_spec) {
                Ok(l) => l * noise_term / (1.0 + k / s),
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            }
        };

        let lo = k.ln()
            + if threshold > 0.0 {
                threshold.ln().max(LN_T_MIN)
            } else {
                LN_T_MIN
            };
        let mut hi = lo.max(0.0) + 1.0;
        let mut step = 1.0;
        let mut edge = integrand(hi);
        while edge > TAIL_CUTOFF {
            hi += step;
            step *= 2.0;
            edge = integrand(hi);
        }
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let result = integrate(integrand, lo, hi, spec);
        if let Some(e) = failure.take() {
            return Err(e);
        }
        let integral = result.map_err(|source| AnalyticError::quadrature("rate integral over t", source))?;
        // The integrand decays at least like exp(-c e^{2v/α}) past `hi`.
        Ok((integral.value, edge * TAIL_WIDTH))
    }

    /// Spatial average rate of a tier-`tier` UE, nats/s.
    pub fn mean_rate(&self, tier: usize) -> Result<f64, AnalyticError> {
        let j = self.excess_rate_integral(tier)?;
        Ok(self.rate_from_integral(tier, j.value))
    }

    fn rate_from_integral(&self, tier: usize, integral: f64) -> f64 {
        let lambda_b = self.config.tier(tier).bs_intensity;
        self.config.bandwidth() * lambda_b / (self.assoc[tier] * self.config.ue_intensity()) * integral
    }

    fn se_from_integral(&self, tier: usize, integral: f64) -> f64 {
        self.config.tier(tier).bs_intensity * integral
    }

    /// Uplink spectrum efficiency of tier `tier`.
    pub fn spectrum_efficiency(&self, tier: usize) -> Result<f64, AnalyticError> {
        let j = self.excess_rate_integral(tier)?;
        Ok(self.se_from_integral(tier, j.value))
    }

    pub fn total_rate(&self) -> Result<f64, AnalyticError> {
        let counts = self.ue_counts();
        (0..self.config.num_tiers())
            .map(|i| Ok(counts.per_tier[i] * self.mean_rate(i)?))
            .sum()
    }

    pub fn total_spectrum_efficiency(&self) -> Result<f64, AnalyticError> {
        (0..self.config.num_tiers()).map(|i| self.spectrum_efficiency(i)).sum()
    }

    /// Mean FPC transmit power of a tier-`tier` UE.
    pub fn mean_ue_power(&self, tier: usize) -> f64 {
        mean_ue_power(self.config, tier, self.mode)
    }

    /// Per-tier energy efficiency `R_i / E[P_i]`, nats/J. `static_power` is
    /// added to the denominator when given.
    pub fn energy_efficiency(&self, tier: usize, static_power: Option<f64>) -> Result<f64, AnalyticError> {
        Ok(self.mean_rate(tier)? / (self.mean_ue_power(tier) + static_power.unwrap_or(0.0)))
    }

    pub fn total_energy_efficiency(&self, static_power: Option<f64>) -> Result<f64, AnalyticError> {
        let rates = (0..self.config.num_tiers())
            .map(|i| self.mean_rate(i))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.total_ee_from_rates(&rates, static_power))
    }

    fn total_ee_from_rates(&self, rates: &[f64], static_power: Option<f64>) -> f64 {
        let counts = self.ue_counts();
        let extra = static_power.unwrap_or(0.0);
        let num: f64 = rates.iter().zip(&counts.per_tier).map(|(r, n)| r * n).sum();
        let den: f64 = (0..rates.len())
            .map(|j| (self.mean_ue_power(j) + extra) * counts.per_tier[j])
            .sum();
        num / den
    }

    /// Every per-tier and aggregate metric. One rate integral per tier.
    pub fn report(&self, static_power: Option<f64>) -> Result<PerformanceReport, AnalyticError> {
        let counts = self.ue_counts();
        let k = self.config.num_tiers();
        let mut per_tier = Vec::with_capacity(k);
        let mut rates = Vec::with_capacity(k);
        for i in 0..k {
            let j = self.excess_rate_integral(i)?.value;
            let rate = self.rate_from_integral(i, j);
            let power = self.mean_ue_power(i);
            rates.push(rate);
            per_tier.push(TierReport {
                assoc_prob: self.assoc[i],
                ue_per_tier: counts.per_tier[i],
                ue_per_bs: counts.per_bs[i],
                mean_rate: rate,
                se: self.se_from_integral(i, j),
                mean_tx_power: power,
                ee: rate / (power + static_power.unwrap_or(0.0)),
            });
        }
        let total = TotalReport {
            rate: rates.iter().zip(&counts.per_tier).map(|(r, n)| r * n).sum(),
            se: per_tier.iter().map(|t| t.se).sum(),
            ee: self.total_ee_from_rates(&rates, static_power),
            load_ratio: counts.load_matrix(),
        };
        Ok(PerformanceReport {
            mode: self.mode,
            per_tier,
            total,
        })
    }
}

/// `P_{U,ε} (λπ)^{-αε/2} Γ(αε/2 + 1)`: the FPC power `P_{U,ε} R^{αε}` averaged
/// over the Rayleigh serving distance of the mode.
pub fn mean_ue_power(config: &NetworkConfig, tier: usize, mode: AccessMode) -> f64 {
    let p = config.tier(tier);
    let half = 0.5 * p.compensation_exponent();
    let lambda = serving_intensity(config, tier, mode);
    let gamma = gamma_fn(half + 1.0).expect("argument is at least 1");
    p.baseline_ue_power * (lambda * std::f64::consts::PI).powf(-half) * gamma
}

pub fn mean_rate(
    config: &NetworkConfig,
    tier: usize,
    mode: AccessMode,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    UplinkModel::new(config, mode, *spec)?.mean_rate(tier)
}

pub fn total_rate(config: &NetworkConfig, mode: AccessMode, spec: &QuadratureSpec) -> Result<f64, AnalyticError> {
    UplinkModel::new(config, mode, *spec)?.total_rate()
}

pub fn spectrum_efficiency(
    config: &NetworkConfig,
    tier: usize,
    mode: AccessMode,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    UplinkModel::new(config, mode, *spec)?.spectrum_efficiency(tier)
}

/// Which energy efficiency to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EeScope {
    Tier(usize),
    Total,
}

pub fn energy_efficiency(
    config: &NetworkConfig,
    scope: EeScope,
    mode: AccessMode,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    let model = UplinkModel::new(config, mode, *spec)?;
    match scope {
        EeScope::Tier(i) => model.energy_efficiency(i, None),
        EeScope::Total => model.total_energy_efficiency(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_scenario;

    #[test]
    fn power_without_compensation_is_baseline() {
        let c = builtin_scenario("table2_pico")
            .unwrap()
            .with_tier(0, |t| t.fpc_factor = 0.0)
            .unwrap();
        for mode in AccessMode::ALL {
            let p = mean_ue_power(&c, 0, mode);
            assert!((p - c.tier(0).baseline_ue_power).abs() < 1e-18);
        }
    }

    #[test]
    fn power_at_unit_gamma() {
        // αε = 2 gives P / (λπ).
        let c = builtin_scenario("table2_pico")
            .unwrap()
            .with_tier(1, |t| {
                t.path_loss_exp = 4.0;
                t.fpc_factor = 0.5;
            })
            .unwrap();
        let p = mean_ue_power(&c, 1, AccessMode::CudaMeanFading);
        let expected = c.tier(1).baseline_ue_power / (0.04 * std::f64::consts::PI);
        assert!(((p - expected) / expected).abs() < 1e-14);
    }

    #[test]
    fn rate_falls_with_threshold() {
        let spec = QuadratureSpec::default();
        let base = builtin_scenario("table2_pico").unwrap();
        let mut last = f64::INFINITY;
        for t in [0.0, 0.1, 1.0, 10.0] {
            let c = base.with_tier(0, |p| p.sinr_threshold = t).unwrap();
            let rate = UplinkModel::new(&c, AccessMode::Duda, spec)
                .unwrap()
                .mean_rate(0)
                .unwrap();
            assert!(rate < last && rate > 0.0, "T = {t}: {rate} vs {last}");
            last = rate;
        }
    }

    #[test]
    fn noise_lowers_rate() {
        let spec = QuadratureSpec::default();
        let quiet = builtin_scenario("table2_pico").unwrap();
        let noisy = quiet.with_globals(|g| g.noise_power = 1e-13).unwrap();
        let a = UplinkModel::new(&quiet, AccessMode::CudaMeanFading, spec)
            .unwrap()
            .mean_rate(1)
            .unwrap();
        let b = UplinkModel::new(&noisy, AccessMode::CudaMeanFading, spec)
            .unwrap()
            .mean_rate(1)
            .unwrap();
        assert!(b < a, "{b} vs {a}");
    }
}
