use std::f64::consts::PI;

use crate::model::{AccessMode, NetworkConfig};
use crate::special::{integrate, integrate_rayleigh_log, Integral, QuadratureSpec};

use super::AnalyticError;

/// Intensity of the Rayleigh law of the serving distance of a tier-`tier` UE:
/// the superposed intensity under decoupled access, the tier's own otherwise.
pub fn serving_intensity(config: &NetworkConfig, tier: usize, mode: AccessMode) -> f64 {
    match mode {
        AccessMode::Duda => config.sum_intensity(),
        AccessMode::CudaFading | AccessMode::CudaMeanFading => config.tier(tier).bs_intensity,
    }
}

/// Density of the distance between a UE and its serving BS in `tier`.
pub fn serving_distance_pdf(config: &NetworkConfig, tier: usize, mode: AccessMode, r: f64) -> f64 {
    let lambda = serving_intensity(config, tier, mode);
    2.0 * PI * lambda * r * (-lambda * PI * r * r).exp()
}

/// Nearest-BS association: `λ_Bi / Σ λ_Bj`.
pub fn assoc_prob_duda(config: &NetworkConfig, tier: usize) -> f64 {
    config.tier(tier).bs_intensity / config.sum_intensity()
}

/// `π λ_Bj (P_Bj / P_Bi)^{2/α_j}` and the distance exponent `2 α_i / α_j`
/// for every competing tier `j ≠ i`.
fn competitors(config: &NetworkConfig, tier: usize) -> Vec<(f64, f64)> {
    let own = config.tier(tier);
    config
        .tiers()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != tier)
        .map(|(_, other)| {
            let weight =
                PI * other.bs_intensity * (other.bs_tx_power / own.bs_tx_power).powf(2.0 / other.path_loss_exp);
            (weight, 2.0 * own.path_loss_exp / other.path_loss_exp)
        })
        .collect()
}

/// Probability that `tier` offers the strongest mean received power.
///
/// `2πλ_Bi ∫₀^∞ r exp(-π Σⱼ λ_Bj (P_Bj/P_Bi)^{2/α_j} r^{2α_i/α_j}) dr`, evaluated
/// with the own-tier term as the Rayleigh weight.
pub fn assoc_prob_cuda_mean(
    config: &NetworkConfig,
    tier: usize,
    spec: &QuadratureSpec,
) -> Result<Integral, AnalyticError> {
    check_tier(config, tier)?;
    let others = competitors(config, tier);
    integrate_rayleigh_log(
        |r| {
            let exponent: f64 = others.iter().map(|(w, p)| w * r.powf(*p)).sum();
            (-exponent).exp()
        },
        config.tier(tier).bs_intensity,
        spec,
    )
    .map_err(|source| AnalyticError::quadrature("cuda mean association", source))
}

/// Probability that the nearest tier-`tier` BS beats the nearest BS of every
/// other tier in faded received power.
///
/// Each competitor contributes `E_Z[exp(-w Z^{2/α_j} r^{2α_i/α_j})]` with
/// `Z = h_j / h_i` of density `1/(1+z)²`, integrated over `ln Z`. With more
/// than one competitor the ratios are taken as independent, so the tiers'
/// probabilities need not sum to one when K > 2.
pub fn assoc_prob_cuda_fading(
    config: &NetworkConfig,
    tier: usize,
    spec: &QuadratureSpec,
) -> Result<Integral, AnalyticError> {
    check_tier(config, tier)?;
    let others = competitors(config, tier);
    let alphas: Vec<f64> = config
        .tiers()
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != tier)
        .map(|(_, t)| t.path_loss_exp)
        .collect();
    let inner_spec = spec.nested();
    let mut failure = None;
    let outer = integrate_rayleigh_log(
        |r| {
            let mut product = 1.0;
            for ((w, p), alpha_j) in others.iter().zip(&alphas) {
                match faded_competitor(w * r.powf(*p), 2.0 / alpha_j, &inner_spec) {
                    Ok(v) => product *= v,
                    Err(e) => {
                        failure.get_or_insert(e);
                        return 0.0;
                    }
                }
            }
            product
        },
        config.tier(tier).bs_intensity,
        spec,
    );
    if let Some(source) = failure {
        return Err(AnalyticError::quadrature("cuda fading association (inner)", source));
    }
    outer.map_err(|source| AnalyticError::quadrature("cuda fading association", source))
}

/// `E[exp(-c Z^p)]` for `Z` with density `1/(1+z)²`, as an integral over
/// `w = ln Z` against the logistic density. Mass below `w = -40` is taken
/// with the exponential at one; above the point where `c e^{pw}` reaches 800
/// the integrand vanishes.
fn faded_competitor(c: f64, p: f64, spec: &QuadratureSpec) -> Result<f64, crate::special::QuadratureError> {
    const W_LO: f64 = -40.0;
    let below = W_LO.exp() / (1.0 + W_LO.exp());
    if c == 0.0 {
        return Ok(1.0);
    }
    let hi = (800.0 / c).ln() / p;
    if hi <= W_LO {
        return Ok(below * (-c * (p * W_LO).exp()).exp());
    }
    let body = integrate(
        |w| {
            let e = (-w.abs()).exp();
            let density = e / ((1.0 + e) * (1.0 + e));
            density * (-c * (p * w).exp()).exp()
        },
        W_LO,
        hi,
        spec,
    )?;
    Ok(below + body.value)
}

pub fn assoc_prob(
    config: &NetworkConfig,
    tier: usize,
    mode: AccessMode,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    check_tier(config, tier)?;
    if config.num_tiers() == 1 {
        return Ok(1.0);
    }
    match mode {
        AccessMode::Duda => Ok(assoc_prob_duda(config, tier)),
        AccessMode::CudaMeanFading => assoc_prob_cuda_mean(config, tier, spec).map(|i| i.value),
        AccessMode::CudaFading => assoc_prob_cuda_fading(config, tier, spec).map(|i| i.value),
    }
}

pub fn association_probabilities(
    config: &NetworkConfig,
    mode: AccessMode,
    spec: &QuadratureSpec,
) -> Result<Vec<f64>, AnalyticError> {
    (0..config.num_tiers())
        .map(|i| assoc_prob(config, i, mode, spec))
        .collect()
}

/// UE densities per tier and per BS.
#[derive(Debug, Clone, PartialEq)]
pub struct UeCounts {
    /// `N_i = A_i λ_U`, UEs per m² served by tier `i`.
    pub per_tier: Vec<f64>,
    /// `n_i = A_i λ_U / λ_Bi`, UEs per tier-`i` BS.
    pub per_bs: Vec<f64>,
}

impl UeCounts {
    /// `n_i / n_j`.
    pub fn load_ratio(&self, i: usize, j: usize) -> f64 {
        self.per_bs[i] / self.per_bs[j]
    }

    pub fn load_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.per_bs.len())
            .map(|i| (0..self.per_bs.len()).map(|j| self.load_ratio(i, j)).collect())
            .collect()
    }
}

pub fn ue_counts(config: &NetworkConfig, assoc: &[f64]) -> UeCounts {
    let lambda_u = config.ue_intensity();
    let per_tier: Vec<f64> = assoc.iter().map(|a| a * lambda_u).collect();
    let per_bs = per_tier
        .iter()
        .zip(config.tiers())
        .map(|(n, t)| n / t.bs_intensity)
        .collect();
    UeCounts { per_tier, per_bs }
}

pub(crate) fn check_tier(config: &NetworkConfig, tier: usize) -> Result<(), AnalyticError> {
    if tier < config.num_tiers() {
        Ok(())
    } else {
        Err(AnalyticError::TierOutOfRange {
            index: tier,
            num_tiers: config.num_tiers(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_scenario;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn duda_table_one() {
        let pico = builtin_scenario("table2_pico").unwrap();
        assert!((assoc_prob_duda(&pico, 0) - 0.2).abs() < 1e-15);
        assert!((assoc_prob_duda(&pico, 1) - 0.8).abs() < 1e-15);
        let femto = builtin_scenario("table2_femto").unwrap();
        assert!((assoc_prob_duda(&femto, 0) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn cuda_mean_table_one() {
        let pico = builtin_scenario("table2_pico").unwrap();
        let a = association_probabilities(&pico, AccessMode::CudaMeanFading, &spec()).unwrap();
        assert!((a[0] - 0.69).abs() < 0.03 && (a[1] - 0.31).abs() < 0.03, "{a:?}");
        assert!((a[0] + a[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn single_tier_is_certain() {
        let pico = builtin_scenario("table2_pico").unwrap();
        let single = NetworkConfig::builder(vec![pico.tier(0).clone()]).build_with(&pico);
        for mode in AccessMode::ALL {
            assert_eq!(assoc_prob(&single, 0, mode, &spec()).unwrap(), 1.0);
        }
    }

    #[test]
    fn pdf_vanishes_at_origin() {
        let pico = builtin_scenario("table2_pico").unwrap();
        for mode in AccessMode::ALL {
            assert_eq!(serving_distance_pdf(&pico, 0, mode, 0.0), 0.0);
        }
    }

    #[test]
    fn load_ratios() {
        let pico = builtin_scenario("table2_pico").unwrap();
        let counts = ue_counts(&pico, &[0.2, 0.8]);
        assert!((counts.load_ratio(0, 1) - 1.0).abs() < 1e-12);
        for (i, t) in pico.tiers().iter().enumerate() {
            assert_eq!(counts.per_bs[i] * t.bs_intensity, counts.per_tier[i]);
        }
        let counts = ue_counts(&pico, &[0.69, 0.31]);
        assert!((counts.load_ratio(0, 1) - 8.9).abs() < 0.05);
    }

    #[test]
    fn bad_tier_index() {
        let pico = builtin_scenario("table2_pico").unwrap();
        assert!(matches!(
            assoc_prob(&pico, 7, AccessMode::Duda, &spec()),
            Err(AnalyticError::TierOutOfRange { .. })
        ));
    }

    trait BuildWith {
        fn build_with(self, like: &NetworkConfig) -> NetworkConfig;
    }

    impl BuildWith for crate::model::NetworkConfigBuilder {
        fn build_with(mut self, like: &NetworkConfig) -> NetworkConfig {
            self.ue_intensity = like.ue_intensity();
            self.bandwidth = like.bandwidth();
            self.build().unwrap()
        }
    }
}
