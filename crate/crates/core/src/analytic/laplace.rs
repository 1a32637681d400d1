use std::f64::consts::PI;

use crate::model::{AccessMode, NetworkConfig};
use crate::special::{integrate, scaled_hyp2f1_interference, InterferenceKernel, QuadratureSpec};

// Bounds of ln ρ; the mass of ρ² ~ Exp(1) outside is below 1e-18.
const LN_RHO_MIN: f64 = -20.8;
const LN_RHO_MAX: f64 = 1.872;

use super::association::{association_probabilities, check_tier, serving_intensity};
use super::AnalyticError;

/// `∫_r^∞ (1 - 1/(1 + Q x^{-α})) x dx`, the mean-field term of one interfering
/// tier with the exclusion disc of radius `r`.
///
/// Closed form `Q r^{2-α}/(α-2) · ₂F₁(1, 1-2/α; 2-2/α; -Q/r^α)`, computed from the
/// scaled hypergeometric so it stays finite for very large `Q`.
pub fn excluded_interference_integral(q: f64, r: f64, alpha: f64) -> f64 {
    if q == 0.0 {
        return 0.0;
    }
    let y = (q.ln() - alpha * r.ln()).exp();
    r * r / (alpha - 2.0) * scaled_hyp2f1_interference(alpha, y)
}

/// Evaluation point of the interference Laplace transform seen by a tier-`tier`
/// BS whose desired UE is at distance `serving_distance`.
#[derive(Debug, Clone, Copy)]
pub struct LaplaceContext<'a> {
    pub config: &'a NetworkConfig,
    pub tier: usize,
    pub serving_distance: f64,
    pub s: f64,
}

impl<'a> LaplaceContext<'a> {
    pub fn new(config: &'a NetworkConfig, tier: usize, serving_distance: f64, s: f64) -> Result<Self, AnalyticError> {
        check_tier(config, tier)?;
        if !(serving_distance > 0.0) {
            return Err(AnalyticError::InvalidArgument(format!(
                "serving distance must be > 0, got {serving_distance}"
            )));
        }
        if !(s >= 0.0) {
            return Err(AnalyticError::InvalidArgument(format!("s must be >= 0, got {s}")));
        }
        Ok(Self {
            config,
            tier,
            serving_distance,
            s,
        })
    }

    /// Context for the SINR event `ln(1 + SINR) > t`:
    /// `s = (e^t - 1) / (P_{U,ε_i} r^{α_i(ε_i - 1)})`.
    pub fn from_threshold(
        config: &'a NetworkConfig,
        tier: usize,
        serving_distance: f64,
        t: f64,
    ) -> Result<Self, AnalyticError> {
        check_tier(config, tier)?;
        let s = laplace_argument(config, tier, serving_distance, t);
        Self::new(config, tier, serving_distance, s)
    }
}

pub(crate) fn laplace_argument(config: &NetworkConfig, tier: usize, r: f64, t: f64) -> f64 {
    let p = config.tier(tier);
    t.exp_m1() * r.powf(p.path_loss_exp * (1.0 - p.fpc_factor)) / p.baseline_ue_power
}

/// Interference field seen by the typical BS: per interfering tier, the
/// thinned UE intensity and the Rayleigh law of the interferers' own serving
/// distances.
#[derive(Debug, Clone)]
pub(crate) struct InterferenceField {
    /// `2π A_j λ_U`.
    weights: Vec<f64>,
    /// Serving-distance intensity of tier-j UEs.
    serving: Vec<f64>,
    baseline: Vec<f64>,
    compensation: Vec<f64>,
    kernels: Vec<InterferenceKernel>,
}

impl InterferenceField {
    pub(crate) fn new(config: &NetworkConfig, mode: AccessMode, assoc: &[f64]) -> Self {
        let tiers = config.tiers();
        Self {
            weights: assoc.iter().map(|a| 2.0 * PI * a * config.ue_intensity()).collect(),
            serving: (0..tiers.len()).map(|j| serving_intensity(config, j, mode)).collect(),
            baseline: tiers.iter().map(|t| t.baseline_ue_power).collect(),
            compensation: tiers.iter().map(|t| t.compensation_exponent()).collect(),
            kernels: tiers
                .iter()
                .map(|t| InterferenceKernel::new(t.path_loss_exp).expect("validated path-loss exponent"))
                .collect(),
        }
    }

    /// `L(s) = Πⱼ E_{R_v}[exp(-2π A_j λ_U ∫_r^∞ (1 - 1/(1 + s P_{U,ε_j} R_v^{α_j ε_j} x^{-α_j})) x dx)]`.
    pub(crate) fn laplace(&self, r: f64, s: f64, spec: &QuadratureSpec) -> Result<f64, AnalyticError> {
        if s == 0.0 {
            return Ok(1.0);
        }
        if s.is_infinite() {
            return Ok(0.0);
        }
        let ln_r = r.ln();
        let mut product = 1.0;
        for j in 0..self.weights.len() {
            let weight = self.weights[j];
            if weight == 0.0 {
                continue;
            }
            let kernel = &self.kernels[j];
            let alpha = kernel.alpha();
            let comp = self.compensation[j];
            // G = r²/(α-2) · y ₂F₁(1, b; b+1; -y) with y = s P R_v^{αε} / r^α.
            let scale = weight * r * r / (alpha - 2.0);
            let ln_y0 = (s * self.baseline[j]).ln() - alpha * ln_r;
            let factor = if comp == 0.0 {
                (-scale * kernel.scaled_ln(ln_y0)).exp()
            } else {
                // R_v = ρ / sqrt(πλ) with ρ² ~ Exp(1), integrated over ln ρ.
                let ln_y1 = ln_y0 - 0.5 * comp * (PI * self.serving[j]).ln();
                integrate(
                    |v| {
                        let rho2 = (2.0 * v).exp();
                        2.0 * rho2 * (-rho2 - scale * kernel.scaled_ln(ln_y1 + comp * v)).exp()
                    },
                    LN_RHO_MIN,
                    LN_RHO_MAX,
                    spec,
                )
                .map_err(|source| AnalyticError::quadrature("interference Laplace transform", source))?
                .value
            };
            product *= factor;
            if product == 0.0 {
                break;
            }
        }
        Ok(product)
    }
}

/// Laplace transform of the uplink interference at the typical BS, `E[exp(-s I)]`.
pub fn laplace_interference(
    ctx: &LaplaceContext<'_>,
    mode: AccessMode,
    spec: &QuadratureSpec,
) -> Result<f64, AnalyticError> {
    let assoc = association_probabilities(ctx.config, mode, spec)?;
    InterferenceField::new(ctx.config, mode, &assoc).laplace(ctx.serving_distance, ctx.s, spec)
}
