//! Closed-form and quadrature evaluation of association, interference and
//! rate metrics.

mod association;
mod laplace;
mod uplink;

use thiserror::Error;

use crate::special::{QuadratureError, SpecialError};

pub use association::{
    assoc_prob, assoc_prob_cuda_fading, assoc_prob_cuda_mean, assoc_prob_duda, association_probabilities,
    serving_distance_pdf, serving_intensity, ue_counts, UeCounts,
};
pub use laplace::{excluded_interference_integral, laplace_interference, LaplaceContext};
pub use uplink::{energy_efficiency, mean_rate, mean_ue_power, spectrum_efficiency, total_rate, EeScope, UplinkModel};

#[derive(Debug, Error)]
pub enum AnalyticError {
    #[error("tier index {index} out of range for {num_tiers} tiers")]
    TierOutOfRange { index: usize, num_tiers: usize },
    #[error("{context}: {source}")]
    Quadrature {
        context: &'static str,
        #[source]
        source: QuadratureError,
    },
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error("{0}")]
    InvalidArgument(String),
}

impl AnalyticError {
    pub(crate) fn quadrature(context: &'static str, source: QuadratureError) -> Self {
        Self::Quadrature { context, source }
    }

    /// Error estimate of a quadrature that failed to converge, if any.
    pub fn err_est(&self) -> Option<f64> {
        match self {
            Self::Quadrature { source, .. } => source.err_est(),
            _ => None,
        }
    }
}
