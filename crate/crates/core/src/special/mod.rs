//! Numerical substrate: gamma function, the hypergeometric family used by the
//! interference Laplace transform, and adaptive quadrature.

mod gamma;
mod hyp2f1;
mod quadrature;

use thiserror::Error;

pub use gamma::gamma_fn;
pub use hyp2f1::{hyp2f1_interference, hyp2f1_interference_quadrature, scaled_hyp2f1_interference, InterferenceKernel};
pub use quadrature::{
    integrate, integrate_rayleigh, integrate_rayleigh_log, integrate_semi_infinite, rayleigh_radius, Integral,
    QuadratureError, QuadratureSpec,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("{function}: {message}")]
    Domain { function: &'static str, message: String },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}
