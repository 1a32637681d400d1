//! The Gauss hypergeometric family `₂F₁(1, b; b + 1; z)` with `b = 1 - 2/α`,
//! restricted to real `z ≤ 0`.
//!
//! Every evaluation is reduced to the series
//! `₂F₁(1, β; β + 1; x) = (1 - x)⁻¹ Σₙ n! / (β + 1)ₙ · wⁿ`, `w = x / (x - 1)`,
//! which is only used for `x ∈ [-1, 0]`, i.e. `w ∈ [0, ½]`. Arguments below -1
//! go through the `z → 1/z` connection formula first.

use std::f64::consts::PI;

use super::quadrature::{integrate, QuadratureSpec};
use super::SpecialError;

fn check_alpha(alpha: f64) -> Result<(), SpecialError> {
    if alpha > 2.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(SpecialError::Domain {
            function: "hyp2f1_interference",
            message: format!("path-loss exponent must be > 2, got {alpha}"),
        })
    }
}

fn check_z(z: f64) -> Result<(), SpecialError> {
    if z <= 0.0 {
        Ok(())
    } else {
        Err(SpecialError::Domain {
            function: "hyp2f1_interference",
            message: format!("argument must be <= 0, got {z}"),
        })
    }
}

/// `₂F₁(1, β; β + 1; x)` for `x ∈ [-1, 0]` after the Pfaff transformation.
fn pfaff_series(beta: f64, x: f64) -> f64 {
    debug_assert!((-1.0..=0.0).contains(&x));
    let w = x / (x - 1.0);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut n = 0.0;
    loop {
        term *= (n + 1.0) / (n + 1.0 + beta) * w;
        sum += term;
        n += 1.0;
        if term <= f64::EPSILON * 0.25 * sum || n > 200.0 {
            break;
        }
    }
    sum / (1.0 - x)
}

/// Returns `y · ₂F₁(1, b; b + 1; -y)` for `y ≥ 0`, `b = 1 - 2/α`.
///
/// Stays finite for very large `y`, where the bare hypergeometric value
/// underflows relative to its prefactor.
pub fn scaled_hyp2f1_interference(alpha: f64, y: f64) -> f64 {
    let b = 1.0 - 2.0 / alpha;
    if y <= 1.0 {
        y * pfaff_series(b, -y)
    } else {
        // ₂F₁(1,b;b+1;z) = πb/sin(πb) (-z)^(-b) - b/(1-b) (-z)^(-1) ₂F₁(1,1-b;2-b;1/z)
        let reflect = PI * b / (PI * b).sin();
        reflect * y.powf(1.0 - b) - b / (1.0 - b) * pfaff_series(1.0 - b, -1.0 / y)
    }
}

const KERNEL_TERMS: usize = 64;

/// [`scaled_hyp2f1_interference`] for one fixed `α`, with the series
/// coefficients and the reflection constant precomputed.
#[derive(Debug, Clone)]
pub struct InterferenceKernel {
    alpha: f64,
    b: f64,
    reflect: f64,
    near: [f64; KERNEL_TERMS],
    far: [f64; KERNEL_TERMS],
}

impl InterferenceKernel {
    pub fn new(alpha: f64) -> Result<Self, SpecialError> {
        check_alpha(alpha)?;
        let b = 1.0 - 2.0 / alpha;
        let coefficients = |beta: f64| {
            let mut c = [0.0; KERNEL_TERMS];
            c[0] = 1.0;
            for n in 1..KERNEL_TERMS {
                c[n] = c[n - 1] * n as f64 / (n as f64 + beta);
            }
            c
        };
        Ok(Self {
            alpha,
            b,
            reflect: PI * b / (PI * b).sin(),
            near: coefficients(b),
            far: coefficients(1.0 - b),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `y · ₂F₁(1, b; b + 1; -y)` for `y ≥ 0`.
    pub fn scaled(&self, y: f64) -> f64 {
        if y <= 1.0 {
            y / (1.0 + y) * series(&self.near, y / (1.0 + y))
        } else if y.is_infinite() {
            f64::INFINITY
        } else {
            let w = 1.0 / (1.0 + y);
            self.reflect * y.powf(1.0 - self.b) - self.b / (1.0 - self.b) * y * w * series(&self.far, w)
        }
    }
}

impl InterferenceKernel {
    /// [`Self::scaled`] taking `ln y`, which saves a logarithm and a power.
    pub fn scaled_ln(&self, ln_y: f64) -> f64 {
        if ln_y <= 0.0 {
            let y = ln_y.exp();
            y / (1.0 + y) * series(&self.near, y / (1.0 + y))
        } else {
            let w = 1.0 / (1.0 + ln_y.exp());
            let y_w = 1.0 / (1.0 + (-ln_y).exp());
            self.reflect * ((1.0 - self.b) * ln_y).exp() - self.b / (1.0 - self.b) * y_w * series(&self.far, w)
        }
    }
}

fn series(coefficients: &[f64; KERNEL_TERMS], w: f64) -> f64 {
    let mut sum = 1.0;
    let mut power = 1.0;
    for c in &coefficients[1..] {
        power *= w;
        let term = c * power;
        sum += term;
        if term <= 0.25 * f64::EPSILON * sum {
            break;
        }
    }
    sum
}

/// `₂F₁(1, 1 - 2/α; 2 - 2/α; z)` for `α > 2` and `z ≤ 0`.
pub fn hyp2f1_interference(alpha: f64, z: f64) -> Result<f64, SpecialError> {
    check_alpha(alpha)?;
    check_z(z)?;
    if z == 0.0 {
        return Ok(1.0);
    }
    let b = 1.0 - 2.0 / alpha;
    if z >= -1.0 {
        Ok(pfaff_series(b, z))
    } else {
        let y = -z;
        let reflect = PI * b / (PI * b).sin();
        Ok(reflect * y.powf(-b) - b / (1.0 - b) / y * pfaff_series(1.0 - b, z.recip()))
    }
}

/// Same function evaluated from the Euler integral
/// `(1 - 2/α) ∫₀¹ u^{-2/α} / (1 - z u) du`.
///
/// With `u = v^{1/b}` the integrand becomes `1 / (1 - z v^{1/b})` on `[0, 1]`,
/// which is bounded. Slow; used to cross-check the series path.
pub fn hyp2f1_interference_quadrature(alpha: f64, z: f64, spec: &QuadratureSpec) -> Result<f64, SpecialError> {
    check_alpha(alpha)?;
    check_z(z)?;
    let inv_b = 1.0 / (1.0 - 2.0 / alpha);
    let r = integrate(|v| 1.0 / (1.0 - z * v.powf(inv_b)), 0.0, 1.0, spec)?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_at_origin() {
        for alpha in [2.1, 3.0, 4.3, 10.0] {
            assert_eq!(hyp2f1_interference(alpha, 0.0).unwrap(), 1.0);
        }
    }

    #[test]
    fn arctan_closed_form() {
        // α = 4: ₂F₁(1, ½; 3/2; -x²) = arctan(x) / x
        for x in [0.3_f64, 1.0, 2.0, 17.0, 1e4] {
            let v = hyp2f1_interference(4.0, -x * x).unwrap();
            let expected = x.atan() / x;
            assert!(((v - expected) / expected).abs() < 1e-13, "x = {x}: {v} vs {expected}");
        }
        let v = hyp2f1_interference(4.0, -1.0).unwrap();
        assert!((v - PI / 4.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_form_matches_plain() {
        for alpha in [2.5, 3.8, 4.3] {
            for y in [1e-3, 0.5, 1.0, 3.0, 250.0, 1e6] {
                let plain = y * hyp2f1_interference(alpha, -y).unwrap();
                let scaled = scaled_hyp2f1_interference(alpha, y);
                assert!(((plain - scaled) / plain).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn kernel_matches_scaled_form() {
        for alpha in [2.5, 3.5, 3.8, 4.3, 6.0] {
            let kernel = InterferenceKernel::new(alpha).unwrap();
            for y in [0.0, 1e-9, 1e-3, 0.5, 1.0, 1.0 + 1e-12, 3.0, 250.0, 1e6, 1e200] {
                let expected = scaled_hyp2f1_interference(alpha, y);
                let got = kernel.scaled(y);
                assert!(
                    (got - expected).abs() <= 1e-14 * expected.abs(),
                    "alpha {alpha} y {y}: {got} vs {expected}"
                );
                if y > 0.0 {
                    let got = kernel.scaled_ln(y.ln());
                    assert!(
                        (got - expected).abs() <= 1e-13 * expected.abs(),
                        "alpha {alpha} ln y {}: {got} vs {expected}",
                        y.ln()
                    );
                }
            }
        }
        assert!(InterferenceKernel::new(2.0).is_err());
    }

    #[test]
    fn scaled_form_survives_huge_arguments() {
        let v = scaled_hyp2f1_interference(3.8, 1e300);
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn domain_errors() {
        assert!(hyp2f1_interference(2.0, -1.0).is_err());
        assert!(hyp2f1_interference(1.5, -1.0).is_err());
        assert!(hyp2f1_interference(3.0, 0.5).is_err());
    }
}
