//! Adaptive Gauss-Kronrod (10/21) quadrature on finite and semi-infinite ranges.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use thiserror::Error;

/// Tolerances and subdivision budget of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_subdivisions: 2000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize) -> Result<Self, QuadratureError> {
        let spec = Self {
            rel_tol,
            abs_tol,
            max_subdivisions,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<(), QuadratureError> {
        if !(self.rel_tol > 0.0) {
            return Err(QuadratureError::InvalidSpec("rel_tol must be > 0"));
        }
        if !(self.abs_tol >= 0.0) {
            return Err(QuadratureError::InvalidSpec("abs_tol must be >= 0"));
        }
        if self.max_subdivisions < 1 {
            return Err(QuadratureError::InvalidSpec("max_subdivisions must be >= 1"));
        }
        Ok(())
    }

    /// Spec for an inner integral nested inside an integral using `self`.
    pub fn nested(&self) -> Self {
        Self {
            rel_tol: self.rel_tol / 10.0,
            abs_tol: self.abs_tol / 10.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub err_est: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("quadrature did not converge after {subdivisions} subdivisions (best estimate {value:e}, error estimate {err_est:e})")]
    NotConverged {
        value: f64,
        err_est: f64,
        subdivisions: usize,
    },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
    #[error("invalid quadrature spec: {0}")]
    InvalidSpec(&'static str),
}

impl QuadratureError {
    /// Error estimate carried by a non-convergence failure.
    pub fn err_est(&self) -> Option<f64> {
        match self {
            QuadratureError::NotConverged { err_est, .. } => Some(*err_est),
            _ => None,
        }
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_626_949,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for the 10-point rule (nodes XGK[1], XGK[3], ..., XGK[9]).
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64), QuadratureError> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |f: &mut F, x: f64| {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(QuadratureError::NonFinite { x })
        }
    };

    let fc = eval(f, center)?;
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let y1 = eval(f, center - dx)?;
        let y2 = eval(f, center + dx)?;
        fv1[j] = y1;
        fv2[j] = y2;
        kronrod += WGK[j] * (y1 + y2);
        abs_sum += WGK[j] * (y1.abs() + y2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (y1 + y2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok((result, err))
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    spec.validate()?;
    if a == b {
        return Ok(Integral {
            value: 0.0,
            err_est: 0.0,
        });
    }
    let (value, err) = kronrod21(&mut f, a, b)?;
    let mut heap = BinaryHeap::new();
    heap.push(Segment { a, b, value, err });
    let mut total = value;
    let mut total_err = err;
    // Segments too narrow to split further; their error is final.
    let mut frozen_err = 0.0;
    let mut subdivisions = 1;

    loop {
        let tolerance = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tolerance {
            return Ok(Integral {
                value: total,
                err_est: total_err,
            });
        }
        let Some(worst) = heap.pop() else {
            break;
        };
        if subdivisions >= spec.max_subdivisions {
            heap.push(worst);
            break;
        }
        let mid = 0.5 * (worst.a + worst.b);
        let scale = worst.a.abs().max(worst.b.abs()).max(f64::MIN_POSITIVE);
        if (worst.b - worst.a).abs() <= 100.0 * f64::EPSILON * scale {
            frozen_err += worst.err;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        let (v1, e1) = kronrod21(&mut f, worst.a, mid)?;
        let (v2, e2) = kronrod21(&mut f, mid, worst.b)?;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        subdivisions += 1;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
        // Re-sum periodically so cancellation in the running totals does not drift.
        if subdivisions % 64 == 0 {
            total = heap.iter().map(|s| s.value).sum();
            total_err = heap.iter().map(|s| s.err).sum::<f64>() + frozen_err;
        }
    }

    let value: f64 = heap.iter().map(|s| s.value).sum();
    let err_est = heap.iter().map(|s| s.err).sum::<f64>() + frozen_err;
    if err_est <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
        return Ok(Integral { value, err_est });
    }
    Err(QuadratureError::NotConverged {
        value,
        err_est,
        subdivisions,
    })
}

/// Integrates `f` over `[0, ∞)` through the map `x = t / (1 - t)`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    integrate(
        |t| {
            let one_minus = 1.0 - t;
            let x = t / one_minus;
            let y = f(x);
            // The map sends t -> 1 to infinity; a vanishing integrand there is zero.
            if y == 0.0 {
                0.0
            } else {
                y / (one_minus * one_minus)
            }
        },
        0.0,
        1.0,
        spec,
    )
}

/// Computes `∫₀^∞ f(r) 2πλ r exp(-λπr²) dr`.
///
/// The substitution `u = exp(-λπr²)` turns the Rayleigh-weighted integral into
/// `∫₀¹ f(r(u)) du` with `r(u) = sqrt(-ln u / (λπ))`.
pub fn integrate_rayleigh<F: FnMut(f64) -> f64>(
    mut f: F,
    intensity: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    let scale = 1.0 / (PI * intensity);
    integrate(|u| f((-u.ln() * scale).sqrt()), 0.0, 1.0, spec)
}

/// Same integral as [`integrate_rayleigh`], taken over `z = ln(λπr²)` on
/// `[-40, ln 45]` with weight `exp(z - e^z)`.
///
/// Suited to integrands with a logarithmic singularity at `r = 0` or a
/// slow variation over many decades of `r`; the truncated mass is below 1e-17.
pub fn integrate_rayleigh_log<F: FnMut(f64) -> f64>(
    mut f: F,
    intensity: f64,
    spec: &QuadratureSpec,
) -> Result<Integral, QuadratureError> {
    let scale = 1.0 / (PI * intensity);
    integrate(
        |z| {
            let w = z.exp();
            let weight = (z - w).exp();
            if weight == 0.0 {
                return 0.0;
            }
            weight * f((w * scale).sqrt())
        },
        LOG_RAYLEIGH_LO,
        LOG_RAYLEIGH_HI,
        spec,
    )
}

const LOG_RAYLEIGH_LO: f64 = -40.0;
const LOG_RAYLEIGH_HI: f64 = 3.806_662_489_770_319_4;

/// Rayleigh quantile used by [`integrate_rayleigh`]: the distance `r` with
/// `exp(-λπr²) = u`.
pub fn rayleigh_radius(u: f64, intensity: f64) -> f64 {
    (-u.ln() / (PI * intensity)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tight() -> QuadratureSpec {
        QuadratureSpec::new(1e-12, 1e-14, 5000).unwrap()
    }

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x - x + 2.0, -1.0, 2.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 13.5).abs() < 1e-13);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate_semi_infinite(|x| (-x).exp(), &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn rayleigh_density_normalizes() {
        let lambda = 0.09;
        let r = integrate_semi_infinite(|x| 2.0 * PI * lambda * x * (-lambda * PI * x * x).exp(), &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-11, "{r:?}");
        let r = integrate_rayleigh(|_| 1.0, lambda, &tight()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn log_rayleigh_matches_plain() {
        let lambda = 0.2;
        let plain = integrate_rayleigh(|x| (1.0 + x).ln() * (-x).exp(), lambda, &tight()).unwrap();
        let log = integrate_rayleigh_log(|x| (1.0 + x).ln() * (-x).exp(), lambda, &tight()).unwrap();
        assert!((plain.value - log.value).abs() < 1e-12, "{plain:?} {log:?}");
        let norm = integrate_rayleigh_log(|_| 1.0, lambda, &tight()).unwrap();
        assert!((norm.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_rayleigh_handles_log_singularity() {
        // E[-ln(λπR²)] = γ for R Rayleigh(λ).
        let lambda = 0.01;
        let r = integrate_rayleigh_log(|x| -(lambda * PI * x * x).ln(), lambda, &tight()).unwrap();
        assert!((r.value - 0.577_215_664_901_532_9).abs() < 1e-12, "{r:?}");
    }

    #[test]
    fn rayleigh_mean_distance() {
        let lambda = 0.05;
        let r = integrate_rayleigh(|x| x, lambda, &tight()).unwrap();
        let expected = 1.0 / (2.0 * lambda.sqrt());
        assert!(((r.value - expected) / expected).abs() < 1e-10, "{r:?}");
    }

    #[test]
    fn endpoint_singularity() {
        // ∫₀¹ x^{-1/2} dx = 2
        let r = integrate(|x| x.powf(-0.5), 0.0, 1.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 2.0).abs() < 1e-7, "{r:?}");
    }

    #[test]
    fn reports_non_convergence_with_estimate() {
        let spec = QuadratureSpec::new(1e-14, 0.0, 3).unwrap();
        let err = integrate(|x| (1.0 / x).sin() * x.powf(-0.3), 1e-6, 1.0, &spec).unwrap_err();
        match err {
            QuadratureError::NotConverged { value, err_est, .. } => {
                assert!(value.is_finite());
                assert!(err_est > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_spec_rejected() {
        assert!(QuadratureSpec::new(0.0, 0.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-6, -1.0, 10).is_err());
        assert!(QuadratureSpec::new(1e-6, 0.0, 0).is_err());
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let err = integrate(|_| f64::NAN, 0.0, 1.0, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, QuadratureError::NonFinite { .. }));
    }
}
