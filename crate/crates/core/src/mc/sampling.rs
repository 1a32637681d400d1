use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::model::{AccessMode, NetworkConfig};

use super::McError;

/// A point of the plane, metres.
pub type Point = [f64; 2];

/// Width of the annuli in which point processes are generated. Each annulus
/// has its own random stream, so a larger region reuses every point of a
/// smaller one.
pub(crate) const RING_WIDTH: f64 = 5.0;

/// Independent random stream for one `(seed, drop, purpose, ring)` tuple.
///
/// The four words form the ChaCha key, so distinct tuples never share a
/// stream and no stream depends on how drops are scheduled.
pub(crate) fn stream(seed: u64, drop: u64, purpose: u64, ring: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&drop.to_le_bytes());
    key[16..24].copy_from_slice(&purpose.to_le_bytes());
    key[24..].copy_from_slice(&ring.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    let draw: f64 = Poisson::new(mean).expect("finite positive mean").sample(rng);
    draw as u64
}

pub(crate) fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

pub(crate) fn num_rings(region_radius: f64) -> u64 {
    (region_radius / RING_WIDTH).ceil() as u64
}

/// Draws one ring of a PPP: the count for the full annulus
/// `[kΔ, (k+1)Δ)`, then a squared radius per point. Points beyond
/// `region_radius` are dropped after drawing, so the stream is consumed
/// identically for every region size.
pub(crate) struct Ring {
    pub rng: ChaCha8Rng,
    pub count: u64,
    inner2: f64,
    span2: f64,
}

impl Ring {
    pub fn new(seed: u64, drop: u64, purpose: u64, k: u64, intensity: f64) -> Self {
        let mut rng = stream(seed, drop, purpose, k);
        let inner = k as f64 * RING_WIDTH;
        let outer = inner + RING_WIDTH;
        let span2 = outer * outer - inner * inner;
        let count = poisson_count(intensity * PI * span2, &mut rng);
        Self {
            rng,
            count,
            inner2: inner * inner,
            span2,
        }
    }

    /// Squared distance of the next point from the origin.
    pub fn next_radius2(&mut self) -> f64 {
        self.inner2 + self.span2 * self.rng.random::<f64>()
    }

    /// Next point with its angle.
    pub fn next_point(&mut self) -> Point {
        let rho = self.next_radius2().sqrt();
        let theta = 2.0 * PI * self.rng.random::<f64>();
        [rho * theta.cos(), rho * theta.sin()]
    }
}

/// Squared distance from the origin to the nearest point of a PPP, scanning
/// rings outward. `None` if the disc of radius `region_radius` is empty.
pub(crate) fn nearest_radius2(seed: u64, drop: u64, purpose: u64, intensity: f64, region_radius: f64) -> Option<f64> {
    let limit2 = region_radius * region_radius;
    for k in 0..num_rings(region_radius) {
        let mut ring = Ring::new(seed, drop, purpose, k, intensity);
        let mut best = f64::INFINITY;
        for _ in 0..ring.count {
            let d2 = ring.next_radius2();
            // Angle drawn and discarded to stay in step with `ring_points`.
            let _: f64 = ring.rng.random();
            if d2 <= limit2 {
                best = best.min(d2);
            }
        }
        if best.is_finite() {
            return Some(best);
        }
    }
    None
}

/// All points of a PPP on the disc of radius `region_radius`, ring by ring.
pub(crate) fn ring_points(
    seed: u64,
    drop: u64,
    purpose: u64,
    intensity: f64,
    region_radius: f64,
    out: &mut Vec<Point>,
) {
    out.clear();
    let limit2 = region_radius * region_radius;
    for k in 0..num_rings(region_radius) {
        let mut ring = Ring::new(seed, drop, purpose, k, intensity);
        for _ in 0..ring.count {
            let p = ring.next_point();
            if p[0] * p[0] + p[1] * p[1] <= limit2 {
                out.push(p);
            }
        }
    }
}

/// Homogeneous PPP on the disc of radius `region_radius` centred at the origin.
pub fn sample_ppp<R: Rng + ?Sized>(intensity: f64, region_radius: f64, rng: &mut R) -> Vec<Point> {
    let n = poisson_count(intensity * PI * region_radius * region_radius, rng);
    (0..n)
        .map(|_| {
            let rho = region_radius * rng.random::<f64>().sqrt();
            let theta = 2.0 * PI * rng.random::<f64>();
            [rho * theta.cos(), rho * theta.sin()]
        })
        .collect()
}

/// FPC transmit power `baseline · d^{αε}`, optionally capped.
pub fn fpc_power(baseline: f64, alpha: f64, epsilon: f64, serving_distance: f64, cap: Option<f64>) -> f64 {
    let p = if epsilon == 0.0 {
        baseline
    } else {
        baseline * serving_distance.powf(alpha * epsilon)
    };
    match cap {
        Some(c) => p.min(c),
        None => p,
    }
}

/// Serving BS of a UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub tier: usize,
    /// Index into the tier's point list.
    pub index: usize,
    pub serving_distance: f64,
}

fn distance(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Picks the serving BS of a UE at `ue` among `bs[j]` (points of tier `j`).
///
/// Decoupled access takes the closest BS; coupled access the largest
/// `P_Bj d^{-α_j}`, with an independent `Exp(1)` fade per BS under
/// `CudaFading`.
pub fn associate<R: Rng + ?Sized>(
    ue: Point,
    bs: &[Vec<Point>],
    config: &NetworkConfig,
    mode: AccessMode,
    rng: &mut R,
) -> Result<Association, McError> {
    let mut best: Option<(f64, Association)> = None;
    for (tier, points) in bs.iter().enumerate() {
        let params = config.tier(tier);
        for (index, &p) in points.iter().enumerate() {
            let d = distance(ue, p);
            let score = match mode {
                AccessMode::Duda => -d,
                AccessMode::CudaMeanFading => params.bs_tx_power.ln() - params.path_loss_exp * d.ln(),
                AccessMode::CudaFading => params.bs_tx_power.ln() + exp1(rng).ln() - params.path_loss_exp * d.ln(),
            };
            if best.as_ref().is_none_or(|(s, _)| score > *s) {
                best = Some((
                    score,
                    Association {
                        tier,
                        index,
                        serving_distance: d,
                    },
                ));
            }
        }
    }
    best.map(|(_, a)| a).ok_or(McError::EmptyNetwork)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::builtin_scenario;

    #[test]
    fn empty_when_intensity_zero() {
        let mut rng = stream(1, 0, 0, 0);
        assert!(sample_ppp(0.0, 100.0, &mut rng).is_empty());
    }

    #[test]
    fn ring_streams_are_nested() {
        let mut small = Vec::new();
        let mut large = Vec::new();
        ring_points(9, 4, 2, 0.05, 30.0, &mut small);
        ring_points(9, 4, 2, 0.05, 60.0, &mut large);
        let inside: Vec<Point> = large
            .iter()
            .copied()
            .filter(|p| p[0] * p[0] + p[1] * p[1] <= 900.0)
            .collect();
        assert_eq!(small, inside);
    }

    #[test]
    fn nearest_matches_full_scan() {
        let mut points = Vec::new();
        for drop in 0..50 {
            ring_points(3, drop, 1, 0.01, 80.0, &mut points);
            let full = points
                .iter()
                .map(|p| p[0] * p[0] + p[1] * p[1])
                .fold(f64::INFINITY, f64::min);
            let near = nearest_radius2(3, drop, 1, 0.01, 80.0).unwrap_or(f64::INFINITY);
            assert!(
                (full - near).abs() <= 1e-9 * full.max(1.0),
                "drop {drop}: {full} vs {near}"
            );
        }
    }

    #[test]
    fn fpc_examples() {
        assert_eq!(fpc_power(1e-3, 4.0, 0.0, 37.0, None), 1e-3);
        assert_eq!(fpc_power(1e-3, 4.0, 0.8, 1.0, None), 1e-3);
        assert_eq!(fpc_power(1e-3, 4.0, 1.0, 10.0, Some(0.2)), 0.2);
    }

    #[test]
    fn single_bs_wins_in_every_mode() {
        let c = builtin_scenario("table2_pico").unwrap();
        let bs = vec![vec![], vec![[3.0, 4.0]]];
        let mut rng = stream(0, 0, 0, 0);
        for mode in AccessMode::ALL {
            let a = associate([0.0, 0.0], &bs, &c, mode, &mut rng).unwrap();
            assert_eq!((a.tier, a.index), (1, 0));
            assert!((a.serving_distance - 5.0).abs() < 1e-12);
        }
        let none: Vec<Vec<Point>> = vec![vec![], vec![]];
        assert!(matches!(
            associate([0.0, 0.0], &none, &c, AccessMode::Duda, &mut rng),
            Err(McError::EmptyNetwork)
        ));
    }
}
