use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::analytic::{association_probabilities, serving_intensity, ue_counts};
use crate::model::{AccessMode, NetworkConfig};
use crate::special::QuadratureSpec;

use super::moments::Moments;
use super::sampling::{associate, exp1, fpc_power, nearest_radius2, num_rings, ring_points, stream, Point, Ring};
use super::{InterfererMode, McError, McEstimate, McSettings};

const CHUNK: u64 = 500;

// Stream purposes. Tier-indexed purposes add the tier index.
const BS_AROUND_UE: u64 = 0x100;
const ASSOC_FADING: u64 = 0x200;
const UE_AROUND_BS: u64 = 0x300;
const DESIRED_FADING: u64 = 0x400;
const FIELD: u64 = 0x500;
const NET_BS: u64 = 0x600;
const NET_UE: u64 = 0x700;
const NET_MISC: u64 = 0x800;
const SHARED_RV: u64 = 0x900;

/// Monte Carlo estimates for one tier.
#[derive(Debug, Clone, PartialEq)]
pub struct TierEstimates {
    pub assoc_prob: McEstimate,
    pub mean_tx_power: McEstimate,
    pub mean_rate: McEstimate,
    pub se: McEstimate,
    pub ee: McEstimate,
}

/// Everything one oracle run measures.
#[derive(Debug, Clone)]
pub struct OracleReport {
    pub mode: AccessMode,
    pub settings: McSettings,
    pub per_tier: Vec<TierEstimates>,
    pub total_rate: McEstimate,
    pub total_se: McEstimate,
    pub total_ee: McEstimate,
    /// `(r, s)` points at which `E[exp(-s I)]` was estimated.
    pub probes: Vec<(f64, f64)>,
    pub laplace: Vec<McEstimate>,
    layout: Layout,
    moments: Moments,
    /// `W λ_Bi / n_i`-style constants: per tier `(W / n_i, λ_Bi, N_i)`.
    scales: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, Copy)]
struct Layout {
    tiers: usize,
    probes: usize,
}

impl Layout {
    fn assoc(&self, i: usize) -> usize {
        i
    }
    fn power(&self, i: usize) -> usize {
        self.tiers + i
    }
    fn excess(&self, i: usize) -> usize {
        2 * self.tiers + i
    }
    fn probe(&self, k: usize) -> usize {
        3 * self.tiers + k
    }
    fn dim(&self) -> usize {
        3 * self.tiers + self.probes
    }
}

impl OracleReport {
    fn estimate(&self, indices: &[usize], f: impl Fn(&[f64]) -> f64) -> McEstimate {
        let means: Vec<f64> = indices.iter().map(|&i| self.moments.mean(i)).collect();
        let value = f(&means);
        let mut gradient = Vec::with_capacity(indices.len());
        let mut shifted = means.clone();
        for (k, &i) in indices.iter().enumerate() {
            let h = if means[k] != 0.0 { 1e-6 * means[k].abs() } else { 1e-9 };
            shifted[k] = means[k] + h;
            let up = f(&shifted);
            shifted[k] = means[k] - h;
            let down = f(&shifted);
            shifted[k] = means[k];
            gradient.push((i, (up - down) / (2.0 * h)));
        }
        McEstimate {
            mean: value,
            std_error: self.moments.std_error_of(&gradient),
            n: self.moments.count(),
        }
    }

    fn power_indices(&self, i: usize) -> Vec<usize> {
        match self.settings.interferer_mode {
            InterfererMode::IndependentThinned | InterfererMode::SharedServingDistance => vec![self.layout.power(i)],
            InterfererMode::OnePerBs => vec![self.layout.power(i), self.layout.assoc(i)],
        }
    }

    /// Mean power from the leading entries of `means` laid out as by
    /// [`Self::power_indices`].
    fn power_of(&self, means: &[f64]) -> f64 {
        match self.settings.interferer_mode {
            InterfererMode::IndependentThinned | InterfererMode::SharedServingDistance => means[0],
            InterfererMode::OnePerBs => means[0] / means[1],
        }
    }

    /// Per-tier energy efficiency with `static_power` added to the transmit power.
    pub fn tier_energy_efficiency(&self, tier: usize, static_power: f64) -> McEstimate {
        let mut idx = vec![self.layout.excess(tier)];
        idx.extend(self.power_indices(tier));
        let rate_scale = self.scales[tier].0;
        self.estimate(&idx, |m| rate_scale * m[0] / (self.power_of(&m[1..]) + static_power))
    }

    /// `Σ N_i R_i / Σ N_j (E[P_j] + static_power)`.
    pub fn total_energy_efficiency(&self, static_power: f64) -> McEstimate {
        let k = self.layout.tiers;
        let mut idx: Vec<usize> = (0..k).map(|i| self.layout.excess(i)).collect();
        let mut spans = Vec::with_capacity(k);
        for j in 0..k {
            let start = idx.len();
            idx.extend(self.power_indices(j));
            spans.push(start..idx.len());
        }
        let bandwidth_per_area: Vec<f64> = self.scales.iter().map(|(w_n, _, n)| w_n * n).collect();
        self.estimate(&idx, |m| {
            let num: f64 = (0..k).map(|i| bandwidth_per_area[i] * m[i]).sum();
            let den: f64 = (0..k)
                .map(|j| self.scales[j].2 * (self.power_of(&m[spans[j].clone()]) + static_power))
                .sum();
            num / den
        })
    }
}

struct Context<'a> {
    config: &'a NetworkConfig,
    mode: AccessMode,
    settings: McSettings,
    layout: Layout,
    probes: &'a [(f64, f64)],
    /// Intensity of the thinned interferer process per tier.
    field_intensity: Vec<f64>,
    serving_intensity: Vec<f64>,
    cap: Option<f64>,
}

#[derive(Default)]
struct Workspace {
    nearest2: Vec<f64>,
    field: Vec<(f64, f64)>,
    probe_sums: Vec<f64>,
    bs: Vec<Vec<Point>>,
    net_bs: Vec<Vec<Point>>,
    ues: Vec<Point>,
    served: Vec<Vec<Vec<(Point, f64)>>>,
}

impl Context<'_> {
    fn drop(&self, drop: u64, ws: &mut Workspace, out: &mut [f64]) -> Result<(), McError> {
        out.fill(0.0);
        match self.settings.interferer_mode {
            InterfererMode::IndependentThinned | InterfererMode::SharedServingDistance => {
                self.thinned_association(drop, ws, out)?;
                self.thinned_field(drop, ws, out);
            }
            InterfererMode::OnePerBs => {
                self.network_association(drop, ws, out)?;
                self.network_field(drop, ws, out)?;
            }
        }
        Ok(())
    }

    /// Typical UE at the origin against the nearest BS of every tier.
    fn thinned_association(&self, drop: u64, ws: &mut Workspace, out: &mut [f64]) -> Result<(), McError> {
        let seed = self.settings.seed;
        let radius = self.settings.region_radius;
        let k = self.config.num_tiers();
        ws.nearest2.clear();
        for j in 0..k {
            let d2 = nearest_radius2(
                seed,
                drop,
                BS_AROUND_UE + j as u64,
                self.config.tier(j).bs_intensity,
                radius,
            );
            ws.nearest2.push(d2.unwrap_or(f64::INFINITY));
        }
        let mut fading = stream(seed, drop, ASSOC_FADING, 0);
        let fades: Vec<f64> = (0..k).map(|_| exp1(&mut fading)).collect();
        let mut best: Option<(f64, usize)> = None;
        for j in 0..k {
            let d2 = ws.nearest2[j];
            if d2.is_infinite() {
                continue;
            }
            let t = self.config.tier(j);
            let score = match self.mode {
                AccessMode::Duda => -d2,
                AccessMode::CudaMeanFading => t.bs_tx_power.ln() - 0.5 * t.path_loss_exp * d2.ln(),
                AccessMode::CudaFading => t.bs_tx_power.ln() + fades[j].ln() - 0.5 * t.path_loss_exp * d2.ln(),
            };
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, j));
            }
        }
        let (_, tier) = best.ok_or(McError::EmptyNetwork)?;
        out[self.layout.assoc(tier)] = 1.0;

        let overall = ws.nearest2.iter().copied().fold(f64::INFINITY, f64::min);
        for i in 0..k {
            let d2 = match self.mode {
                AccessMode::Duda => overall,
                _ => ws.nearest2[i],
            };
            let d = if d2.is_finite() { d2.sqrt() } else { radius };
            let t = self.config.tier(i);
            out[self.layout.power(i)] = fpc_power(t.baseline_ue_power, t.path_loss_exp, t.fpc_factor, d, self.cap);
        }
        Ok(())
    }

    /// Typical BS at the origin, its nearest UE as the desired link and
    /// independently thinned interferers outside the serving distance.
    fn thinned_field(&self, drop: u64, ws: &mut Workspace, out: &mut [f64]) {
        let seed = self.settings.seed;
        let radius = self.settings.region_radius;
        let limit2 = radius * radius;
        let desired2 =
            nearest_radius2(seed, drop, UE_AROUND_BS, self.config.ue_intensity(), radius).unwrap_or(f64::INFINITY);
        let h0 = exp1(&mut stream(seed, drop, DESIRED_FADING, 0));

        ws.field.clear();
        for (j, tier) in self.config.tiers().iter().enumerate() {
            let intensity = self.field_intensity[j];
            let half_comp = 0.5 * tier.compensation_exponent();
            let half_alpha = 0.5 * tier.path_loss_exp;
            let rv2_scale = 1.0 / (PI * self.serving_intensity[j]);
            let shared = (self.settings.interferer_mode == InterfererMode::SharedServingDistance)
                .then(|| exp1(&mut stream(seed, drop, SHARED_RV + j as u64, 0)) * rv2_scale);
            for k in 0..num_rings(radius) {
                let mut ring = Ring::new(seed, drop, FIELD + j as u64, k, intensity);
                for _ in 0..ring.count {
                    let x2 = ring.next_radius2();
                    let h = exp1(&mut ring.rng);
                    let own = exp1(&mut ring.rng) * rv2_scale;
                    let rv2 = shared.unwrap_or(own);
                    if x2 > limit2 {
                        continue;
                    }
                    let contribution = match self.cap {
                        None => tier.baseline_ue_power * h * (half_comp * rv2.ln() - half_alpha * x2.ln()).exp(),
                        Some(cap) => {
                            let power = (tier.baseline_ue_power * (half_comp * rv2.ln()).exp()).min(cap);
                            power * h * (-half_alpha * x2.ln()).exp()
                        }
                    };
                    ws.field.push((x2, contribution));
                }
            }
        }

        let mut interference = 0.0;
        ws.probe_sums.clear();
        ws.probe_sums.resize(self.probes.len(), 0.0);
        let probe_r2: Vec<f64> = self.probes.iter().map(|(r, _)| r * r).collect();
        for &(x2, c) in &ws.field {
            if x2 > desired2 {
                interference += c;
            }
            for (sum, &r2) in ws.probe_sums.iter_mut().zip(&probe_r2) {
                if x2 > r2 {
                    *sum += c;
                }
            }
        }
        for (k, &(_, s)) in self.probes.iter().enumerate() {
            out[self.layout.probe(k)] = (-s * ws.probe_sums[k]).exp();
        }

        if desired2.is_infinite() {
            return;
        }
        let d = desired2.sqrt();
        for (i, tier) in self.config.tiers().iter().enumerate() {
            let power = fpc_power(tier.baseline_ue_power, tier.path_loss_exp, tier.fpc_factor, d, self.cap);
            let signal = power * h0 * d.powf(-tier.path_loss_exp);
            let sinr = signal / (interference + self.config.noise_power());
            out[self.layout.excess(i)] = excess_nats(sinr, tier.sinr_threshold);
        }
    }

    /// Typical UE at the origin against every BS of the network.
    fn network_association(&self, drop: u64, ws: &mut Workspace, out: &mut [f64]) -> Result<(), McError> {
        let seed = self.settings.seed;
        let radius = self.settings.region_radius;
        let k = self.config.num_tiers();
        ws.bs.resize_with(k, Vec::new);
        for j in 0..k {
            ring_points(
                seed,
                drop,
                BS_AROUND_UE + j as u64,
                self.config.tier(j).bs_intensity,
                radius,
                &mut ws.bs[j],
            );
        }
        let mut rng = stream(seed, drop, ASSOC_FADING, 0);
        let a = associate([0.0, 0.0], &ws.bs, self.config, self.mode, &mut rng)?;
        let t = self.config.tier(a.tier);
        out[self.layout.assoc(a.tier)] = 1.0;
        out[self.layout.power(a.tier)] = fpc_power(
            t.baseline_ue_power,
            t.path_loss_exp,
            t.fpc_factor,
            a.serving_distance,
            self.cap,
        );
        Ok(())
    }

    /// For each tier `i`, a tier-`i` BS added at the origin; every UE is
    /// associated and each BS serves one of its UEs, chosen uniformly.
    fn network_field(&self, drop: u64, ws: &mut Workspace, out: &mut [f64]) -> Result<(), McError> {
        let seed = self.settings.seed;
        let radius = self.settings.region_radius;
        let k = self.config.num_tiers();
        ws.net_bs.resize_with(k, Vec::new);
        for j in 0..k {
            ring_points(
                seed,
                drop,
                NET_BS + j as u64,
                self.config.tier(j).bs_intensity,
                radius,
                &mut ws.net_bs[j],
            );
        }
        ring_points(seed, drop, NET_UE, self.config.ue_intensity(), radius, &mut ws.ues);

        for i in 0..k {
            let mut rng = stream(seed, drop, NET_MISC + i as u64, 0);
            ws.net_bs[i].push([0.0, 0.0]);
            let origin = ws.net_bs[i].len() - 1;
            ws.served.resize_with(k, Vec::new);
            for j in 0..k {
                ws.served[j].clear();
                ws.served[j].resize_with(ws.net_bs[j].len(), Vec::new);
            }
            for &ue in &ws.ues {
                let a = associate(ue, &ws.net_bs, self.config, self.mode, &mut rng)?;
                ws.served[a.tier][a.index].push((ue, a.serving_distance));
            }
            ws.net_bs[i].pop();

            let mut interference = 0.0;
            let mut desired = None;
            ws.field.clear();
            for j in 0..k {
                let tier = self.config.tier(j);
                for (b, cell) in ws.served[j].iter().enumerate() {
                    if cell.is_empty() {
                        continue;
                    }
                    let (ue, d) = cell[rng.random_range(0..cell.len())];
                    if j == i && b == origin {
                        desired = Some(d);
                        continue;
                    }
                    let x2 = ue[0] * ue[0] + ue[1] * ue[1];
                    let power = fpc_power(tier.baseline_ue_power, tier.path_loss_exp, tier.fpc_factor, d, self.cap);
                    let c = power * exp1(&mut rng) * x2.powf(-0.5 * tier.path_loss_exp);
                    interference += c;
                    ws.field.push((x2, c));
                }
            }
            if i == 0 {
                for (k, &(r, s)) in self.probes.iter().enumerate() {
                    let r2 = r * r;
                    let sum: f64 = ws.field.iter().filter(|(x2, _)| *x2 > r2).map(|(_, c)| c).sum();
                    out[self.layout.probe(k)] = (-s * sum).exp();
                }
            }
            if let Some(d) = desired {
                let tier = self.config.tier(i);
                let power = fpc_power(tier.baseline_ue_power, tier.path_loss_exp, tier.fpc_factor, d, self.cap);
                let signal = power * exp1(&mut rng) * d.powf(-tier.path_loss_exp);
                let sinr = signal / (interference + self.config.noise_power());
                out[self.layout.excess(i)] = excess_nats(sinr, tier.sinr_threshold);
            }
        }
        Ok(())
    }
}

/// `(ln(1 + SINR) - ln(1 + T))⁺`.
fn excess_nats(sinr: f64, threshold: f64) -> f64 {
    if sinr > threshold {
        ((sinr - threshold) / (1.0 + threshold)).ln_1p()
    } else {
        0.0
    }
}

/// Runs the oracle for one access mode. `probes` lists `(r, s)` points at
/// which the interference Laplace transform is estimated.
///
/// Rates are the per-drop excess `(ln(1+SINR) - ln(1+T))⁺` scaled by
/// `W / n_i`, with the analytic UE count per BS `n_i`; the thinned
/// interferer intensities use the analytic association probabilities.
pub fn run_oracle(
    config: &NetworkConfig,
    mode: AccessMode,
    settings: &McSettings,
    probes: &[(f64, f64)],
) -> Result<OracleReport, McError> {
    settings.validate()?;
    let k = config.num_tiers();
    let assoc = association_probabilities(config, mode, &QuadratureSpec::default())?;
    let counts = ue_counts(config, &assoc);
    let layout = Layout {
        tiers: k,
        probes: probes.len(),
    };
    let ctx = Context {
        config,
        mode,
        settings: *settings,
        layout,
        probes,
        field_intensity: assoc.iter().map(|a| a * config.ue_intensity()).collect(),
        serving_intensity: (0..k).map(|j| serving_intensity(config, j, mode)).collect(),
        cap: if settings.apply_power_cap {
            config.ue_max_tx_power()
        } else {
            None
        },
    };

    let n = settings.num_drops;
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<Result<Moments, McError>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut ws = Workspace::default();
            let mut moments = Moments::new(layout.dim());
            let mut out = vec![0.0; layout.dim()];
            for drop in c * CHUNK..((c + 1) * CHUNK).min(n) {
                ctx.drop(drop, &mut ws, &mut out)?;
                moments.push(&out);
            }
            Ok(moments)
        })
        .collect();
    let mut moments = Moments::new(layout.dim());
    for m in partial {
        moments.merge(&m?);
    }

    let scales: Vec<(f64, f64, f64)> = (0..k)
        .map(|i| {
            (
                config.bandwidth() / counts.per_bs[i],
                config.tier(i).bs_intensity,
                counts.per_tier[i],
            )
        })
        .collect();
    let mut report = OracleReport {
        mode,
        settings: *settings,
        per_tier: Vec::new(),
        total_rate: McEstimate {
            mean: 0.0,
            std_error: 0.0,
            n,
        },
        total_se: McEstimate {
            mean: 0.0,
            std_error: 0.0,
            n,
        },
        total_ee: McEstimate {
            mean: 0.0,
            std_error: 0.0,
            n,
        },
        probes: probes.to_vec(),
        laplace: Vec::new(),
        layout,
        moments,
        scales,
    };

    for i in 0..k {
        let (rate_scale, lambda_b, _) = report.scales[i];
        let assoc_prob = report.estimate(&[layout.assoc(i)], |m| m[0]);
        let mean_tx_power = report.estimate(&report.power_indices(i), |m| report.power_of(m));
        let mean_rate = report.estimate(&[layout.excess(i)], |m| rate_scale * m[0]);
        let se = report.estimate(&[layout.excess(i)], |m| lambda_b * m[0]);
        let ee = report.tier_energy_efficiency(i, 0.0);
        report.per_tier.push(TierEstimates {
            assoc_prob,
            mean_tx_power,
            mean_rate,
            se,
            ee,
        });
    }
    let excess: Vec<usize> = (0..k).map(|i| layout.excess(i)).collect();
    let per_area: Vec<(f64, f64)> = report.scales.iter().map(|(w_n, lb, n)| (w_n * n, *lb)).collect();
    report.total_rate = report.estimate(&excess, |m| (0..k).map(|i| per_area[i].0 * m[i]).sum());
    report.total_se = report.estimate(&excess, |m| (0..k).map(|i| per_area[i].1 * m[i]).sum());
    report.total_ee = report.total_energy_efficiency(0.0);
    report.laplace = (0..probes.len())
        .map(|p| report.estimate(&[layout.probe(p)], |m| m[0]))
        .collect();
    Ok(report)
}
