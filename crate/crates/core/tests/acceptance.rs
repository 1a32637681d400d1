//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails.

use std::process::Command;
use std::time::Instant;

use hetnet_duda::analytic::{association_probabilities, ue_counts, UplinkModel};
use hetnet_duda::cli::{column, figure_sweep, validation_checks, Check, Metric};
use hetnet_duda::mc::{InterfererMode, McSettings};
use hetnet_duda::model::{builtin_scenario, AccessMode, NetworkConfig};
use hetnet_duda::special::{gamma_fn, hyp2f1_interference, hyp2f1_interference_quadrature, QuadratureSpec};

const SCENARIOS: [&str; 2] = ["table2_pico", "table2_femto"];
const EPSILONS: [f64; 3] = [0.5, 0.75, 1.0];
const DROPS: u64 = 100_000;
const RADIUS: f64 = 50.0;
const SEED: u64 = 1;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn near(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn scenario(name: &str) -> NetworkConfig {
    builtin_scenario(name).expect("built-in scenario")
}

fn criterion_1() -> Outcome {
    let spec = QuadratureSpec::default();
    let start = Instant::now();
    let pico = association_probabilities(&scenario("table2_pico"), AccessMode::Duda, &spec).unwrap();
    let femto = association_probabilities(&scenario("table2_femto"), AccessMode::Duda, &spec).unwrap();
    let elapsed = start.elapsed();
    let load = |name: &str, a: &[f64]| ue_counts(&scenario(name), a).load_ratio(0, 1);
    let (lp, lf) = (load("table2_pico", &pico), load("table2_femto", &femto));
    let passed = near(pico[0], 0.20, 0.005)
        && near(pico[1], 0.80, 0.005)
        && near(femto[0], 0.11, 0.005)
        && near(femto[1], 0.89, 0.005)
        && near(femto[0], 1.0 / 9.0, 1e-12)
        && near(lp, 1.0, 1e-12)
        && near(lf, 1.0, 1e-12)
        && elapsed.as_secs_f64() < 1e-3;
    outcome(
        passed,
        format!(
            "pico {:.4}/{:.4}, femto {:.4}/{:.4}, load {lp}:1 and {lf}:1, {:?}",
            pico[0], pico[1], femto[0], femto[1], elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let spec = QuadratureSpec::default();
    let start = Instant::now();
    let pico = association_probabilities(&scenario("table2_pico"), AccessMode::CudaMeanFading, &spec).unwrap();
    let femto = association_probabilities(&scenario("table2_femto"), AccessMode::CudaMeanFading, &spec).unwrap();
    let elapsed = start.elapsed();
    let lp = ue_counts(&scenario("table2_pico"), &pico).load_ratio(0, 1);
    let lf = ue_counts(&scenario("table2_femto"), &femto).load_ratio(0, 1);
    let passed = near(pico[0], 0.69, 0.03)
        && near(pico[1], 0.31, 0.03)
        && near(femto[0], 0.65, 0.03)
        && near(femto[1], 0.35, 0.03)
        && near(lp, 8.9, 0.3)
        && near(lf, 14.9, 0.3)
        && elapsed.as_secs_f64() < 1.0;
    outcome(
        passed,
        format!(
            "pico {:.4}/{:.4} load {lp:.4}, femto {:.4}/{:.4} load {lf:.4}, {:?}",
            pico[0], pico[1], femto[0], femto[1], elapsed
        ),
    )
}

/// Grid point of criteria 3 and 4: both tiers at `eps`, no noise, T = 0.1.
fn grid_config(name: &str, eps: f64) -> NetworkConfig {
    let mut c = scenario(name).with_globals(|g| g.noise_power = 0.0).unwrap();
    for i in 0..c.num_tiers() {
        c = c
            .with_tier(i, |t| {
                t.fpc_factor = eps;
                t.sinr_threshold = 0.1;
            })
            .unwrap();
    }
    c
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let kinds = ["assoc_prob", "mean_power", "laplace", "rate["];
    let mut tally = [(0usize, 0usize, 0.0f64); 4];
    for name in SCENARIOS {
        for eps in EPSILONS {
            let config = grid_config(name, eps);
            let settings = McSettings {
                region_radius: RADIUS,
                num_drops: DROPS,
                seed: SEED,
                interferer_mode: InterfererMode::IndependentThinned,
                apply_power_cap: false,
            };
            for mode in AccessMode::ALL {
                let checks: Vec<Check> = validation_checks(&config, mode, &settings, None).unwrap();
                for c in &checks {
                    if let Some(k) = kinds.iter().position(|p| c.metric.starts_with(p)) {
                        let t = &mut tally[k];
                        t.0 += usize::from(c.passed());
                        t.1 += 1;
                        t.2 = t.2.max(c.z());
                        if !c.passed() {
                            println!(
                                "    {name} eps={eps} {:<11} {:<34} analytic {:.6e}  mc {:.6e} ± {:.2e}  z {:.1}",
                                mode.as_str(),
                                c.metric,
                                c.analytic,
                                c.mc.mean,
                                c.mc.std_error,
                                c.z()
                            );
                        }
                    }
                }
            }
        }
    }
    let passed = tally.iter().all(|t| t.0 == t.1);
    let names = ["assoc", "power", "laplace", "rate"];
    let detail = names
        .iter()
        .zip(&tally)
        .map(|(n, t)| format!("{n} {}/{} (max z {:.1})", t.0, t.1, t.2))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(passed, format!("{detail}, {:.0} s", start.elapsed().as_secs_f64()))
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for name in SCENARIOS {
        for eps in EPSILONS {
            let config = grid_config(name, eps);
            for mode in AccessMode::ALL {
                let model = UplinkModel::new(&config, mode, QuadratureSpec::default()).unwrap();
                let report = model.report(None).unwrap();
                for t in &report.per_tier {
                    let expected = t.assoc_prob * config.ue_intensity() * t.mean_rate / config.bandwidth();
                    worst = worst.max(((t.se - expected) / expected).abs());
                }
            }
        }
    }
    outcome(worst < 1e-6, format!("max relative gap {worst:.2e}"))
}

fn criterion_5() -> Outcome {
    let tight = QuadratureSpec::new(1e-13, 0.0, 10_000).unwrap();
    let mut worst = 0.0f64;
    for alpha in [2.5, 3.5, 3.8, 4.3, 6.0] {
        for z in [0.0, -0.1, -1.0, -5.0, -10.0, -1000.0] {
            let fast = hyp2f1_interference(alpha, z).unwrap();
            let slow = hyp2f1_interference_quadrature(alpha, z, &tight).unwrap();
            worst = worst.max(((fast - slow) / slow).abs());
        }
    }
    let g1 = (gamma_fn(1.0).unwrap() - 1.0).abs();
    let gh = (gamma_fn(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() / std::f64::consts::PI.sqrt();
    outcome(
        worst < 1e-10 && g1 < 1e-12 && gh < 1e-12,
        format!("2F1 max rel {worst:.1e}, Γ(1) err {g1:.1e}, Γ(½) rel {gh:.1e}"),
    )
}

fn values(points: &[(f64, f64)]) -> Vec<f64> {
    points.iter().map(|p| p.1).collect()
}

fn nonincreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] <= w[0])
}

fn criterion_6() -> Outcome {
    let rows = figure_sweep("tier[*].epsilon", Metric::TotalSe, false).unwrap();
    let d = values(&column(&rows, AccessMode::Duda, "total_se"));
    let c = values(&column(&rows, AccessMode::CudaMeanFading, "total_se"));
    let ratios: Vec<f64> = d.iter().zip(&c).map(|(a, b)| a / b).collect();
    let min_ratio = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    outcome(
        min_ratio > 2.0 && nonincreasing(&d) && nonincreasing(&c),
        format!(
            "min SE ratio {min_ratio:.3}, DUDA nonincreasing {}, CUDA nonincreasing {}",
            nonincreasing(&d),
            nonincreasing(&c)
        ),
    )
}

fn criterion_7() -> Outcome {
    let rows = figure_sweep("tier[*].epsilon", Metric::TotalEe, false).unwrap();
    let d = values(&column(&rows, AccessMode::Duda, "total_ee"));
    let c = values(&column(&rows, AccessMode::CudaMeanFading, "total_ee"));
    let gap: Vec<f64> = d.iter().zip(&c).map(|(a, b)| a - b).collect();
    let above = gap.iter().all(|g| *g > 0.0);
    outcome(
        above && nonincreasing(&gap),
        format!(
            "DUDA above CUDA {above}, gap {:.4e} → {:.4e}",
            gap[0],
            gap[gap.len() - 1]
        ),
    )
}

fn criterion_8() -> Outcome {
    let rows = figure_sweep("tier[*].epsilon", Metric::Rate, false).unwrap();
    let get = |mode, tier| values(&column(&rows, mode, tier));
    let (dm, dp) = (
        get(AccessMode::Duda, "rate[macro]"),
        get(AccessMode::Duda, "rate[pico]"),
    );
    let (cm, cp) = (
        get(AccessMode::CudaMeanFading, "rate[macro]"),
        get(AccessMode::CudaMeanFading, "rate[pico]"),
    );
    let macro_below = cm.iter().zip(&cp).all(|(m, p)| m < p);
    let closer = (0..dm.len()).all(|k| (dm[k] / dp[k]).ln().abs() < (cm[k] / cp[k]).ln().abs());
    outcome(
        macro_below && closer,
        format!(
            "CUDA macro below pico {macro_below}, DUDA ratio closer to 1 {closer} (at 0.5: DUDA {:.3}, CUDA {:.3})",
            dm[0] / dp[0],
            cm[0] / cp[0]
        ),
    )
}

fn spread(v: &[f64]) -> f64 {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    max / min - 1.0
}

fn criterion_9() -> Outcome {
    let vary_macro = figure_sweep("tier[0].epsilon", Metric::TotalRate, false).unwrap();
    let vary_pico = figure_sweep("tier[1].epsilon", Metric::TotalRate, false).unwrap();
    let cuda_macro = values(&column(&vary_macro, AccessMode::CudaMeanFading, "total_rate"));
    let cuda_pico = values(&column(&vary_pico, AccessMode::CudaMeanFading, "total_rate"));
    let duda_macro = values(&column(&vary_macro, AccessMode::Duda, "total_rate"));
    let duda_pico = values(&column(&vary_pico, AccessMode::Duda, "total_rate"));
    let growth = cuda_macro[cuda_macro.len() - 1] / cuda_macro[0];
    let (sm, sp) = (spread(&duda_macro), spread(&duda_pico));
    let passed = (4.0..=10.0).contains(&growth) && nonincreasing(&cuda_pico) && sm < 0.5 && sp < 0.5;
    outcome(
        passed,
        format!(
            "CUDA growth over ε_macro {growth:.3}, CUDA nonincreasing in ε_pico {}, DUDA spread {sm:.3} / {sp:.3}",
            nonincreasing(&cuda_pico)
        ),
    )
}

fn criterion_10() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_hetnet-duda"))
            .args([
                "validate",
                "--config",
                "table2_femto",
                "--drops",
                "10000",
                "--radius",
                "50",
                "--seed",
                "17",
            ])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let same = !a.stdout.is_empty() && a.stdout == b.stdout;
    outcome(same, format!("{} report bytes, identical {same}", a.stdout.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("DUDA association and load", criterion_1),
        ("CUDA association and load", criterion_2),
        ("oracle equivalence", criterion_3),
        ("SE/rate identity", criterion_4),
        ("special functions", criterion_5),
        ("SE trend vs FPC", criterion_6),
        ("EE trend vs FPC", criterion_7),
        ("per-tier rate trend", criterion_8),
        ("total rate trend", criterion_9),
        ("validate determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        let status = if o.passed { "PASS" } else { "FAIL" };
        failed += usize::from(!o.passed);
        println!("criterion {:>2} {status} {name}: {}", k + 1, o.detail);
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
