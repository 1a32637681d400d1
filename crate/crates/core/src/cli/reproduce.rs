//! Data behind the `table1` and `fig2`..`fig5` targets. Every figure is a
//! pivot of [`sweep_rows`] output over `tier[*].epsilon`, `tier[0].epsilon` or
//! `tier[1].epsilon` from 0.5 to 1.0 in steps of 0.1 on `table2_pico`, with
//! `cuda_mean` as the coupled mode.

use std::fmt::Write;
use std::str::FromStr;

use crate::model::{builtin_scenario, AccessMode, ParamPath};

use super::{
    bar_chart, evaluate, format_sig9, line_plot, sweep_rows, CliError, EvalOptions, Metric, ReportRow, Series,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReproduceTarget {
    Table1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl ReproduceTarget {
    pub fn as_str(self) -> &'static str {
        match self {
            ReproduceTarget::Table1 => "table1",
            ReproduceTarget::Fig2 => "fig2",
            ReproduceTarget::Fig3 => "fig3",
            ReproduceTarget::Fig4 => "fig4",
            ReproduceTarget::Fig5 => "fig5",
        }
    }
}

impl FromStr for ReproduceTarget {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "table1" => ReproduceTarget::Table1,
            "fig2" => ReproduceTarget::Fig2,
            "fig3" => ReproduceTarget::Fig3,
            "fig4" => ReproduceTarget::Fig4,
            "fig5" => ReproduceTarget::Fig5,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown target `{other}` (expected table1, fig2, fig3, fig4 or fig5)"
                )))
            }
        })
    }
}

pub struct ReproduceOutput {
    pub csv: String,
    pub svg: String,
    /// Printed to stdout.
    pub summary: String,
    /// A `table1` comparison failed.
    pub failed: bool,
}

/// One `table1` line with the published DUDA and CUDA values.
#[derive(Debug, Clone, PartialEq)]
pub struct Table1Row {
    pub scenario: String,
    pub item: String,
    pub duda: f64,
    pub cuda: f64,
    pub published_duda: f64,
    pub published_cuda: f64,
    pub tol_duda: f64,
    pub tol_cuda: f64,
}

impl Table1Row {
    pub fn passed(&self) -> bool {
        (self.duda - self.published_duda).abs() <= self.tol_duda
            && (self.cuda - self.published_cuda).abs() <= self.tol_cuda
    }
}

const ASSOC_TOL_DUDA: f64 = 0.005;
const ASSOC_TOL_CUDA: f64 = 0.03;
const LOAD_TOL_DUDA: f64 = 1e-9;
const LOAD_TOL_CUDA: f64 = 0.3;

/// `(scenario, [MBS duda, MBS cuda, SBS duda, SBS cuda, load duda, load cuda])`.
const TABLE1: [(&str, [f64; 6]); 2] = [
    ("table2_pico", [0.20, 0.69, 0.80, 0.31, 1.0, 8.9]),
    ("table2_femto", [0.11, 0.65, 0.89, 0.35, 1.0, 14.9]),
];

pub fn table1_rows() -> Result<Vec<Table1Row>, CliError> {
    let mut rows = Vec::new();
    for (scenario, published) in TABLE1 {
        let config = builtin_scenario(scenario).expect("built-in scenario");
        let metrics = [Metric::AssocProb, Metric::UePerBs];
        let opts = EvalOptions::default();
        let duda = evaluate(scenario, &config, AccessMode::Duda, &metrics, &opts, None)?;
        let cuda = evaluate(scenario, &config, AccessMode::CudaMeanFading, &metrics, &opts, None)?;
        // Rows come back as assoc[macro], assoc[small], ue_per_bs[macro], ue_per_bs[small].
        let values = |r: &[ReportRow]| [r[0].analytic, r[1].analytic, r[2].analytic / r[3].analytic];
        let (d, c) = (values(&duda), values(&cuda));
        let small = &config.tier(1).name;
        let items = [
            "assoc_prob[macro]".to_string(),
            format!("assoc_prob[{small}]"),
            format!("load_ratio[macro/{small}]"),
        ];
        for (k, item) in items.into_iter().enumerate() {
            let load = k == 2;
            rows.push(Table1Row {
                scenario: scenario.to_string(),
                item,
                duda: d[k],
                cuda: c[k],
                published_duda: published[2 * k],
                published_cuda: published[2 * k + 1],
                tol_duda: if load { LOAD_TOL_DUDA } else { ASSOC_TOL_DUDA },
                tol_cuda: if load { LOAD_TOL_CUDA } else { ASSOC_TOL_CUDA },
            });
        }
    }
    Ok(rows)
}

fn table1() -> Result<ReproduceOutput, CliError> {
    let rows = table1_rows()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "scenario",
        "item",
        "duda",
        "cuda",
        "published_duda",
        "published_cuda",
        "tol_duda",
        "tol_cuda",
        "status",
    ])
    .expect("in-memory write");
    let mut summary = String::new();
    writeln!(
        summary,
        "{:<13} {:<24} {:>12} {:>12} {:>10} {:>10}  status",
        "scenario", "item", "duda", "cuda", "published_duda", "published_cuda"
    )
    .unwrap();
    for r in &rows {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        w.write_record([
            r.scenario.clone(),
            r.item.clone(),
            format_sig9(r.duda),
            format_sig9(r.cuda),
            format_sig9(r.published_duda),
            format_sig9(r.published_cuda),
            format_sig9(r.tol_duda),
            format_sig9(r.tol_cuda),
            status.to_string(),
        ])
        .expect("in-memory write");
        writeln!(
            summary,
            "{:<13} {:<24} {:>12.4} {:>12.4} {:>10} {:>10}  {status}",
            r.scenario,
            r.item,
            r.duda,
            r.cuda,
            format_sig9(r.published_duda),
            format_sig9(r.published_cuda)
        )
        .unwrap();
    }
    let assoc: Vec<&Table1Row> = rows.iter().filter(|r| r.item.starts_with("assoc")).collect();
    let categories: Vec<String> = assoc
        .iter()
        .map(|r| {
            format!(
                "{} {}",
                r.scenario.trim_start_matches("table2_"),
                r.item.trim_start_matches("assoc_prob")
            )
        })
        .collect();
    let svg = bar_chart(
        "Association probability",
        "probability",
        &categories,
        &[
            ("DUDA".into(), assoc.iter().map(|r| r.duda).collect()),
            ("CUDA".into(), assoc.iter().map(|r| r.cuda).collect()),
        ],
    );
    Ok(ReproduceOutput {
        csv: String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8"),
        svg,
        summary,
        failed: rows.iter().any(|r| !r.passed()),
    })
}

/// The FPC grid 0.5, 0.6, …, 1.0.
pub fn epsilon_grid() -> Vec<f64> {
    (0..=5).map(|k| 0.5 + 0.1 * k as f64).collect()
}

/// Sweep of `param` over [`epsilon_grid`] on `table2_pico`, DUDA and CUDA (mean).
pub fn figure_sweep(param: &str, metric: Metric, bits: bool) -> Result<Vec<ReportRow>, CliError> {
    let config = builtin_scenario("table2_pico").expect("built-in scenario");
    let param: ParamPath = param.parse()?;
    let opts = EvalOptions {
        bits,
        ..EvalOptions::default()
    };
    sweep_rows(
        "table2_pico",
        &config,
        &param,
        &epsilon_grid(),
        &[AccessMode::Duda, AccessMode::CudaMeanFading],
        &[metric],
        &opts,
    )
}

/// Value of `metric` for `mode` at each grid point of a sweep.
pub fn column(rows: &[ReportRow], mode: AccessMode, metric: &str) -> Vec<(f64, f64)> {
    rows.iter()
        .filter(|r| r.mode == mode.as_str() && r.metric == metric)
        .map(|r| (r.value.expect("sweep rows carry a value"), r.analytic))
        .collect()
}

struct Figure {
    title: &'static str,
    y_label: String,
    columns: Vec<(String, Vec<(f64, f64)>)>,
}

fn render(fig: Figure) -> ReproduceOutput {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["epsilon".to_string()];
    header.extend(fig.columns.iter().map(|c| c.0.clone()));
    w.write_record(&header).expect("in-memory write");
    let n = fig.columns[0].1.len();
    for k in 0..n {
        let mut record = vec![format_sig9(fig.columns[0].1[k].0)];
        record.extend(fig.columns.iter().map(|c| format_sig9(c.1[k].1)));
        w.write_record(&record).expect("in-memory write");
    }
    let csv = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8");
    let series: Vec<Series> = fig
        .columns
        .into_iter()
        .map(|(name, points)| Series { name, points })
        .collect();
    ReproduceOutput {
        svg: line_plot(fig.title, "FPC factor", &fig.y_label, &series),
        summary: csv.clone(),
        csv,
        failed: false,
    }
}

pub fn reproduce(target: ReproduceTarget, bits: bool) -> Result<ReproduceOutput, CliError> {
    let unit = if bits { "bits" } else { "nats" };
    let duda = AccessMode::Duda;
    let cuda = AccessMode::CudaMeanFading;
    let fig = match target {
        ReproduceTarget::Table1 => return table1(),
        ReproduceTarget::Fig2 => {
            let rows = figure_sweep("tier[*].epsilon", Metric::TotalSe, bits)?;
            Figure {
                title: "Average SE, equal FPC factors",
                y_label: format!("SE ({unit}/s/Hz/m²)"),
                columns: vec![
                    ("se_duda".into(), column(&rows, duda, "total_se")),
                    ("se_cuda".into(), column(&rows, cuda, "total_se")),
                ],
            }
        }
        ReproduceTarget::Fig3 => {
            let rows = figure_sweep("tier[*].epsilon", Metric::TotalEe, bits)?;
            Figure {
                title: "Average EE, equal FPC factors",
                y_label: format!("EE ({unit}/J)"),
                columns: vec![
                    ("ee_duda".into(), column(&rows, duda, "total_ee")),
                    ("ee_cuda".into(), column(&rows, cuda, "total_ee")),
                ],
            }
        }
        ReproduceTarget::Fig4 => {
            let rows = figure_sweep("tier[*].epsilon", Metric::Rate, bits)?;
            Figure {
                title: "Average rate per tier, equal FPC factors",
                y_label: format!("rate ({unit}/s)"),
                columns: vec![
                    ("rate_macro_duda".into(), column(&rows, duda, "rate[macro]")),
                    ("rate_pico_duda".into(), column(&rows, duda, "rate[pico]")),
                    ("rate_macro_cuda".into(), column(&rows, cuda, "rate[macro]")),
                    ("rate_pico_cuda".into(), column(&rows, cuda, "rate[pico]")),
                ],
            }
        }
        ReproduceTarget::Fig5 => {
            let macro_rows = figure_sweep("tier[0].epsilon", Metric::TotalRate, bits)?;
            let pico_rows = figure_sweep("tier[1].epsilon", Metric::TotalRate, bits)?;
            Figure {
                title: "Total rate, one FPC factor fixed at 0.5",
                y_label: format!("rate ({unit}/s/m²)"),
                columns: vec![
                    ("duda_vary_macro".into(), column(&macro_rows, duda, "total_rate")),
                    ("cuda_vary_macro".into(), column(&macro_rows, cuda, "total_rate")),
                    ("duda_vary_pico".into(), column(&pico_rows, duda, "total_rate")),
                    ("cuda_vary_pico".into(), column(&pico_rows, cuda, "total_rate")),
                ],
            }
        }
    };
    Ok(render(fig))
}
