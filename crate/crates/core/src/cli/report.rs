use crate::mc::McEstimate;

pub const CSV_HEADER: [&str; 8] = [
    "scenario", "mode", "param", "value", "metric", "analytic", "mc_mean", "mc_se",
];

/// One CSV line. `param`/`value` are empty outside sweeps; the mc columns are
/// empty for analytic-only runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub scenario: String,
    pub mode: String,
    pub param: String,
    pub value: Option<f64>,
    pub metric: String,
    pub analytic: f64,
    pub mc: Option<McEstimate>,
}

/// `%.9g`: nine significant digits, trailing zeros trimmed, scientific
/// notation outside `[1e-4, 1e9)`.
pub fn format_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp) as usize;
        trim_zeros(&format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa))
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

pub fn write_csv(rows: &[ReportRow]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("in-memory write");
    for r in rows {
        let value = r.value.map(format_sig9).unwrap_or_default();
        let (mean, se) = match &r.mc {
            Some(e) => (format_sig9(e.mean), format_sig9(e.std_error)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            r.scenario.as_str(),
            r.mode.as_str(),
            r.param.as_str(),
            value.as_str(),
            r.metric.as_str(),
            format_sig9(r.analytic).as_str(),
            mean.as_str(),
            se.as_str(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}
