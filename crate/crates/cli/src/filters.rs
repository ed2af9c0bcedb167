//! JSON export of a filter bank with its reconstruction diagnostics.

use edbsw_core::{Filter, FilterBank, PrReport};

/// 17 significant digits, enough to round-trip any `f64`.
fn num(x: f64) -> String {
    if x == 0.0 {
        "0.0".into()
    } else {
        format!("{x:.16e}")
    }
}

fn array(f: &Filter) -> String {
    let items: Vec<String> = f.coeffs().iter().map(|&v| num(v)).collect();
    format!("[{}]", items.join(", "))
}

/// Builds the export document. `L`, `degree` and `periodization_error` are
/// `null` for bundled classical banks.
pub fn filters_json(bank: &FilterBank, report: &PrReport) -> String {
    let (l, degree, per) = match bank.bcssw {
        Some(p) => (p.l.to_string(), p.degree.to_string(), num(report.periodization_error)),
        None => ("null".into(), "null".into(), "null".into()),
    };
    let name = serde_json::to_string(&bank.name).expect("string serialises");
    let start = |f: &Filter| f.start().to_string();
    format!(
        "{{\n  \"name\": {name},\n  \"L\": {l},\n  \"taps\": {taps},\n  \"degree\": {degree},\n  \
         \"synthesis_low\": {sl},\n  \"analysis_low\": {al},\n  \"synthesis_high\": {sh},\n  \
         \"analysis_high\": {ah},\n  \"start\": {{\"synthesis_low\": {s0}, \"analysis_low\": {s1}, \
         \"synthesis_high\": {s2}, \"analysis_high\": {s3}}},\n  \"pr_max_deviation\": {dev},\n  \
         \"alias_max\": {alias},\n  \"periodization_error\": {per}\n}}\n",
        taps = bank.synthesis_low.len(),
        sl = array(&bank.synthesis_low),
        al = array(&bank.analysis_low),
        sh = array(&bank.synthesis_high),
        ah = array(&bank.analysis_high),
        s0 = start(&bank.synthesis_low),
        s1 = start(&bank.analysis_low),
        s2 = start(&bank.synthesis_high),
        s3 = start(&bank.analysis_high),
        dev = num(report.max_deviation),
        alias = num(report.alias_max),
    )
}
