//! Report files and their JSON, CSV and text renderings.

use std::fmt::Write as _;

use mrank::linalg::{IntMatrix, SmithDecomposition};
use mrank::natext::{NatextReport, TowerReport, Verdict};
use mrank::trajectory::{MeanRankReport, Quantity, Status};
use mrank::Rational;
use serde::{Deserialize, Serialize};

/// Everything except `timing` is a deterministic function of the spec and flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub input: serde_json::Value,
    pub result: Outcome,
    pub timing: Timing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub elapsed_ms: f64,
    pub workers: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "type")]
pub enum Outcome {
    MeanRank(MeanRankReport),
    Natext(NatextReport),
    Tower(TowerReport),
    Snf(SnfOutput),
}

/// Integers as decimal strings so that arbitrary sizes survive any JSON reader.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SnfOutput {
    pub u: Vec<Vec<String>>,
    pub d: Vec<Vec<String>>,
    pub v: Vec<Vec<String>>,
    pub divisors: Vec<String>,
}

fn rows(m: &IntMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

impl From<&SmithDecomposition> for SnfOutput {
    fn from(s: &SmithDecomposition) -> Self {
        Self { u: rows(&s.u), d: rows(&s.d), v: rows(&s.v), divisors: s.diagonal.iter().map(ToString::to_string).collect() }
    }
}

impl Outcome {
    /// 0 resolved, 2 a theorem check disagreed, 3 only bounds were obtained.
    pub fn exit_code(&self) -> i32 {
        match self {
            Outcome::MeanRank(r) => if r.is_resolved() { 0 } else { 3 },
            Outcome::Natext(r) => match r.verdict {
                Verdict::Equal => 0,
                Verdict::Disagree => 2,
                Verdict::Unresolved => 3,
            },
            Outcome::Tower(r) => if r.supremum.is_some() { 0 } else { 3 },
            Outcome::Snf(_) => 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

pub fn render(report: &ReportFile, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("report serializes") + "\n",
        Format::Csv => csv(&report.result),
        Format::Text => text(report),
    }
}

fn sequence_rows(out: &mut String, prefix: &str, seq: &[usize]) {
    for (i, &a) in seq.iter().enumerate() {
        let n = i as u64 + 1;
        let r = Rational::new(a as u64, n);
        let _ = writeln!(out, "{prefix}{n},{a},{r},{:.6}", r.to_f64());
    }
}

fn csv(outcome: &Outcome) -> String {
    let mut out = String::new();
    match outcome {
        Outcome::MeanRank(r) => {
            out.push_str("n,a_n,ratio,decimal\n");
            sequence_rows(&mut out, "", &r.rank_sequence);
        }
        Outcome::Natext(r) => {
            out.push_str("leg,n,a_n,ratio,decimal\n");
            for leg in &r.legs {
                sequence_rows(&mut out, &format!("{},", leg.name), &leg.report.rank_sequence);
            }
        }
        Outcome::Tower(r) => {
            out.push_str("level,n,a_n,ratio,decimal\n");
            for (i, l) in r.levels.iter().enumerate() {
                sequence_rows(&mut out, &format!("{i},"), &l.rank_sequence);
            }
        }
        Outcome::Snf(s) => {
            out.push_str("index,divisor\n");
            for (i, d) in s.divisors.iter().enumerate() {
                let _ = writeln!(out, "{},{d}", i + 1);
            }
        }
    }
    out
}

fn opt(r: Option<Rational>) -> String {
    r.map_or_else(|| "unresolved".to_string(), |r| r.to_string())
}

fn status(s: Status) -> &'static str {
    match s {
        Status::ExactForced => "exact-forced",
        Status::IncrementStable => "increment-stable",
        Status::BoundOnly => "bound-only",
    }
}

fn summary(out: &mut String, indent: &str, r: &MeanRankReport) {
    let what = match r.quantity {
        Quantity::MeanRank => "mean rank",
        Quantity::MeanDimension => "mean dimension",
    };
    let _ = writeln!(out, "{indent}{what}: {} ({})", opt(r.estimate), status(r.status));
    let _ = writeln!(out, "{indent}upper bound: {}", opt(r.upper_bound));
    let _ = writeln!(out, "{indent}stopped: {:?} after {} generating sets", r.stop_reason, r.schedule_trace.len());
    if let Some(last) = r.schedule_trace.last() {
        let head: Vec<String> = last.rank_sequence.iter().take(12).map(ToString::to_string).collect();
        let more = if last.rank_sequence.len() > 12 { ", …" } else { "" };
        let _ = writeln!(out, "{indent}ranks for {}: {}{more}", last.label, head.join(", "));
    }
    for c in &r.citations {
        let _ = writeln!(out, "{indent}by: {c}");
    }
}

fn text(report: &ReportFile) -> String {
    let mut out = String::new();
    match &report.result {
        Outcome::MeanRank(r) => summary(&mut out, "", r),
        Outcome::Natext(r) => {
            for leg in &r.legs {
                let _ = writeln!(out, "[{}]", leg.name);
                summary(&mut out, "  ", &leg.report);
            }
            let verdict = match r.verdict {
                Verdict::Equal => "equal",
                Verdict::Disagree => "DISAGREE",
                Verdict::Unresolved => "unresolved",
            };
            let _ = writeln!(out, "verdict: {verdict} (value {})", opt(r.value));
            for c in &r.citations {
                let _ = writeln!(out, "by: {c}");
            }
        }
        Outcome::Tower(r) => {
            for (i, (l, s)) in r.levels.iter().zip(&r.running_sup).enumerate() {
                let _ = writeln!(out, "[level {i}] running sup {}", opt(*s));
                summary(&mut out, "  ", l);
            }
            let _ = writeln!(out, "supremum: {} ({}), {}", opt(r.supremum), status(r.status), r.note);
            for c in &r.citations {
                let _ = writeln!(out, "by: {c}");
            }
        }
        Outcome::Snf(s) => {
            for (name, m) in [("U", &s.u), ("D", &s.d), ("V", &s.v)] {
                let _ = writeln!(out, "{name} =");
                for row in m {
                    let _ = writeln!(out, "  [{}]", row.join(", "));
                }
            }
            let _ = writeln!(out, "divisors: ({})", s.divisors.join(", "));
        }
    }
    out
}
