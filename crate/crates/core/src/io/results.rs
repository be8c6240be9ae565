//! Result files: the JSON report, point and front CSVs, schedule files and
//! Gantt CSVs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::annotate::SCHEMA_VERSION;
use crate::dse::{DseStats, ExploredPoint, Front};
use crate::energy::power_profile;
use crate::error::{Error, Result};
use crate::graph::{DecisionVector, MarkedGraph};
use crate::rational::Rational;
use crate::timing::Schedule;

/// Significant digits of the decimal renderings next to exact values.
pub const DECIMAL_DIGITS: usize = 6;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRecord {
    pub period: Rational,
    pub period_decimal: String,
    pub energy: Rational,
    pub energy_decimal: String,
    pub x: DecisionVector,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub endpoint: bool,
}

impl From<&ExploredPoint> for PointRecord {
    fn from(p: &ExploredPoint) -> Self {
        PointRecord {
            period: p.period.clone(),
            period_decimal: p.period.to_decimal(DECIMAL_DIGITS),
            energy: p.energy.clone(),
            energy_decimal: p.energy.to_decimal(DECIMAL_DIGITS),
            x: p.x.clone(),
            endpoint: p.endpoint,
        }
    }
}

impl From<PointRecord> for ExploredPoint {
    fn from(r: PointRecord) -> Self {
        ExploredPoint {
            period: r.period,
            energy: r.energy,
            x: r.x,
            endpoint: r.endpoint,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRecord {
    pub lp_calls: u64,
    pub milp_calls: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elapsed_seconds: Option<f64>,
}

impl StatsRecord {
    pub fn new(stats: &DseStats, with_timing: bool) -> Self {
        StatsRecord {
            lp_calls: stats.lp_calls,
            milp_calls: stats.milp_calls,
            elapsed_seconds: with_timing.then_some(stats.elapsed.as_secs_f64()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub graph: String,
    pub actors: usize,
    pub groups: usize,
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<Rational>,
    pub period_min: Rational,
    pub period_max: Rational,
    pub stats: StatsRecord,
    pub points: Vec<PointRecord>,
    pub front: Vec<PointRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypervolume_ratio: Option<Rational>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypervolume_ratio_decimal: Option<String>,
}

impl Report {
    pub fn front(&self) -> Front {
        Front {
            points: self.front.iter().cloned().map(ExploredPoint::from).collect(),
        }
    }
}

pub fn write_report(report: &Report) -> String {
    let mut text = serde_json::to_string_pretty(report).expect("report serializes");
    text.push('\n');
    text
}

pub fn read_report(text: &str) -> Result<Report> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::parse("report", e.to_string()))?;
    check_schema(&value)?;
    serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))
}

fn check_schema(value: &serde_json::Value) -> Result<()> {
    match value.get("schema").and_then(|v| v.as_u64()) {
        Some(v) if v == SCHEMA_VERSION as u64 => Ok(()),
        Some(v) => Err(Error::Schema(format!(
            "schema {v} is not supported (expected {SCHEMA_VERSION})"
        ))),
        None => Err(Error::Schema("missing \"schema\" field".into())),
    }
}

pub const POINTS_HEADER: &str = "P_num,P_den,E_num,E_den,x_bits";

/// One row per point with exact numerators and denominators.
pub fn points_csv<'a>(points: impl IntoIterator<Item = &'a ExploredPoint>) -> String {
    let mut out = String::from(POINTS_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            p.period.numer(),
            p.period.denom(),
            p.energy.numer(),
            p.energy.denom(),
            p.x
        );
    }
    out
}

/// Reads the CSV written by [`points_csv`].
pub fn read_points_csv(text: &str) -> Result<Vec<ExploredPoint>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == POINTS_HEADER => {}
        _ => return Err(Error::Schema(format!("expected header {POINTS_HEADER:?}"))),
    }
    lines
        .map(|(n, line)| {
            let ctx = || format!("points csv line {}", n + 1);
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(Error::parse(ctx(), format!("expected 5 columns, got {}", cols.len())));
            }
            let rat = |num: &str, den: &str| {
                Rational::parse(&format!("{num}/{den}")).map_err(|e| Error::parse(ctx(), e.to_string()))
            };
            Ok(ExploredPoint::new(
                rat(cols[0], cols[1])?,
                rat(cols[2], cols[3])?,
                cols[4].parse().map_err(|e: Error| Error::parse(ctx(), e.to_string()))?,
            ))
        })
        .collect()
}

/// Reads a front from either a points CSV or a JSON report.
pub fn read_front_file(text: &str) -> Result<Front> {
    if text.trim_start().starts_with('{') {
        Ok(read_report(text)?.front())
    } else {
        Ok(crate::dse::pareto_filter(&read_points_csv(text)?))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleFile {
    pub schema: u32,
    pub x: DecisionVector,
    #[serde(flatten)]
    pub schedule: Schedule,
}

impl ScheduleFile {
    pub fn new(x: DecisionVector, schedule: Schedule) -> Self {
        ScheduleFile {
            schema: SCHEMA_VERSION,
            x,
            schedule,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("schedule serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::parse("schedule file", e.to_string()))?;
        check_schema(&value)?;
        serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// Plot-friendly number: exact when the decimal terminates.
fn plot_number(v: &Rational) -> String {
    v.to_exact_decimal().unwrap_or_else(|| v.to_decimal(DECIMAL_DIGITS))
}

pub const GANTT_HEADER: &str = "actor,kind,start,duration,power";

/// One row per phase of every actor over one period of `schedule`.
pub fn gantt_csv(g: &MarkedGraph, x: &DecisionVector, schedule: &Schedule) -> Result<String> {
    let fire = schedule.fireability_times(g, x)?;
    let mut out = String::from(GANTT_HEADER);
    out.push('\n');
    for (a, t) in g.actors().iter().zip(&fire) {
        for seg in power_profile(a, x.get(a.group), &schedule.period, t)? {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                a.name,
                seg.kind.as_str(),
                plot_number(&seg.start),
                plot_number(&seg.duration),
                plot_number(&seg.power)
            );
        }
    }
    Ok(out)
}
