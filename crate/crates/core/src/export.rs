//! CSV export, run manifests and the frame bundle handed to front ends.
//!
//! Both CSV layouts are comma separated with a mandatory header, dot
//! decimals, six fractional digits and LF line endings:
//!
//! ```text
//! control:      t_ms,<task_variable>...,act_<task_variable>...
//! displacement: t_ms,upper_lip_y,lower_lip_y,tongue_tip_y,tongue_dorsum_y,jaw_y
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::articmap::{ArticulatorFrame, SynergyConfig};
use crate::fleshpoints::{FleshPoint, FleshPointTrajectorySet};
use crate::score::{serialize_score, GestureScore};
use crate::taskgen::{TaskTrajectorySet, TaskVariableId};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("{0}")]
    Malformed(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(',');
        }
        first = false;
        // -0.000000 would make otherwise equal files differ
        let v = if v == 0.0 { 0.0 } else { v };
        write!(out, "{v:.6}").expect("writing to a String");
    }
    out.push('\n');
}

pub fn control_header() -> String {
    let mut cols = vec!["t_ms".to_string()];
    cols.extend(TaskVariableId::ALL.iter().map(|id| id.name().to_string()));
    cols.extend(
        TaskVariableId::ALL
            .iter()
            .map(|id| format!("act_{}", id.name())),
    );
    cols.join(",")
}

pub fn displacement_header() -> String {
    std::iter::once("t_ms")
        .chain(FleshPoint::ALL.iter().map(|p| p.column()))
        .collect::<Vec<_>>()
        .join(",")
}

pub fn control_csv(tasks: &TaskTrajectorySet) -> String {
    let mut out = control_header();
    out.push('\n');
    for k in 0..tasks.n_steps {
        let row = std::iter::once(tasks.time_ms(k))
            .chain(TaskVariableId::ALL.iter().map(|id| tasks.series[id][k]))
            .chain(TaskVariableId::ALL.iter().map(|id| tasks.activation[id][k]));
        push_row(&mut out, row);
    }
    out
}

pub fn displacement_csv(trajs: &FleshPointTrajectorySet) -> String {
    let mut out = displacement_header();
    out.push('\n');
    for k in 0..trajs.len() {
        let row = std::iter::once(trajs.time_ms(k))
            .chain(FleshPoint::ALL.iter().map(|p| trajs.get(*p)[k]));
        push_row(&mut out, row);
    }
    out
}

/// Parses a displacement CSV written by [`displacement_csv`].
pub fn parse_displacement_csv(text: &str) -> Result<FleshPointTrajectorySet, CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    let expected = displacement_header();
    let got: Vec<&str> = headers.iter().collect();
    if got.join(",") != expected {
        return Err(CsvError::Malformed(format!(
            "unexpected header '{}', expected '{expected}'",
            got.join(",")
        )));
    }
    let mut times = Vec::new();
    let mut series: BTreeMap<FleshPoint, Vec<f64>> = FleshPoint::ALL
        .into_iter()
        .map(|p| (p, Vec::new()))
        .collect();
    for (line, rec) in reader.records().enumerate() {
        let rec = rec?;
        let parse = |i: usize| -> Result<f64, CsvError> {
            rec.get(i)
                .ok_or_else(|| {
                    CsvError::Malformed(format!("row {}: missing column {i}", line + 2))
                })?
                .parse::<f64>()
                .map_err(|e| CsvError::Malformed(format!("row {}: {e}", line + 2)))
        };
        times.push(parse(0)?);
        for (j, p) in FleshPoint::ALL.iter().enumerate() {
            series.get_mut(p).expect("all points").push(parse(j + 1)?);
        }
    }
    if times.is_empty() {
        return Err(CsvError::Malformed("no data rows".into()));
    }
    let dt_ms = if times.len() > 1 {
        times[1] - times[0]
    } else {
        1.0
    };
    if !(dt_ms > 0.0) {
        return Err(CsvError::Malformed(format!(
            "non-increasing t_ms column (dt = {dt_ms})"
        )));
    }
    Ok(FleshPointTrajectorySet {
        dt_ms,
        t0_ms: times[0],
        series,
    })
}

/// Hex SHA-256 over the canonical config and score documents.
pub fn config_hash(cfg: &SynergyConfig, score: &GestureScore) -> String {
    let mut h = Sha256::new();
    h.update(cfg.to_json().as_bytes());
    h.update(b"\n");
    h.update(serialize_score(score).as_bytes());
    hex::encode(h.finalize())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub label: String,
    pub config_hash: String,
    pub dt_ms: f64,
    pub outputs: Vec<String>,
    /// Unix seconds.
    pub timestamp: u64,
}

/// Everything a front end needs to display and export one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameBundle {
    pub manifest: RunManifest,
    pub control: String,
    pub displacement: String,
    pub frames: Vec<ArticulatorFrame>,
}

impl FrameBundle {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("bundle always serializes")
    }
}

pub fn control_file_name(timestamp: u64) -> String {
    format!("control_{timestamp}.csv")
}

pub fn displacement_file_name(timestamp: u64) -> String {
    format!("displacement_{timestamp}.csv")
}

pub fn manifest_file_name(timestamp: u64) -> String {
    format!("manifest_{timestamp}.json")
}
