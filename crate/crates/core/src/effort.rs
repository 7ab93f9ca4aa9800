//! Quadratic effort cost of articulator displacements.
//!
//! Producing a displacement `l` costs `l^2`, so covering the same distance
//! with several cooperating articulators is cheaper than with one: a single
//! articulator moving 2 units costs 4, two articulators moving 1 unit each
//! cost 2.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::articmap::ArticulatorFrame;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EffortError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: {0}")]
    Range(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Articulator {
    Jaw,
    UpperLip,
    LowerLip,
    TongueTip,
    TongueDorsum,
}

impl Articulator {
    pub const ALL: [Articulator; 5] = [
        Articulator::Jaw,
        Articulator::UpperLip,
        Articulator::LowerLip,
        Articulator::TongueTip,
        Articulator::TongueDorsum,
    ];

    /// The displacement this articulator produces itself. Jaw-borne
    /// articulators are measured by their own action only; what the jaw
    /// carries is paid for by the jaw.
    fn own_position(self, f: &ArticulatorFrame) -> f64 {
        match self {
            Articulator::Jaw => f.jaw_y,
            Articulator::UpperLip => f.upper_lip_y,
            Articulator::LowerLip => f.lower_lip_active,
            Articulator::TongueTip => f.tongue_tip_active,
            Articulator::TongueDorsum => f.tongue_dorsum_active,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffortReport {
    pub per_articulator: BTreeMap<Articulator, f64>,
    pub total_cost: f64,
}

pub fn effort_cost(displacements: &[f64]) -> f64 {
    displacements.iter().map(|l| l * l).sum()
}

/// Cost of one articulator covering `total` versus `n` articulators sharing it
/// equally: `(total^2, total^2 / n)`.
pub fn split_comparison(total: f64, n: usize) -> Result<(f64, f64), EffortError> {
    if n == 0 {
        return Err(EffortError::Domain(
            "cannot split a displacement over zero articulators".into(),
        ));
    }
    // n * (total/n)^2 in closed form, so the ratio is exactly n
    let single = effort_cost(&[total]);
    Ok((single, single / n as f64))
}

/// Peak displacement from the value at the window start, per articulator,
/// over frames with `from_ms <= t < to_ms`.
pub fn report_from_frames(
    frames: &[ArticulatorFrame],
    closure_window: (f64, f64),
) -> Result<EffortReport, EffortError> {
    let (from, to) = closure_window;
    if !(from < to) {
        return Err(EffortError::Range(format!("empty window {from}..{to} ms")));
    }
    let inside: Vec<&ArticulatorFrame> = frames
        .iter()
        .filter(|f| f.t_ms >= from && f.t_ms < to)
        .collect();
    let Some(baseline) = inside.first() else {
        return Err(EffortError::Range(format!(
            "window {from}..{to} ms contains no frames"
        )));
    };
    let per_articulator: BTreeMap<Articulator, f64> = Articulator::ALL
        .into_iter()
        .map(|a| {
            let base = a.own_position(baseline);
            let l = inside
                .iter()
                .map(|f| (a.own_position(f) - base).abs())
                .fold(0.0, f64::max);
            (a, l)
        })
        .collect();
    let total_cost = effort_cost(&per_articulator.values().copied().collect::<Vec<_>>());
    Ok(EffortReport {
        per_articulator,
        total_cost,
    })
}
