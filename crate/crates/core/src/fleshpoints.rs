//! Flesh-point trajectories, analysis windows and the nine-syllable
//! qualitative checks.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::articmap::ArticulatorFrame;
use crate::score::{Consonant, Location, Syllable, Vowel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FleshPointError {
    #[error("no frames to extract flesh points from")]
    EmptyInput,
    #[error("range error: {0}")]
    Range(String),
    #[error("missing syllable /{0}/")]
    MissingSyllable(String),
}

/// The five tracked landmarks, in export column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FleshPoint {
    UpperLip,
    LowerLip,
    TongueTip,
    TongueDorsum,
    Jaw,
}

impl FleshPoint {
    pub const ALL: [FleshPoint; 5] = [
        FleshPoint::UpperLip,
        FleshPoint::LowerLip,
        FleshPoint::TongueTip,
        FleshPoint::TongueDorsum,
        FleshPoint::Jaw,
    ];

    /// Column name in displacement CSVs.
    pub fn column(self) -> &'static str {
        match self {
            FleshPoint::UpperLip => "upper_lip_y",
            FleshPoint::LowerLip => "lower_lip_y",
            FleshPoint::TongueTip => "tongue_tip_y",
            FleshPoint::TongueDorsum => "tongue_dorsum_y",
            FleshPoint::Jaw => "jaw_y",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            FleshPoint::UpperLip => "upper lip",
            FleshPoint::LowerLip => "lower lip",
            FleshPoint::TongueTip => "tongue tip",
            FleshPoint::TongueDorsum => "tongue dorsum",
            FleshPoint::Jaw => "lower jaw",
        }
    }
}

impl fmt::Display for FleshPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Vertical flesh-point positions sampled at `t0_ms + k * dt_ms`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FleshPointTrajectorySet {
    pub dt_ms: f64,
    pub t0_ms: f64,
    pub series: BTreeMap<FleshPoint, Vec<f64>>,
}

impl FleshPointTrajectorySet {
    pub fn len(&self) -> usize {
        self.series.values().next().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn time_ms(&self, k: usize) -> f64 {
        self.t0_ms + k as f64 * self.dt_ms
    }

    pub fn duration_ms(&self) -> f64 {
        self.len() as f64 * self.dt_ms
    }

    pub fn get(&self, p: FleshPoint) -> &[f64] {
        &self.series[&p]
    }

    /// Sample indices whose time lies in `[from_ms, to_ms]` (absolute times).
    pub fn indices_between(&self, from_ms: f64, to_ms: f64) -> std::ops::Range<usize> {
        let eps = 1e-9 * self.dt_ms;
        let start = ((from_ms - self.t0_ms) / self.dt_ms - eps).ceil().max(0.0) as usize;
        let end = (((to_ms - self.t0_ms) / self.dt_ms + eps).floor() as isize + 1).max(0) as usize;
        start.min(self.len())..end.min(self.len())
    }
}

pub fn extract(frames: &[ArticulatorFrame]) -> Result<FleshPointTrajectorySet, FleshPointError> {
    let first = frames.first().ok_or(FleshPointError::EmptyInput)?;
    let dt_ms = match frames.get(1) {
        Some(second) => second.t_ms - first.t_ms,
        None => 1.0,
    };
    let mut series: BTreeMap<FleshPoint, Vec<f64>> = FleshPoint::ALL
        .into_iter()
        .map(|p| (p, Vec::with_capacity(frames.len())))
        .collect();
    for f in frames {
        let rendered_lower = f.lower_lip_y.min(f.upper_lip_y + f.lip_compression);
        for (p, v) in [
            (FleshPoint::UpperLip, f.upper_lip_y),
            (FleshPoint::LowerLip, rendered_lower),
            (FleshPoint::TongueTip, f.tongue_tip_y),
            (FleshPoint::TongueDorsum, f.tongue_dorsum_y),
            (FleshPoint::Jaw, f.jaw_y),
        ] {
            series.get_mut(&p).expect("all points present").push(v);
        }
    }
    Ok(FleshPointTrajectorySet {
        dt_ms,
        t0_ms: first.t_ms,
        series,
    })
}

/// Slice `[from_ms, to_ms)` measured from the start of `trajs`.
///
/// Offsets are relative, so `window(&window(x, a, b)?, 0.0, b - a)` is
/// `window(x, a, b)`.
pub fn window(
    trajs: &FleshPointTrajectorySet,
    from_ms: f64,
    to_ms: f64,
) -> Result<FleshPointTrajectorySet, FleshPointError> {
    let end = trajs.duration_ms();
    let tol = 1e-9 * trajs.dt_ms;
    if !(from_ms >= 0.0 && from_ms < to_ms && to_ms <= end + tol) {
        return Err(FleshPointError::Range(format!(
            "window {from_ms}..{to_ms} ms outside 0..{end} ms"
        )));
    }
    let i0 = (from_ms / trajs.dt_ms).round() as usize;
    let i1 = ((to_ms / trajs.dt_ms).round() as usize).min(trajs.len());
    if i0 >= i1 {
        return Err(FleshPointError::Range(format!(
            "window {from_ms}..{to_ms} ms holds no samples at dt {} ms",
            trajs.dt_ms
        )));
    }
    Ok(FleshPointTrajectorySet {
        dt_ms: trajs.dt_ms,
        t0_ms: trajs.t0_ms + i0 as f64 * trajs.dt_ms,
        series: trajs
            .series
            .iter()
            .map(|(p, v)| (*p, v[i0..i1].to_vec()))
            .collect(),
    })
}

/// Minimum Pearson correlation between a non-primary flesh point and the jaw
/// over the closure interval for the co-movement check.
pub const CO_MOVEMENT_MIN_CORRELATION: f64 = 0.5;

/// Flesh points that are not forming the closure for a given place.
pub fn non_primary_points(location: Location) -> &'static [FleshPoint] {
    match location {
        Location::Labial => &[FleshPoint::TongueTip, FleshPoint::TongueDorsum],
        Location::Apical => &[FleshPoint::LowerLip],
        Location::Dorsal => &[FleshPoint::LowerLip, FleshPoint::TongueTip],
    }
}

/// One simulated syllable as seen by the checks.
#[derive(Debug, Clone)]
pub struct SyllableRun {
    pub trajs: FleshPointTrajectorySet,
    /// Consonantal activation interval, absolute ms.
    pub closure_ms: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub checks: Vec<CheckResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckResult> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report always serializes");
        s.push('\n');
        s
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {}: {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    if n < 2 {
        return f64::NAN;
    }
    let mean = |x: &[f64]| x[..n].iter().sum::<f64>() / n as f64;
    let (ma, mb) = (mean(a), mean(b));
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let (da, db) = (a[i] - ma, b[i] - mb);
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    sab / (saa * sbb).sqrt()
}

fn closure_slice(run: &SyllableRun, p: FleshPoint) -> &[f64] {
    let r = run
        .trajs
        .indices_between(run.closure_ms.0, run.closure_ms.1);
    &run.trajs.get(p)[r]
}

fn peak(xs: &[f64]) -> f64 {
    xs.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckResult {
    CheckResult {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Ordinal checks over the nine plosive-vowel syllables.
///
/// Peaks are taken over each syllable's closure interval. Every threshold is
/// fixed here; the result is a pure function of the trajectories.
pub fn qualitative_checks(
    runs: &BTreeMap<Syllable, SyllableRun>,
) -> Result<CheckReport, FleshPointError> {
    for syl in Syllable::all() {
        match runs.get(&syl) {
            Some(run) if !run.trajs.is_empty() => {}
            _ => return Err(FleshPointError::MissingSyllable(syl.to_string())),
        }
    }
    let mut checks = Vec::new();

    for syl in Syllable::all() {
        let run = &runs[&syl];
        let jaw = run.trajs.get(FleshPoint::Jaw);
        let argmax = jaw
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            })
            .0;
        let t = run.trajs.time_ms(argmax);
        let (on, off) = run.closure_ms;
        checks.push(check(
            format!("jaw_peak_during_closure/{syl}"),
            t >= on && t <= off,
            format!("jaw peaks at {t} ms, closure {on}-{off} ms"),
        ));
    }

    let ti = peak(closure_slice(
        &runs[&Syllable::new(Consonant::T, Vowel::I)],
        FleshPoint::Jaw,
    ));
    let ta = peak(closure_slice(
        &runs[&Syllable::new(Consonant::T, Vowel::A)],
        FleshPoint::Jaw,
    ));
    checks.push(check(
        "jaw_ti_below_ta",
        ti < ta,
        format!("peak jaw /ti/ {ti:.6} vs /ta/ {ta:.6}"),
    ));

    for vowel in Vowel::ALL {
        let syl = Syllable::new(Consonant::P, vowel);
        let run = &runs[&syl];
        let upper = closure_slice(run, FleshPoint::UpperLip);
        let lower = closure_slice(run, FleshPoint::LowerLip);
        let compression = upper
            .iter()
            .zip(lower)
            .map(|(u, l)| l - u)
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(check(
            format!("labial_saturation/{syl}"),
            compression > 0.0,
            format!("max compression {compression:.6} (aperture 0 when positive)"),
        ));
    }

    for syl in Syllable::all() {
        let run = &runs[&syl];
        let jaw = closure_slice(run, FleshPoint::Jaw);
        for &p in non_primary_points(syl.consonant.location()) {
            let r = pearson(closure_slice(run, p), jaw);
            checks.push(check(
                format!("co_movement/{syl}/{}", p.column()),
                r > CO_MOVEMENT_MIN_CORRELATION,
                format!("correlation with jaw {r:.4} (threshold {CO_MOVEMENT_MIN_CORRELATION})"),
            ));
        }
    }

    let pa = runs[&Syllable::new(Consonant::P, Vowel::A)]
        .trajs
        .get(FleshPoint::Jaw);
    let (initial, last) = (pa[0], pa[pa.len() - 1]);
    checks.push(check(
        "pa_final_jaw_below_initial",
        last < initial,
        format!("jaw initial {initial:.6}, final {last:.6}"),
    ));

    Ok(CheckReport { checks })
}
