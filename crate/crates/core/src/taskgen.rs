//! Task-space trajectory generation.
//!
//! The production path is first-order: every task variable lags
//! exponentially toward an activation-blended target,
//!
//! ```text
//! dx/dt = (x_eff(t) - x) / tau,   x_eff = (1 - w) * x_neutral + w * x_target
//! ```
//!
//! integrated with the exact exponential update over each step (the effective
//! target is held constant across the step), which is unconditionally stable.
//!
//! A critically damped second-order generator for
//! `x'' + B x' + K (x - x_target) = 0` is kept as a reference path, together
//! with its closed form. Classical task dynamics would go on to map task
//! variables to articulator coordinates through `x = f(q)` and
//! `q' = J^-1(q) x'`; this crate deliberately does not: articulators are
//! driven directly from task trajectories in [`crate::articmap`].

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score::{Gesture, GestureScore, Location, TargetSet};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TaskGenError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("oracle domain error: {0}")]
    OracleDomain(String),
}

/// The closed set of task variables. Every score target drives exactly one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskVariableId {
    VocalicHeight,
    VocalicFronting,
    LipRounding,
    ConsonantalLabial,
    ConsonantalApical,
    ConsonantalDorsal,
    VelopharyngealAperture,
    GlottalAperture,
    SubglottalPressure,
}

impl TaskVariableId {
    pub const ALL: [TaskVariableId; 9] = [
        TaskVariableId::VocalicHeight,
        TaskVariableId::VocalicFronting,
        TaskVariableId::LipRounding,
        TaskVariableId::ConsonantalLabial,
        TaskVariableId::ConsonantalApical,
        TaskVariableId::ConsonantalDorsal,
        TaskVariableId::VelopharyngealAperture,
        TaskVariableId::GlottalAperture,
        TaskVariableId::SubglottalPressure,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TaskVariableId::VocalicHeight => "vocalic_height",
            TaskVariableId::VocalicFronting => "vocalic_fronting",
            TaskVariableId::LipRounding => "lip_rounding",
            TaskVariableId::ConsonantalLabial => "consonantal_labial",
            TaskVariableId::ConsonantalApical => "consonantal_apical",
            TaskVariableId::ConsonantalDorsal => "consonantal_dorsal",
            TaskVariableId::VelopharyngealAperture => "velopharyngeal_aperture",
            TaskVariableId::GlottalAperture => "glottal_aperture",
            TaskVariableId::SubglottalPressure => "subglottal_pressure",
        }
    }

    pub fn consonantal(location: Location) -> Self {
        match location {
            Location::Labial => TaskVariableId::ConsonantalLabial,
            Location::Apical => TaskVariableId::ConsonantalApical,
            Location::Dorsal => TaskVariableId::ConsonantalDorsal,
        }
    }

    fn index(self) -> usize {
        self as usize
    }

    /// Resting value of the variable. All task variables rest at zero.
    pub fn neutral(self) -> f64 {
        0.0
    }
}

impl fmt::Display for TaskVariableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The task variables a gesture drives, with their targets.
pub fn gesture_targets(gesture: &Gesture) -> Vec<(TaskVariableId, f64)> {
    match gesture.targets {
        TargetSet::Vocalic {
            vocalic_height,
            vocalic_fronting,
            lip_rounding,
        } => vec![
            (TaskVariableId::VocalicHeight, vocalic_height),
            (TaskVariableId::VocalicFronting, vocalic_fronting),
            (TaskVariableId::LipRounding, lip_rounding),
        ],
        TargetSet::Consonantal {
            location, strength, ..
        } => vec![(TaskVariableId::consonantal(location), strength)],
        TargetSet::Velopharyngeal { aperture } => {
            vec![(TaskVariableId::VelopharyngealAperture, aperture)]
        }
        TargetSet::Glottal { aperture } => vec![(TaskVariableId::GlottalAperture, aperture)],
        TargetSet::Pulmonary {
            subglottal_pressure,
        } => vec![(TaskVariableId::SubglottalPressure, subglottal_pressure)],
    }
}

/// Activation of a gesture at time `t`: zero outside `[onset, offset]`, one on
/// the plateau, raised-cosine rise and fall over `ramp_ms`.
pub fn activation_weight(gesture: &Gesture, t: f64) -> f64 {
    let (on, off, ramp) = (gesture.onset_ms, gesture.offset_ms, gesture.ramp_ms);
    if t < on || t > off {
        return 0.0;
    }
    if ramp <= 0.0 {
        return 1.0;
    }
    let u = ((t - on) / ramp).min((off - t) / ramp);
    if u >= 1.0 {
        1.0
    } else {
        0.5 * (1.0 - (PI * u).cos())
    }
}

/// Sampled task trajectories on the grid `t_k = k * dt_ms`, `k < n_steps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTrajectorySet {
    pub dt_ms: f64,
    pub n_steps: usize,
    pub series: BTreeMap<TaskVariableId, Vec<f64>>,
    pub activation: BTreeMap<TaskVariableId, Vec<f64>>,
}

/// Values and activations of every task variable at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaskSnapshot {
    values: [f64; 9],
    activations: [f64; 9],
}

impl TaskSnapshot {
    /// All variables at neutral with zero activation.
    pub fn neutral() -> Self {
        TaskSnapshot {
            values: TaskVariableId::ALL.map(TaskVariableId::neutral),
            activations: [0.0; 9],
        }
    }

    pub fn value(&self, id: TaskVariableId) -> f64 {
        self.values[id.index()]
    }

    pub fn activation(&self, id: TaskVariableId) -> f64 {
        self.activations[id.index()]
    }

    pub fn with(mut self, id: TaskVariableId, value: f64, activation: f64) -> Self {
        self.values[id.index()] = value;
        self.activations[id.index()] = activation;
        self
    }
}

impl TaskTrajectorySet {
    pub fn time_ms(&self, step: usize) -> f64 {
        step as f64 * self.dt_ms
    }

    pub fn snapshot(&self, step: usize) -> TaskSnapshot {
        let mut snap = TaskSnapshot::neutral();
        for id in TaskVariableId::ALL {
            snap.values[id.index()] = self.series[&id][step];
            snap.activations[id.index()] = self.activation[&id][step];
        }
        snap
    }
}

/// Number of grid points covering `[0, duration_ms)` at `dt_ms`.
pub fn step_count(duration_ms: f64, dt_ms: f64) -> usize {
    ((duration_ms / dt_ms).round() as usize).max(1)
}

struct VariablePlan<'a> {
    neutral: f64,
    gestures: Vec<(&'a Gesture, f64)>,
}

impl VariablePlan<'_> {
    /// Effective target, activation and time constant at `t`.
    ///
    /// Between gestures the variable relaxes toward neutral with the time
    /// constant of the most recently ended gesture, so a following gesture
    /// picks up from the continuous state.
    fn at(&self, t: f64) -> (f64, f64, Option<f64>) {
        let mut best: Option<(f64, f64, f64)> = None;
        let mut last_tau = None;
        for &(g, target) in &self.gestures {
            let w = activation_weight(g, t);
            if w > 0.0 && best.is_none_or(|(bw, _, _)| w > bw) {
                best = Some((w, target, g.time_constant_ms));
            }
            if g.onset_ms <= t {
                last_tau = Some(g.time_constant_ms);
            }
        }
        match best {
            Some((w, target, tau)) => ((1.0 - w) * self.neutral + w * target, w, Some(tau)),
            None => (self.neutral, 0.0, last_tau),
        }
    }
}

pub fn first_order_trajectories(
    score: &GestureScore,
    dt_ms: f64,
) -> Result<TaskTrajectorySet, TaskGenError> {
    if !(dt_ms.is_finite() && dt_ms > 0.0) {
        return Err(TaskGenError::Config(format!(
            "dt_ms must be positive, got {dt_ms}"
        )));
    }
    for (i, g) in score.gestures().iter().enumerate() {
        if dt_ms >= g.time_constant_ms / 2.0 {
            return Err(TaskGenError::Config(format!(
                "dt_ms {dt_ms} must be below half the time constant of gestures[{i}] ({} ms)",
                g.time_constant_ms
            )));
        }
    }

    let mut plans: BTreeMap<TaskVariableId, VariablePlan> = TaskVariableId::ALL
        .into_iter()
        .map(|id| {
            (
                id,
                VariablePlan {
                    neutral: id.neutral(),
                    gestures: Vec::new(),
                },
            )
        })
        .collect();
    for g in score.gestures() {
        for (id, target) in gesture_targets(g) {
            plans
                .get_mut(&id)
                .expect("all ids planned")
                .gestures
                .push((g, target));
        }
    }

    let n = step_count(score.duration_ms(), dt_ms);
    let mut series = BTreeMap::new();
    let mut activation = BTreeMap::new();
    for (id, plan) in &plans {
        let mut xs = Vec::with_capacity(n);
        let mut ws = Vec::with_capacity(n);
        let mut x = plan.neutral;
        for k in 0..n {
            let t = k as f64 * dt_ms;
            let (x_eff, w, tau) = plan.at(t);
            xs.push(x);
            ws.push(w);
            if let Some(tau) = tau {
                x = x_eff + (x - x_eff) * (-dt_ms / tau).exp();
            }
        }
        series.insert(*id, xs);
        activation.insert(*id, ws);
    }

    Ok(TaskTrajectorySet {
        dt_ms,
        n_steps: n,
        series,
        activation,
    })
}

/// Parameters of `x'' + B x' + K (x - x_target) = 0`, times in milliseconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SecondOrderParams {
    /// K, 1/ms^2.
    pub stiffness: f64,
    /// B, 1/ms.
    pub damping: f64,
    pub target: f64,
    pub x0: f64,
    /// Initial velocity, units/ms.
    pub v0: f64,
}

impl SecondOrderParams {
    /// Critically damped parameters (B = 2 sqrt(K)) for natural frequency `omega`.
    pub fn critically_damped(omega: f64, target: f64, x0: f64, v0: f64) -> Self {
        SecondOrderParams {
            stiffness: omega * omega,
            damping: 2.0 * omega,
            target,
            x0,
            v0,
        }
    }

    pub fn is_critically_damped(&self) -> bool {
        let critical = 2.0 * self.stiffness.sqrt();
        (self.damping - critical).abs() <= 1e-12 * critical
    }
}

/// Largest `omega * dt` accepted by [`second_order_trajectory`]. Classical
/// RK4 is stable for the critically damped oscillator well beyond this, but
/// accuracy degrades quickly past it.
pub const MAX_OMEGA_DT: f64 = 0.5;

/// Numerical solution sampled at `t_k = k * dt_ms` for `k = 0..=N`, where
/// `N = round(duration_ms / dt_ms)`, using the classical fourth-order
/// Runge-Kutta step.
pub fn second_order_trajectory(
    params: &SecondOrderParams,
    duration_ms: f64,
    dt_ms: f64,
) -> Result<Vec<f64>, TaskGenError> {
    if !(params.stiffness.is_finite() && params.stiffness > 0.0) {
        return Err(TaskGenError::Config(format!(
            "stiffness must be positive, got {}",
            params.stiffness
        )));
    }
    if !(dt_ms.is_finite() && dt_ms > 0.0) {
        return Err(TaskGenError::Config(format!(
            "dt_ms must be positive, got {dt_ms}"
        )));
    }
    if !(duration_ms.is_finite() && duration_ms >= 0.0) {
        return Err(TaskGenError::Config(format!(
            "duration_ms must be non-negative, got {duration_ms}"
        )));
    }
    let omega = params.stiffness.sqrt().max(params.damping.abs());
    if omega * dt_ms > MAX_OMEGA_DT {
        return Err(TaskGenError::Config(format!(
            "dt_ms {dt_ms} too large for stiffness {} (need omega*dt <= {MAX_OMEGA_DT})",
            params.stiffness
        )));
    }

    let (k, b, xt) = (params.stiffness, params.damping, params.target);
    let accel = |x: f64, v: f64| -b * v - k * (x - xt);
    let steps = (duration_ms / dt_ms).round() as usize;
    let mut out = Vec::with_capacity(steps + 1);
    let (mut x, mut v) = (params.x0, params.v0);
    out.push(x);
    let h = dt_ms;
    for _ in 0..steps {
        let (k1x, k1v) = (v, accel(x, v));
        let (k2x, k2v) = (
            v + 0.5 * h * k1v,
            accel(x + 0.5 * h * k1x, v + 0.5 * h * k1v),
        );
        let (k3x, k3v) = (
            v + 0.5 * h * k2v,
            accel(x + 0.5 * h * k2x, v + 0.5 * h * k2v),
        );
        let (k4x, k4v) = (v + h * k3v, accel(x + h * k3x, v + h * k3v));
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        out.push(x);
    }
    Ok(out)
}

/// Closed-form critically damped response
/// `x_target + (x0 - x_target)(1 + wt)e^(-wt) + v0 t e^(-wt)`.
pub fn analytic_second_order(params: &SecondOrderParams, t: f64) -> Result<f64, TaskGenError> {
    if !(params.stiffness > 0.0 && params.is_critically_damped()) {
        return Err(TaskGenError::OracleDomain(format!(
            "closed form needs B = 2 sqrt(K); got B = {}, K = {}",
            params.damping, params.stiffness
        )));
    }
    let omega = params.stiffness.sqrt();
    let decay = (-omega * t).exp();
    Ok(params.target
        + (params.x0 - params.target) * (1.0 + omega * t) * decay
        + params.v0 * t * decay)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::score::{make_cv_score, Consonant, Degree, Tier, Vowel};
    use approx::assert_abs_diff_eq;

    fn gesture(onset: f64, offset: f64, ramp: f64, tau: f64, height: f64) -> Gesture {
        Gesture {
            onset_ms: onset,
            offset_ms: offset,
            ramp_ms: ramp,
            time_constant_ms: tau,
            targets: TargetSet::Vocalic {
                vocalic_height: height,
                vocalic_fronting: 0.0,
                lip_rounding: 0.0,
            },
        }
    }

    #[test]
    fn activation_shape() {
        let g = gesture(60.0, 140.0, 20.0, 8.0, 1.0);
        assert_eq!(activation_weight(&g, 10.0), 0.0);
        assert_eq!(activation_weight(&g, 60.0), 0.0);
        assert_eq!(activation_weight(&g, 80.0), 1.0);
        assert_eq!(activation_weight(&g, 100.0), 1.0);
        assert_eq!(activation_weight(&g, 120.0), 1.0);
        assert_eq!(activation_weight(&g, 140.0), 0.0);
        assert_eq!(activation_weight(&g, 150.0), 0.0);
        // (1 - cos(pi/2)) / 2
        assert_abs_diff_eq!(activation_weight(&g, 70.0), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(activation_weight(&g, 130.0), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn step_activation_without_ramp() {
        let g = gesture(10.0, 20.0, 0.0, 8.0, 1.0);
        assert_eq!(activation_weight(&g, 9.99), 0.0);
        assert_eq!(activation_weight(&g, 10.0), 1.0);
        assert_eq!(activation_weight(&g, 20.0), 1.0);
        assert_eq!(activation_weight(&g, 20.01), 0.0);
    }

    #[test]
    fn first_order_step_response_matches_exponential() {
        let score =
            GestureScore::new("step", 400.0, vec![gesture(100.0, 400.0, 0.0, 50.0, 1.0)]).unwrap();
        let tasks = first_order_trajectories(&score, 0.1).unwrap();
        let h = &tasks.series[&TaskVariableId::VocalicHeight];
        let k = (150.0_f64 / 0.1).round() as usize;
        assert_abs_diff_eq!(h[k], 1.0 - (-1.0_f64).exp(), epsilon = 1e-3);
        // five time constants of plateau
        let k5 = (350.0_f64 / 0.1).round() as usize;
        assert!((1.0 - h[k5]).abs() < 0.01);
    }

    #[test]
    fn untouched_variables_stay_neutral() {
        let score =
            GestureScore::new("v", 100.0, vec![gesture(0.0, 100.0, 10.0, 20.0, 1.0)]).unwrap();
        let tasks = first_order_trajectories(&score, 1.0).unwrap();
        assert_eq!(tasks.n_steps, 100);
        for id in TaskVariableId::ALL {
            assert_eq!(tasks.series[&id].len(), 100);
            assert_eq!(tasks.activation[&id].len(), 100);
        }
        assert!(tasks.series[&TaskVariableId::GlottalAperture]
            .iter()
            .all(|&x| x == 0.0));
        assert!(tasks.activation[&TaskVariableId::ConsonantalApical]
            .iter()
            .all(|&w| w == 0.0));
    }

    #[test]
    fn stability_guard_rejects_coarse_steps() {
        let score = make_cv_score(Consonant::P, Vowel::A);
        assert!(matches!(
            first_order_trajectories(&score, 4.0),
            Err(TaskGenError::Config(_))
        ));
        assert!(first_order_trajectories(&score, 3.9).is_ok());
        assert!(first_order_trajectories(&score, 0.0).is_err());
        assert!(first_order_trajectories(&score, f64::NAN).is_err());
    }

    #[test]
    fn consonantal_strength_drives_its_location() {
        let score = make_cv_score(Consonant::T, Vowel::A);
        let tasks = first_order_trajectories(&score, 1.0).unwrap();
        let apical = &tasks.series[&TaskVariableId::ConsonantalApical];
        assert!(apical[120] > 0.99);
        assert!(tasks.series[&TaskVariableId::ConsonantalLabial]
            .iter()
            .all(|&x| x == 0.0));
        let g = score.gestures_on(Tier::Consonantal).next().unwrap();
        assert!(matches!(
            g.targets,
            TargetSet::Consonantal {
                degree: Degree::FullClosure,
                ..
            }
        ));
    }

    #[test]
    fn abutting_gestures_retarget_from_current_state() {
        let score = GestureScore::new(
            "two",
            200.0,
            vec![
                gesture(0.0, 100.0, 0.0, 20.0, 1.0),
                gesture(100.0, 200.0, 0.0, 20.0, -1.0),
            ],
        )
        .unwrap();
        let tasks = first_order_trajectories(&score, 1.0).unwrap();
        let h = &tasks.series[&TaskVariableId::VocalicHeight];
        assert!(h[100] > 0.99);
        assert!(h[199] < -0.98);
        // no jump at the boundary
        assert!((h[101] - h[100]).abs() < 0.1);
    }

    #[test]
    fn second_order_closed_form_example() {
        let p = SecondOrderParams::critically_damped(1e-3, 0.0, 1.0, 0.0);
        assert_eq!(p.stiffness, 1e-6);
        assert_eq!(p.damping, 2e-3);
        let expected = 2.0 / std::f64::consts::E;
        assert_abs_diff_eq!(
            analytic_second_order(&p, 1000.0).unwrap(),
            expected,
            epsilon = 1e-12
        );
        assert_eq!(analytic_second_order(&p, 0.0).unwrap(), 1.0);
        let xs = second_order_trajectory(&p, 1000.0, 0.1).unwrap();
        assert_eq!(xs.len(), 10_001);
        assert_abs_diff_eq!(xs[10_000], expected, epsilon = 1e-5);
    }

    #[test]
    fn second_order_equilibrium_is_constant() {
        let p = SecondOrderParams::critically_damped(0.05, 0.7, 0.7, 0.0);
        let xs = second_order_trajectory(&p, 200.0, 0.1).unwrap();
        assert!(xs.iter().all(|&x| x == 0.7));
        for t in [0.0, 1.0, 50.0, 1e4] {
            assert_eq!(analytic_second_order(&p, t).unwrap(), 0.7);
        }
    }

    #[test]
    fn second_order_errors() {
        let mut p = SecondOrderParams::critically_damped(0.01, 0.0, 1.0, 0.0);
        assert!(second_order_trajectory(&p, 10.0, 0.0).is_err());
        assert!(second_order_trajectory(&p, 10.0, 100.0).is_err());
        p.stiffness = 0.0;
        assert!(second_order_trajectory(&p, 10.0, 0.1).is_err());
        p.stiffness = -1.0;
        assert!(matches!(
            second_order_trajectory(&p, 10.0, 0.1),
            Err(TaskGenError::Config(_))
        ));
    }

    #[test]
    fn oracle_rejects_non_critical_damping() {
        let mut p = SecondOrderParams::critically_damped(0.01, 0.0, 1.0, 0.0);
        p.damping *= 1.0 + 1e-9;
        assert!(matches!(
            analytic_second_order(&p, 1.0),
            Err(TaskGenError::OracleDomain(_))
        ));
    }

    #[test]
    fn snapshot_reads_every_variable() {
        let score = make_cv_score(Consonant::P, Vowel::U);
        let tasks = first_order_trajectories(&score, 1.0).unwrap();
        let snap = tasks.snapshot(100);
        for id in TaskVariableId::ALL {
            assert_eq!(snap.value(id), tasks.series[&id][100]);
            assert_eq!(snap.activation(id), tasks.activation[&id][100]);
        }
    }
}
