//! Python bindings, importable as `articulodyn_py`.

use std::collections::BTreeMap;

use articulodyn::articmap::{self, LipClosureSource, SynergyConfig};
use articulodyn::effort::{self, Articulator};
use articulodyn::export;
use articulodyn::fleshpoints::{self, FleshPoint};
use articulodyn::pipeline;
use articulodyn::score::{self, GestureScore, Location, Syllable, Vowel};
use articulodyn::taskgen::{self, SecondOrderParams, TaskVariableId};
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

/// (name, passed, detail)
type CheckRow = (String, bool, String);
type Columns = BTreeMap<&'static str, Vec<f64>>;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn syllable(s: &str) -> PyResult<Syllable> {
    s.parse().map_err(PyValueError::new_err)
}

fn location(name: &str) -> PyResult<Location> {
    Location::ALL
        .into_iter()
        .find(|l| l.name() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown location '{name}'")))
}

fn vowel(name: &str) -> PyResult<Vowel> {
    Vowel::ALL
        .into_iter()
        .find(|v| v.symbol().to_string() == name)
        .ok_or_else(|| PyValueError::new_err(format!("unknown vowel '{name}'")))
}

fn articulator_name(a: Articulator) -> &'static str {
    match a {
        Articulator::Jaw => "jaw",
        Articulator::UpperLip => "upper_lip",
        Articulator::LowerLip => "lower_lip",
        Articulator::TongueTip => "tongue_tip",
        Articulator::TongueDorsum => "tongue_dorsum",
    }
}

fn flesh_columns(trajs: &fleshpoints::FleshPointTrajectorySet) -> Columns {
    FleshPoint::ALL
        .into_iter()
        .map(|p| (p.column(), trajs.get(p).to_vec()))
        .collect()
}

/// A validated gestural score.
#[pyclass(name = "Score", module = "articulodyn_py", eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyScore(GestureScore);

#[pymethods]
impl PyScore {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        score::parse_score(text).map(PyScore).map_err(value_error)
    }

    /// Built-in plosive-vowel score such as `"pa"` or `"/ku/"`.
    #[staticmethod]
    fn cv(name: &str) -> PyResult<Self> {
        let s = syllable(name)?;
        Ok(PyScore(score::make_cv_score(s.consonant, s.vowel)))
    }

    fn to_json(&self) -> String {
        score::serialize_score(&self.0)
    }

    #[getter]
    fn label(&self) -> &str {
        self.0.label()
    }

    #[getter]
    fn duration_ms(&self) -> f64 {
        self.0.duration_ms()
    }

    #[getter]
    fn n_gestures(&self) -> usize {
        self.0.gestures().len()
    }

    #[getter]
    fn closure_interval(&self) -> Option<(f64, f64)> {
        self.0.closure_interval()
    }

    fn __repr__(&self) -> String {
        format!(
            "Score(label={:?}, duration_ms={}, gestures={})",
            self.0.label(),
            self.0.duration_ms(),
            self.0.gestures().len()
        )
    }
}

/// Load-sharing configuration. Setters do not validate; simulation does.
#[pyclass(name = "Config", module = "articulodyn_py", eq, from_py_object)]
#[derive(Clone, PartialEq)]
struct PyConfig(SynergyConfig);

#[pymethods]
impl PyConfig {
    #[new]
    fn new() -> Self {
        PyConfig(SynergyConfig::default())
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        SynergyConfig::from_json(text)
            .map(PyConfig)
            .map_err(value_error)
    }

    fn to_json(&self) -> String {
        self.0.to_json()
    }

    fn validate(&self) -> PyResult<()> {
        self.0.validate().map_err(value_error)
    }

    #[getter]
    fn jaw_to_lip_coupling(&self) -> f64 {
        self.0.jaw_to_lip_coupling
    }

    #[setter]
    fn set_jaw_to_lip_coupling(&mut self, v: f64) {
        self.0.jaw_to_lip_coupling = v;
    }

    #[getter]
    fn jaw_to_tongue_coupling(&self) -> f64 {
        self.0.jaw_to_tongue_coupling
    }

    #[setter]
    fn set_jaw_to_tongue_coupling(&mut self, v: f64) {
        self.0.jaw_to_tongue_coupling = v;
    }

    #[getter]
    fn dorsum_support_gain(&self) -> f64 {
        self.0.dorsum_support_gain
    }

    #[setter]
    fn set_dorsum_support_gain(&mut self, v: f64) {
        self.0.dorsum_support_gain = v;
    }

    #[getter]
    fn dorsum_deform_gain(&self) -> f64 {
        self.0.dorsum_deform_gain
    }

    #[setter]
    fn set_dorsum_deform_gain(&mut self, v: f64) {
        self.0.dorsum_deform_gain = v;
    }

    /// `"consonantal"` or `"vocalic"`.
    #[getter]
    fn lip_closure_source(&self) -> &'static str {
        match self.0.lip_closure_source {
            LipClosureSource::Consonantal => "consonantal",
            LipClosureSource::Vocalic => "vocalic",
        }
    }

    #[setter]
    fn set_lip_closure_source(&mut self, v: &str) -> PyResult<()> {
        self.0.lip_closure_source = match v {
            "consonantal" => LipClosureSource::Consonantal,
            "vocalic" => LipClosureSource::Vocalic,
            _ => {
                return Err(PyValueError::new_err(format!(
                    "unknown lip closure source '{v}'"
                )))
            }
        };
        Ok(())
    }

    fn jaw_cons(&self, location_name: &str) -> PyResult<f64> {
        let loc = location(location_name)?;
        self.0
            .jaw_cons_table
            .get(&loc)
            .copied()
            .ok_or_else(|| PyValueError::new_err(format!("no jaw_cons entry for {location_name}")))
    }

    fn set_jaw_cons(&mut self, location_name: &str, value: f64) -> PyResult<()> {
        self.0
            .jaw_cons_table
            .insert(location(location_name)?, value);
        Ok(())
    }

    fn vowel_jaw(&self, vowel_name: &str) -> PyResult<f64> {
        let v = vowel(vowel_name)?;
        self.0
            .vowel_jaw_table
            .get(&v)
            .copied()
            .ok_or_else(|| PyValueError::new_err(format!("no vowel_jaw entry for {vowel_name}")))
    }

    fn set_vowel_jaw(&mut self, vowel_name: &str, value: f64) -> PyResult<()> {
        self.0.vowel_jaw_table.insert(vowel(vowel_name)?, value);
        Ok(())
    }
}

/// One simulated run: task trajectories, articulator frames, flesh points.
#[pyclass(name = "Simulation", module = "articulodyn_py", frozen)]
struct PySimulation {
    sim: pipeline::Simulation,
    cfg: SynergyConfig,
}

#[pymethods]
impl PySimulation {
    #[getter]
    fn dt_ms(&self) -> f64 {
        self.sim.tasks.dt_ms
    }

    #[getter]
    fn n_frames(&self) -> usize {
        self.sim.frames.len()
    }

    #[getter]
    fn label(&self) -> &str {
        self.sim.score.label()
    }

    fn time_ms(&self) -> Vec<f64> {
        (0..self.sim.tasks.n_steps)
            .map(|k| self.sim.tasks.time_ms(k))
            .collect()
    }

    /// Flesh-point series keyed by CSV column name.
    fn flesh_points(&self) -> Columns {
        flesh_columns(&self.sim.flesh)
    }

    /// Flesh-point series for `[from_ms, to_ms)` relative to the run start.
    fn window(&self, from_ms: f64, to_ms: f64) -> PyResult<Columns> {
        fleshpoints::window(&self.sim.flesh, from_ms, to_ms)
            .map(|w| flesh_columns(&w))
            .map_err(value_error)
    }

    fn task_series(&self) -> Columns {
        TaskVariableId::ALL
            .into_iter()
            .map(|id| (id.name(), self.sim.tasks.series[&id].clone()))
            .collect()
    }

    fn activations(&self) -> Columns {
        TaskVariableId::ALL
            .into_iter()
            .map(|id| (id.name(), self.sim.tasks.activation[&id].clone()))
            .collect()
    }

    /// Every numeric articulator-frame field as a column.
    fn frame_columns(&self) -> BTreeMap<String, Vec<f64>> {
        let mut cols: BTreeMap<String, Vec<f64>> = BTreeMap::new();
        for f in &self.sim.frames {
            let serde_json::Value::Object(map) = serde_json::to_value(f).expect("frames serialize")
            else {
                continue;
            };
            for (k, v) in map {
                if let Some(x) = v.as_f64() {
                    cols.entry(k).or_default().push(x);
                }
            }
        }
        cols
    }

    fn control_csv(&self) -> String {
        export::control_csv(&self.sim.tasks)
    }

    fn displacement_csv(&self) -> String {
        export::displacement_csv(&self.sim.flesh)
    }

    /// The `{manifest, control, displacement, frames}` document.
    fn bundle_json(&self, timestamp: u64) -> String {
        self.sim.bundle(&self.cfg, timestamp).to_json()
    }

    fn config_hash(&self) -> String {
        export::config_hash(&self.cfg, &self.sim.score)
    }

    /// Per-articulator peak displacement over `[from_ms, to_ms)` and the
    /// total cost.
    #[pyo3(signature = (from_ms = pipeline::ANALYSIS_WINDOW_MS.0, to_ms = pipeline::ANALYSIS_WINDOW_MS.1))]
    fn effort(&self, from_ms: f64, to_ms: f64) -> PyResult<(BTreeMap<&'static str, f64>, f64)> {
        let r =
            effort::report_from_frames(&self.sim.frames, (from_ms, to_ms)).map_err(value_error)?;
        let per = r
            .per_articulator
            .iter()
            .map(|(a, l)| (articulator_name(*a), *l))
            .collect();
        Ok((per, r.total_cost))
    }
}

fn config_or_default(config: Option<PyRef<'_, PyConfig>>) -> SynergyConfig {
    config.map(|c| c.0.clone()).unwrap_or_default()
}

#[pyfunction]
#[pyo3(signature = (score, config = None, dt_ms = pipeline::DEFAULT_DT_MS))]
fn simulate(
    py: Python<'_>,
    score: &PyScore,
    config: Option<PyRef<'_, PyConfig>>,
    dt_ms: f64,
) -> PyResult<PySimulation> {
    let cfg = config_or_default(config);
    let score = score.0.clone();
    py.detach(|| pipeline::simulate(&score, &cfg, dt_ms).map(|sim| PySimulation { sim, cfg }))
        .map_err(value_error)
}

#[pyfunction]
#[pyo3(signature = (name, config = None, dt_ms = pipeline::DEFAULT_DT_MS))]
fn simulate_cv(
    py: Python<'_>,
    name: &str,
    config: Option<PyRef<'_, PyConfig>>,
    dt_ms: f64,
) -> PyResult<PySimulation> {
    let syl = syllable(name)?;
    let cfg = config_or_default(config);
    py.detach(|| pipeline::simulate_cv(syl, &cfg, dt_ms).map(|sim| PySimulation { sim, cfg }))
        .map_err(value_error)
}

/// Runs all nine syllables and returns `(passed, [(name, passed, detail)])`.
#[pyfunction]
#[pyo3(signature = (config = None, dt_ms = pipeline::DEFAULT_DT_MS))]
fn matrix_checks(
    py: Python<'_>,
    config: Option<PyRef<'_, PyConfig>>,
    dt_ms: f64,
) -> PyResult<(bool, Vec<CheckRow>)> {
    let cfg = config_or_default(config);
    let report = py
        .detach(|| {
            let runs = pipeline::run_matrix(&cfg, dt_ms)?;
            pipeline::matrix_checks(&runs)
        })
        .map_err(value_error)?;
    Ok((
        report.passed(),
        report
            .checks
            .into_iter()
            .map(|c| (c.name, c.passed, c.detail))
            .collect(),
    ))
}

#[pyfunction]
fn parse_displacement_csv(text: &str) -> PyResult<(f64, f64, Columns)> {
    let t = export::parse_displacement_csv(text).map_err(value_error)?;
    Ok((t.dt_ms, t.t0_ms, flesh_columns(&t)))
}

#[pyfunction]
fn effort_cost(displacements: Vec<f64>) -> f64 {
    effort::effort_cost(&displacements)
}

#[pyfunction]
fn split_comparison(total: f64, n: usize) -> PyResult<(f64, f64)> {
    effort::split_comparison(total, n).map_err(value_error)
}

#[pyfunction]
fn jaw_blend(jaw_vocalic: f64, jaw_consonantal: f64, w: f64) -> PyResult<f64> {
    articmap::jaw_blend(jaw_vocalic, jaw_consonantal, w).map_err(value_error)
}

/// Returns `(aperture, compression)`.
#[pyfunction]
fn saturate_lips(upper_lip_y: f64, lower_lip_virtual_y: f64) -> (f64, f64) {
    articmap::saturate_lips(upper_lip_y, lower_lip_virtual_y)
}

#[pyfunction]
#[pyo3(signature = (stiffness, damping, target, x0, duration_ms, dt_ms, v0 = 0.0))]
fn second_order_trajectory(
    stiffness: f64,
    damping: f64,
    target: f64,
    x0: f64,
    duration_ms: f64,
    dt_ms: f64,
    v0: f64,
) -> PyResult<Vec<f64>> {
    let p = SecondOrderParams {
        stiffness,
        damping,
        target,
        x0,
        v0,
    };
    taskgen::second_order_trajectory(&p, duration_ms, dt_ms).map_err(value_error)
}

/// Closed-form critically damped response at `t_ms`.
#[pyfunction]
#[pyo3(signature = (omega, target, x0, t_ms, v0 = 0.0))]
fn analytic_second_order(omega: f64, target: f64, x0: f64, t_ms: f64, v0: f64) -> PyResult<f64> {
    let p = SecondOrderParams::critically_damped(omega, target, x0, v0);
    taskgen::analytic_second_order(&p, t_ms).map_err(value_error)
}

#[pymodule]
fn articulodyn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScore>()?;
    m.add_class::<PyConfig>()?;
    m.add_class::<PySimulation>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_cv, m)?)?;
    m.add_function(wrap_pyfunction!(matrix_checks, m)?)?;
    m.add_function(wrap_pyfunction!(parse_displacement_csv, m)?)?;
    m.add_function(wrap_pyfunction!(effort_cost, m)?)?;
    m.add_function(wrap_pyfunction!(split_comparison, m)?)?;
    m.add_function(wrap_pyfunction!(jaw_blend, m)?)?;
    m.add_function(wrap_pyfunction!(saturate_lips, m)?)?;
    m.add_function(wrap_pyfunction!(second_order_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_second_order, m)?)?;
    m.add(
        "CO_MOVEMENT_MIN_CORRELATION",
        fleshpoints::CO_MOVEMENT_MIN_CORRELATION,
    )?;
    m.add("DEFAULT_CONFIG_JSON", articmap::DEFAULT_CONFIG_JSON)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_resolve() {
        assert_eq!(location("apical").unwrap(), Location::Apical);
        assert_eq!(vowel("u").unwrap(), Vowel::U);
        assert!(location("uvular").is_err());
        assert!(vowel("e").is_err());
        assert!(syllable("/ti/").is_ok());
    }

    #[test]
    fn articulator_names_are_distinct() {
        let mut names: Vec<_> = Articulator::ALL.into_iter().map(articulator_name).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), Articulator::ALL.len());
    }
}
