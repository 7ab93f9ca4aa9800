//! End-to-end runs: score to task trajectories to frames to flesh points.

use std::collections::BTreeMap;
use std::thread;

use crate::articmap::{check_supported, map_trajectories, ArticulatorFrame, SynergyConfig};
use crate::export::{
    config_hash, control_csv, control_file_name, displacement_csv, displacement_file_name,
    FrameBundle, RunManifest,
};
use crate::fleshpoints::{
    extract, qualitative_checks, CheckReport, FleshPointTrajectorySet, SyllableRun,
};
use crate::score::{make_cv_score, GestureScore, Syllable};
use crate::taskgen::{first_order_trajectories, TaskTrajectorySet};
use crate::Error;

pub const DEFAULT_DT_MS: f64 = 1.0;
/// Critical interval around the CV closure: approach, closure and release.
pub const ANALYSIS_WINDOW_MS: (f64, f64) = (40.0, 160.0);

#[derive(Debug, Clone)]
pub struct Simulation {
    pub score: GestureScore,
    pub tasks: TaskTrajectorySet,
    pub frames: Vec<ArticulatorFrame>,
    pub flesh: FleshPointTrajectorySet,
}

impl Simulation {
    pub fn syllable_run(&self) -> SyllableRun {
        SyllableRun {
            trajs: self.flesh.clone(),
            closure_ms: self
                .score
                .closure_interval()
                .unwrap_or((0.0, self.score.duration_ms())),
        }
    }

    pub fn bundle(&self, cfg: &SynergyConfig, timestamp: u64) -> FrameBundle {
        FrameBundle {
            manifest: RunManifest {
                label: self.score.label().to_string(),
                config_hash: config_hash(cfg, &self.score),
                dt_ms: self.tasks.dt_ms,
                outputs: vec![
                    control_file_name(timestamp),
                    displacement_file_name(timestamp),
                ],
                timestamp,
            },
            control: control_csv(&self.tasks),
            displacement: displacement_csv(&self.flesh),
            frames: self.frames.clone(),
        }
    }
}

pub fn simulate(
    score: &GestureScore,
    cfg: &SynergyConfig,
    dt_ms: f64,
) -> Result<Simulation, Error> {
    cfg.validate()?;
    check_supported(score)?;
    let tasks = first_order_trajectories(score, dt_ms)?;
    let frames = map_trajectories(&tasks, cfg)?;
    let flesh = extract(&frames)?;
    Ok(Simulation {
        score: score.clone(),
        tasks,
        frames,
        flesh,
    })
}

pub fn simulate_cv(
    syllable: Syllable,
    cfg: &SynergyConfig,
    dt_ms: f64,
) -> Result<Simulation, Error> {
    simulate(
        &make_cv_score(syllable.consonant, syllable.vowel),
        cfg,
        dt_ms,
    )
}

/// Runs all nine plosive-vowel syllables, one thread each.
pub fn run_matrix(
    cfg: &SynergyConfig,
    dt_ms: f64,
) -> Result<BTreeMap<Syllable, Simulation>, Error> {
    thread::scope(|s| {
        let handles: Vec<_> = Syllable::all()
            .map(|syl| (syl, s.spawn(move || simulate_cv(syl, cfg, dt_ms))))
            .collect();
        handles
            .into_iter()
            .map(|(syl, h)| Ok((syl, h.join().expect("simulation thread panicked")?)))
            .collect()
    })
}

pub fn matrix_checks(runs: &BTreeMap<Syllable, Simulation>) -> Result<CheckReport, Error> {
    let runs: BTreeMap<Syllable, SyllableRun> = runs
        .iter()
        .map(|(s, sim)| (*s, sim.syllable_run()))
        .collect();
    Ok(qualitative_checks(&runs)?)
}
