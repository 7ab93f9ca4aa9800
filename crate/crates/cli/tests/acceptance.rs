//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Tolerances and draw counts are fixed below.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::cell::Cell;
use std::collections::BTreeMap;
use std::fs;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use articulodyn::articmap::{jaw_blend, SynergyConfig};
use articulodyn::effort::{effort_cost, split_comparison};
use articulodyn::export::{control_csv, displacement_csv};
use articulodyn::pipeline::simulate_cv;
use articulodyn::score::{
    make_cv_score, parse_score, serialize_score, Consonant, Gesture, GestureScore, Syllable,
    TargetSet, Vowel,
};
use articulodyn::taskgen::{
    analytic_second_order, first_order_trajectories, gesture_targets, second_order_trajectory,
    SecondOrderParams, TaskTrajectorySet, TaskVariableId,
};
use num_rational::BigRational;
use num_traits::ToPrimitive;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

const SECOND_ORDER_DRAWS: u32 = 128;
const SECOND_ORDER_TOLERANCE: f64 = 1e-5;
const SECOND_ORDER_SPAN_MS: f64 = 1000.0;
const SECOND_ORDER_DT_MS: f64 = 0.1;
const SECOND_ORDER_BUDGET: Duration = Duration::from_secs(5);
const FIRST_ORDER_RESIDUAL: f64 = 0.01;
const FIRST_ORDER_DRAWS: u32 = 200;
const MATRIX_BUDGET: Duration = Duration::from_secs(10);
const CONVEXITY_TRIPLES: u32 = 10_000;
const ROUND_TRIP_SCORES: u32 = 256;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn runner(cases: u32) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::deterministic_rng(RngAlgorithm::ChaCha),
    )
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn effort_economy() -> Outcome {
    check(effort_cost(&[2.0]) == 4.0, || {
        "effort_cost([2]) != 4".into()
    })?;
    check(effort_cost(&[1.0, 1.0]) == 2.0, || {
        "effort_cost([1,1]) != 2".into()
    })?;
    let mut compared = 0;
    for n in 1..=10usize {
        for total in [1u32, 2, 3, 7, 10, 12345, 999_983] {
            let (single, equal) = split_comparison(total as f64, n).map_err(|e| e.to_string())?;
            let t = BigRational::from_integer(total.into());
            let nn = BigRational::from_integer(n.into());
            let exact = (&nn * (&t / &nn) * (&t / &nn)).to_f64().expect("finite");
            check(single == total as f64 * total as f64, || {
                format!("single cost for {total}")
            })?;
            check(equal == exact && equal == single / n as f64, || {
                format!("n={n} total={total}: equal split {equal} vs exact {exact}")
            })?;
            compared += 1;
        }
    }
    Ok(format!(
        "costs 4 and 2; single/n exact in {compared} splits, n = 1..10"
    ))
}

fn second_order_oracle() -> Outcome {
    let start = Instant::now();
    let worst = Cell::new(0.0f64);
    let draws = Cell::new(0u32);
    let strategy = (0.002..0.5f64, -1.0..=1.0f64, -1.0..=1.0f64);
    runner(SECOND_ORDER_DRAWS)
        .run(&strategy, |(omega, target, x0)| {
            draws.set(draws.get() + 1);
            let p = SecondOrderParams::critically_damped(omega, target, x0, 0.0);
            let xs = second_order_trajectory(&p, SECOND_ORDER_SPAN_MS, SECOND_ORDER_DT_MS).unwrap();
            for (k, &x) in xs.iter().enumerate() {
                let exact = analytic_second_order(&p, k as f64 * SECOND_ORDER_DT_MS).unwrap();
                // positions are unit-normalized: x0 and target lie in [-1, 1]
                let err = (x - exact).abs();
                worst.set(worst.get().max(err));
                prop_assert!(
                    err <= SECOND_ORDER_TOLERANCE,
                    "omega {omega}: step {k} error {err}"
                );
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    check(draws.get() >= 100, || format!("only {} draws", draws.get()))?;
    check(elapsed < SECOND_ORDER_BUDGET, || {
        format!("took {elapsed:?}")
    })?;
    Ok(format!(
        "{} draws over {SECOND_ORDER_SPAN_MS} ms at dt {SECOND_ORDER_DT_MS} ms, worst absolute error {:.2e} <= {SECOND_ORDER_TOLERANCE:e}, {elapsed:.2?}",
        draws.get(),
        worst.get()
    ))
}

/// Checks boundedness and the 5-tau residual for every variable of `score`;
/// returns the number of residual checks made.
fn first_order_contract_holds(
    score: &GestureScore,
    tasks: &TaskTrajectorySet,
) -> Result<usize, String> {
    let mut settled = 0;
    for id in TaskVariableId::ALL {
        let drivers: Vec<(&Gesture, f64)> = score
            .gestures()
            .iter()
            .flat_map(|g| {
                gesture_targets(g)
                    .into_iter()
                    .filter(|&(v, _)| v == id)
                    .map(move |(_, t)| (g, t))
            })
            .collect();
        let (lo, hi) = drivers
            .iter()
            .fold((id.neutral(), id.neutral()), |(lo, hi), &(_, t)| {
                (lo.min(t), hi.max(t))
            });
        let xs = &tasks.series[&id];
        if let Some(k) = xs.iter().position(|&x| x < lo || x > hi) {
            return Err(format!(
                "{}: {id} overshoots at step {k} ({})",
                score.label(),
                xs[k]
            ));
        }
        for (g, target) in drivers {
            let t_check = g.onset_ms + g.ramp_ms + 5.0 * g.time_constant_ms;
            let k = (t_check / tasks.dt_ms - 1e-9).ceil() as usize;
            if k >= tasks.n_steps || tasks.time_ms(k) > g.offset_ms - g.ramp_ms {
                continue;
            }
            let residual = (xs[k] - target).abs();
            let excursion = (target - id.neutral()).abs();
            if residual > FIRST_ORDER_RESIDUAL * excursion {
                return Err(format!(
                    "{}: {id} residual {residual} after 5 tau",
                    score.label()
                ));
            }
            settled += 1;
        }
    }
    Ok(settled)
}

fn first_order_contract() -> Outcome {
    let mut settled = 0;
    for syl in Syllable::all() {
        let score = make_cv_score(syl.consonant, syl.vowel);
        for dt in [1.0, 0.1] {
            let tasks = first_order_trajectories(&score, dt).map_err(|e| e.to_string())?;
            settled += first_order_contract_holds(&score, &tasks)?;
        }
    }
    let strategy = (
        0.0..100.0f64,
        2.5..50.0f64,
        1.0..40.0f64,
        -1.0..=1.0f64,
        -1.0..=1.0f64,
        0.0..=1.0f64,
    );
    let random_settled = Cell::new(0);
    runner(FIRST_ORDER_DRAWS)
        .run(&strategy, |(onset, tau, ramp, h, f, r)| {
            let len = 2.0 * ramp + 5.0 * tau + 20.0;
            let g = Gesture {
                onset_ms: onset,
                offset_ms: onset + len,
                ramp_ms: ramp,
                time_constant_ms: tau,
                targets: TargetSet::Vocalic {
                    vocalic_height: h,
                    vocalic_fronting: f,
                    lip_rounding: r,
                },
            };
            let score = GestureScore::new("v", onset + len + 50.0, vec![g]).unwrap();
            let tasks = first_order_trajectories(&score, 1.0).unwrap();
            let n = first_order_contract_holds(&score, &tasks).map_err(TestCaseError::fail)?;
            prop_assert_eq!(n, 3);
            random_settled.set(random_settled.get() + n);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "no overshoot in 9 CV scores at dt 1 and 0.1 ms; {settled} CV and {} random plateau residuals within {}%",
        random_settled.get(),
        FIRST_ORDER_RESIDUAL * 100.0
    ))
}

fn nine_syllable_matrix() -> Outcome {
    let out = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let o = Command::new(env!("CARGO_BIN_EXE_articulodyn"))
        .args(["matrix", "--out"])
        .arg(out.path())
        .env_remove("ARTICULODYN_CONFIG")
        .output()
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(out.path().join("checks.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let checks = report["checks"].as_array().cloned().unwrap_or_default();
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| c["passed"] != true)
        .map(|c| c["name"].as_str().unwrap_or("?").to_string())
        .collect();
    check(o.status.code() == Some(0), || {
        format!("exit {:?}; failed: {}", o.status.code(), failed.join(", "))
    })?;
    check(failed.is_empty() && !checks.is_empty(), || {
        "report not all green".into()
    })?;
    let csvs = fs::read_dir(out.path())
        .map_err(|e| e.to_string())?
        .filter(|e| {
            e.as_ref()
                .is_ok_and(|e| e.file_name().to_string_lossy().ends_with(".csv"))
        })
        .count();
    check(csvs == 18 && out.path().join("panel.svg").exists(), || {
        format!("{csvs} CSVs")
    })?;
    check(elapsed < MATRIX_BUDGET, || format!("took {elapsed:?}"))?;
    let families: BTreeMap<&str, usize> = checks.iter().fold(BTreeMap::new(), |mut m, c| {
        let name = c["name"].as_str().unwrap_or("?");
        *m.entry(name.split('/').next().unwrap_or(name)).or_default() += 1;
        m
    });
    Ok(format!(
        "exit 0, {} checks green {families:?}, {elapsed:.2?}",
        checks.len()
    ))
}

fn task_level_independence() -> Outcome {
    let cfg = SynergyConfig::default();
    for c in Consonant::ALL {
        let id = TaskVariableId::consonantal(c.location());
        let runs: Vec<TaskTrajectorySet> = Vowel::ALL
            .into_iter()
            .map(|v| simulate_cv(Syllable::new(c, v), &cfg, 1.0).map(|s| s.tasks))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let bits = |t: &TaskTrajectorySet| -> Vec<u64> {
            t.series[&id]
                .iter()
                .chain(&t.activation[&id])
                .map(|x| x.to_bits())
                .collect()
        };
        let reference = bits(&runs[0]);
        check(runs.iter().all(|t| bits(t) == reference), || {
            format!("{id} differs across vowels")
        })?;
    }
    Ok("consonantal value and activation series bit-identical across /a i u/ for p, t, k".into())
}

fn jaw_blend_convexity() -> Outcome {
    let n = Cell::new(0u32);
    runner(CONVEXITY_TRIPLES)
        .run(
            &(-10.0..10.0f64, -10.0..10.0f64, 0.0..=1.0f64),
            |(a, b, w)| {
                n.set(n.get() + 1);
                let out = jaw_blend(a, b, w).unwrap();
                prop_assert!(a.min(b) <= out && out <= a.max(b), "{a} {b} {w} -> {out}");
                Ok(())
            },
        )
        .map_err(|e| e.to_string())?;
    Ok(format!("{} random triples within [min, max]", n.get()))
}

fn determinism_and_round_trip() -> Outcome {
    let cfg = SynergyConfig::default();
    for syl in Syllable::all() {
        let a = simulate_cv(syl, &cfg, 1.0).map_err(|e| e.to_string())?;
        let b = simulate_cv(syl, &cfg, 1.0).map_err(|e| e.to_string())?;
        check(
            control_csv(&a.tasks) == control_csv(&b.tasks)
                && displacement_csv(&a.flesh) == displacement_csv(&b.flesh),
            || format!("/{syl}/ CSV differs between runs"),
        )?;
    }
    let out = tempfile::TempDir::new().map_err(|e| e.to_string())?;
    for ts in ["1", "2"] {
        let o = Command::new(env!("CARGO_BIN_EXE_articulodyn"))
            .args(["simulate", "--cv", "pa", "--timestamp", ts, "--out"])
            .arg(out.path())
            .env_remove("ARTICULODYN_CONFIG")
            .output()
            .map_err(|e| e.to_string())?;
        check(o.status.success(), || {
            String::from_utf8_lossy(&o.stderr).into_owned()
        })?;
    }
    for kind in ["control", "displacement"] {
        let read = |ts: &str| {
            fs::read(out.path().join(format!("{kind}_{ts}.csv"))).map_err(|e| e.to_string())
        };
        check(read("1")? == read("2")?, || {
            format!("CLI {kind} CSV differs between runs")
        })?;
    }
    let n = Cell::new(0u32);
    runner(ROUND_TRIP_SCORES)
        .run(&common::scores(), |score| {
            n.set(n.get() + 1);
            let back = parse_score(&serialize_score(&score)).unwrap();
            prop_assert_eq!(back, score);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "byte-identical CSVs for 9 syllables and 2 CLI runs; parse(serialize(s)) == s for {} random scores",
        n.get()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        ("effort economy", effort_economy),
        ("second-order oracle", second_order_oracle),
        ("first-order contract", first_order_contract),
        ("nine-syllable qualitative regression", nine_syllable_matrix),
        ("task-level independence", task_level_independence),
        ("jaw-blend convexity", jaw_blend_convexity),
        ("determinism and round-trip", determinism_and_round_trip),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL {name}: {why}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
