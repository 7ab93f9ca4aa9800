//! `articulodyn` command-line front end.
//!
//! Exit codes: 0 ok, 1 input error, 2 I/O error, 3 failed qualitative check.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use articulodyn::articmap::SynergyConfig;
use articulodyn::export::{
    control_csv, displacement_csv, manifest_file_name, parse_displacement_csv,
};
use articulodyn::fleshpoints::window;
use articulodyn::pipeline::{
    matrix_checks, run_matrix, simulate, Simulation, ANALYSIS_WINDOW_MS, DEFAULT_DT_MS,
};
use articulodyn::plot::{line_chart_svg, panel_svg};
use articulodyn::score::{make_cv_score, parse_score, GestureScore, Syllable};
use clap::{Args, Parser, Subcommand};

const CONFIG_ENV: &str = "ARTICULODYN_CONFIG";

#[derive(Parser)]
#[command(
    name = "articulodyn",
    version,
    about = "Articulatory movement simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one score and write control/displacement CSVs and a manifest.
    Simulate {
        #[command(flatten)]
        run: RunArgs,
        /// Output directory, created if missing.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Unix seconds used in the file names instead of the current time.
        #[arg(long)]
        timestamp: Option<u64>,
    },
    /// Draw a displacement CSV as an SVG line chart.
    Plot {
        csv: PathBuf,
        /// Time range `from:to` in ms; defaults to the whole file.
        #[arg(long, value_parser = parse_window)]
        window: Option<(f64, f64)>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run all nine plosive-vowel syllables and the qualitative checks.
    Matrix {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, default_value_t = DEFAULT_DT_MS)]
        dt_ms: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score document utilities.
    Score {
        #[command(subcommand)]
        command: ScoreCommand,
    },
    /// Emit the JSON frame bundle consumed by front ends.
    Bundle {
        #[command(flatten)]
        run: RunArgs,
        /// Output file; standard output if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        timestamp: Option<u64>,
    },
}

#[derive(Subcommand)]
enum ScoreCommand {
    /// Parse and validate a score document.
    Validate { path: PathBuf },
}

#[derive(Args)]
struct ConfigArg {
    /// Synergy config JSON. Falls back to $ARTICULODYN_CONFIG, then the
    /// built-in default.
    #[arg(long, env = CONFIG_ENV)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Built-in CV syllable.
    #[arg(long, value_parser = parse_syllable, conflicts_with = "score", required_unless_present = "score")]
    cv: Option<Syllable>,
    /// Score document.
    #[arg(long)]
    score: Option<PathBuf>,
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value_t = DEFAULT_DT_MS)]
    dt_ms: f64,
}

fn parse_syllable(s: &str) -> Result<Syllable, String> {
    s.parse()
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected from:to, got '{s}'"))?;
    let num = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| format!("bad window bound '{x}': {e}"))
    };
    let (from, to) = (num(a)?, num(b)?);
    if !(from < to) {
        return Err(format!("window start {from} must be before end {to}"));
    }
    Ok((from, to))
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Io(String),
    Checks(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Io(_) => 2,
            CliError::Checks(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) | CliError::Io(m) | CliError::Checks(m) => f.write_str(m),
        }
    }
}

fn input(path: &Path) -> impl Fn(String) -> CliError + '_ {
    move |m| CliError::Input(format!("{}: {m}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_config(arg: &ConfigArg) -> Result<SynergyConfig, CliError> {
    match &arg.config {
        None => Ok(SynergyConfig::default()),
        Some(path) => {
            SynergyConfig::from_json(&read(path)?).map_err(|e| input(path)(e.to_string()))
        }
    }
}

fn load_score(run: &RunArgs) -> Result<GestureScore, CliError> {
    match (&run.cv, &run.score) {
        (Some(syl), _) => Ok(make_cv_score(syl.consonant, syl.vowel)),
        (None, Some(path)) => parse_score(&read(path)?).map_err(|e| input(path)(e.to_string())),
        (None, None) => Err(CliError::Input("one of --cv or --score is required".into())),
    }
}

fn run_simulation(run: &RunArgs) -> Result<(Simulation, SynergyConfig), CliError> {
    let cfg = load_config(&run.config)?;
    let score = load_score(run)?;
    let sim = simulate(&score, &cfg, run.dt_ms).map_err(|e| CliError::Input(e.to_string()))?;
    Ok((sim, cfg))
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))
}

/// Writes `contents` next to `path` under a temporary name, then renames it
/// into place, so readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let name = path
        .file_name()
        .ok_or_else(|| CliError::Io(format!("{} is not a file path", path.display())))?;
    let tmp = path.with_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(contents.as_bytes())?;
            f.sync_all()
        })
        .and_then(|()| fs::rename(&tmp, path));
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(io)
}

/// Writes every file or none: on failure, files already renamed into place
/// are removed again.
fn write_all(files: &[(PathBuf, String)]) -> Result<(), CliError> {
    for (i, (path, contents)) in files.iter().enumerate() {
        if let Err(e) = write_atomic(path, contents) {
            for (done, _) in &files[..i] {
                let _ = fs::remove_file(done);
            }
            return Err(e);
        }
    }
    Ok(())
}

fn cmd_simulate(run: &RunArgs, out: &Path, timestamp: Option<u64>) -> Result<(), CliError> {
    let (sim, cfg) = run_simulation(run)?;
    let ts = timestamp.unwrap_or_else(now);
    let bundle = sim.bundle(&cfg, ts);
    let manifest =
        serde_json::to_string_pretty(&bundle.manifest).expect("manifest serializes") + "\n";
    let files = vec![
        (out.join(&bundle.manifest.outputs[0]), bundle.control),
        (out.join(&bundle.manifest.outputs[1]), bundle.displacement),
        (out.join(manifest_file_name(ts)), manifest),
    ];
    ensure_dir(out)?;
    write_all(&files)?;
    for (path, _) in &files {
        println!("{}", path.display());
    }
    Ok(())
}

fn cmd_plot(csv: &Path, range: Option<(f64, f64)>, out: &Path) -> Result<(), CliError> {
    let text = read(csv)?;
    let trajs = parse_displacement_csv(&text).map_err(|e| input(csv)(e.to_string()))?;
    let trajs = match range {
        None => trajs,
        Some((from, to)) => window(&trajs, from - trajs.t0_ms, to - trajs.t0_ms)
            .map_err(|e| input(csv)(e.to_string()))?,
    };
    let title = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    write_atomic(out, &line_chart_svg(&trajs, &title))?;
    println!("{}", out.display());
    Ok(())
}

fn cmd_matrix(config: &ConfigArg, dt_ms: f64, out: &Path) -> Result<(), CliError> {
    let cfg = load_config(config)?;
    let runs = run_matrix(&cfg, dt_ms).map_err(|e| CliError::Input(e.to_string()))?;
    let report = matrix_checks(&runs).map_err(|e| CliError::Input(e.to_string()))?;

    let mut files = Vec::new();
    let mut panels = Vec::new();
    for (syl, sim) in &runs {
        files.push((
            out.join(format!("control_{syl}.csv")),
            control_csv(&sim.tasks),
        ));
        files.push((
            out.join(format!("displacement_{syl}.csv")),
            displacement_csv(&sim.flesh),
        ));
        let (from, to) = ANALYSIS_WINDOW_MS;
        let w = window(&sim.flesh, from, to).map_err(|e| CliError::Input(e.to_string()))?;
        panels.push((sim.score.label().to_string(), w));
    }
    files.push((out.join("panel.svg"), panel_svg(&panels, 3)));
    files.push((out.join("checks.json"), report.to_json()));
    ensure_dir(out)?;
    write_all(&files)?;

    print!("{report}");
    if report.passed() {
        Ok(())
    } else {
        let failed: Vec<_> = report.failures().map(|c| c.name.as_str()).collect();
        Err(CliError::Checks(format!(
            "{} check(s) failed: {}",
            failed.len(),
            failed.join(", ")
        )))
    }
}

fn cmd_validate(path: &Path) -> Result<(), CliError> {
    let score = parse_score(&read(path)?).map_err(|e| input(path)(e.to_string()))?;
    println!(
        "{}: ok ({}, {} gestures, {} ms)",
        path.display(),
        score.label(),
        score.gestures().len(),
        score.duration_ms()
    );
    Ok(())
}

fn cmd_bundle(run: &RunArgs, out: Option<&Path>, timestamp: Option<u64>) -> Result<(), CliError> {
    let (sim, cfg) = run_simulation(run)?;
    let json = sim.bundle(&cfg, timestamp.unwrap_or_else(now)).to_json() + "\n";
    match out {
        Some(path) => write_atomic(path, &json),
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .map_err(|e| CliError::Io(format!("cannot write to stdout: {e}"))),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate {
            run,
            out,
            timestamp,
        } => cmd_simulate(&run, &out, timestamp),
        Command::Plot { csv, window, out } => cmd_plot(&csv, window, &out),
        Command::Matrix { config, dt_ms, out } => cmd_matrix(&config, dt_ms, &out),
        Command::Score {
            command: ScoreCommand::Validate { path },
        } => cmd_validate(&path),
        Command::Bundle {
            run,
            out,
            timestamp,
        } => cmd_bundle(&run, out.as_deref(), timestamp),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors are input errors; clap's own code 2 means I/O here
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("articulodyn: {e}");
            ExitCode::from(e.code())
        }
    }
}
