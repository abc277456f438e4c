//! Command-line surface. Every command is deterministic given its inputs
//! and flags: seeds are flags, never wall-clock. Output files are written
//! atomically (write to a temp sibling, then rename).
//!
//! Exit codes are a stable contract: 0 success, 1 usage error, 2 data or
//! format error, 3 numerical failure. Failures print a single
//! machine-readable record `error,<class>,<message>` on stderr.

use crate::calibration::{
    default_force_models, estimate_force, fit_linear, CalibrationProfile, OutputUnit,
};
use crate::control::{
    estimate_size, monitor_presence, segment_trace, ContactConfig, ContactScope, SettlePolicy,
    SizeEstimationConfig,
};
use crate::fit::{detect_peak, fit_decay, FitRecord, FitWindow};
use crate::framelog;
use crate::produce::{detect_bruise, ripeness_trend, session_from_text, BruisePolicy};
use crate::sim::{
    bench_to_csv, run_cutoff_sweep, run_force_benchmark, simulate_grasp, sweep_to_csv,
    truth_to_csv, CorpusSpec, SimGripper, SimObject, SimScenario, SimSensorParams,
};
use crate::signal::{baseline_from_quiet_frames, build_trace, ActuationMark, MarkKind, SensorFrame};
use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::path::{Path, PathBuf};

/// Exit classes, mirrored one-to-one onto process exit codes.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Numerical(String),
}

impl CliError {
    fn class(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Data(_) => "data",
            CliError::Numerical(_) => "numerical",
        }
    }

    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) | CliError::Numerical(m) => m,
        }
    }
}

macro_rules! data_err {
    ($e:expr) => {
        CliError::Data($e.to_string())
    };
}

macro_rules! num_err {
    ($e:expr) => {
        CliError::Numerical($e.to_string())
    };
}

#[derive(Parser, Debug)]
#[command(
    name = "gripsense",
    version,
    about = "Tactile-sensor toolkit: settled-resistance prediction, force/stiffness estimation and produce-handling decisions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit the post-actuation decay of a frame log and report the settled estimate
    Fit(FitArgs),
    /// Build a calibration profile from quiet frames and calibration point files
    Calibrate(CalibrateArgs),
    /// Evaluate a force model at a settled estimate
    EstimateForce(EstimateForceArgs),
    /// Run the incremental size-estimation loop against the simulator
    EstimateSize(EstimateSizeArgs),
    /// Simulate a grasp and write its frame log, marks and ground truth
    Simulate(SimulateArgs),
    /// Sweep fit cutoffs over a simulated corpus and tabulate errors
    SweepCutoff(SweepCutoffArgs),
    /// Compare force-estimation techniques over a simulated corpus
    BenchForce(BenchForceArgs),
    /// Trend per-day settled estimates across session files
    Ripeness(RipenessArgs),
    /// Test an observed session against a reference for bruising
    Bruise(BruiseArgs),
    /// Segment a capture into windows and report object presence
    Monitor(MonitorArgs),
    /// Render sweep/bench result CSVs as aligned tables
    Report(ReportArgs),
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Frame log CSV
    #[arg(long)]
    frames: PathBuf,
    /// Marks sidecar CSV (default: <frames>.marks.csv next to the log)
    #[arg(long)]
    marks: Option<PathBuf>,
    /// Calibration profile supplying the baseline (default: derive from the
    /// leading quiet frames)
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Actuation time override; default is the first close_stop mark
    #[arg(long, allow_negative_numbers = true)]
    t_actuation: Option<f64>,
    /// Cutoff time after actuation, seconds
    #[arg(long = "t-c", default_value_t = crate::fit::DEFAULT_CUTOFF_S)]
    t_c: f64,
    /// Post-peak guard time, seconds
    #[arg(long = "t-a", default_value_t = crate::fit::DEFAULT_GUARD_S)]
    t_a: f64,
    /// Keep only frames from this finger
    #[arg(long)]
    finger: Option<String>,
    /// Write the fit-result CSV here (default: print to stdout)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write plot data (time, observed, fitted) here
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    /// Quiet (pressure-free) frame log for the baseline
    #[arg(long)]
    frames: Option<PathBuf>,
    /// Existing profile to extend
    #[arg(long)]
    profile_in: Option<PathBuf>,
    /// Force calibration points, repeatable: material=points.csv with
    /// c_star_pct,force_n rows
    #[arg(long = "force-points", value_name = "MATERIAL=PATH")]
    force_points: Vec<String>,
    /// Stiffness calibration points: c_star_pct,stiffness_n_per_mm rows
    #[arg(long)]
    stiffness_points: Option<PathBuf>,
    /// Stamp the profile with this creation marker (never wall-clock)
    #[arg(long)]
    created_at: Option<String>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct EstimateForceArgs {
    /// Settled relative resistance, percent
    #[arg(long, allow_negative_numbers = true)]
    c_star: f64,
    /// Material name of the force model
    #[arg(long)]
    material: String,
    /// Profile with force models (default: the bundled factory models)
    #[arg(long)]
    profile: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EstimateSizeArgs {
    /// Simulated object diameter, mm
    #[arg(long)]
    diameter: f64,
    /// Simulated object stiffness, N/mm
    #[arg(long, default_value_t = 4.0)]
    stiffness: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50.0)]
    w_start: f64,
    #[arg(long, default_value_t = 5.0)]
    w_min: f64,
    #[arg(long, default_value_t = 1.0)]
    delta_w: f64,
    /// Contact threshold, percent (negative)
    #[arg(long, default_value_t = crate::control::DEFAULT_EPSILON_PCT, allow_negative_numbers = true)]
    epsilon: f64,
    #[arg(long = "t-c", default_value_t = crate::fit::DEFAULT_CUTOFF_S)]
    t_c: f64,
    #[arg(long, default_value_t = crate::control::DEFAULT_SECURE_EXTRA_MM)]
    secure_extra: f64,
    /// Contact scope: aggregate or any-pixel
    #[arg(long, default_value = "aggregate")]
    scope: String,
    /// Settle policy: fit or raw
    #[arg(long, default_value = "fit")]
    settle: String,
    #[arg(long, default_value_t = 0.5)]
    noise_sigma: f64,
    /// Write the control event log here
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Scenario file ([object]/[sensor]/[schedule] sections); overrides the
    /// inline object/schedule flags
    #[arg(long)]
    scenario: Option<PathBuf>,
    #[arg(long)]
    diameter: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    stiffness: f64,
    /// Inline width schedule, comma-separated time:width pairs
    #[arg(long, default_value = "0:50,1:38")]
    schedule: String,
    #[arg(long, default_value_t = 21.0)]
    duration: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    noise_sigma: f64,
    #[arg(long, default_value_t = crate::fit::DEFAULT_DECAY_RATE)]
    lambda: f64,
    /// Round readings through the 10-bit ADC
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    quantize: bool,
    /// Frame log output path; marks go to <out>.marks.csv and ground truth
    /// to <out>.truth.csv unless overridden
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    marks_out: Option<PathBuf>,
    #[arg(long)]
    truth_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepCutoffArgs {
    /// Comma-separated cutoff times, seconds
    #[arg(long, default_value = "2.5,5,10,20")]
    cutoffs: String,
    /// Repeats per material/width pair (default corpus: 4 materials x 5 widths)
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    noise_sigma: f64,
    #[arg(long, default_value_t = crate::fit::DEFAULT_DECAY_RATE)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct BenchForceArgs {
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    noise_sigma: f64,
    #[arg(long, default_value_t = crate::fit::DEFAULT_DECAY_RATE)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct RipenessArgs {
    /// Session files, ordered by day
    #[arg(long = "session", required = true)]
    sessions: Vec<PathBuf>,
    /// Trend threshold, percent per day
    #[arg(long, default_value_t = crate::produce::DEFAULT_TREND_THRESHOLD)]
    threshold: f64,
}

#[derive(Args, Debug)]
struct BruiseArgs {
    #[arg(long)]
    reference: PathBuf,
    #[arg(long)]
    observed: PathBuf,
    /// Decision policy: midpoint or welch
    #[arg(long, default_value = "midpoint")]
    policy: String,
    /// Damaged-class calibration mean for the midpoint policy, percent
    #[arg(long, allow_negative_numbers = true)]
    damaged_mean: Option<f64>,
    /// Welch significance level
    #[arg(long, default_value_t = crate::produce::DEFAULT_WELCH_ALPHA)]
    alpha: f64,
}

#[derive(Args, Debug)]
struct MonitorArgs {
    #[arg(long)]
    frames: PathBuf,
    #[arg(long)]
    marks: Option<PathBuf>,
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Window length, seconds
    #[arg(long, default_value_t = 1.0)]
    window: f64,
    #[arg(long, default_value_t = crate::control::DEFAULT_EPSILON_PCT, allow_negative_numbers = true)]
    epsilon: f64,
    /// Contact scope: aggregate or any-pixel
    #[arg(long, default_value = "aggregate")]
    scope: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[arg(long)]
    input: PathBuf,
    /// Result kind: sweep or bench
    #[arg(long)]
    kind: String,
    /// Output format on stdout: text or csv
    #[arg(long, default_value = "text")]
    format: String,
    /// Also write the CSV here
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point used by `main` and by the integration tests. Returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error,{},{}", e.class(), e.message());
            e.code()
        }
    }
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Fit(args) => cmd_fit(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::EstimateForce(args) => cmd_estimate_force(args),
        Command::EstimateSize(args) => cmd_estimate_size(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::SweepCutoff(args) => cmd_sweep_cutoff(args),
        Command::BenchForce(args) => cmd_bench_force(args),
        Command::Ripeness(args) => cmd_ripeness(args),
        Command::Bruise(args) => cmd_bruise(args),
        Command::Monitor(args) => cmd_monitor(args),
        Command::Report(args) => cmd_report(args),
    }
}

// ---------------------------------------------------------------------------
// Shared I/O helpers
// ---------------------------------------------------------------------------

fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Atomic write: temp sibling, then rename over the target.
fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::Usage(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp", file_name.to_string_lossy()));
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Data(format!("{}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

fn default_sidecar(frames: &Path, suffix: &str) -> PathBuf {
    let mut name = frames.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    name.push_str(suffix);
    frames.with_file_name(name)
}

/// Load frames plus marks; a missing default sidecar means no marks.
fn load_capture(
    frames_path: &Path,
    marks_path: &Option<PathBuf>,
    finger: &Option<String>,
) -> Result<(Vec<SensorFrame>, Vec<ActuationMark>), CliError> {
    let text = read_text(frames_path)?;
    let mut frames = framelog::parse_frames_csv(&text).map_err(|e| data_err!(e))?;
    if let Some(finger) = finger {
        frames.retain(|f| &f.finger_id == finger);
        if frames.is_empty() {
            return Err(CliError::Data(format!("no frames for finger {finger:?}")));
        }
    }
    let marks = match marks_path {
        Some(p) => framelog::parse_marks_csv(&read_text(p)?).map_err(|e| data_err!(e))?,
        None => {
            let sidecar = default_sidecar(frames_path, ".marks.csv");
            if sidecar.exists() {
                framelog::parse_marks_csv(&read_text(&sidecar)?).map_err(|e| data_err!(e))?
            } else {
                Vec::new()
            }
        }
    };
    Ok((frames, marks))
}

fn parse_scope(s: &str) -> Result<ContactScope, CliError> {
    match s {
        "aggregate" => Ok(ContactScope::Aggregate),
        "any-pixel" => Ok(ContactScope::AnyPixel),
        other => Err(CliError::Usage(format!("scope must be aggregate or any-pixel, got {other:?}"))),
    }
}

fn parse_settle(s: &str) -> Result<SettlePolicy, CliError> {
    match s {
        "fit" => Ok(SettlePolicy::DecayFit),
        "raw" => Ok(SettlePolicy::RawAtTc),
        other => Err(CliError::Usage(format!("settle must be fit or raw, got {other:?}"))),
    }
}

fn parse_f64_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    s.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("{what} value {tok:?}: {e}")))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_fit(args: FitArgs) -> Result<(), CliError> {
    let (frames, marks) = load_capture(&args.frames, &args.marks, &args.finger)?;
    let (baseline, divider) = match &args.profile {
        Some(p) => {
            let profile = CalibrationProfile::load(p).map_err(|e| data_err!(e))?;
            (profile.baseline, profile.divider)
        }
        None => {
            let divider = crate::signal::DividerConfig::default();
            (baseline_from_quiet_frames(&frames, &divider).map_err(|e| data_err!(e))?, divider)
        }
    };
    let trace = build_trace(&frames, &baseline, &divider, &marks).map_err(|e| data_err!(e))?;
    let t_actuation = args
        .t_actuation
        .or_else(|| trace.first_mark(MarkKind::CloseStop))
        .unwrap_or(trace.times[0]);
    let t_p = detect_peak(&trace, t_actuation, args.t_c).map_err(|e| num_err!(e))?;
    let window =
        FitWindow::new(t_actuation, t_p, args.t_a, args.t_c).map_err(|e| num_err!(e))?;
    let fit = fit_decay(&trace, &window).map_err(|e| num_err!(e))?;
    let record = FitRecord::from(&fit);
    let csv = format!("{}\n{}\n", crate::fit::FIT_CSV_HEADER, record.to_csv_row());
    match &args.out {
        Some(p) => write_atomic(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(plot) = &args.plot {
        let mut out = String::from("time_s,observed_pct,fitted_pct\n");
        for (k, &t) in trace.times.iter().enumerate() {
            let observed = trace.aggregate_rel[k].map(|v| v.to_string()).unwrap_or_default();
            let fitted =
                if t >= window.t_p { fit.value_at(t).to_string() } else { String::new() };
            out.push_str(&format!("{t},{observed},{fitted}\n"));
        }
        write_atomic(plot, &out)?;
    }
    Ok(())
}

fn parse_points_csv(text: &str, path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if i == 0 && line.parse::<f64>().is_err() && !line.contains(|c: char| c.is_ascii_digit()) {
            continue; // header row
        }
        let Some((x, y)) = line.split_once(',') else {
            return Err(CliError::Data(format!(
                "{} line {}: expected two comma-separated values",
                path.display(),
                i + 1
            )));
        };
        let parse = |s: &str| {
            s.trim().parse::<f64>().map_err(|e| {
                CliError::Data(format!("{} line {}: {e}", path.display(), i + 1))
            })
        };
        points.push((parse(x)?, parse(y)?));
    }
    Ok(points)
}

fn cmd_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let mut profile = match (&args.profile_in, &args.frames) {
        (Some(p), _) => CalibrationProfile::load(p).map_err(|e| data_err!(e))?,
        (None, Some(frames_path)) => {
            let (frames, _) = load_capture(frames_path, &None, &None)?;
            let divider = crate::signal::DividerConfig::default();
            let baseline =
                baseline_from_quiet_frames(&frames, &divider).map_err(|e| data_err!(e))?;
            CalibrationProfile::new(baseline, divider)
        }
        (None, None) => {
            return Err(CliError::Usage(
                "calibrate needs --frames (new baseline) or --profile-in (extend)".into(),
            ))
        }
    };
    if let Some(frames_path) = (args.profile_in.is_some()).then_some(args.frames.as_ref()).flatten()
    {
        let (frames, _) = load_capture(frames_path, &None, &None)?;
        profile.baseline = baseline_from_quiet_frames(&frames, &profile.divider)
            .map_err(|e| data_err!(e))?;
    }
    for spec in &args.force_points {
        let Some((material, path)) = spec.split_once('=') else {
            return Err(CliError::Usage(format!(
                "--force-points expects material=path, got {spec:?}"
            )));
        };
        let path = PathBuf::from(path);
        let points = parse_points_csv(&read_text(&path)?, &path)?;
        let model = fit_linear(&points, OutputUnit::Newtons).map_err(|e| num_err!(e))?;
        profile.force_models.insert(material.trim().to_string(), model);
    }
    if let Some(path) = &args.stiffness_points {
        let points = parse_points_csv(&read_text(path)?, path)?;
        let model = fit_linear(&points, OutputUnit::NewtonsPerMm).map_err(|e| num_err!(e))?;
        profile.stiffness_model = Some(model);
    }
    if let Some(created) = args.created_at {
        profile.created_at = Some(created);
    }
    write_atomic(&args.out, &profile.to_text())?;
    println!(
        "profile,{},{}x{},{}",
        args.out.display(),
        profile.baseline.rows,
        profile.baseline.cols,
        profile.force_models.len()
    );
    Ok(())
}

fn cmd_estimate_force(args: EstimateForceArgs) -> Result<(), CliError> {
    let models = match &args.profile {
        Some(p) => CalibrationProfile::load(p).map_err(|e| data_err!(e))?.force_models,
        None => default_force_models(),
    };
    let model = models.get(&args.material).ok_or_else(|| {
        CliError::Data(format!(
            "no force model named {:?}; available: {}",
            args.material,
            models.keys().cloned().collect::<Vec<_>>().join(", ")
        ))
    })?;
    let est = estimate_force(args.c_star, model).map_err(|e| num_err!(e))?;
    println!("force_n,below_range\n{},{}", est.value, est.below_range);
    Ok(())
}

fn cmd_estimate_size(args: EstimateSizeArgs) -> Result<(), CliError> {
    let contact = ContactConfig {
        epsilon_pct: args.epsilon,
        scope: parse_scope(&args.scope)?,
        settle_policy: parse_settle(&args.settle)?,
        cutoff_s: args.t_c,
        ..ContactConfig::default()
    };
    let cfg = SizeEstimationConfig {
        w_start_mm: args.w_start,
        w_min_mm: args.w_min,
        delta_w_mm: args.delta_w,
        contact,
        secure_extra_mm: args.secure_extra,
    };
    let params = SimSensorParams { noise_sigma_pct: args.noise_sigma, ..SimSensorParams::default() };
    let object = SimObject::new(args.diameter, args.stiffness);
    let mut gripper = SimGripper::new(object, params, args.seed).map_err(|e| data_err!(e))?;
    let outcome = estimate_size(&mut gripper, &cfg).map_err(|e| num_err!(e))?;
    if let Some(events) = &args.events {
        write_atomic(events, &crate::control::events_to_csv(&outcome.events))?;
    }
    println!(
        "size_mm,contact_width_mm,true_diameter_mm\n{},{},{}",
        outcome.size_mm, outcome.contact_width_mm, args.diameter
    );
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> Result<(), CliError> {
    let run = match &args.scenario {
        Some(path) => {
            let scenario = SimScenario::from_text(&read_text(path)?).map_err(|e| data_err!(e))?;
            scenario.run(args.seed).map_err(|e| num_err!(e))?
        }
        None => {
            let diameter = args.diameter.ok_or_else(|| {
                CliError::Usage("simulate needs --diameter or --scenario".into())
            })?;
            let mut schedule = Vec::new();
            for tok in args.schedule.split(',') {
                let Some((t, w)) = tok.trim().split_once(':') else {
                    return Err(CliError::Usage(format!(
                        "schedule point {tok:?} must be time:width"
                    )));
                };
                let t: f64 = t
                    .parse()
                    .map_err(|e| CliError::Usage(format!("schedule time {t:?}: {e}")))?;
                let w: f64 = w
                    .parse()
                    .map_err(|e| CliError::Usage(format!("schedule width {w:?}: {e}")))?;
                schedule.push((t, w));
            }
            let params = SimSensorParams {
                noise_sigma_pct: args.noise_sigma,
                lambda: args.lambda,
                quantize_10bit: args.quantize,
                ..SimSensorParams::default()
            };
            let object = SimObject::new(diameter, args.stiffness);
            simulate_grasp(&object, &schedule, args.duration, &params, args.seed)
                .map_err(|e| num_err!(e))?
        }
    };
    let log = framelog::frames_to_csv(&run.frames).map_err(|e| data_err!(e))?;
    write_atomic(&args.out, &log)?;
    let marks_path =
        args.marks_out.unwrap_or_else(|| default_sidecar(&args.out, ".marks.csv"));
    write_atomic(&marks_path, &framelog::marks_to_csv(&run.marks))?;
    let truth_path =
        args.truth_out.unwrap_or_else(|| default_sidecar(&args.out, ".truth.csv"));
    write_atomic(&truth_path, &truth_to_csv(&run.truth))?;
    println!(
        "frames,{}\nmarks,{}\ntruth,{}",
        args.out.display(),
        marks_path.display(),
        truth_path.display()
    );
    Ok(())
}

fn sim_params_for(noise_sigma: f64, lambda: f64) -> SimSensorParams {
    SimSensorParams { noise_sigma_pct: noise_sigma, lambda, ..SimSensorParams::default() }
}

fn cmd_sweep_cutoff(args: SweepCutoffArgs) -> Result<(), CliError> {
    let cutoffs = parse_f64_list(&args.cutoffs, "cutoff")?;
    let corpus = CorpusSpec::default_silicone(args.repeats);
    let params = sim_params_for(args.noise_sigma, args.lambda);
    let rows =
        run_cutoff_sweep(&corpus, &cutoffs, &params, args.seed).map_err(|e| num_err!(e))?;
    write_atomic(&args.out, &sweep_to_csv(&rows))?;
    println!("sweep,{},{} trials", args.out.display(), corpus.n_trials());
    Ok(())
}

fn cmd_bench_force(args: BenchForceArgs) -> Result<(), CliError> {
    let corpus = CorpusSpec::default_silicone(args.repeats);
    let params = sim_params_for(args.noise_sigma, args.lambda);
    let rows = run_force_benchmark(&corpus, &params, args.seed).map_err(|e| num_err!(e))?;
    write_atomic(&args.out, &bench_to_csv(&rows))?;
    println!("bench,{},{} trials", args.out.display(), corpus.n_trials());
    Ok(())
}

fn cmd_ripeness(args: RipenessArgs) -> Result<(), CliError> {
    let mut sessions = Vec::new();
    for path in &args.sessions {
        sessions.push(session_from_text(&read_text(path)?).map_err(|e| data_err!(e))?);
    }
    let (slope, trend) =
        ripeness_trend(&sessions, args.threshold).map_err(|e| num_err!(e))?;
    println!("slope_pct_per_day,direction\n{},{}", slope, trend.as_str());
    Ok(())
}

fn cmd_bruise(args: BruiseArgs) -> Result<(), CliError> {
    let reference = session_from_text(&read_text(&args.reference)?).map_err(|e| data_err!(e))?;
    let observed = session_from_text(&read_text(&args.observed)?).map_err(|e| data_err!(e))?;
    let policy = match args.policy.as_str() {
        "midpoint" => BruisePolicy::midpoint(args.damaged_mean),
        "welch" => BruisePolicy::Welch { alpha: args.alpha },
        other => {
            return Err(CliError::Usage(format!(
                "policy must be midpoint or welch, got {other:?}"
            )))
        }
    };
    let verdict = detect_bruise(&reference, &observed, policy).map_err(|e| num_err!(e))?;
    println!(
        "verdict,reference_mean,observed_mean,threshold,margin\n{},{},{},{},{}",
        verdict.verdict.as_str(),
        verdict.reference_mean,
        verdict.observed_mean,
        verdict.threshold,
        verdict.margin
    );
    Ok(())
}

fn cmd_monitor(args: MonitorArgs) -> Result<(), CliError> {
    let (frames, marks) = load_capture(&args.frames, &args.marks, &None)?;
    let (baseline, divider) = match &args.profile {
        Some(p) => {
            let profile = CalibrationProfile::load(p).map_err(|e| data_err!(e))?;
            (profile.baseline, profile.divider)
        }
        None => {
            let divider = crate::signal::DividerConfig::default();
            (baseline_from_quiet_frames(&frames, &divider).map_err(|e| data_err!(e))?, divider)
        }
    };
    let trace = build_trace(&frames, &baseline, &divider, &marks).map_err(|e| data_err!(e))?;
    let cfg = ContactConfig {
        epsilon_pct: args.epsilon,
        scope: parse_scope(&args.scope)?,
        ..ContactConfig::default()
    };
    cfg.validate().map_err(|e| num_err!(e))?;
    let windows = segment_trace(&trace, args.window);
    let steps = monitor_presence(&windows, &cfg);
    let mut out = String::from("window,state,removed_event\n");
    for s in &steps {
        let state = match s.presence {
            crate::control::Presence::Present => "present",
            crate::control::Presence::Absent => "absent",
        };
        out.push_str(&format!("{},{},{}\n", s.index, state, s.removed));
    }
    match &args.out {
        Some(p) => write_atomic(p, &out)?,
        None => print!("{out}"),
    }
    Ok(())
}

fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    let fmt_row = |cells: Vec<String>, widths: &[usize]| -> String {
        cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c:>w$}", w = w))
            .collect::<Vec<_>>()
            .join("  ")
    };
    out.push_str(&fmt_row(header.iter().map(|s| s.to_string()).collect(), &widths));
    out.push('\n');
    for row in rows {
        out.push_str(&fmt_row(row.clone(), &widths));
        out.push('\n');
    }
    out
}

fn round3(s: &str) -> String {
    match s.parse::<f64>() {
        Ok(v) => format!("{v:.3}"),
        Err(_) => s.to_string(),
    }
}

fn cmd_report(args: ReportArgs) -> Result<(), CliError> {
    let text = read_text(&args.input)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    let expected = match args.kind.as_str() {
        "sweep" => crate::sim::SWEEP_CSV_HEADER,
        "bench" => crate::sim::BENCH_CSV_HEADER,
        other => {
            return Err(CliError::Usage(format!("kind must be sweep or bench, got {other:?}")))
        }
    };
    if header.trim_end() != expected {
        return Err(CliError::Data(format!(
            "{}: header {header:?} does not match {expected:?} for kind {}",
            args.input.display(),
            args.kind
        )));
    }
    let data_rows: Vec<Vec<String>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|c| c.to_string()).collect())
        .collect();
    let header_cells: Vec<&str> = expected.split(',').collect();
    for (i, row) in data_rows.iter().enumerate() {
        if row.len() != header_cells.len() {
            return Err(CliError::Data(format!(
                "{} row {}: expected {} fields, got {}",
                args.input.display(),
                i + 2,
                header_cells.len(),
                row.len()
            )));
        }
    }
    match args.format.as_str() {
        "text" => {
            if data_rows.is_empty() {
                println!("no rows");
            } else {
                // Round numeric cells for display; the CSV keeps full precision.
                let display_rows: Vec<Vec<String>> = data_rows
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .map(|(i, c)| if i == 0 { c.clone() } else { round3(c) })
                            .collect()
                    })
                    .collect();
                print!("{}", render_table(&header_cells, &display_rows));
            }
        }
        "csv" => print!("{text}"),
        other => {
            return Err(CliError::Usage(format!("format must be text or csv, got {other:?}")))
        }
    }
    if let Some(out) = &args.out {
        write_atomic(out, &text)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_paths_derive_from_the_log_name() {
        let p = default_sidecar(Path::new("/tmp/session1.csv"), ".marks.csv");
        assert_eq!(p, Path::new("/tmp/session1.marks.csv"));
    }

    #[test]
    fn table_renderer_aligns_columns() {
        let table = render_table(
            &["technique", "err"],
            &[vec!["raw@2.5s".into(), "1.3".into()], vec!["exp".into(), "0.14".into()]],
        );
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].contains("technique"));
        assert!(lines[1].ends_with("1.3"));
    }

    #[test]
    fn scope_and_settle_parse() {
        assert!(parse_scope("aggregate").is_ok());
        assert!(parse_scope("any-pixel").is_ok());
        assert!(parse_scope("everything").is_err());
        assert!(parse_settle("fit").is_ok());
        assert!(parse_settle("raw").is_ok());
        assert!(parse_settle("maybe").is_err());
    }
}
