//! Deterministic object/gripper/sensor simulator.
//!
//! Physics: compression `x = max(0, diameter - width)`, spring force
//! `F = stiffness * x`, settled relative resistance
//! `C = settled_slope * F + settled_intercept` on contacting pixels, and a
//! post-actuation transient `A * exp(-lambda * (t - t_act)) + C` with spike
//! amplitude `A = spike_gain * F`. Additive Gaussian noise sits on the
//! relative-resistance signal; an optional 10-bit quantizer rounds readings
//! through the divider inverse so that emitted frame logs look exactly like
//! hardware captures. With the quantizer off, frame logs carry fractional
//! ADC counts and stay lossless.
//!
//! Randomness comes from a SplitMix64 stream (seeded, documented below), so
//! identical inputs and seed produce byte-identical logs on any platform.
//! Scenario sweeps derive one child seed per trial with [`derive_seed`],
//! making every trial independently reproducible.

use crate::calibration::{estimate_force, LinearModel};
use crate::control::GripperPort;
use crate::fit::{detect_peak, fit_decay, FitWindow, DEFAULT_CUTOFF_S, DEFAULT_DECAY_RATE, DEFAULT_GUARD_S};
use crate::kvfile::{KvFile, KvWriter};
use crate::signal::{
    build_trace, ActuationMark, DividerConfig, MarkKind, PixelBaseline, ResistanceTrace,
    SensorFrame, ADC_FULL_SCALE,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("width schedule is empty")]
    EmptySchedule,
    #[error("schedule entry {index} is not after the previous one")]
    UnorderedSchedule { index: usize },
    #[error("schedule must start at t = 0, got {0}")]
    ScheduleStart(f64),
    #[error("contact mask has {got} entries, grid has {want} pixels")]
    BadMask { got: usize, want: usize },
    #[error("invalid simulator parameter: {0}")]
    InvalidParams(String),
    #[error("scenario file: {0}")]
    Scenario(#[from] crate::kvfile::KvError),
    #[error(transparent)]
    Signal(#[from] crate::signal::SignalError),
}

// ---------------------------------------------------------------------------
// Seeded PRNG
// ---------------------------------------------------------------------------

/// SplitMix64: state advances by the golden-ratio increment
/// 0x9E3779B97F4A7C15 and each output is finalized with two xorshift-multiply
/// rounds (0xBF58476D1CE4E5B9, 0x94D049BB133111EB). The algorithm is fixed
/// here so seeds reproduce across implementations and platforms.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1) with 53-bit resolution.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller; consumes two uniforms per draw.
    pub fn next_gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64(); // (0, 1], keeps the log finite
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }
}

/// Child seed for trial `index` of a sweep run under `master`. Documented
/// splitting rule: the master seed is xored with `(index + 1)` times the
/// golden-ratio constant and run through one SplitMix64 output step.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    SplitMix64::new(master ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)).next_u64()
}

// ---------------------------------------------------------------------------
// Scenario model
// ---------------------------------------------------------------------------

/// A graspable object: a linear spring of the given diameter, touching the
/// pixels selected by the mask (all pixels when `None`).
#[derive(Debug, Clone, PartialEq)]
pub struct SimObject {
    pub diameter_mm: f64,
    pub stiffness_n_per_mm: f64,
    pub contact_mask: Option<Vec<bool>>,
}

impl SimObject {
    pub fn new(diameter_mm: f64, stiffness_n_per_mm: f64) -> Self {
        Self { diameter_mm, stiffness_n_per_mm, contact_mask: None }
    }

    pub fn with_mask(mut self, mask: Vec<bool>) -> Self {
        self.contact_mask = Some(mask);
        self
    }

    fn validate(&self, n_pixels: usize) -> Result<(), SimError> {
        if !(self.diameter_mm > 0.0) {
            return Err(SimError::InvalidParams(format!("diameter {} must be > 0", self.diameter_mm)));
        }
        if !(self.stiffness_n_per_mm > 0.0) {
            return Err(SimError::InvalidParams(format!(
                "stiffness {} must be > 0",
                self.stiffness_n_per_mm
            )));
        }
        if let Some(mask) = &self.contact_mask {
            if mask.len() != n_pixels {
                return Err(SimError::BadMask { got: mask.len(), want: n_pixels });
            }
            if !mask.iter().any(|&m| m) {
                return Err(SimError::InvalidParams("contact mask selects no pixels".into()));
            }
        }
        Ok(())
    }
}

/// Sensor response parameters. The default settled map is the inverse of the
/// bundled dragonskin30 force model, so force estimates made with that model
/// recover the simulated force exactly (up to noise).
#[derive(Debug, Clone, PartialEq)]
pub struct SimSensorParams {
    /// Transient decay rate, 1/s.
    pub lambda: f64,
    /// Spike amplitude per newton, percent.
    pub spike_gain_pct_per_n: f64,
    /// Settled response slope, percent per newton (negative: force lowers
    /// resistance).
    pub settled_slope_pct_per_n: f64,
    /// Settled response at zero force on a loaded pixel, percent.
    pub settled_intercept_pct: f64,
    /// Additive Gaussian noise on the relative signal, percent.
    pub noise_sigma_pct: f64,
    /// Round readings through the 10-bit divider inverse.
    pub quantize_10bit: bool,
    pub sample_rate_hz: f64,
    /// Resting-resistance drift, percent per 1000 grasp cycles.
    pub drift_pct_per_1000_cycles: f64,
    /// Resting resistance of every pixel, ohms.
    pub rest_resistance_ohms: f64,
    pub rows: usize,
    pub cols: usize,
}

impl Default for SimSensorParams {
    fn default() -> Self {
        // Inverse of the dragonskin30 force line F = a*C + b:
        // C = F/a - b/a.
        let (a, b) = (-0.163, 1.81);
        Self {
            lambda: DEFAULT_DECAY_RATE,
            spike_gain_pct_per_n: 6.0,
            settled_slope_pct_per_n: 1.0 / a,
            settled_intercept_pct: -b / a,
            noise_sigma_pct: 0.5,
            quantize_10bit: true,
            sample_rate_hz: 15.0,
            drift_pct_per_1000_cycles: 0.0,
            rest_resistance_ohms: 4700.0,
            rows: 2,
            cols: 2,
        }
    }
}

impl SimSensorParams {
    /// Settled map set to the inverse of a force model, so that model
    /// recovers simulated forces exactly.
    pub fn with_force_model_inverse(mut self, model: &LinearModel) -> Self {
        self.settled_slope_pct_per_n = 1.0 / model.slope;
        self.settled_intercept_pct = -model.intercept / model.slope;
        self
    }

    pub fn n_pixels(&self) -> usize {
        self.rows * self.cols
    }

    fn validate(&self) -> Result<(), SimError> {
        if !(self.lambda > 0.0) {
            return Err(SimError::InvalidParams(format!("lambda {} must be > 0", self.lambda)));
        }
        if !(self.sample_rate_hz > 0.0) {
            return Err(SimError::InvalidParams(format!(
                "sample_rate {} must be > 0",
                self.sample_rate_hz
            )));
        }
        if self.noise_sigma_pct < 0.0 {
            return Err(SimError::InvalidParams(format!(
                "noise_sigma {} must be >= 0",
                self.noise_sigma_pct
            )));
        }
        if !(self.rest_resistance_ohms > 0.0) {
            return Err(SimError::InvalidParams(format!(
                "rest_resistance {} must be > 0",
                self.rest_resistance_ohms
            )));
        }
        if self.rows * self.cols == 0 {
            return Err(SimError::InvalidParams("grid has no pixels".into()));
        }
        Ok(())
    }

    fn settled_pct(&self, force_n: f64) -> f64 {
        if force_n > 0.0 {
            self.settled_slope_pct_per_n * force_n + self.settled_intercept_pct
        } else {
            0.0
        }
    }
}

/// Per-step ground truth emitted next to every simulated log.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepTruth {
    pub time_s: f64,
    pub width_mm: f64,
    pub force_n: f64,
    pub c_true_pct: f64,
}

/// One simulated grasp: the frame log, its marks, the baseline it was
/// normalized against, the reconstructed trace and the ground truth.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub frames: Vec<SensorFrame>,
    pub marks: Vec<ActuationMark>,
    pub baseline: PixelBaseline,
    pub divider: DividerConfig,
    pub trace: ResistanceTrace,
    pub truth: Vec<StepTruth>,
}

/// ADC count (fractional) for a pixel resistance, via the divider inverse.
fn count_for_resistance(r_ohms: f64, divider: &DividerConfig, quantize: bool) -> f64 {
    let raw = ADC_FULL_SCALE * divider.r_fixed / (r_ohms + divider.r_fixed);
    if quantize {
        raw.round().clamp(0.0, ADC_FULL_SCALE)
    } else {
        raw.clamp(0.0, ADC_FULL_SCALE)
    }
}

/// Simulate one capture driven by a width schedule.
///
/// `width_schedule` entries are `(time_s, width_mm)`; the first entry must be
/// at t = 0 and sets the initial width (no actuation mark). Every later
/// entry is an instantaneous move that emits start/stop marks and restarts
/// the transient. Fixed `(inputs, seed)` reproduce the log byte for byte.
pub fn simulate_grasp(
    object: &SimObject,
    width_schedule: &[(f64, f64)],
    duration_s: f64,
    params: &SimSensorParams,
    seed: u64,
) -> Result<SimRun, SimError> {
    params.validate()?;
    object.validate(params.n_pixels())?;
    if width_schedule.is_empty() {
        return Err(SimError::EmptySchedule);
    }
    if width_schedule[0].0 != 0.0 {
        return Err(SimError::ScheduleStart(width_schedule[0].0));
    }
    for (i, w) in width_schedule.windows(2).enumerate() {
        if !(w[1].0 > w[0].0) {
            return Err(SimError::UnorderedSchedule { index: i + 1 });
        }
    }

    let n_px = params.n_pixels();
    let mask: Vec<bool> =
        object.contact_mask.clone().unwrap_or_else(|| vec![true; n_px]);
    let divider = DividerConfig::default();
    let baseline =
        PixelBaseline::uniform(params.rows, params.cols, params.rest_resistance_ohms)?;

    // Marks, cycle counts and per-step truth.
    let mut marks = Vec::new();
    let mut truth = Vec::new();
    let mut steps: Vec<(f64, f64, f64, usize)> = Vec::new(); // (t, width, force, cycles_so_far)
    let mut cycles = 0usize;
    for (i, &(t, width)) in width_schedule.iter().enumerate() {
        let force = object.stiffness_n_per_mm * (object.diameter_mm - width).max(0.0);
        if i > 0 {
            let closing = width < width_schedule[i - 1].1;
            let (start, stop) = if closing {
                (MarkKind::CloseStart, MarkKind::CloseStop)
            } else {
                (MarkKind::OpenStart, MarkKind::OpenStop)
            };
            if closing {
                cycles += 1;
            }
            marks.push(ActuationMark { time: t, kind: start });
            marks.push(ActuationMark { time: t, kind: stop });
        }
        steps.push((t, width, force, cycles));
        truth.push(StepTruth { time_s: t, width_mm: width, force_n: force, c_true_pct: params.settled_pct(force) });
    }

    let mut rng = SplitMix64::new(seed);
    let n_samples = (duration_s * params.sample_rate_hz).floor() as usize + 1;
    let mut frames = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let t = k as f64 / params.sample_rate_hz;
        // Active step: last schedule entry at or before t.
        let step = steps.iter().rev().find(|s| s.0 <= t).unwrap_or(&steps[0]);
        let (t_act, _, force, cycle) = (step.0, step.1, step.2, step.3);
        let settled = params.settled_pct(force);
        let spike = params.spike_gain_pct_per_n * force;
        let drift_factor = 1.0 + params.drift_pct_per_1000_cycles * cycle as f64 / 1000.0 / 100.0;
        let mut counts = Vec::with_capacity(n_px);
        for px in 0..n_px {
            // Noise is drawn for every pixel of every sample in fixed order,
            // regardless of contact, so the draw schedule is stable across
            // scenario variations.
            let noise = params.noise_sigma_pct * rng.next_gaussian();
            let response = if mask[px] && force > 0.0 {
                spike * (-params.lambda * (t - t_act)).exp() + settled
            } else {
                0.0
            };
            let r = params.rest_resistance_ohms * drift_factor * (1.0 + (response + noise) / 100.0);
            counts.push(count_for_resistance(r.max(0.0), &divider, params.quantize_10bit));
        }
        frames.push(SensorFrame::new(t, params.rows, params.cols, counts, "sim")?);
    }

    let trace = build_trace(&frames, &baseline, &divider, &marks)?;
    Ok(SimRun { frames, marks, baseline, divider, trace, truth })
}

// ---------------------------------------------------------------------------
// Simulated gripper port
// ---------------------------------------------------------------------------

/// Width-controlled gripper backed by the simulator; implements the same
/// port the control loops drive on hardware.
///
/// Each capture draws noise from a child seed derived from the capture
/// counter, so two runs visiting the same step sequence see identical noise
/// regardless of object parameters.
#[derive(Debug, Clone)]
pub struct SimGripper {
    object: SimObject,
    params: SimSensorParams,
    divider: DividerConfig,
    baseline: PixelBaseline,
    width_mm: f64,
    min_width_mm: f64,
    max_width_mm: f64,
    master_seed: u64,
    captures: u64,
    /// Global time of the most recent actuation, if any.
    t_actuation: Option<f64>,
    t_now: f64,
    pending_marks: Vec<MarkKind>,
    cycles: usize,
}

impl SimGripper {
    pub fn new(object: SimObject, params: SimSensorParams, seed: u64) -> Result<Self, SimError> {
        params.validate()?;
        object.validate(params.n_pixels())?;
        let baseline =
            PixelBaseline::uniform(params.rows, params.cols, params.rest_resistance_ohms)?;
        Ok(Self {
            object,
            params,
            divider: DividerConfig::default(),
            baseline,
            width_mm: 120.0,
            min_width_mm: 0.0,
            max_width_mm: 120.0,
            master_seed: seed,
            captures: 0,
            t_actuation: None,
            t_now: 0.0,
            pending_marks: Vec::new(),
            cycles: 0,
        })
    }

    pub fn baseline(&self) -> &PixelBaseline {
        &self.baseline
    }

    fn force_n(&self) -> f64 {
        self.object.stiffness_n_per_mm * (self.object.diameter_mm - self.width_mm).max(0.0)
    }
}

impl GripperPort for SimGripper {
    fn set_width(&mut self, width_mm: f64) -> f64 {
        let clamped = width_mm.clamp(self.min_width_mm, self.max_width_mm);
        if clamped != self.width_mm {
            let closing = clamped < self.width_mm;
            if closing {
                self.cycles += 1;
                self.pending_marks.push(MarkKind::CloseStart);
                self.pending_marks.push(MarkKind::CloseStop);
            } else {
                self.pending_marks.push(MarkKind::OpenStart);
                self.pending_marks.push(MarkKind::OpenStop);
            }
            self.t_actuation = Some(self.t_now);
            self.width_mm = clamped;
        }
        self.width_mm
    }

    fn current_width(&self) -> f64 {
        self.width_mm
    }

    fn capture(&mut self, duration_s: f64) -> ResistanceTrace {
        let seed = derive_seed(self.master_seed, self.captures);
        self.captures += 1;
        let mut rng = SplitMix64::new(seed);
        let p = &self.params;
        let n_px = p.n_pixels();
        let mask: Vec<bool> =
            self.object.contact_mask.clone().unwrap_or_else(|| vec![true; n_px]);
        let force = self.force_n();
        let settled = p.settled_pct(force);
        let spike = p.spike_gain_pct_per_n * force;
        let drift = 1.0 + p.drift_pct_per_1000_cycles * self.cycles as f64 / 1000.0 / 100.0;
        let t0 = self.t_now;
        let n_samples = (duration_s * p.sample_rate_hz).floor() as usize + 1;
        let mut frames = Vec::with_capacity(n_samples);
        for k in 0..n_samples {
            let rel_t = k as f64 / p.sample_rate_hz;
            let t_global = t0 + rel_t;
            let mut counts = Vec::with_capacity(n_px);
            for px in 0..n_px {
                let noise = p.noise_sigma_pct * rng.next_gaussian();
                let response = if mask[px] && force > 0.0 {
                    let since_act = self.t_actuation.map(|ta| t_global - ta).unwrap_or(f64::MAX);
                    spike * (-p.lambda * since_act).exp() + settled
                } else {
                    0.0
                };
                let r = p.rest_resistance_ohms * drift * (1.0 + (response + noise) / 100.0);
                counts.push(count_for_resistance(r.max(0.0), &self.divider, p.quantize_10bit));
            }
            frames.push(
                SensorFrame::new(rel_t, p.rows, p.cols, counts, "sim").expect("valid sim frame"),
            );
        }
        let marks: Vec<ActuationMark> = self
            .pending_marks
            .drain(..)
            .map(|kind| ActuationMark { time: 0.0, kind })
            .collect();
        self.t_now += duration_s;
        build_trace(&frames, &self.baseline, &self.divider, &marks).expect("valid sim trace")
    }
}

// ---------------------------------------------------------------------------
// Cutoff sweep and force benchmark
// ---------------------------------------------------------------------------

/// One corpus material: a named force line (newtons per percent) used both
/// forward (estimation) and inverted (simulation).
#[derive(Debug, Clone)]
pub struct Material {
    pub name: String,
    pub force_model: LinearModel,
}

/// Cross product of materials, grasping widths and repeats.
#[derive(Debug, Clone)]
pub struct CorpusSpec {
    pub materials: Vec<Material>,
    pub widths_mm: Vec<f64>,
    pub repeats: usize,
    pub object_diameter_mm: f64,
    pub object_stiffness_n_per_mm: f64,
}

impl CorpusSpec {
    /// Four bundled silicone pads at five grasp widths, ten repeats each:
    /// 200 trials spanning roughly 2 to 6 N.
    pub fn default_silicone(repeats: usize) -> Self {
        let materials = crate::calibration::default_force_models()
            .into_iter()
            .map(|(name, force_model)| Material { name, force_model })
            .collect();
        Self {
            materials,
            widths_mm: vec![39.0, 38.5, 38.0, 37.5, 37.0],
            repeats,
            object_diameter_mm: 40.0,
            object_stiffness_n_per_mm: 2.0,
        }
    }

    pub fn n_trials(&self) -> usize {
        self.materials.len() * self.widths_mm.len() * self.repeats
    }

    fn is_empty(&self) -> bool {
        self.materials.is_empty() || self.widths_mm.is_empty() || self.repeats == 0
    }
}

/// Per-cutoff error summary of a sweep run.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffRow {
    pub cutoff_s: f64,
    pub exp_median_err_pct: f64,
    pub raw_median_err_pct: f64,
    /// `(raw - exp) / raw * 100`; `None` when the raw error is zero.
    pub reduction_pct: Option<f64>,
    /// Trials whose fit failed at this cutoff and were excluded.
    pub excluded: usize,
}

const SWEEP_ACTUATION_S: f64 = 1.0;
const TAIL_MARGIN_S: f64 = 0.5;

fn median(values: &mut Vec<f64>) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

struct Trial {
    run: SimRun,
    c_true: f64,
    f_true: f64,
    force_model: LinearModel,
}

fn run_corpus(corpus: &CorpusSpec, max_cutoff_s: f64, params: &SimSensorParams, seed: u64) -> Result<Vec<Trial>, SimError> {
    if corpus.is_empty() {
        return Err(SimError::InvalidParams("corpus spec is empty".into()));
    }
    let mut trials = Vec::with_capacity(corpus.n_trials());
    let open_width = corpus.object_diameter_mm + 5.0;
    let mut index = 0u64;
    for material in &corpus.materials {
        let mat_params = params.clone().with_force_model_inverse(&material.force_model);
        for &width in &corpus.widths_mm {
            for _ in 0..corpus.repeats {
                let object = SimObject::new(corpus.object_diameter_mm, corpus.object_stiffness_n_per_mm);
                let schedule = [(0.0, open_width), (SWEEP_ACTUATION_S, width)];
                let duration = SWEEP_ACTUATION_S + max_cutoff_s + TAIL_MARGIN_S;
                let run = simulate_grasp(
                    &object,
                    &schedule,
                    duration,
                    &mat_params,
                    derive_seed(seed, index),
                )?;
                index += 1;
                let last = *run.truth.last().expect("schedule has steps");
                trials.push(Trial {
                    run,
                    c_true: last.c_true_pct,
                    f_true: last.force_n,
                    force_model: material.force_model.clone(),
                });
            }
        }
    }
    Ok(trials)
}

/// For each cutoff, the median settled-estimate error of the decay fit
/// against ground truth, next to the error of simply reading the signal at
/// the cutoff time.
pub fn run_cutoff_sweep(
    corpus: &CorpusSpec,
    cutoffs_s: &[f64],
    params: &SimSensorParams,
    seed: u64,
) -> Result<Vec<CutoffRow>, SimError> {
    if cutoffs_s.is_empty() {
        return Err(SimError::InvalidParams("no cutoffs requested".into()));
    }
    let max_cutoff = cutoffs_s.iter().fold(0.0f64, |m, &c| m.max(c));
    let trials = run_corpus(corpus, max_cutoff, params, seed)?;
    let mut rows = Vec::with_capacity(cutoffs_s.len());
    for &t_c in cutoffs_s {
        let mut exp_errs = Vec::new();
        let mut raw_errs = Vec::new();
        let mut excluded = 0usize;
        for trial in &trials {
            let trace = &trial.run.trace;
            if let Some(raw) = trace.aggregate_at(SWEEP_ACTUATION_S + t_c) {
                raw_errs.push((raw - trial.c_true).abs());
            }
            let fitted = detect_peak(trace, SWEEP_ACTUATION_S, t_c)
                .and_then(|t_p| FitWindow::new(SWEEP_ACTUATION_S, t_p, DEFAULT_GUARD_S, t_c))
                .and_then(|w| fit_decay(trace, &w));
            match fitted {
                Ok(fit) => exp_errs.push((fit.c_star - trial.c_true).abs()),
                Err(_) => excluded += 1,
            }
        }
        let exp_med = median(&mut exp_errs);
        let raw_med = median(&mut raw_errs);
        let reduction = if raw_med > 0.0 { Some((raw_med - exp_med) / raw_med * 100.0) } else { None };
        rows.push(CutoffRow {
            cutoff_s: t_c,
            exp_median_err_pct: exp_med,
            raw_median_err_pct: raw_med,
            reduction_pct: reduction,
            excluded,
        });
    }
    Ok(rows)
}

/// Force-estimation techniques compared by the benchmark.
pub const BENCH_TECHNIQUES: [&str; 4] = ["raw@2.5s", "raw@10s", "raw@20s", "exponential@2.5s"];

/// Per-technique force-error summary.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub technique: String,
    pub mean_abs_err_n: f64,
    pub std_abs_err_n: f64,
    pub mean_pct_err: f64,
    pub trials: usize,
    pub excluded: usize,
}

/// Average force-estimation error per technique: raw readings at 2.5, 10 and
/// 20 s against the decay fit at 2.5 s, each mapped through the material's
/// force model.
pub fn run_force_benchmark(
    corpus: &CorpusSpec,
    params: &SimSensorParams,
    seed: u64,
) -> Result<Vec<BenchRow>, SimError> {
    let raw_times = [2.5f64, 10.0, 20.0];
    let fit_cutoff = DEFAULT_CUTOFF_S;
    let trials = run_corpus(corpus, 20.0, params, seed)?;
    let mut per_tech: Vec<(Vec<f64>, Vec<f64>, usize)> =
        vec![(Vec::new(), Vec::new(), 0); BENCH_TECHNIQUES.len()];

    for trial in &trials {
        let trace = &trial.run.trace;
        for (i, &t) in raw_times.iter().enumerate() {
            if let Some(raw) = trace.aggregate_at(SWEEP_ACTUATION_S + t) {
                let est = estimate_force(raw, &trial.force_model).expect("newton model");
                per_tech[i].0.push((est.value - trial.f_true).abs());
                per_tech[i].1.push((est.value - trial.f_true).abs() / trial.f_true * 100.0);
            }
        }
        let fitted = detect_peak(trace, SWEEP_ACTUATION_S, fit_cutoff)
            .and_then(|t_p| FitWindow::new(SWEEP_ACTUATION_S, t_p, DEFAULT_GUARD_S, fit_cutoff))
            .and_then(|w| fit_decay(trace, &w));
        match fitted {
            Ok(fit) => {
                let est = estimate_force(fit.c_star, &trial.force_model).expect("newton model");
                per_tech[3].0.push((est.value - trial.f_true).abs());
                per_tech[3].1.push((est.value - trial.f_true).abs() / trial.f_true * 100.0);
            }
            Err(_) => per_tech[3].2 += 1,
        }
    }

    Ok(BENCH_TECHNIQUES
        .iter()
        .zip(per_tech)
        .map(|(name, (abs_errs, pct_errs, excluded))| {
            let n = abs_errs.len();
            let mean = abs_errs.iter().sum::<f64>() / n.max(1) as f64;
            let var = if n > 1 {
                abs_errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1) as f64
            } else {
                0.0
            };
            BenchRow {
                technique: name.to_string(),
                mean_abs_err_n: mean,
                std_abs_err_n: var.sqrt(),
                mean_pct_err: pct_errs.iter().sum::<f64>() / n.max(1) as f64,
                trials: n,
                excluded,
            }
        })
        .collect())
}

// ---------------------------------------------------------------------------
// CSV forms
// ---------------------------------------------------------------------------

pub const SWEEP_CSV_HEADER: &str =
    "cutoff_s,exp_median_err_pct,raw_median_err_pct,reduction_pct,excluded";
pub const BENCH_CSV_HEADER: &str =
    "technique,mean_abs_err_n,std_abs_err_n,mean_pct_err,trials,excluded";
pub const TRUTH_CSV_HEADER: &str = "time_s,width_mm,force_n,c_true_pct";

pub fn sweep_to_csv(rows: &[CutoffRow]) -> String {
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for r in rows {
        let reduction = r.reduction_pct.map(|v| v.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.cutoff_s, r.exp_median_err_pct, r.raw_median_err_pct, reduction, r.excluded
        ));
    }
    out
}

pub fn bench_to_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from(BENCH_CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.technique, r.mean_abs_err_n, r.std_abs_err_n, r.mean_pct_err, r.trials, r.excluded
        ));
    }
    out
}

pub fn truth_to_csv(truth: &[StepTruth]) -> String {
    let mut out = String::from(TRUTH_CSV_HEADER);
    out.push('\n');
    for t in truth {
        out.push_str(&format!("{},{},{},{}\n", t.time_s, t.width_mm, t.force_n, t.c_true_pct));
    }
    out
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

/// A full simulation scenario, loadable from the shared key-value format:
/// sections `[object]`, `[sensor]`, `[schedule]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimScenario {
    pub object: SimObject,
    pub params: SimSensorParams,
    pub schedule: Vec<(f64, f64)>,
    pub duration_s: f64,
    pub seed: Option<u64>,
}

impl SimScenario {
    pub fn to_text(&self) -> String {
        let mut w = KvWriter::new();
        w.section("object");
        w.kv("diameter_mm", self.object.diameter_mm);
        w.kv("stiffness_n_per_mm", self.object.stiffness_n_per_mm);
        if let Some(mask) = &self.object.contact_mask {
            let bits: Vec<&str> = mask.iter().map(|&b| if b { "1" } else { "0" }).collect();
            w.kv("contact_mask", bits.join(" "));
        }
        w.section("sensor");
        let p = &self.params;
        w.kv("lambda", p.lambda);
        w.kv("spike_gain_pct_per_n", p.spike_gain_pct_per_n);
        w.kv("settled_slope_pct_per_n", p.settled_slope_pct_per_n);
        w.kv("settled_intercept_pct", p.settled_intercept_pct);
        w.kv("noise_sigma_pct", p.noise_sigma_pct);
        w.kv("quantize_10bit", p.quantize_10bit);
        w.kv("sample_rate_hz", p.sample_rate_hz);
        w.kv("drift_pct_per_1000_cycles", p.drift_pct_per_1000_cycles);
        w.kv("rest_resistance_ohms", p.rest_resistance_ohms);
        w.kv("rows", p.rows);
        w.kv("cols", p.cols);
        w.section("schedule");
        let pts: Vec<String> = self.schedule.iter().map(|(t, wd)| format!("{t}:{wd}")).collect();
        w.kv("points", pts.join(" "));
        w.kv("duration_s", self.duration_s);
        if let Some(seed) = self.seed {
            w.kv("seed", seed);
        }
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self, SimError> {
        let kv = KvFile::parse(text)?;
        let obj = kv
            .section("object")
            .ok_or_else(|| SimError::InvalidParams("scenario missing [object]".into()))?;
        let mut object =
            SimObject::new(obj.parse_f64("diameter_mm")?, obj.parse_f64("stiffness_n_per_mm")?);
        if let Some(mask_raw) = obj.get("contact_mask") {
            let mask: Result<Vec<bool>, SimError> = mask_raw
                .split_whitespace()
                .map(|tok| match tok {
                    "1" => Ok(true),
                    "0" => Ok(false),
                    other => Err(SimError::InvalidParams(format!(
                        "contact_mask token {other:?} must be 0 or 1"
                    ))),
                })
                .collect();
            object = object.with_mask(mask?);
        }
        let mut params = SimSensorParams::default();
        if let Some(sensor) = kv.section("sensor") {
            // every sensor key is optional and falls back to the default
            if sensor.get("lambda").is_some() {
                params.lambda = sensor.parse_f64("lambda")?;
            }
            if sensor.get("spike_gain_pct_per_n").is_some() {
                params.spike_gain_pct_per_n = sensor.parse_f64("spike_gain_pct_per_n")?;
            }
            if sensor.get("settled_slope_pct_per_n").is_some() {
                params.settled_slope_pct_per_n = sensor.parse_f64("settled_slope_pct_per_n")?;
            }
            if sensor.get("settled_intercept_pct").is_some() {
                params.settled_intercept_pct = sensor.parse_f64("settled_intercept_pct")?;
            }
            if sensor.get("noise_sigma_pct").is_some() {
                params.noise_sigma_pct = sensor.parse_f64("noise_sigma_pct")?;
            }
            if sensor.get("quantize_10bit").is_some() {
                params.quantize_10bit = sensor.parse_bool("quantize_10bit")?;
            }
            if sensor.get("sample_rate_hz").is_some() {
                params.sample_rate_hz = sensor.parse_f64("sample_rate_hz")?;
            }
            if sensor.get("drift_pct_per_1000_cycles").is_some() {
                params.drift_pct_per_1000_cycles = sensor.parse_f64("drift_pct_per_1000_cycles")?;
            }
            if sensor.get("rest_resistance_ohms").is_some() {
                params.rest_resistance_ohms = sensor.parse_f64("rest_resistance_ohms")?;
            }
            if sensor.get("rows").is_some() {
                params.rows = sensor.parse_usize("rows")?;
            }
            if sensor.get("cols").is_some() {
                params.cols = sensor.parse_usize("cols")?;
            }
        }
        let sched = kv
            .section("schedule")
            .ok_or_else(|| SimError::InvalidParams("scenario missing [schedule]".into()))?;
        let mut schedule = Vec::new();
        for tok in sched.require("points")?.split_whitespace() {
            let Some((t, wd)) = tok.split_once(':') else {
                return Err(SimError::InvalidParams(format!(
                    "schedule point {tok:?} must be time:width"
                )));
            };
            let t: f64 = t
                .parse()
                .map_err(|e| SimError::InvalidParams(format!("schedule time {t:?}: {e}")))?;
            let wd: f64 = wd
                .parse()
                .map_err(|e| SimError::InvalidParams(format!("schedule width {wd:?}: {e}")))?;
            schedule.push((t, wd));
        }
        let duration_s = sched.parse_f64("duration_s")?;
        let seed = match sched.get("seed") {
            Some(_) => Some(sched.parse_u64("seed")?),
            None => None,
        };
        Ok(Self { object, params, schedule, duration_s, seed })
    }

    pub fn run(&self, fallback_seed: u64) -> Result<SimRun, SimError> {
        simulate_grasp(
            &self.object,
            &self.schedule,
            self.duration_s,
            &self.params,
            self.seed.unwrap_or(fallback_seed),
        )
    }
}
