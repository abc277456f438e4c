//! Exponential-decay fitting of the post-actuation transient.
//!
//! Gripper actuation produces a fast resistance spike that decays toward a
//! settled value. Waiting for the signal to settle costs tens of seconds, so
//! instead the decay
//!
//! ```text
//! y(t) = A * exp(-lambda * (t - t_p)) + C
//! ```
//!
//! is fitted on a short window after the peak and `C` is used as the settled
//! estimate. The problem is separable: for any candidate `lambda`, the best
//! `(A, C)` solve a two-parameter linear least squares on the basis
//! `{exp(-lambda * (t - t_p)), 1}` (variable projection). `lambda` itself is
//! located by a log-spaced grid scan followed by golden-section refinement,
//! which is robust to initialization and makes the whole fit deterministic:
//! identical input yields bit-identical output.
//!
//! Over short windows the objective is often nearly flat in `lambda`: a slow
//! decay is indistinguishable from a straight line, and the asymptote of a
//! line is unbounded. The profile is therefore regularized by a Gaussian
//! prior on the log rate, centered on the sensor's calibrated reference rate
//! [`DEFAULT_DECAY_RATE`] with width [`RATE_PRIOR_LOG_WIDTH`], applied as a
//! multiplicative penalty so it scales with the noise level. On clean data
//! the penalty multiplies a vanishing objective and the exact minimizer is
//! recovered anywhere in the search bounds; on rate-blind noisy windows the
//! rate shrinks toward the calibrated value instead of sliding to a bound
//! where the asymptote diverges.

use crate::signal::ResistanceTrace;
use thiserror::Error;

/// Lower decay-rate bound. Below this the exponential basis is numerically
/// collinear with the constant over a 2 s window.
pub const LAMBDA_MIN: f64 = 0.01;
/// Upper decay-rate bound. Above this the transient dies within one sample
/// at 15 Hz.
pub const LAMBDA_MAX: f64 = 50.0;
/// Log-spaced grid points scanned before refinement.
pub const LAMBDA_GRID_POINTS: usize = 64;
/// Golden-section bracket width, relative to the decay rate. Tighter than
/// strictly needed for the rate itself so that the linear parameters, which
/// inherit the rate error amplified by the window span, still come out to
/// 1e-6 relative on clean input.
pub const GOLDEN_REL_TOL: f64 = 1e-12;
/// Prior width of the decay rate in natural-log units: one sigma spans a
/// factor of about 1.6 around the calibrated reference rate. The penalized
/// profile objective is `SSE(lambda) * (1 + (ln(lambda/ref)/width)^2 / dof)`,
/// which reduces to a Gaussian prior on the log rate at the noise scale the
/// residuals estimate.
pub const RATE_PRIOR_LOG_WIDTH: f64 = 0.35;

/// Post-peak guard interval skipped before fitting, seconds.
pub const DEFAULT_GUARD_S: f64 = 0.5;
/// Default cutoff: how long after actuation data is collected, seconds.
pub const DEFAULT_CUTOFF_S: f64 = 2.5;
/// Reference decay rate of the bundled sensor model, 1/s.
pub const DEFAULT_DECAY_RATE: f64 = 0.179;

const MIN_SAMPLES: usize = 4;

#[derive(Debug, Error)]
pub enum FitError {
    #[error("no samples in the requested window")]
    EmptyWindow,
    #[error("{have} usable samples in window, need at least {need}")]
    InsufficientData { have: usize, need: usize },
    #[error("non-finite sample value in fit window")]
    NonFinite,
    #[error("invalid fit window: {0}")]
    BadWindow(String),
}

/// Time anchors of one fit: actuation, peak, post-peak guard and cutoff.
///
/// The cutoff is measured from actuation, so the fitted samples satisfy
/// `t_p + t_a <= t <= t_actuation + t_c`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitWindow {
    pub t_actuation: f64,
    pub t_p: f64,
    pub t_a: f64,
    pub t_c: f64,
}

impl FitWindow {
    pub fn new(t_actuation: f64, t_p: f64, t_a: f64, t_c: f64) -> Result<Self, FitError> {
        if ![t_actuation, t_p, t_a, t_c].iter().all(|v| v.is_finite()) {
            return Err(FitError::BadWindow("non-finite anchor".into()));
        }
        if t_p < t_actuation {
            return Err(FitError::BadWindow(format!(
                "peak time {t_p} precedes actuation {t_actuation}"
            )));
        }
        if !(t_p + t_a < t_actuation + t_c) {
            return Err(FitError::BadWindow(format!(
                "window start {} not before cutoff {}",
                t_p + t_a,
                t_actuation + t_c
            )));
        }
        Ok(Self { t_actuation, t_p, t_a, t_c })
    }

    fn lo(&self) -> f64 {
        self.t_p + self.t_a
    }

    fn hi(&self) -> f64 {
        self.t_actuation + self.t_c
    }
}

/// Fitted decay parameters plus residual diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Initial spike amplitude, percent.
    pub a_star: f64,
    /// Decay rate, 1/s. Always positive.
    pub lambda_star: f64,
    /// Predicted settled relative resistance, percent; the model value as
    /// t goes to infinity.
    pub c_star: f64,
    pub rms_residual: f64,
    pub n_samples: usize,
    pub window: FitWindow,
    /// Set when the series was flat and the exponential amplitude is
    /// meaningless; `c_star` is then the window mean.
    pub degenerate: bool,
}

impl DecayFit {
    /// Model value at time `t` (same clock as the fit window).
    pub fn value_at(&self, t: f64) -> f64 {
        self.a_star * (-self.lambda_star * (t - self.window.t_p)).exp() + self.c_star
    }
}

/// Time of the maximum aggregate relative resistance in
/// `[t_actuation, t_actuation + t_c]`; the earliest sample wins ties.
pub fn detect_peak(trace: &ResistanceTrace, t_actuation: f64, t_c: f64) -> Result<f64, FitError> {
    let lo = t_actuation - 1e-9;
    let hi = t_actuation + t_c + 1e-9;
    let mut best: Option<(f64, f64)> = None;
    for (k, &t) in trace.times.iter().enumerate() {
        if t < lo || t > hi {
            continue;
        }
        if let Some(v) = trace.aggregate_rel[k] {
            match best {
                Some((_, bv)) if bv >= v => {}
                _ => best = Some((t, v)),
            }
        }
    }
    best.map(|(t, _)| t).ok_or(FitError::EmptyWindow)
}

/// Fit the decay model to the aggregate series over the window.
pub fn fit_decay(trace: &ResistanceTrace, window: &FitWindow) -> Result<DecayFit, FitError> {
    let (tau, y) = collect_window(trace, window, None)?;
    fit_decay_samples(&tau, &y, window)
}

/// Fit a single pixel's series; missing samples are skipped.
pub fn fit_decay_pixel(
    trace: &ResistanceTrace,
    pixel: usize,
    window: &FitWindow,
) -> Result<DecayFit, FitError> {
    let (tau, y) = collect_window(trace, window, Some(pixel))?;
    fit_decay_samples(&tau, &y, window)
}

/// Absolute difference between a settled estimate (fit or raw reading) and a
/// reference settled value, in percentage points.
pub fn settled_error(fit_or_reading: f64, reference_settled: f64) -> f64 {
    (fit_or_reading - reference_settled).abs()
}

fn collect_window(
    trace: &ResistanceTrace,
    window: &FitWindow,
    pixel: Option<usize>,
) -> Result<(Vec<f64>, Vec<f64>), FitError> {
    let lo = window.lo() - 1e-9;
    let hi = window.hi() + 1e-9;
    let mut tau = Vec::new();
    let mut y = Vec::new();
    for (k, &t) in trace.times.iter().enumerate() {
        if t < lo || t > hi {
            continue;
        }
        let v = match pixel {
            Some(p) => trace.per_pixel_rel[p][k],
            None => trace.aggregate_rel[k],
        };
        if let Some(v) = v {
            if !v.is_finite() {
                return Err(FitError::NonFinite);
            }
            tau.push(t - window.t_p);
            y.push(v);
        }
    }
    Ok((tau, y))
}

/// Linear subproblem: best (A, C) for a fixed decay rate, solved in centered
/// form for conditioning. Returns None when the basis degenerates.
fn solve_linear(tau: &[f64], y: &[f64], lambda: f64) -> Option<(f64, f64, f64)> {
    let n = tau.len() as f64;
    let mut phi_mean = 0.0;
    let mut y_mean = 0.0;
    for (&t, &v) in tau.iter().zip(y) {
        phi_mean += (-lambda * t).exp();
        y_mean += v;
    }
    phi_mean /= n;
    y_mean /= n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&t, &v) in tau.iter().zip(y) {
        let d = (-lambda * t).exp() - phi_mean;
        sxx += d * d;
        sxy += d * (v - y_mean);
    }
    if !(sxx > 0.0) || !sxx.is_finite() {
        return None;
    }
    let a = sxy / sxx;
    let c = y_mean - a * phi_mean;
    let mut sse = 0.0;
    for (&t, &v) in tau.iter().zip(y) {
        let r = v - (a * (-lambda * t).exp() + c);
        sse += r * r;
    }
    Some((a, c, sse))
}

fn fit_decay_samples(tau: &[f64], y: &[f64], window: &FitWindow) -> Result<DecayFit, FitError> {
    let n = y.len();
    if n < MIN_SAMPLES {
        return Err(FitError::InsufficientData { have: n, need: MIN_SAMPLES });
    }

    let y_mean = y.iter().sum::<f64>() / n as f64;
    let ss_tot: f64 = y.iter().map(|v| (v - y_mean) * (v - y_mean)).sum();
    let scale = y.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let degenerate_floor = (1e-12 * scale) * (1e-12 * scale) * n as f64;
    if ss_tot <= degenerate_floor {
        return Ok(DecayFit {
            a_star: 0.0,
            lambda_star: LAMBDA_MIN,
            c_star: y_mean,
            rms_residual: (ss_tot / n as f64).sqrt(),
            n_samples: n,
            window: *window,
            degenerate: true,
        });
    }

    // Penalized profile objective over log-spaced decay rates.
    let ln_lo = LAMBDA_MIN.ln();
    let ln_hi = LAMBDA_MAX.ln();
    let grid_lambda = |i: usize| -> f64 {
        let frac = i as f64 / (LAMBDA_GRID_POINTS - 1) as f64;
        (ln_lo + frac * (ln_hi - ln_lo)).exp()
    };
    let dof = (n as f64 - 3.0).max(1.0);
    let penalty = |lambda: f64| {
        let z = (lambda / DEFAULT_DECAY_RATE).ln() / RATE_PRIOR_LOG_WIDTH;
        1.0 + z * z / dof
    };
    let eval = |lambda: f64| {
        solve_linear(tau, y, lambda)
            .map(|(_, _, s)| s * penalty(lambda))
            .unwrap_or(f64::INFINITY)
    };
    let mut best: Option<(f64, f64)> = None; // (lambda, objective)
    let mut best_idx = 0usize;
    for i in 0..LAMBDA_GRID_POINTS {
        let lambda = grid_lambda(i);
        let obj = eval(lambda);
        if obj.is_finite() {
            match best {
                Some((_, bs)) if bs <= obj => {}
                _ => {
                    best = Some((lambda, obj));
                    best_idx = i;
                }
            }
        }
    }
    let Some(mut best) = best else {
        // Basis collinear at every candidate rate: flat-series fallback.
        return Ok(DecayFit {
            a_star: 0.0,
            lambda_star: LAMBDA_MIN,
            c_star: y_mean,
            rms_residual: (ss_tot / n as f64).sqrt(),
            n_samples: n,
            window: *window,
            degenerate: true,
        });
    };

    // Golden-section refinement between the grid neighbours of the best
    // point. The best-so-far objective is non-increasing by construction.
    let mut a = grid_lambda(best_idx.saturating_sub(1));
    let mut b = grid_lambda((best_idx + 1).min(LAMBDA_GRID_POINTS - 1));
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = eval(x1);
    let mut f2 = eval(x2);
    while b - a > GOLDEN_REL_TOL * b {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = eval(x2);
        }
    }
    for lambda in [x1, x2] {
        let obj = eval(lambda);
        if obj < best.1 {
            best = (lambda, obj);
        }
    }

    let lambda_star = best.0;
    let (a_star, c_star, sse) =
        solve_linear(tau, y, lambda_star).expect("selected rate has a valid linear solve");
    Ok(DecayFit {
        a_star,
        lambda_star,
        c_star,
        rms_residual: (sse.max(0.0) / n as f64).sqrt(),
        n_samples: n,
        window: *window,
        degenerate: false,
    })
}

// ---------------------------------------------------------------------------
// Flat fit-result record and its CSV form
// ---------------------------------------------------------------------------

pub const FIT_CSV_HEADER: &str = "a_star,lambda_star,c_star,rms_residual,t_p,t_c";

/// Serializable flat view of a fit, as written by the CLI report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitRecord {
    pub a_star: f64,
    pub lambda_star: f64,
    pub c_star: f64,
    pub rms_residual: f64,
    pub t_p: f64,
    pub t_c: f64,
}

impl From<&DecayFit> for FitRecord {
    fn from(fit: &DecayFit) -> Self {
        Self {
            a_star: fit.a_star,
            lambda_star: fit.lambda_star,
            c_star: fit.c_star,
            rms_residual: fit.rms_residual,
            t_p: fit.window.t_p,
            t_c: fit.window.t_c,
        }
    }
}

impl FitRecord {
    pub fn to_csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.a_star, self.lambda_star, self.c_star, self.rms_residual, self.t_p, self.t_c
        )
    }
}

#[derive(Debug, Error)]
#[error("fit record line {line}: {message}")]
pub struct RecordParseError {
    pub line: usize,
    pub message: String,
}

/// Parse a fit-result CSV (header plus one row per fit). Lines starting with
/// `#` are ignored so session files can prepend a header block.
pub fn parse_fit_csv(text: &str) -> Result<Vec<FitRecord>, RecordParseError> {
    let mut records = Vec::new();
    let mut saw_header = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line != FIT_CSV_HEADER {
                return Err(RecordParseError {
                    line: line_no,
                    message: format!("expected header {FIT_CSV_HEADER:?}, got {line:?}"),
                });
            }
            saw_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(RecordParseError {
                line: line_no,
                message: format!("expected 6 fields, got {}", fields.len()),
            });
        }
        let mut vals = [0.0f64; 6];
        for (j, f) in fields.iter().enumerate() {
            vals[j] = f.trim().parse::<f64>().map_err(|e| RecordParseError {
                line: line_no,
                message: format!("field {}: {e}", j + 1),
            })?;
        }
        records.push(FitRecord {
            a_star: vals[0],
            lambda_star: vals[1],
            c_star: vals[2],
            rms_residual: vals[3],
            t_p: vals[4],
            t_c: vals[5],
        });
    }
    if !saw_header {
        return Err(RecordParseError { line: 1, message: "missing header row".into() });
    }
    Ok(records)
}
