//! Produce-handling analytics over settled-resistance sessions: ripeness
//! trend tracking across days and bruise detection against a reference
//! grasp.
//!
//! Softening maps to the settled estimate moving toward 0 (less negative):
//! softer material produces a smaller resistance decrease at the same grasp
//! width. Sessions are only comparable at identical grasp width.

use crate::fit::{fit_decay_pixel, FitRecord, FitWindow, RecordParseError};
use crate::signal::ResistanceTrace;
use statrs::distribution::{ContinuousCDF, StudentsT};
use thiserror::Error;

/// Minimum |slope| (percent per day) before a trend is called, below which
/// the series is reported stable.
pub const DEFAULT_TREND_THRESHOLD: f64 = 0.5;
/// Default one-sided significance level of the Welch test policy.
pub const DEFAULT_WELCH_ALPHA: f64 = 0.01;
/// Sigma multiplier of the reference-only anomaly threshold.
pub const REFERENCE_SIGMA_Z: f64 = 3.0;

#[derive(Debug, Error)]
pub enum ProduceError {
    #[error("sessions are not comparable: {0}")]
    IncomparableSessions(String),
    #[error("need at least {need} trials, got {got}")]
    InsufficientTrials { need: usize, got: usize },
    #[error("session has no trials")]
    EmptySession,
    #[error("session file line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Settled estimates from one measurement session (one produce item, one
/// day, repeated trials at a fixed grasp width).
#[derive(Debug, Clone, PartialEq)]
pub struct SessionRecord {
    pub session_id: String,
    pub day_index: i64,
    pub c_stars: Vec<f64>,
    pub grasp_width_mm: f64,
    pub notes: String,
}

impl SessionRecord {
    pub fn new(
        session_id: impl Into<String>,
        day_index: i64,
        c_stars: Vec<f64>,
        grasp_width_mm: f64,
    ) -> Result<Self, ProduceError> {
        if c_stars.is_empty() {
            return Err(ProduceError::EmptySession);
        }
        Ok(Self {
            session_id: session_id.into(),
            day_index,
            c_stars,
            grasp_width_mm,
            notes: String::new(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.c_stars.iter().sum::<f64>() / self.c_stars.len() as f64
    }

    /// Sample standard deviation; 0 for a single trial.
    pub fn std(&self) -> f64 {
        let n = self.c_stars.len();
        if n < 2 {
            return 0.0;
        }
        let mean = self.mean();
        (self.c_stars.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trend {
    Softening,
    Stiffening,
    Stable,
}

impl Trend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Trend::Softening => "softening",
            Trend::Stiffening => "stiffening",
            Trend::Stable => "stable",
        }
    }
}

/// OLS slope of per-session mean settled estimate against day index, with a
/// direction call: softening when the magnitude shrinks toward 0 faster than
/// `s_min` percent per day, stiffening for the opposite, stable in between.
pub fn ripeness_trend(sessions: &[SessionRecord], s_min: f64) -> Result<(f64, Trend), ProduceError> {
    if sessions.len() < 2 {
        return Err(ProduceError::IncomparableSessions(format!(
            "need at least 2 sessions, got {}",
            sessions.len()
        )));
    }
    check_widths(sessions)?;
    let points: Vec<(f64, f64)> =
        sessions.iter().map(|s| (s.day_index as f64, s.mean())).collect();
    let (slope, _, _) = crate::calibration::ols(&points).map_err(|e| {
        ProduceError::IncomparableSessions(format!("cannot fit day trend: {e}"))
    })?;
    let trend = if slope > s_min {
        Trend::Softening
    } else if slope < -s_min {
        Trend::Stiffening
    } else {
        Trend::Stable
    };
    Ok((slope, trend))
}

fn check_widths(sessions: &[SessionRecord]) -> Result<(), ProduceError> {
    let w0 = sessions[0].grasp_width_mm;
    for s in sessions {
        if (s.grasp_width_mm - w0).abs() > 1e-9 {
            return Err(ProduceError::IncomparableSessions(format!(
                "grasp widths differ: {} mm vs {} mm",
                w0, s.grasp_width_mm
            )));
        }
    }
    Ok(())
}

/// How an observed session is tested against the reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BruisePolicy {
    /// Anomalous when the observed mean crosses the midpoint between the
    /// reference mean and a damaged-class calibration mean; without that
    /// calibration, falls back to reference mean plus three reference
    /// sigmas.
    Midpoint { damaged_mean: Option<f64> },
    /// One-sided Welch (unequal-variance) t test at the given significance
    /// level, with the observed mean required on the less-negative side.
    Welch { alpha: f64 },
}

impl BruisePolicy {
    pub fn midpoint(damaged_mean: Option<f64>) -> Self {
        BruisePolicy::Midpoint { damaged_mean }
    }

    pub fn welch() -> Self {
        BruisePolicy::Welch { alpha: DEFAULT_WELCH_ALPHA }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Nominal,
    Anomalous,
}

impl Verdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            Verdict::Nominal => "nominal",
            Verdict::Anomalous => "anomalous",
        }
    }
}

/// Bruise decision with the threshold it was made against.
#[derive(Debug, Clone, PartialEq)]
pub struct BruiseVerdict {
    pub verdict: Verdict,
    pub reference_mean: f64,
    pub observed_mean: f64,
    /// Observed-mean threshold in percent; crossing it (less negative) is
    /// anomalous.
    pub threshold: f64,
    /// Distance of the observed mean from the threshold.
    pub margin: f64,
}

/// Compare an observed session against a reference grasp of the same item.
/// A bruise softens the contact area, so the anomalous side is always a
/// less-negative (smaller-magnitude) settled estimate.
pub fn detect_bruise(
    reference: &SessionRecord,
    observed: &SessionRecord,
    policy: BruisePolicy,
) -> Result<BruiseVerdict, ProduceError> {
    if (reference.grasp_width_mm - observed.grasp_width_mm).abs() > 1e-9 {
        return Err(ProduceError::IncomparableSessions(format!(
            "grasp widths differ: {} mm vs {} mm",
            reference.grasp_width_mm, observed.grasp_width_mm
        )));
    }
    let mu_ref = reference.mean();
    let mu_obs = observed.mean();
    let threshold = match policy {
        // The midpoint never sits below the reference mean: a damaged
        // calibration more negative than the reference would otherwise flag
        // unshifted sessions.
        BruisePolicy::Midpoint { damaged_mean: Some(damaged) } => {
            ((mu_ref + damaged) / 2.0).max(mu_ref)
        }
        BruisePolicy::Midpoint { damaged_mean: None } => {
            mu_ref + REFERENCE_SIGMA_Z * reference.std()
        }
        BruisePolicy::Welch { alpha } => {
            let (n_r, n_o) = (reference.c_stars.len(), observed.c_stars.len());
            if n_r < 3 || n_o < 3 {
                return Err(ProduceError::InsufficientTrials { need: 3, got: n_r.min(n_o) });
            }
            let (s_r, s_o) = (reference.std(), observed.std());
            let var_r = s_r * s_r / n_r as f64;
            let var_o = s_o * s_o / n_o as f64;
            let se = (var_r + var_o).sqrt();
            // Welch-Satterthwaite degrees of freedom
            let df = if se > 0.0 {
                (var_r + var_o).powi(2)
                    / (var_r.powi(2) / (n_r as f64 - 1.0) + var_o.powi(2) / (n_o as f64 - 1.0))
            } else {
                (n_r + n_o - 2) as f64
            };
            let t_crit = StudentsT::new(0.0, 1.0, df.max(1.0))
                .expect("valid t distribution")
                .inverse_cdf(1.0 - alpha);
            mu_ref + t_crit * se
        }
    };
    let verdict = if mu_obs > threshold { Verdict::Anomalous } else { Verdict::Nominal };
    Ok(BruiseVerdict {
        verdict,
        reference_mean: mu_ref,
        observed_mean: mu_obs,
        threshold,
        margin: (mu_obs - threshold).abs(),
    })
}

/// Pixels whose per-pixel settled estimate is less negative than the
/// reference by more than `margin` percent. Pixels whose fit fails (missing
/// or short data) are excluded.
pub fn localize_bruise(
    trace: &ResistanceTrace,
    window: &FitWindow,
    reference_per_pixel: &[f64],
    margin: f64,
) -> Vec<usize> {
    let n = trace.n_pixels().min(reference_per_pixel.len());
    let mut flagged = Vec::new();
    for p in 0..n {
        if let Ok(fit) = fit_decay_pixel(trace, p, window) {
            if fit.c_star > reference_per_pixel[p] + margin {
                flagged.push(p);
            }
        }
    }
    flagged
}

// ---------------------------------------------------------------------------
// Session files: a `# key = value` header block over the fit-result CSV
// ---------------------------------------------------------------------------

pub fn session_to_text(session: &SessionRecord, records: &[FitRecord]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# session_id = {}\n", session.session_id));
    out.push_str(&format!("# day_index = {}\n", session.day_index));
    out.push_str(&format!("# grasp_width_mm = {}\n", session.grasp_width_mm));
    if !session.notes.is_empty() {
        out.push_str(&format!("# notes = {}\n", session.notes));
    }
    out.push_str(crate::fit::FIT_CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&r.to_csv_row());
        out.push('\n');
    }
    out
}

/// Parse a session file: leading `# key = value` header lines describing the
/// session, then the standard fit-result CSV; the settled estimates are the
/// `c_star` column.
pub fn session_from_text(text: &str) -> Result<SessionRecord, ProduceError> {
    let mut session_id = None;
    let mut day_index = None;
    let mut grasp_width = None;
    let mut notes = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let Some(body) = line.strip_prefix('#') else { break };
        let Some((key, value)) = body.split_once('=') else {
            return Err(ProduceError::Parse {
                line: i + 1,
                message: format!("header line must be `# key = value`, got {line:?}"),
            });
        };
        let key = key.trim();
        let value = value.trim();
        match key {
            "session_id" => session_id = Some(value.to_string()),
            "day_index" => {
                day_index = Some(value.parse::<i64>().map_err(|e| ProduceError::Parse {
                    line: i + 1,
                    message: format!("day_index {value:?}: {e}"),
                })?)
            }
            "grasp_width_mm" => {
                grasp_width = Some(value.parse::<f64>().map_err(|e| ProduceError::Parse {
                    line: i + 1,
                    message: format!("grasp_width_mm {value:?}: {e}"),
                })?)
            }
            "notes" => notes = value.to_string(),
            other => {
                return Err(ProduceError::Parse {
                    line: i + 1,
                    message: format!("unknown header key {other:?}"),
                })
            }
        }
    }
    let records = crate::fit::parse_fit_csv(text)
        .map_err(|RecordParseError { line, message }| ProduceError::Parse { line, message })?;
    if records.is_empty() {
        return Err(ProduceError::EmptySession);
    }
    let mut session = SessionRecord::new(
        session_id.ok_or(ProduceError::Parse { line: 1, message: "missing session_id header".into() })?,
        day_index.ok_or(ProduceError::Parse { line: 1, message: "missing day_index header".into() })?,
        records.iter().map(|r| r.c_star).collect(),
        grasp_width.ok_or(ProduceError::Parse {
            line: 1,
            message: "missing grasp_width_mm header".into(),
        })?,
    )?;
    session.notes = notes;
    Ok(session)
}
