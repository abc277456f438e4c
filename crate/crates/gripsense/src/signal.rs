//! Raw-signal data model: ADC conversion, baseline normalization, trace
//! assembly and per-pixel queries.
//!
//! Counts come from a 10-bit ADC reading a voltage divider. The fixed
//! resistor sits on the measured leg and the sensor pixel on the reference
//! leg, so rising pressure (falling pixel resistance) raises the tap voltage
//! and the count. A count of 0 means the pixel resistance is unmeasurably
//! high (saturated); a count of full scale means the pixel reads 0 Ω
//! (short circuit).
//!
//! Every value is immutable after construction and every operation is a pure
//! function, so all of this is safe to call from any number of threads.

use thiserror::Error;

/// Full-scale 10-bit ADC count.
pub const ADC_FULL_SCALE: f64 = 1023.0;

/// Number of leading pressure-free frames averaged when deriving a baseline.
pub const QUIET_FRAMES: usize = 15;

#[derive(Debug, Error)]
pub enum SignalError {
    #[error("ADC count {0} outside [0, 1023]")]
    CountOutOfRange(f64),
    #[error("saturated reading: count 0 means unmeasurably high resistance")]
    Saturation,
    #[error("baseline must be positive, got {0}")]
    InvalidBaseline(f64),
    #[error("frame {index}: grid {got_rows}x{got_cols} does not match {want_rows}x{want_cols}")]
    ShapeMismatch {
        index: usize,
        got_rows: usize,
        got_cols: usize,
        want_rows: usize,
        want_cols: usize,
    },
    #[error("capture contains no frames")]
    EmptyCapture,
    #[error("frame {index}: timestamp {t} not after previous {prev}")]
    NonMonotonicTime { index: usize, t: f64, prev: f64 },
    #[error("capture mixes finger ids ({a:?} and {b:?}); filter to one finger first")]
    MixedFingers { a: String, b: String },
    #[error("pixel {pixel}: no valid reading to derive a baseline from")]
    SaturatedPixel { pixel: usize },
    #[error("no valid pixel at the requested sample")]
    NoValidPixel,
    #[error("frame data length {got} does not match {rows}x{cols} grid")]
    BadFrameLength { got: usize, rows: usize, cols: usize },
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
}

/// Voltage-divider constants used to convert ADC counts to ohms.
///
/// `v_ref` cancels out of the conversion but is kept because profiles and
/// hardware notes record it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DividerConfig {
    pub v_ref: f64,
    pub r_fixed: f64,
}

impl Default for DividerConfig {
    fn default() -> Self {
        Self { v_ref: 5.0, r_fixed: 4700.0 }
    }
}

impl DividerConfig {
    pub fn validate(&self) -> Result<(), SignalError> {
        if !(self.v_ref > 0.0) || !self.v_ref.is_finite() {
            return Err(SignalError::NonFinite("v_ref"));
        }
        if !(self.r_fixed > 0.0) || !self.r_fixed.is_finite() {
            return Err(SignalError::NonFinite("r_fixed"));
        }
        Ok(())
    }
}

/// One time-stamped grid of per-pixel ADC samples from a gripper finger.
///
/// Counts are stored as `f64` in `[0, 1023]`: hardware logs carry integers,
/// while the simulator may emit fractional counts when its quantizer is
/// disabled so that synthetic logs stay lossless.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorFrame {
    pub timestamp: f64,
    pub rows: usize,
    pub cols: usize,
    pub adc_counts: Vec<f64>,
    pub finger_id: String,
}

impl SensorFrame {
    pub fn new(
        timestamp: f64,
        rows: usize,
        cols: usize,
        adc_counts: Vec<f64>,
        finger_id: impl Into<String>,
    ) -> Result<Self, SignalError> {
        if !timestamp.is_finite() {
            return Err(SignalError::NonFinite("timestamp"));
        }
        if adc_counts.len() != rows * cols {
            return Err(SignalError::BadFrameLength { got: adc_counts.len(), rows, cols });
        }
        for &c in &adc_counts {
            if !c.is_finite() || !(0.0..=ADC_FULL_SCALE).contains(&c) {
                return Err(SignalError::CountOutOfRange(c));
            }
        }
        Ok(Self { timestamp, rows, cols, adc_counts, finger_id: finger_id.into() })
    }

    pub fn n_pixels(&self) -> usize {
        self.rows * self.cols
    }
}

/// Per-pixel resting resistances (ohms), grid-shaped row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PixelBaseline {
    pub rows: usize,
    pub cols: usize,
    pub r_avg: Vec<f64>,
}

impl PixelBaseline {
    pub fn new(rows: usize, cols: usize, r_avg: Vec<f64>) -> Result<Self, SignalError> {
        if r_avg.len() != rows * cols {
            return Err(SignalError::BadFrameLength { got: r_avg.len(), rows, cols });
        }
        for &r in &r_avg {
            if !r.is_finite() || r <= 0.0 {
                return Err(SignalError::InvalidBaseline(r));
            }
        }
        Ok(Self { rows, cols, r_avg })
    }

    /// Same resting resistance on every pixel.
    pub fn uniform(rows: usize, cols: usize, ohms: f64) -> Result<Self, SignalError> {
        Self::new(rows, cols, vec![ohms; rows * cols])
    }

    pub fn n_pixels(&self) -> usize {
        self.rows * self.cols
    }
}

/// Gripper actuation phases recorded alongside a capture.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkKind {
    CloseStart,
    CloseStop,
    OpenStart,
    OpenStop,
}

impl MarkKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MarkKind::CloseStart => "close_start",
            MarkKind::CloseStop => "close_stop",
            MarkKind::OpenStart => "open_start",
            MarkKind::OpenStop => "open_stop",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "close_start" => Some(MarkKind::CloseStart),
            "close_stop" => Some(MarkKind::CloseStop),
            "open_start" => Some(MarkKind::OpenStart),
            "open_stop" => Some(MarkKind::OpenStop),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActuationMark {
    pub time: f64,
    pub kind: MarkKind,
}

/// Relative-resistance time series for one grasp capture.
///
/// `per_pixel_rel[pixel][sample]` is the percent deviation from the pixel's
/// resting baseline; `None` marks a saturated (missing) reading. The
/// aggregate is the arithmetic mean over the valid pixels of each sample,
/// summed in value-sorted order so it is exactly invariant under pixel
/// reordering.
#[derive(Debug, Clone, PartialEq)]
pub struct ResistanceTrace {
    pub rows: usize,
    pub cols: usize,
    pub times: Vec<f64>,
    pub per_pixel_rel: Vec<Vec<Option<f64>>>,
    pub aggregate_rel: Vec<Option<f64>>,
    pub actuation_marks: Vec<ActuationMark>,
}

impl ResistanceTrace {
    pub fn new(
        rows: usize,
        cols: usize,
        times: Vec<f64>,
        per_pixel_rel: Vec<Vec<Option<f64>>>,
        mut actuation_marks: Vec<ActuationMark>,
    ) -> Result<Self, SignalError> {
        if times.is_empty() {
            return Err(SignalError::EmptyCapture);
        }
        if per_pixel_rel.len() != rows * cols {
            return Err(SignalError::BadFrameLength { got: per_pixel_rel.len(), rows, cols });
        }
        for (i, w) in times.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(SignalError::NonMonotonicTime { index: i + 1, t: w[1], prev: w[0] });
            }
        }
        for series in &per_pixel_rel {
            if series.len() != times.len() {
                return Err(SignalError::BadFrameLength {
                    got: series.len(),
                    rows: times.len(),
                    cols: 1,
                });
            }
        }
        actuation_marks.sort_by(|a, b| a.time.total_cmp(&b.time));
        let aggregate_rel = (0..times.len())
            .map(|k| sorted_mean(per_pixel_rel.iter().filter_map(|px| px[k])))
            .collect();
        Ok(Self { rows, cols, times, per_pixel_rel, aggregate_rel, actuation_marks })
    }

    pub fn n_samples(&self) -> usize {
        self.times.len()
    }

    pub fn n_pixels(&self) -> usize {
        self.rows * self.cols
    }

    /// Index of the sample nearest to `t`.
    pub fn nearest_sample(&self, t: f64) -> usize {
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i >= self.times.len() => self.times.len() - 1,
            Err(i) => {
                if (t - self.times[i - 1]).abs() <= (self.times[i] - t).abs() {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Aggregate value at the sample nearest to `t`.
    pub fn aggregate_at(&self, t: f64) -> Option<f64> {
        self.aggregate_rel[self.nearest_sample(t)]
    }

    /// Time of the first mark of the given kind, if any.
    pub fn first_mark(&self, kind: MarkKind) -> Option<f64> {
        self.actuation_marks.iter().find(|m| m.kind == kind).map(|m| m.time)
    }
}

/// Mean with summands added in ascending order, so the result does not
/// depend on input ordering.
fn sorted_mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut v: Vec<f64> = values.collect();
    if v.is_empty() {
        return None;
    }
    v.sort_by(|a, b| a.total_cmp(b));
    Some(v.iter().sum::<f64>() / v.len() as f64)
}

/// Convert one ADC count to the pixel resistance in ohms.
///
/// With the tap voltage `V_out = v_ref * count / 1023` and the fixed
/// resistor on the measured leg, the pixel resistance is
/// `r_fixed * (v_ref / V_out - 1)`, which is strictly decreasing in the
/// count. Count 0 is saturation (error); full scale reads exactly 0 Ω, the
/// short-circuit condition callers may want to warn on.
pub fn adc_to_resistance(count: f64, cfg: &DividerConfig) -> Result<f64, SignalError> {
    if !count.is_finite() || !(0.0..=ADC_FULL_SCALE).contains(&count) {
        return Err(SignalError::CountOutOfRange(count));
    }
    if count == 0.0 {
        return Err(SignalError::Saturation);
    }
    Ok(cfg.r_fixed * (ADC_FULL_SCALE / count - 1.0))
}

/// True when a count reads exactly 0 Ω.
pub fn is_short_circuit(count: f64) -> bool {
    count == ADC_FULL_SCALE
}

/// Relative resistance in percent: `(resistance / baseline - 1) * 100`.
pub fn normalize(resistance: f64, baseline: f64) -> Result<f64, SignalError> {
    if !(baseline > 0.0) {
        return Err(SignalError::InvalidBaseline(baseline));
    }
    Ok((resistance / baseline - 1.0) * 100.0)
}

/// Build a relative-resistance trace from a frame sequence.
///
/// Saturated pixels (count 0) become missing samples and are excluded from
/// the aggregate; they are never interpolated.
pub fn build_trace(
    frames: &[SensorFrame],
    baseline: &PixelBaseline,
    cfg: &DividerConfig,
    marks: &[ActuationMark],
) -> Result<ResistanceTrace, SignalError> {
    if frames.is_empty() {
        return Err(SignalError::EmptyCapture);
    }
    let (rows, cols) = (baseline.rows, baseline.cols);
    let n_px = baseline.n_pixels();
    let finger = &frames[0].finger_id;
    let mut times = Vec::with_capacity(frames.len());
    let mut per_pixel: Vec<Vec<Option<f64>>> = vec![Vec::with_capacity(frames.len()); n_px];
    for (i, frame) in frames.iter().enumerate() {
        if frame.rows != rows || frame.cols != cols {
            return Err(SignalError::ShapeMismatch {
                index: i,
                got_rows: frame.rows,
                got_cols: frame.cols,
                want_rows: rows,
                want_cols: cols,
            });
        }
        if frame.finger_id != *finger {
            return Err(SignalError::MixedFingers { a: finger.clone(), b: frame.finger_id.clone() });
        }
        times.push(frame.timestamp);
        for (p, &count) in frame.adc_counts.iter().enumerate() {
            let rel = match adc_to_resistance(count, cfg) {
                Ok(r) => Some(normalize(r, baseline.r_avg[p])?),
                Err(SignalError::Saturation) => None,
                Err(e) => return Err(e),
            };
            per_pixel[p].push(rel);
        }
    }
    ResistanceTrace::new(rows, cols, times, per_pixel, marks.to_vec())
}

/// Outcome of re-deriving the baseline from a single pressure-free frame.
#[derive(Debug, Clone)]
pub struct Rebaselined {
    pub baseline: PixelBaseline,
    /// Pixels whose reading was saturated; the previous baseline value was
    /// retained for them.
    pub retained: Vec<usize>,
}

/// Reset the per-pixel baseline from one pressure-free frame, so that frame
/// renormalizes to 0% everywhere.
pub fn rebaseline(
    baseline: &PixelBaseline,
    cycle_start_frame: &SensorFrame,
    cfg: &DividerConfig,
) -> Result<Rebaselined, SignalError> {
    if cycle_start_frame.rows != baseline.rows || cycle_start_frame.cols != baseline.cols {
        return Err(SignalError::ShapeMismatch {
            index: 0,
            got_rows: cycle_start_frame.rows,
            got_cols: cycle_start_frame.cols,
            want_rows: baseline.rows,
            want_cols: baseline.cols,
        });
    }
    let mut r_avg = baseline.r_avg.clone();
    let mut retained = Vec::new();
    for (p, &count) in cycle_start_frame.adc_counts.iter().enumerate() {
        match adc_to_resistance(count, cfg) {
            Ok(r) if r > 0.0 => r_avg[p] = r,
            // 0 Ω or saturated: keep the previous baseline for this pixel
            Ok(_) | Err(SignalError::Saturation) => retained.push(p),
            Err(e) => return Err(e),
        }
    }
    Ok(Rebaselined {
        baseline: PixelBaseline::new(baseline.rows, baseline.cols, r_avg)?,
        retained,
    })
}

/// Derive a baseline from the leading pressure-free frames of a capture
/// (up to [`QUIET_FRAMES`] of them), averaging per pixel and skipping
/// saturated samples.
pub fn baseline_from_quiet_frames(
    frames: &[SensorFrame],
    cfg: &DividerConfig,
) -> Result<PixelBaseline, SignalError> {
    if frames.is_empty() {
        return Err(SignalError::EmptyCapture);
    }
    let (rows, cols) = (frames[0].rows, frames[0].cols);
    let n_px = rows * cols;
    let take = frames.len().min(QUIET_FRAMES);
    let mut sums = vec![0.0f64; n_px];
    let mut counts = vec![0usize; n_px];
    for (i, frame) in frames.iter().take(take).enumerate() {
        if frame.rows != rows || frame.cols != cols {
            return Err(SignalError::ShapeMismatch {
                index: i,
                got_rows: frame.rows,
                got_cols: frame.cols,
                want_rows: rows,
                want_cols: cols,
            });
        }
        for (p, &c) in frame.adc_counts.iter().enumerate() {
            match adc_to_resistance(c, cfg) {
                Ok(r) => {
                    sums[p] += r;
                    counts[p] += 1;
                }
                Err(SignalError::Saturation) => {}
                Err(e) => return Err(e),
            }
        }
    }
    let mut r_avg = Vec::with_capacity(n_px);
    for p in 0..n_px {
        if counts[p] == 0 {
            return Err(SignalError::SaturatedPixel { pixel: p });
        }
        let mean = sums[p] / counts[p] as f64;
        if mean <= 0.0 {
            return Err(SignalError::InvalidBaseline(mean));
        }
        r_avg.push(mean);
    }
    PixelBaseline::new(rows, cols, r_avg)
}

/// Most negative per-pixel relative resistance at the sample nearest to
/// `at_time`, with its row-major pixel index. Ties break toward the lowest
/// index; missing pixels are skipped.
pub fn min_pixel_rel(trace: &ResistanceTrace, at_time: f64) -> Result<(usize, f64), SignalError> {
    let k = trace.nearest_sample(at_time);
    let mut best: Option<(usize, f64)> = None;
    for (p, series) in trace.per_pixel_rel.iter().enumerate() {
        if let Some(v) = series[k] {
            match best {
                Some((_, bv)) if bv <= v => {}
                _ => best = Some((p, v)),
            }
        }
    }
    best.ok_or(SignalError::NoValidPixel)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> DividerConfig {
        DividerConfig::default()
    }

    #[test]
    fn full_scale_count_reads_zero_ohms() {
        let r = adc_to_resistance(1023.0, &cfg()).unwrap();
        assert_eq!(r, 0.0);
        assert!(is_short_circuit(1023.0));
    }

    #[test]
    fn midscale_count_matches_hand_evaluation() {
        // 4700 * (1023/512 - 1) = 4700 * 511/512
        let r = adc_to_resistance(512.0, &cfg()).unwrap();
        assert!((r - 4690.8203125).abs() < 1e-9, "got {r}");
    }

    #[test]
    fn zero_count_is_saturation() {
        assert!(matches!(adc_to_resistance(0.0, &cfg()), Err(SignalError::Saturation)));
    }

    #[test]
    fn count_out_of_range_rejected() {
        assert!(matches!(adc_to_resistance(1100.0, &cfg()), Err(SignalError::CountOutOfRange(_))));
    }

    #[test]
    fn normalize_identity_half_double() {
        assert_eq!(normalize(4700.0, 4700.0).unwrap(), 0.0);
        assert_eq!(normalize(2350.0, 4700.0).unwrap(), -50.0);
        assert_eq!(normalize(9400.0, 4700.0).unwrap(), 100.0);
    }

    #[test]
    fn normalize_rejects_bad_baseline() {
        assert!(matches!(normalize(100.0, 0.0), Err(SignalError::InvalidBaseline(_))));
        assert!(matches!(normalize(100.0, -5.0), Err(SignalError::InvalidBaseline(_))));
    }

    fn frame_with_counts(t: f64, counts: Vec<f64>) -> SensorFrame {
        SensorFrame::new(t, 2, 2, counts, "left").unwrap()
    }

    /// Count whose divider conversion lands exactly on `ohms` (fractional).
    fn count_for(ohms: f64) -> f64 {
        ADC_FULL_SCALE * 4700.0 / (ohms + 4700.0)
    }

    #[test]
    fn trace_of_baseline_frames_is_all_zero() {
        let baseline = PixelBaseline::uniform(2, 2, 4690.8203125).unwrap();
        let frames = vec![frame_with_counts(0.0, vec![512.0; 4])];
        let trace = build_trace(&frames, &baseline, &cfg(), &[]).unwrap();
        for px in &trace.per_pixel_rel {
            assert_eq!(px[0], Some(0.0));
        }
        assert_eq!(trace.aggregate_rel[0], Some(0.0));
    }

    #[test]
    fn aggregate_is_arithmetic_mean() {
        let baseline = PixelBaseline::uniform(2, 2, 4700.0).unwrap();
        let rels = [-10.0, -20.0, -30.0, 0.0];
        let counts: Vec<f64> = rels.iter().map(|r| count_for(4700.0 * (1.0 + r / 100.0))).collect();
        let frames = vec![frame_with_counts(0.0, counts)];
        let trace = build_trace(&frames, &baseline, &cfg(), &[]).unwrap();
        let agg = trace.aggregate_rel[0].unwrap();
        assert!((agg - (-15.0)).abs() < 1e-9, "got {agg}");
    }

    #[test]
    fn saturated_pixel_excluded_from_aggregate() {
        let baseline = PixelBaseline::uniform(2, 2, 4700.0).unwrap();
        let mut counts: Vec<f64> =
            [-10.0, -20.0, -30.0].iter().map(|r| count_for(4700.0 * (1.0 + r / 100.0))).collect();
        counts.push(0.0); // saturated
        let frames = vec![frame_with_counts(0.0, counts)];
        let trace = build_trace(&frames, &baseline, &cfg(), &[]).unwrap();
        assert_eq!(trace.per_pixel_rel[3][0], None);
        let agg = trace.aggregate_rel[0].unwrap();
        assert!((agg - (-20.0)).abs() < 1e-9, "got {agg}");
    }

    #[test]
    fn build_trace_rejects_empty_and_shape_mismatch() {
        let baseline = PixelBaseline::uniform(2, 2, 4700.0).unwrap();
        assert!(matches!(
            build_trace(&[], &baseline, &cfg(), &[]),
            Err(SignalError::EmptyCapture)
        ));
        let odd = SensorFrame::new(0.0, 1, 2, vec![512.0, 512.0], "left").unwrap();
        assert!(matches!(
            build_trace(&[odd], &baseline, &cfg(), &[]),
            Err(SignalError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn rebaseline_matches_frame_resistances_and_renormalizes_to_zero() {
        let old = PixelBaseline::uniform(2, 2, 4700.0).unwrap();
        let frame = frame_with_counts(0.0, vec![400.0, 500.0, 600.0, 700.0]);
        let out = rebaseline(&old, &frame, &cfg()).unwrap();
        assert!(out.retained.is_empty());
        for (p, &count) in frame.adc_counts.iter().enumerate() {
            let r = adc_to_resistance(count, &cfg()).unwrap();
            assert_eq!(out.baseline.r_avg[p], r);
            assert_eq!(normalize(r, out.baseline.r_avg[p]).unwrap(), 0.0);
        }
    }

    #[test]
    fn rebaseline_retains_previous_value_for_saturated_pixel() {
        let old = PixelBaseline::uniform(2, 2, 4700.0).unwrap();
        let frame = frame_with_counts(0.0, vec![0.0, 500.0, 500.0, 500.0]);
        let out = rebaseline(&old, &frame, &cfg()).unwrap();
        assert_eq!(out.retained, vec![0]);
        assert_eq!(out.baseline.r_avg[0], 4700.0);
    }

    #[test]
    fn rebaseline_unchanged_for_frame_equal_to_baseline() {
        let old = PixelBaseline::uniform(2, 2, 4690.8203125).unwrap();
        let frame = frame_with_counts(0.0, vec![512.0; 4]);
        let out = rebaseline(&old, &frame, &cfg()).unwrap();
        assert_eq!(out.baseline, old);
    }

    fn trace_from_rels(rels: Vec<Vec<Option<f64>>>) -> ResistanceTrace {
        let n = rels[0].len();
        let times: Vec<f64> = (0..n).map(|k| k as f64 * 0.1).collect();
        ResistanceTrace::new(2, 2, times, rels, vec![]).unwrap()
    }

    #[test]
    fn min_pixel_picks_most_negative() {
        let trace = trace_from_rels(vec![
            vec![Some(-10.0)],
            vec![Some(-20.0)],
            vec![Some(-5.0)],
            vec![Some(0.0)],
        ]);
        assert_eq!(min_pixel_rel(&trace, 0.0).unwrap(), (1, -20.0));
    }

    #[test]
    fn min_pixel_ties_break_row_major() {
        let trace = trace_from_rels(vec![
            vec![Some(-7.0)],
            vec![Some(-7.0)],
            vec![Some(-7.0)],
            vec![Some(-7.0)],
        ]);
        assert_eq!(min_pixel_rel(&trace, 0.0).unwrap(), (0, -7.0));
    }

    #[test]
    fn min_pixel_skips_missing() {
        let trace = trace_from_rels(vec![
            vec![None],
            vec![Some(-3.0)],
            vec![Some(-9.0)],
            vec![None],
        ]);
        assert_eq!(min_pixel_rel(&trace, 0.0).unwrap(), (2, -9.0));
        let all_missing = trace_from_rels(vec![vec![None], vec![None], vec![None], vec![None]]);
        assert!(matches!(min_pixel_rel(&all_missing, 0.0), Err(SignalError::NoValidPixel)));
    }

    #[test]
    fn quiet_baseline_averages_leading_frames() {
        let f1 = frame_with_counts(0.0, vec![500.0; 4]);
        let f2 = frame_with_counts(0.1, vec![520.0; 4]);
        let baseline = baseline_from_quiet_frames(&[f1.clone(), f2], &cfg()).unwrap();
        let r1 = adc_to_resistance(500.0, &cfg()).unwrap();
        let r2 = adc_to_resistance(520.0, &cfg()).unwrap();
        assert!((baseline.r_avg[0] - (r1 + r2) / 2.0).abs() < 1e-12);
        // a frame with a saturated pixel still averages over its valid samples
        let f3 = frame_with_counts(0.2, vec![0.0, 500.0, 500.0, 500.0]);
        let b2 = baseline_from_quiet_frames(&[f3, f1], &cfg()).unwrap();
        assert!((b2.r_avg[0] - r1).abs() < 1e-12);
    }
}
