//! Frame log CSV format: one row per frame,
//! `t_s,finger_id,r,c,adc_0,...,adc_{r*c-1}`, header row required, with
//! actuation marks in a sidecar CSV `t_s,kind`. This is the capture contract
//! between the simulator, the ingestion layer and everything downstream.
//!
//! Validation is line-precise: bad headers or fields report the offending
//! line, out-of-range counts report the value, and timestamps must be
//! strictly increasing.

use crate::signal::{ActuationMark, MarkKind, SensorFrame, ADC_FULL_SCALE};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FrameLogError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("line {line}: timestamp {t} not after previous {prev}")]
    Order { line: usize, t: f64, prev: f64 },
    #[error("line {line}: ADC count {value} outside [0, 1023]")]
    Range { line: usize, value: f64 },
}

fn frame_header(n_pixels: usize) -> String {
    let mut header = String::from("t_s,finger_id,r,c");
    for i in 0..n_pixels {
        header.push_str(&format!(",adc_{i}"));
    }
    header
}

/// Serialize frames to the log format. All frames must share one grid shape;
/// finger ids may not contain commas.
pub fn frames_to_csv(frames: &[SensorFrame]) -> Result<String, FrameLogError> {
    let Some(first) = frames.first() else {
        return Err(FrameLogError::Format { line: 1, message: "no frames to write".into() });
    };
    let n_px = first.n_pixels();
    let mut out = frame_header(n_px);
    out.push('\n');
    for (i, frame) in frames.iter().enumerate() {
        if frame.n_pixels() != n_px {
            return Err(FrameLogError::Format {
                line: i + 2,
                message: format!("frame grid {}x{} differs from the first frame", frame.rows, frame.cols),
            });
        }
        if frame.finger_id.contains(',') {
            return Err(FrameLogError::Format {
                line: i + 2,
                message: format!("finger id {:?} may not contain commas", frame.finger_id),
            });
        }
        out.push_str(&format!("{},{},{},{}", frame.timestamp, frame.finger_id, frame.rows, frame.cols));
        for &c in &frame.adc_counts {
            out.push_str(&format!(",{c}"));
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parse a frame log. Timestamps must be strictly increasing; counts must be
/// finite and within [0, 1023] (fractional counts are legal, see
/// [`SensorFrame`]).
pub fn parse_frames_csv(text: &str) -> Result<Vec<SensorFrame>, FrameLogError> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(FrameLogError::Format { line: 1, message: "empty file".into() });
    };
    let header = header.trim_end();
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 5 || cols[0] != "t_s" || cols[1] != "finger_id" || cols[2] != "r" || cols[3] != "c" {
        return Err(FrameLogError::Format {
            line: 1,
            message: format!("bad header {header:?}; expected t_s,finger_id,r,c,adc_0,..."),
        });
    }
    let n_px = cols.len() - 4;
    for (i, name) in cols[4..].iter().enumerate() {
        if *name != format!("adc_{i}") {
            return Err(FrameLogError::Format {
                line: 1,
                message: format!("bad header column {name:?}, expected adc_{i}"),
            });
        }
    }

    let mut frames = Vec::new();
    let mut prev_t: Option<f64> = None;
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != n_px + 4 {
            return Err(FrameLogError::Format {
                line: line_no,
                message: format!("expected {} fields, got {}", n_px + 4, fields.len()),
            });
        }
        let t: f64 = fields[0].parse().map_err(|e| FrameLogError::Format {
            line: line_no,
            message: format!("timestamp {:?}: {e}", fields[0]),
        })?;
        if let Some(prev) = prev_t {
            if !(t > prev) {
                return Err(FrameLogError::Order { line: line_no, t, prev });
            }
        }
        prev_t = Some(t);
        let finger_id = fields[1].to_string();
        let rows: usize = fields[2].parse().map_err(|e| FrameLogError::Format {
            line: line_no,
            message: format!("row count {:?}: {e}", fields[2]),
        })?;
        let cols_n: usize = fields[3].parse().map_err(|e| FrameLogError::Format {
            line: line_no,
            message: format!("column count {:?}: {e}", fields[3]),
        })?;
        if rows * cols_n != n_px {
            return Err(FrameLogError::Format {
                line: line_no,
                message: format!("grid {rows}x{cols_n} does not match {n_px} adc columns"),
            });
        }
        let mut counts = Vec::with_capacity(n_px);
        for f in &fields[4..] {
            let v: f64 = f.parse().map_err(|e| FrameLogError::Format {
                line: line_no,
                message: format!("count {f:?}: {e}"),
            })?;
            if !v.is_finite() || !(0.0..=ADC_FULL_SCALE).contains(&v) {
                return Err(FrameLogError::Range { line: line_no, value: v });
            }
            counts.push(v);
        }
        let frame = SensorFrame::new(t, rows, cols_n, counts, finger_id).map_err(|e| {
            FrameLogError::Format { line: line_no, message: e.to_string() }
        })?;
        frames.push(frame);
    }
    if frames.is_empty() {
        return Err(FrameLogError::Format { line: 1, message: "log has a header but no frames".into() });
    }
    Ok(frames)
}

pub const MARKS_CSV_HEADER: &str = "t_s,kind";

pub fn marks_to_csv(marks: &[ActuationMark]) -> String {
    let mut out = String::from(MARKS_CSV_HEADER);
    out.push('\n');
    for m in marks {
        out.push_str(&format!("{},{}\n", m.time, m.kind.as_str()));
    }
    out
}

/// Parse the marks sidecar; marks must be sorted by time.
pub fn parse_marks_csv(text: &str) -> Result<Vec<ActuationMark>, FrameLogError> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return Err(FrameLogError::Format { line: 1, message: "empty marks file".into() });
    };
    if header.trim_end() != MARKS_CSV_HEADER {
        return Err(FrameLogError::Format {
            line: 1,
            message: format!("bad header {header:?}; expected {MARKS_CSV_HEADER:?}"),
        });
    }
    let mut marks = Vec::new();
    let mut prev_t = f64::NEG_INFINITY;
    for (i, raw) in lines {
        let line_no = i + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let Some((t_raw, kind_raw)) = line.split_once(',') else {
            return Err(FrameLogError::Format {
                line: line_no,
                message: format!("expected t_s,kind, got {line:?}"),
            });
        };
        let t: f64 = t_raw.parse().map_err(|e| FrameLogError::Format {
            line: line_no,
            message: format!("time {t_raw:?}: {e}"),
        })?;
        if t < prev_t {
            return Err(FrameLogError::Order { line: line_no, t, prev: prev_t });
        }
        prev_t = t;
        let kind = MarkKind::parse(kind_raw.trim()).ok_or_else(|| FrameLogError::Format {
            line: line_no,
            message: format!("unknown mark kind {kind_raw:?}"),
        })?;
        marks.push(ActuationMark { time: t, kind });
    }
    Ok(marks)
}
