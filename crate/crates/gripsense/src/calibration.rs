//! Linear calibration models mapping settled relative resistance to physical
//! quantities (grasp force, object stiffness), plus the profile file that
//! bundles them with the sensor baseline.
//!
//! Force models are per-material: the bundled silicone pads differ in slope
//! by roughly 70%, so a single universal line would be badly wrong for at
//! least one of them. Out-of-range predictions clamp at zero with a flag
//! rather than erroring, because a control loop needs a usable number plus a
//! warning, not an abort.

use crate::kvfile::{KvFile, KvWriter};
use crate::signal::{DividerConfig, PixelBaseline};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error("need at least {need} points, got {got}")]
    TooFewPoints { need: usize, got: usize },
    #[error("all abscissae equal; the line is undetermined")]
    DegenerateAbscissa,
    #[error("model is in {got:?}, expected {expected:?}")]
    UnitMismatch { expected: OutputUnit, got: OutputUnit },
    #[error("non-finite input")]
    NonFinite,
}

#[derive(Debug, Error)]
pub enum ProfileParseError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("profile syntax: {0}")]
    Syntax(#[from] crate::kvfile::KvError),
    #[error("profile has no [baseline] section")]
    MissingBaseline,
    #[error("line {line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("[{section}] {key}: {message}")]
    BadValue { section: String, key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputUnit {
    Newtons,
    NewtonsPerMm,
    PoundsGrip,
}

impl OutputUnit {
    pub fn as_str(&self) -> &'static str {
        match self {
            OutputUnit::Newtons => "newtons",
            OutputUnit::NewtonsPerMm => "newtons_per_mm",
            OutputUnit::PoundsGrip => "pounds_grip",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "newtons" => Some(OutputUnit::Newtons),
            "newtons_per_mm" => Some(OutputUnit::NewtonsPerMm),
            "pounds_grip" => Some(OutputUnit::PoundsGrip),
            _ => None,
        }
    }
}

/// Ordinary least-squares line from settled relative resistance (percent) to
/// an output quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    /// Output units per percent.
    pub slope: f64,
    /// Output units at 0%.
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
    pub output_unit: OutputUnit,
}

impl LinearModel {
    pub fn evaluate(&self, c_star_pct: f64) -> f64 {
        self.slope * c_star_pct + self.intercept
    }
}

/// Shared OLS core: slope, intercept and R-squared. R-squared is defined as
/// 1 when the responses are constant and exactly reproduced.
pub(crate) fn ols(points: &[(f64, f64)]) -> Result<(f64, f64, f64), CalibrationError> {
    if points.len() < 2 {
        return Err(CalibrationError::TooFewPoints { need: 2, got: points.len() });
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(CalibrationError::NonFinite);
    }
    let n = points.len() as f64;
    let x_mean = points.iter().map(|(x, _)| x).sum::<f64>() / n;
    let y_mean = points.iter().map(|(_, y)| y).sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for &(x, y) in points {
        sxx += (x - x_mean) * (x - x_mean);
        sxy += (x - x_mean) * (y - y_mean);
        syy += (y - y_mean) * (y - y_mean);
    }
    if sxx == 0.0 {
        return Err(CalibrationError::DegenerateAbscissa);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 =
        points.iter().map(|&(x, y)| (y - (slope * x + intercept)).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok((slope, intercept, r_squared))
}

/// Fit a linear model from `(c_star percent, output)` pairs.
pub fn fit_linear(points: &[(f64, f64)], unit: OutputUnit) -> Result<LinearModel, CalibrationError> {
    let (slope, intercept, r_squared) = ols(points)?;
    Ok(LinearModel { slope, intercept, r_squared, n_points: points.len(), output_unit: unit })
}

/// A prediction clamped at zero; `below_range` is set when the raw linear
/// value was negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClampedEstimate {
    pub value: f64,
    pub below_range: bool,
}

/// Grasp force in newtons from a settled estimate.
pub fn estimate_force(c_star: f64, model: &LinearModel) -> Result<ClampedEstimate, CalibrationError> {
    if model.output_unit != OutputUnit::Newtons {
        return Err(CalibrationError::UnitMismatch {
            expected: OutputUnit::Newtons,
            got: model.output_unit,
        });
    }
    Ok(clamped(model.evaluate(c_star)))
}

/// Object stiffness in newtons per millimetre from a settled estimate.
pub fn estimate_stiffness(
    c_star: f64,
    model: &LinearModel,
) -> Result<ClampedEstimate, CalibrationError> {
    if model.output_unit != OutputUnit::NewtonsPerMm {
        return Err(CalibrationError::UnitMismatch {
            expected: OutputUnit::NewtonsPerMm,
            got: model.output_unit,
        });
    }
    Ok(clamped(model.evaluate(c_star)))
}

fn clamped(raw: f64) -> ClampedEstimate {
    if raw < 0.0 {
        ClampedEstimate { value: 0.0, below_range: true }
    } else {
        ClampedEstimate { value: raw, below_range: false }
    }
}

/// Indices sorted from softest (least negative settled value) to stiffest
/// (most negative). Equal values keep their input order.
pub fn classify_stiffness_rank(c_stars: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..c_stars.len()).collect();
    idx.sort_by(|&i, &j| c_stars[j].total_cmp(&c_stars[i]));
    idx
}

// ---------------------------------------------------------------------------
// Profiles
// ---------------------------------------------------------------------------

/// Everything needed to turn a raw capture into physical estimates: the
/// pixel baseline, divider constants and the fitted linear models.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationProfile {
    pub baseline: PixelBaseline,
    pub divider: DividerConfig,
    pub force_models: BTreeMap<String, LinearModel>,
    pub stiffness_model: Option<LinearModel>,
    pub created_at: Option<String>,
}

impl CalibrationProfile {
    pub fn new(baseline: PixelBaseline, divider: DividerConfig) -> Self {
        Self {
            baseline,
            divider,
            force_models: BTreeMap::new(),
            stiffness_model: None,
            created_at: None,
        }
    }

    /// Sensor geometry as (rows, cols).
    pub fn sensor_geometry(&self) -> (usize, usize) {
        (self.baseline.rows, self.baseline.cols)
    }

    pub fn to_text(&self) -> String {
        let mut w = KvWriter::new();
        if let Some(created) = &self.created_at {
            w.section("profile");
            w.kv("created_at", created);
        }
        w.section("baseline");
        w.kv("rows", self.baseline.rows);
        w.kv("cols", self.baseline.cols);
        let r_avg: Vec<String> = self.baseline.r_avg.iter().map(|v| v.to_string()).collect();
        w.kv("r_avg", r_avg.join(" "));
        w.section("divider");
        w.kv("v_ref", self.divider.v_ref);
        w.kv("r_fixed", self.divider.r_fixed);
        for (name, model) in &self.force_models {
            w.section(&format!("force.{name}"));
            write_model(&mut w, model);
        }
        if let Some(model) = &self.stiffness_model {
            w.section("stiffness");
            write_model(&mut w, model);
        }
        w.finish()
    }

    pub fn from_text(text: &str) -> Result<Self, ProfileParseError> {
        let kv = KvFile::parse(text)?;
        for s in kv.sections() {
            let known = matches!(s.name.as_str(), "profile" | "baseline" | "divider" | "stiffness")
                || s.name.starts_with("force.");
            if !known {
                return Err(ProfileParseError::UnknownSection { line: s.line, name: s.name.clone() });
            }
        }
        let baseline_sec = kv.section("baseline").ok_or(ProfileParseError::MissingBaseline)?;
        let rows = baseline_sec.parse_usize("rows")?;
        let cols = baseline_sec.parse_usize("cols")?;
        let r_avg = baseline_sec.parse_f64_list("r_avg")?;
        let baseline = PixelBaseline::new(rows, cols, r_avg).map_err(|e| {
            ProfileParseError::BadValue {
                section: "baseline".into(),
                key: "r_avg".into(),
                message: e.to_string(),
            }
        })?;
        let divider = match kv.section("divider") {
            Some(sec) => {
                let divider =
                    DividerConfig { v_ref: sec.parse_f64("v_ref")?, r_fixed: sec.parse_f64("r_fixed")? };
                divider.validate().map_err(|e| ProfileParseError::BadValue {
                    section: "divider".into(),
                    key: "v_ref/r_fixed".into(),
                    message: e.to_string(),
                })?;
                divider
            }
            None => DividerConfig::default(),
        };
        let created_at = kv
            .section("profile")
            .and_then(|s| s.get("created_at"))
            .map(str::to_string);
        let mut force_models = BTreeMap::new();
        for sec in kv.sections() {
            if let Some(name) = sec.name.strip_prefix("force.") {
                force_models.insert(name.to_string(), read_model(sec)?);
            }
        }
        let stiffness_model = match kv.section("stiffness") {
            Some(sec) => Some(read_model(sec)?),
            None => None,
        };
        Ok(Self { baseline, divider, force_models, stiffness_model, created_at })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), ProfileParseError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ProfileParseError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text)
    }
}

fn write_model(w: &mut KvWriter, model: &LinearModel) {
    w.kv("slope", model.slope);
    w.kv("intercept", model.intercept);
    w.kv("r_squared", model.r_squared);
    w.kv("n_points", model.n_points);
    w.kv("unit", model.output_unit.as_str());
}

fn read_model(sec: &crate::kvfile::KvSection) -> Result<LinearModel, ProfileParseError> {
    let unit_raw = sec.require("unit")?;
    let output_unit = OutputUnit::parse(unit_raw).ok_or_else(|| ProfileParseError::BadValue {
        section: sec.name.clone(),
        key: "unit".into(),
        message: format!("unknown unit {unit_raw:?}"),
    })?;
    let r_squared = sec.parse_f64("r_squared")?;
    if !(0.0..=1.0).contains(&r_squared) {
        return Err(ProfileParseError::BadValue {
            section: sec.name.clone(),
            key: "r_squared".into(),
            message: format!("{r_squared} outside [0, 1]"),
        });
    }
    Ok(LinearModel {
        slope: sec.parse_f64("slope")?,
        intercept: sec.parse_f64("intercept")?,
        r_squared,
        n_points: sec.parse_usize("n_points")?,
        output_unit,
    })
}

// ---------------------------------------------------------------------------
// Bundled defaults
// ---------------------------------------------------------------------------

/// Factory force models for the four cast silicone pads the sensor ships
/// calibrated against, keyed by material name. Stiffer pads have steeper
/// slopes: resistance drops further per newton.
pub fn default_force_models() -> BTreeMap<String, LinearModel> {
    let mk = |slope: f64, intercept: f64, r_squared: f64| LinearModel {
        slope,
        intercept,
        r_squared,
        n_points: 50,
        output_unit: OutputUnit::Newtons,
    };
    BTreeMap::from([
        ("dragonskin30".to_string(), mk(-0.163, 1.81, 0.917)),
        ("dragonskin20".to_string(), mk(-0.129, 1.42, 0.986)),
        ("dragonskin10".to_string(), mk(-0.111, 2.45, 0.983)),
        ("ecoflex10".to_string(), mk(-0.0953, 0.987, 0.985)),
    ])
}

/// Reference compression used to derive the synthetic stiffness model, mm.
pub const SYNTHETIC_STIFFNESS_COMPRESSION_MM: f64 = 1.5;

/// Simulator-fitted stiffness model (synthetic, not measured on hardware):
/// the dragonskin30 force line divided by a reference compression, since
/// stiffness is force per unit compression at fixed grasp width. Real
/// deployments should replace it with a user-fitted line.
pub fn synthetic_stiffness_model() -> LinearModel {
    let force = &default_force_models()["dragonskin30"];
    LinearModel {
        slope: force.slope / SYNTHETIC_STIFFNESS_COMPRESSION_MM,
        intercept: force.intercept / SYNTHETIC_STIFFNESS_COMPRESSION_MM,
        r_squared: force.r_squared,
        n_points: force.n_points,
        output_unit: OutputUnit::NewtonsPerMm,
    }
}

/// Profile bundling a uniform resting baseline with the factory force models
/// and the synthetic stiffness model.
pub fn default_profile(rows: usize, cols: usize, rest_ohms: f64) -> CalibrationProfile {
    let mut profile = CalibrationProfile::new(
        PixelBaseline::uniform(rows, cols, rest_ohms).expect("valid default baseline"),
        DividerConfig::default(),
    );
    profile.force_models = default_force_models();
    profile.stiffness_model = Some(synthetic_stiffness_model());
    profile
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_line_through_published_coefficients() {
        // Two points constructed from the dragonskin30 model.
        let model = fit_linear(&[(0.0, 1.81), (-10.0, 3.44)], OutputUnit::Newtons).unwrap();
        assert!((model.slope - (-0.163)).abs() < 1e-12, "{}", model.slope);
        assert!((model.intercept - 1.81).abs() < 1e-12);
        assert_eq!(model.r_squared, 1.0);
    }

    #[test]
    fn exact_line_recovered_with_unit_r_squared() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 2.0 * i as f64 + 1.0)).collect();
        let model = fit_linear(&pts, OutputUnit::Newtons).unwrap();
        assert!((model.slope - 2.0).abs() < 1e-12);
        assert!((model.intercept - 1.0).abs() < 1e-12);
        assert_eq!(model.r_squared, 1.0);
    }

    #[test]
    fn degenerate_abscissa_rejected() {
        let pts = [(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)];
        assert!(matches!(
            fit_linear(&pts, OutputUnit::Newtons),
            Err(CalibrationError::DegenerateAbscissa)
        ));
    }

    #[test]
    fn noisy_cloud_recovers_slope_within_five_percent() {
        // dragonskin20 line plus deterministic Gaussian-ish noise.
        let truth = &default_force_models()["dragonskin20"];
        let mut state = 24u64;
        let mut next = || {
            // two xorshift-multiply rounds, mapped to roughly N(0, 1)
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
            z ^= z >> 31;
            let u1 = 1.0 - ((z >> 11) as f64 / (1u64 << 53) as f64);
            state = state.wrapping_add(0x9E3779B97F4A7C15);
            let mut w = state;
            w = (w ^ (w >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
            w = (w ^ (w >> 27)).wrapping_mul(0x94D049BB133111EB);
            w ^= w >> 31;
            let u2 = (w >> 11) as f64 / (1u64 << 53) as f64;
            (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
        };
        let pts: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let x = -40.0 * i as f64 / 49.0;
                (x, truth.evaluate(x) + 0.1 * next())
            })
            .collect();
        let model = fit_linear(&pts, OutputUnit::Newtons).unwrap();
        assert!(
            (model.slope - truth.slope).abs() / truth.slope.abs() < 0.05,
            "slope {} vs {}",
            model.slope,
            truth.slope
        );
        assert!(model.r_squared > 0.95, "r2 {}", model.r_squared);
    }

    #[test]
    fn force_at_zero_is_the_intercept() {
        let model = &default_force_models()["dragonskin30"];
        let est = estimate_force(0.0, model).unwrap();
        assert_eq!(est.value, 1.81);
        assert!(!est.below_range);
    }

    #[test]
    fn force_at_minus_fifty_matches_hand_arithmetic() {
        let model = &default_force_models()["dragonskin30"];
        let est = estimate_force(-50.0, model).unwrap();
        assert!((est.value - 9.96).abs() < 1e-9, "{}", est.value);
    }

    #[test]
    fn positive_settled_clamps_to_zero_with_flag() {
        let model = &default_force_models()["dragonskin30"];
        let est = estimate_force(20.0, model).unwrap();
        assert_eq!(est.value, 0.0);
        assert!(est.below_range);
    }

    #[test]
    fn force_requires_newton_model() {
        let model = synthetic_stiffness_model();
        assert!(matches!(
            estimate_force(-10.0, &model),
            Err(CalibrationError::UnitMismatch { .. })
        ));
    }

    #[test]
    fn stiffness_line_passes_through_centroid() {
        let pts = [(-10.0, 1.0), (-20.0, 2.2), (-30.0, 2.9), (-40.0, 4.1)];
        let model = fit_linear(&pts, OutputUnit::NewtonsPerMm).unwrap();
        let x_mean = pts.iter().map(|(x, _)| x).sum::<f64>() / 4.0;
        let y_mean = pts.iter().map(|(_, y)| y).sum::<f64>() / 4.0;
        let est = estimate_stiffness(x_mean, &model).unwrap();
        assert!((est.value - y_mean).abs() < 1e-10);
    }

    #[test]
    fn rank_orders_softest_to_stiffest() {
        let order = classify_stiffness_rank(&[-46.0, -71.5, -54.7, -66.9]);
        assert_eq!(order, vec![0, 2, 3, 1]);
    }

    #[test]
    fn rank_is_stable_on_ties() {
        let order = classify_stiffness_rank(&[-7.0, -7.0, -7.0]);
        assert_eq!(order, vec![0, 1, 2]);
    }

    #[test]
    fn rank_on_sorted_ball_means_is_identity() {
        let means = [-56.4, -59.4, -60.2, -62.2, -62.8, -67.9];
        assert_eq!(classify_stiffness_rank(&means), vec![0, 1, 2, 3, 4, 5]);
    }

    #[test]
    fn profile_round_trips_exactly() {
        let profile = default_profile(2, 2, 4700.0);
        let text = profile.to_text();
        let back = CalibrationProfile::from_text(&text).unwrap();
        assert_eq!(back, profile);
    }

    #[test]
    fn profile_without_baseline_rejected() {
        let text = "[divider]\nv_ref = 5\nr_fixed = 4700\n";
        assert!(matches!(
            CalibrationProfile::from_text(text),
            Err(ProfileParseError::MissingBaseline)
        ));
    }

    #[test]
    fn profile_with_two_force_models_round_trips_by_name() {
        let mut profile = default_profile(2, 2, 4700.0);
        profile.force_models.retain(|k, _| k == "dragonskin30" || k == "ecoflex10");
        profile.created_at = Some("2026-08-10T00:00:00Z".into());
        let back = CalibrationProfile::from_text(&profile.to_text()).unwrap();
        assert_eq!(back.force_models.len(), 2);
        assert_eq!(back, profile);
    }

    #[test]
    fn unknown_section_is_a_parse_error() {
        let mut text = default_profile(1, 1, 4700.0).to_text();
        text.push_str("\n[mystery]\nx = 1\n");
        assert!(matches!(
            CalibrationProfile::from_text(&text),
            Err(ProfileParseError::UnknownSection { .. })
        ));
    }
}
