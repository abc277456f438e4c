//! Tactile sensing toolkit for piezoresistive gripper pads.
//!
//! The pipeline turns raw ADC frames from a pixelated pressure sensor into
//! physical estimates and handling decisions:
//!
//! 1. [`signal`] — ADC-to-resistance conversion, baseline normalization and
//!    trace assembly (relative-resistance percent is the working unit).
//! 2. [`fit`] — detects the post-actuation spike and fits an exponential
//!    decay to predict the settled resistance from early transient data.
//! 3. [`calibration`] — linear maps from settled resistance to grasp force
//!    and object stiffness, persisted in text profiles.
//! 4. [`control`] — contact detection, incremental size estimation,
//!    force-target grasping and presence monitoring over a gripper port.
//! 5. [`produce`] — ripeness trend tracking and bruise detection built on
//!    settled-resistance statistics.
//! 6. [`sim`] — a deterministic object/gripper/sensor simulator that emits
//!    frame logs in the same format the ingestion layer reads; it is the
//!    ground-truth oracle for the test suites.
//! 7. [`cli`] — the command-line surface tying everything together.
//!
//! All numeric text output uses Rust's shortest round-trip float formatting,
//! so every emitted file reparses to bit-identical values.

pub mod calibration;
pub mod cli;
pub mod control;
pub mod fit;
pub mod framelog;
pub mod kvfile;
pub mod produce;
pub mod sim;
pub mod signal;

pub use calibration::{CalibrationProfile, LinearModel, OutputUnit};
pub use fit::{DecayFit, FitWindow};
pub use signal::{ActuationMark, DividerConfig, MarkKind, PixelBaseline, ResistanceTrace, SensorFrame};
