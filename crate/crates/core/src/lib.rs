//! Pedestrian trajectory extraction from image sequences.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`imaging`] and [`detection`]: background subtraction, morphological
//!    cleanup, 8-connected object labeling and per-object descriptors,
//!    collected into a descriptor database.
//! 2. [`tracking`] and [`calibration`]: descriptor-voting association between
//!    slices, gap-tolerant tracing into NTXY records (pedestrian number, time,
//!    x, y) and the affine image-to-world mapping.
//! 3. [`metrics`]: speeds, headways, flow rate and area module over a
//!    pedestrian trap.
//!
//! [`synth`] renders scenes with known ground truth and scores tracker
//! output against it.

pub mod imaging;
pub mod detection;
pub mod tracking;
pub mod calibration;
pub mod metrics;
pub mod synth;
