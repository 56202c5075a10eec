//! Sparse neuronal-assembly dynamics for speech.
//!
//! Two pipelines built on the same substrate of winner-take-all areas with
//! local plasticity:
//!
//! * **Segmentation** — probabilistically binarised mel frames drive a frozen
//!   two-level refractory hierarchy; peaks in the assembly change signal mark
//!   phone- and word-boundary hypotheses.
//! * **Classification** — population-coded MFCC frames drive a bank of
//!   per-class recurrent areas trained with Hebbian/ABS plasticity; a
//!   resonance score over the assembly trajectory reads out the label.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod area;
pub mod audio;
pub mod classify;
pub mod cli;
pub mod config;
pub mod corpus;
pub mod encoding;
pub mod error;
pub mod eval;
pub mod features;
pub mod seeds;
pub mod segmentation;
pub mod synth;
pub mod tuner;

pub use area::{Area, AreaConfig, Assembly, DriveVector, PlasticityRule, SpikeFrame};
pub use error::{Error, Result};
