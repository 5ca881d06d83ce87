//! Simulation and analysis of RIS-aided uplink control: channel model,
//! codebooks, the estimation and beam-sweeping paradigms, frame timing,
//! control-packet reliability and the Monte Carlo engine.

// negated comparisons are used on purpose so that NaN fails validation
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bsw;
pub mod codebook;
pub mod control;
pub mod engine;
pub mod error;
mod noise;
pub mod oce;
pub mod scenario;
pub mod timing;
pub mod units;

pub use bsw::{Bsw, BswErrorKind, BswOutcome, FrameKind};
pub use codebook::{Codebook, CodebookKind, Configuration};
pub use control::{BitFields, Destination, FrontierPoint, Packet, PacketBudget};
pub use engine::{
    Calibration, Experiment, ExperimentConfig, ExperimentSummary, ParadigmOutcome, TrialResult,
};
pub use error::{Error, Result};
pub use noise::complex_gaussian;
pub use oce::{AeMode, Oce, OceOutcome};
pub use scenario::{ChannelRealization, Geometry, RadioParams, Scenario, UeRegion, Vec3};
pub use timing::{CcKind, FrameParams, FrameTiming, Paradigm};
