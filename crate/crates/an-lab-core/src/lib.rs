//! Artificial-noise (AN) jamming design for square M-QAM relays.
//!
//! A friendly jammer with a power budget wants to maximize the symbol error
//! rate of an untrusted amplify-and-forward relay that coherently detects
//! M-QAM. This crate provides:
//!
//! - [`qam`]: constellation geometry, Gaussian tail helper, coherent
//!   demodulation and minimum-distance detection;
//! - [`ser`]: closed-form symbol error rates under AN for a fixed channel,
//!   Rayleigh-averaged SER, Gaussian-AN baselines, and power-mixture
//!   averages;
//! - [`design`]: the two-point AN power optimizers (instantaneous and
//!   statistical CSI), phase-crossover thresholds, a grid oracle, and
//!   budget-sweep region classification;
//! - [`sim`]: a seeded, shard-deterministic Monte Carlo simulator that
//!   cross-checks every closed form.
//!
//! All numerics are generic over the scalar type through [`Real`]
//! (implemented for `f32` and `f64`); the crate root re-exports `f64`
//! aliases for the common types since every published number here is
//! computed in `f64`.

pub mod design;
pub mod error;
pub mod qam;
mod quad;
pub mod scalar;
pub mod ser;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Real;

/// `f64` constellation description.
pub type Constellation = qam::Constellation<f64>;
/// `f64` channel pair (source-relay `h`, jammer-relay `g`).
pub type ChannelRealization = qam::ChannelRealization<f64>;
/// `f64` receiver-noise description.
pub type NoiseModel = qam::NoiseModel<f64>;
/// `f64` fixed-channel evaluation context.
pub type InstantaneousContext = ser::InstantaneousContext<f64>;
/// `f64` Rayleigh channel statistics.
pub type ChannelStats = ser::ChannelStats<f64>;
/// `f64` statistical-CSI evaluation context.
pub type StatisticalContext = ser::StatisticalContext<f64>;
/// `f64` two-point AN power law.
pub type TwoPointPowerLaw = design::TwoPointPowerLaw<f64>;
/// `f64` optimizer report.
pub type DesignReport = design::DesignReport<f64>;
/// `f64` full instantaneous design (law plus absolute phases).
pub type AnDesign = design::AnDesign<f64>;
/// `f64` grid-oracle solution.
pub type GridSolution = design::GridSolution<f64>;
/// `f64` phase-threshold outcome.
pub type PhaseThreshold = design::PhaseThreshold<f64>;
/// `f64` AN symbol source for the simulator.
pub type AnGenerator = sim::AnGenerator<f64>;
