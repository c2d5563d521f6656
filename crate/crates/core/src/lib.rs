//! Simulation of the two-pulse Bell-state-measurement statistics behind
//! measurement-device-independent quantum key distribution.
//!
//! Two photon-number-diagonal pulses travel through linear lossy channels to
//! an untrusted relay, interfere on a 50:50 beam-splitter and hit four
//! threshold detectors with dark counts. This crate computes the observable
//! gains and error rates of that arrangement in closed form, bounds the
//! single-photon-pair yield and phase error with a three-intensity decoy
//! analysis, and evaluates the resulting secret key rate.
//!
//! The pipeline, bottom to top:
//!
//! * [`sources`] — truncated photon-number distributions (vacuum, coherent,
//!   heralded and sub-Poissonian heralded families).
//! * [`channel`] — binomial photon deletion at transmittance `eta`, with
//!   detector efficiency folded into the channel.
//! * [`detector`] — threshold detectors, dark counts, and the two-fold
//!   success-event logic.
//! * [`conditionals`] — closed-form success-event probabilities for
//!   `k1`/`k2`-photon pulses in all eight same-basis polarization pairs.
//! * [`oracle`] — an independent brute-force Fock-space expansion used to
//!   verify every closed form; shares nothing with [`conditionals`] beyond
//!   the polarization type and the single-pair click formula.
//! * [`gains`] — per-source-pair gains `S` and error rates `E` in both bases.
//! * [`decoy`] — three-intensity decoy bounds, infinite-decoy references and
//!   the final key rate.
//!
//! All numerics are generic over the scalar type through [`Real`]; `f64` is
//! the intended precision and the one the stated tolerances refer to.

pub mod channel;
pub mod conditionals;
pub mod decoy;
pub mod detector;
pub mod error;
pub mod gains;
pub mod oracle;
pub mod sources;

use std::fmt::Debug;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Scalar type the whole model is generic over: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + NumAssign + Debug + Send + Sync + 'static {}

impl<T> Real for T where T: Float + FromPrimitive + NumAssign + Debug + Send + Sync + 'static {}

pub use error::{ModelError, Result};

// Concrete `f64` aliases for the common entry points.
pub type PhotonNumberDistribution64 = sources::PhotonNumberDistribution<f64>;
pub type SourceSpec64 = sources::SourceSpec<f64>;
pub type ChannelParams64 = channel::ChannelParams<f64>;
pub type ConditionalTable64 = conditionals::ConditionalTable<f64>;
pub type FockAmplitudeMap64 = oracle::FockAmplitudeMap<f64>;
pub type SourcePairContext64 = gains::SourcePairContext<f64>;
pub type BasisStatistics64 = gains::BasisStatistics<f64>;
pub type ThreeIntensityConfig64 = decoy::ThreeIntensityConfig<f64>;
pub type GainTable64 = decoy::GainTable<f64>;
pub type DecoyBounds64 = decoy::DecoyBounds<f64>;
