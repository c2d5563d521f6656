//! Error type shared by every module of the model.

use thiserror::Error;

use crate::conditionals::Polarization;

/// Anything the model can reject. Payloads are reported in `f64` regardless
/// of the scalar the computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("intensity must be non-negative, got {0}")]
    NegativeIntensity(f64),

    #[error("{name} must lie in [0, 1], got {value}")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("dark rate must lie in [0, 1), got {0}")]
    DarkRateOutOfRange(f64),

    #[error("degenerate source: the trigger never clicks, all post-selected mass is zero")]
    DegenerateSource,

    #[error("photon-number tail {tail} exceeds tolerance {tolerance} at the hard cutoff ceiling")]
    TailToleranceExceeded { tail: f64, tolerance: f64 },

    #[error("transmittance must lie in [0, 1], got {0}")]
    TransmittanceOutOfRange(f64),

    #[error("channel loss must be non-negative, got {0} dB")]
    NegativeLoss(f64),

    #[error("detector efficiency must lie in (0, 1], got {0}")]
    DetectorEfficiencyOutOfRange(f64),

    #[error("detector pair ({i}, {j}) is invalid: indices must satisfy 1 <= i < j <= 4")]
    InvalidEventPair { i: u8, j: u8 },

    #[error("event ({i}, {j}) is not a success event")]
    NotSuccessEvent { i: u8, j: u8 },

    #[error("polarization pair ({0:?}, {1:?}) mixes bases; only same-basis pairs are modeled")]
    MixedBasisPair(Polarization, Polarization),

    #[error("output state is not normalized: |psi|^2 = {0}")]
    UnnormalizedState(f64),

    #[error("total photon number {total} exceeds the oracle ceiling {ceiling}")]
    OracleCapacity { total: usize, ceiling: usize },

    #[error(
        "conditional table built for dark rate {table} cannot serve context dark rate {context}"
    )]
    KernelDarkRateMismatch { table: f64, context: f64 },

    #[error(
        "conditional table covers photon numbers up to ({max_k1}, {max_k2}), needed ({k1}, {k2})"
    )]
    KernelTooSmall {
        max_k1: usize,
        max_k2: usize,
        k1: usize,
        k2: usize,
    },

    #[error("binary entropy argument must lie in [0, 1], got {0}")]
    EntropyDomain(f64),

    #[error(
        "decoy intensities must satisfy 0 < mu < mu_prime, got mu = {mu}, mu_prime = {mu_prime}"
    )]
    InvalidIntensityOrder { mu: f64, mu_prime: f64 },

    #[error("single-photon yield bound is ill-conditioned: denominator {denominator}")]
    IllConditionedDecoy { denominator: f64 },

    #[error("phase-error bound undefined: single-photon yield lower bound is {0}")]
    UndefinedBound(f64),

    #[error("error rate undefined: gain is zero")]
    UndefinedErrorRate,

    #[error("search grid is empty")]
    EmptyGrid,
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
