//! Observable statistics of one source pair: gains, raw error rates and
//! alignment-adjusted error rates in both bases.
//!
//! Inputs are the post-loss photon-number distributions of the two pulses.
//! Gains average the four equiprobable polarization pairs of a basis over
//! the four success events; the wrong-bit subset of those events forms the
//! raw error rate, and optical misalignment flips a fraction `E_d` of the
//! otherwise-correct class: `E = E_d (1 - 2 E~) + E~`.

use crate::conditionals::{
    orientation_index, success_index, Basis, ConditionalTable, Polarization,
};
use crate::detector::{check_dark_rate, EventPair, SUCCESS_EVENTS};
use crate::error::{ModelError, Result};
use crate::sources::{check_probability, PhotonNumberDistribution};
use crate::Real;

/// A source pair as seen by the relay: both pulses already propagated
/// through their lossy arms.
#[derive(Clone, Debug)]
pub struct SourcePairContext<T> {
    pub dist_a: PhotonNumberDistribution<T>,
    pub dist_b: PhotonNumberDistribution<T>,
    pub dark_rate: T,
    pub misalignment: T,
}

impl<T: Real> SourcePairContext<T> {
    pub fn new(
        dist_a: PhotonNumberDistribution<T>,
        dist_b: PhotonNumberDistribution<T>,
        dark_rate: T,
        misalignment: T,
    ) -> Result<Self> {
        check_dark_rate(dark_rate)?;
        check_probability("misalignment", misalignment)?;
        Ok(Self {
            dist_a,
            dist_b,
            dark_rate,
            misalignment,
        })
    }

    fn kernel(&self) -> Result<ConditionalTable<T>> {
        ConditionalTable::new(self.dark_rate, self.dist_a.cutoff(), self.dist_b.cutoff())
    }

    fn check_kernel(&self, kernel: &ConditionalTable<T>) -> Result<()> {
        if kernel.dark_rate() != self.dark_rate {
            return Err(ModelError::KernelDarkRateMismatch {
                table: kernel.dark_rate().to_f64().unwrap_or(f64::NAN),
                context: self.dark_rate.to_f64().unwrap_or(f64::NAN),
            });
        }
        if kernel.max_k1() < self.dist_a.cutoff() || kernel.max_k2() < self.dist_b.cutoff() {
            return Err(ModelError::KernelTooSmall {
                max_k1: kernel.max_k1(),
                max_k2: kernel.max_k2(),
                k1: self.dist_a.cutoff(),
                k2: self.dist_b.cutoff(),
            });
        }
        Ok(())
    }
}

/// Per-basis observables of one source pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisStatistics<T> {
    pub basis: Basis,
    /// Gain `S`: success probability per pulse pair.
    pub gain: T,
    /// Raw error-weighted gain `E~ * S`; well-defined even at zero gain.
    pub error_gain: T,
    /// Alignment-adjusted error-weighted gain `E * S`.
    pub adjusted_error_gain: T,
    /// Raw error rate `E~`. `None` marks the undefined 0/0 case at zero gain.
    pub raw_error: Option<T>,
    /// Alignment-adjusted error rate `E`.
    pub adjusted_error: Option<T>,
}

/// `E = E_d (1 - 2 E~) + E~`. Misalignment only flips the error-free class;
/// the wrong-bit class is already random, hence the fixed point at 1/2.
pub fn alignment_adjust<T: Real>(raw_error: T, misalignment: T) -> T {
    misalignment * (T::one() - (raw_error + raw_error)) + raw_error
}

/// Event probability for one polarization pair of mixed photon-number
/// sources: `q = sum_(k1,k2) f_(k1) f_(k2) p^(alpha beta)(k1 k2)`.
/// Truncation error is bounded by the distributions' tail masses.
pub fn q_event<T: Real>(
    ctx: &SourcePairContext<T>,
    alpha: Polarization,
    beta: Polarization,
    event: EventPair,
) -> Result<T> {
    let kernel = ctx.kernel()?;
    q_event_with(ctx, &kernel, alpha, beta, event)
}

/// As [`q_event`], reusing a prebuilt conditional table.
pub fn q_event_with<T: Real>(
    ctx: &SourcePairContext<T>,
    kernel: &ConditionalTable<T>,
    alpha: Polarization,
    beta: Polarization,
    event: EventPair,
) -> Result<T> {
    ctx.check_kernel(kernel)?;
    let oi = orientation_index(alpha, beta).ok_or(ModelError::MixedBasisPair(alpha, beta))?;
    let ei = success_index(event).ok_or_else(|| {
        let (i, j) = event.detectors();
        ModelError::NotSuccessEvent { i, j }
    })?;
    let mut acc = T::zero();
    for (k1, &f1) in ctx.dist_a.probs().iter().enumerate() {
        if f1 == T::zero() {
            continue;
        }
        let mut row = T::zero();
        for (k2, &f2) in ctx.dist_b.probs().iter().enumerate() {
            row += f2 * kernel.value(oi, ei, k1, k2);
        }
        acc += f1 * row;
    }
    Ok(acc)
}

/// Z-basis gain and error rates of the pair.
pub fn z_basis_statistics<T: Real>(ctx: &SourcePairContext<T>) -> Result<BasisStatistics<T>> {
    let kernel = ctx.kernel()?;
    basis_statistics_with(ctx, &kernel, Basis::Z)
}

/// X-basis gain and error rates of the pair.
pub fn x_basis_statistics<T: Real>(ctx: &SourcePairContext<T>) -> Result<BasisStatistics<T>> {
    let kernel = ctx.kernel()?;
    basis_statistics_with(ctx, &kernel, Basis::X)
}

/// Whether a success event records a wrong bit for this polarization pair.
///
/// Z basis: equal polarizations are always wrong. X basis: equal
/// polarizations are wrong on the Psi- events (1,4)/(2,3), orthogonal ones
/// on the Phi+ events (1,2)/(3,4).
fn is_error_class(alpha: Polarization, beta: Polarization, event: EventPair) -> bool {
    let phi_plus_event = matches!(event.detectors(), (1, 2) | (3, 4));
    match alpha.basis() {
        Basis::Z => alpha == beta,
        Basis::X => {
            if alpha == beta {
                !phi_plus_event
            } else {
                phi_plus_event
            }
        }
    }
}

/// Basis statistics reusing a prebuilt conditional table.
pub fn basis_statistics_with<T: Real>(
    ctx: &SourcePairContext<T>,
    kernel: &ConditionalTable<T>,
    basis: Basis,
) -> Result<BasisStatistics<T>> {
    let mut total = T::zero();
    let mut wrong = T::zero();
    for (alpha, beta) in basis.pairs() {
        for event in SUCCESS_EVENTS {
            let q = q_event_with(ctx, kernel, alpha, beta, event)?;
            total += q;
            if is_error_class(alpha, beta, event) {
                wrong += q;
            }
        }
    }
    let quarter = T::from_f64(0.25).unwrap();
    let gain = quarter * total;
    let error_gain = quarter * wrong;
    let e_d = ctx.misalignment;
    let adjusted_error_gain = e_d * (gain - (error_gain + error_gain)) + error_gain;
    let raw_error = (gain > T::zero()).then(|| error_gain / gain);
    let adjusted_error = raw_error.map(|e| alignment_adjust(e, e_d));
    Ok(BasisStatistics {
        basis,
        gain,
        error_gain,
        adjusted_error_gain,
        raw_error,
        adjusted_error,
    })
}
